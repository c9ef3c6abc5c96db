#include "qca1d/superop.hpp"

#include <utility>
#include <variant>

namespace qca1d {

struct SuperOp::Node {
  enum class Kind {
    Identity,
    Zero,
    Projector,
    Conjugation,
    LeftMult,
    RightMult,
    Compose,
    LinComb,
    SignSeries,
  };
  Kind kind;
  long d = 0;
  std::vector<Mat> mats;  // projector basis, or single matrix
  std::vector<std::pair<Complex, SuperOp>> terms;
  SuperOp inner, outer;
  double term_tol = 1e-13;
  int max_terms = 200;
};

long SuperOp::dim() const {
  require(node_ != nullptr, ErrorKind::Numerical, "empty SuperOp");
  return node_->d;
}

Mat SuperOp::apply(const Mat& x) const {
  require(node_ != nullptr, ErrorKind::Numerical, "empty SuperOp");
  const auto& n = *node_;
  require(x.rows() == n.d && x.cols() == n.d, ErrorKind::InvalidInput,
          "SuperOp::apply: dimension mismatch");
  using K = SuperOp::Node::Kind;
  switch (n.kind) {
    case K::Identity:
      return x;
    case K::Zero:
      return Mat::Zero(n.d, n.d);
    case K::Projector: {
      Mat out = Mat::Zero(n.d, n.d);
      for (const Mat& b : n.mats) out += hs_inner(b, x) * b;
      return out;
    }
    case K::Conjugation:
      return n.mats[0] * x * n.mats[0].adjoint();
    case K::LeftMult:
      return n.mats[0] * x;
    case K::RightMult:
      return x * n.mats[0];
    case K::Compose:
      return n.outer.apply(n.inner.apply(x));
    case K::LinComb: {
      Mat out = Mat::Zero(n.d, n.d);
      for (const auto& [c, f] : n.terms) out += c * f.apply(x);
      return out;
    }
    case K::SignSeries: {
      // y = (X^2)^{-1/2} x via binomial series of (1+t)^{-1/2} at t = X^2 - I,
      // then return X y.
      const SuperOp& X = n.inner;
      Mat term = x;
      Mat acc = Mat::Zero(n.d, n.d);
      double coeff = 1.0;
      int k = 0;
      while (true) {
        acc += coeff * term;
        if (std::abs(coeff) * term.norm() < n.term_tol * std::max(1.0, x.norm()))
          break;
        if (++k > n.max_terms)
          throw Error(ErrorKind::Numerical,
                      "sign_series: binomial series did not converge within " +
                          std::to_string(n.max_terms) + " terms");
        // (1+t)^{-1/2} = sum_k c_k t^k with c_k = c_{k-1} * -(2k-1)/(2k).
        coeff *= -double(2 * k - 1) / double(2 * k);
        term = X.apply(X.apply(term)) - term;
      }
      return X.apply(acc);
    }
  }
  throw Error(ErrorKind::Numerical, "unreachable");
}

SuperOp SuperOp::identity(long d) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Identity;
  n->d = d;
  return SuperOp(std::move(n));
}

SuperOp SuperOp::zero(long d) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Zero;
  n->d = d;
  return SuperOp(std::move(n));
}

SuperOp SuperOp::projector(std::vector<Mat> onb) {
  require(!onb.empty(), ErrorKind::InvalidInput, "projector: empty basis");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Projector;
  n->d = onb[0].rows();
  n->mats = std::move(onb);
  return SuperOp(std::move(n));
}

SuperOp SuperOp::conjugation(Mat u) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Conjugation;
  n->d = u.rows();
  n->mats = {std::move(u)};
  return SuperOp(std::move(n));
}

SuperOp SuperOp::left_mult(Mat a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::LeftMult;
  n->d = a.rows();
  n->mats = {std::move(a)};
  return SuperOp(std::move(n));
}

SuperOp SuperOp::right_mult(Mat a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::RightMult;
  n->d = a.rows();
  n->mats = {std::move(a)};
  return SuperOp(std::move(n));
}

SuperOp SuperOp::compose(SuperOp outer, SuperOp inner) {
  require(outer.dim() == inner.dim(), ErrorKind::InvalidInput,
          "compose: dimension mismatch");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Compose;
  n->d = outer.dim();
  n->outer = std::move(outer);
  n->inner = std::move(inner);
  return SuperOp(std::move(n));
}

SuperOp SuperOp::lincomb(std::vector<std::pair<Complex, SuperOp>> terms) {
  require(!terms.empty(), ErrorKind::InvalidInput, "lincomb: no terms");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::LinComb;
  n->d = terms[0].second.dim();
  for (const auto& [c, f] : terms)
    require(f.dim() == n->d, ErrorKind::InvalidInput,
            "lincomb: dimension mismatch");
  n->terms = std::move(terms);
  return SuperOp(std::move(n));
}

SuperOp SuperOp::sign_series(SuperOp x, double term_tol, int max_terms) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::SignSeries;
  n->d = x.dim();
  n->inner = std::move(x);
  n->term_tol = term_tol;
  n->max_terms = max_terms;
  return SuperOp(std::move(n));
}

SuperOp SuperOp::adjoint() const {
  require(node_ != nullptr, ErrorKind::Numerical, "empty SuperOp");
  const auto& n = *node_;
  using K = Node::Kind;
  switch (n.kind) {
    case K::Identity:
    case K::Zero:
    case K::Projector:
      return *this;
    case K::Conjugation:
      return conjugation(n.mats[0].adjoint());
    case K::LeftMult:
      return left_mult(n.mats[0].adjoint());
    case K::RightMult:
      return right_mult(n.mats[0].adjoint());
    case K::Compose:
      return compose(n.inner.adjoint(), n.outer.adjoint());
    case K::LinComb: {
      std::vector<std::pair<Complex, SuperOp>> terms;
      for (const auto& [c, f] : n.terms)
        terms.emplace_back(std::conj(c), f.adjoint());
      return lincomb(std::move(terms));
    }
    case K::SignSeries:
      return sign_series(n.inner.adjoint(), n.term_tol, n.max_terms);
  }
  throw Error(ErrorKind::Numerical, "unreachable");
}

SuperOp SuperOp::operator+(const SuperOp& o) const {
  return lincomb({{Complex(1, 0), *this}, {Complex(1, 0), o}});
}

SuperOp SuperOp::operator-(const SuperOp& o) const {
  return lincomb({{Complex(1, 0), *this}, {Complex(-1, 0), o}});
}

SuperOp operator*(Complex c, const SuperOp& f) {
  return SuperOp::lincomb({{c, f}});
}

NormEstimate superop_norm(const SuperOp& f, double rel_tol, int max_iters,
                          int restarts, std::uint64_t seed) {
  const long d = f.dim();
  SuperOp fad = f.adjoint();
  NormEstimate best;
  Rng rng(seed);
  for (int r = 0; r < restarts; ++r) {
    Mat v = random_matrix(rng, d, d);
    v /= v.norm();
    double prev = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < max_iters; ++it) {
      // sigma read off ||F v|| directly so that near-zero operators are not
      // drowned by the float noise of the F†F product.
      Mat u = f.apply(v);
      double sigma = u.norm();
      if (sigma < 1e-300) {
        prev = 0.0;
        converged = true;
        break;
      }
      Mat w = fad.apply(u);
      double lam = w.norm();
      if (lam < 1e-300) {
        prev = sigma;
        converged = true;
        break;
      }
      v = w / lam;
      if (std::abs(sigma - prev) <= rel_tol * std::max(sigma, 1e-300)) {
        prev = sigma;
        converged = true;
        break;
      }
      prev = sigma;
    }
    if (prev > best.value || r == 0) {
      best.value = prev;
      best.iterations = it;
    }
    best.converged = best.converged || converged;
  }
  return best;
}

}  // namespace qca1d
