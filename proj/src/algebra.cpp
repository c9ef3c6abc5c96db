#include "qca1d/algebra.hpp"

#include <algorithm>
#include <numeric>

namespace qca1d {

namespace {

Mat unvec(const Vec& v, long d) {
  return Eigen::Map<const Mat>(v.data(), d, d);
}

Vec to_vec(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

// Left singular vectors and singular values of the stacked vectorized family,
// via the eigendecomposition of the Gram matrix.  (BDCSVD of the tall stacked
// matrix mis-spans degenerate clusters for complex inputs, so the Gram route
// is used instead; left vectors are recovered as stacked * v / sigma, which
// spans the column space by construction.)
std::pair<Mat, Eigen::VectorXd> span_svd(const std::vector<Mat>& span) {
  require(!span.empty(), ErrorKind::InvalidInput, "empty span");
  const long d = span[0].rows();
  const long n = static_cast<long>(span.size());
  Mat stacked(d * d, n);
  for (long i = 0; i < n; ++i) {
    require(span[i].rows() == d && span[i].cols() == d, ErrorKind::InvalidInput,
            "span: mixed dimensions");
    stacked.col(i) = to_vec(span[i]);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(stacked.adjoint() * stacked);
  const double lam_max = std::max(es.eigenvalues()(n - 1), 0.0);
  // Gram eigenvalues resolve squared singular values only down to float noise
  // relative to the largest; anything below that floor is an exact zero.
  const double lam_floor = std::max(1e-13 * lam_max, 1e-28);
  Eigen::VectorXd sv(n);
  Mat u = Mat::Zero(d * d, n);
  for (long i = 0; i < n; ++i) {
    // Descending order; eigenvalues are squared singular values.
    const long j = n - 1 - i;
    const double lam = es.eigenvalues()(j);
    sv(i) = (lam > lam_floor) ? std::sqrt(lam) : 0.0;
    if (sv(i) > 0.0) u.col(i) = stacked * es.eigenvectors().col(j) / sv(i);
  }
  // One re-orthonormalization pass stabilizes vectors from small or clustered
  // singular values.
  for (long i = 0; i < n; ++i) {
    if (sv(i) <= 0.0) continue;
    for (long k = 0; k < i; ++k)
      if (sv(k) > 0.0) u.col(i) -= u.col(k).dot(u.col(i)) * u.col(k);
    double nn = u.col(i).norm();
    if (nn > 1e-14) u.col(i) /= nn;
  }
  return {std::move(u), std::move(sv)};
}

}  // namespace

std::vector<Mat> orthonormalize_span(const std::vector<Mat>& span,
                                     double abs_tol) {
  std::vector<Mat> normalized;
  for (const Mat& m : span) {
    double n = m.norm();
    if (n > 1e-14) normalized.push_back(m / n);
  }
  if (normalized.empty()) return {};
  auto [u, sv] = span_svd(normalized);
  const long d = span[0].rows();
  std::vector<Mat> out;
  for (long i = 0; i < sv.size(); ++i)
    if (sv(i) > abs_tol) out.push_back(unvec(u.col(i), d));
  return out;
}

std::vector<Mat> orthonormalize_clustered(const std::vector<Mat>& span,
                                          double keep_threshold, double band_lo,
                                          double band_hi) {
  auto [u, sv] = span_svd(span);
  const long d = span[0].rows();
  std::vector<Mat> out;
  for (long i = 0; i < sv.size(); ++i) {
    if (sv(i) > band_lo && sv(i) < band_hi)
      throw Error(ErrorKind::Numerical,
                  "rank ambiguity: singular value " + std::to_string(sv(i)) +
                      " inside (" + std::to_string(band_lo) + ", " +
                      std::to_string(band_hi) + ")");
    if (sv(i) > keep_threshold) out.push_back(unvec(u.col(i), d));
  }
  return out;
}

MatrixAlgebra MatrixAlgebra::from_span(std::vector<Mat> span, double rank_tol,
                                       bool validate, double closure_tol) {
  MatrixAlgebra a;
  a.basis_ = orthonormalize_span(span, rank_tol);
  require(!a.basis_.empty(), ErrorKind::InvalidInput,
          "from_span: span is numerically empty");
  if (validate) {
    auto v = a.validate();
    double worst = std::max({v.unit_defect, v.star_defect, v.mult_defect});
    require(worst <= closure_tol, ErrorKind::Numerical,
            "algebra validation failed: defect " + std::to_string(worst));
  }
  return a;
}

MatrixAlgebra MatrixAlgebra::from_orthonormal_basis(std::vector<Mat> basis) {
  MatrixAlgebra a;
  a.basis_ = std::move(basis);
  return a;
}

Mat MatrixAlgebra::project(const Mat& x) const {
  Mat out = Mat::Zero(ambient_dim(), ambient_dim());
  for (const Mat& b : basis_) out += hs_inner(b, x) * b;
  return out;
}

AlgebraValidation MatrixAlgebra::validate() const {
  AlgebraValidation v;
  const long D = ambient_dim();
  Mat id = Mat::Identity(D, D);
  v.unit_defect = (id - project(id)).norm() / std::sqrt(double(D));
  for (const Mat& b : basis_) {
    Mat bs = b.adjoint();
    v.star_defect = std::max(v.star_defect, (bs - project(bs)).norm());
  }
  const long m = dim_algebra();
  // Full pair check up to 256 products, deterministic sample beyond that.
  std::vector<std::pair<long, long>> pairs;
  if (m * m <= 256) {
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < m; ++j) pairs.emplace_back(i, j);
  } else {
    Rng rng(12345);
    std::uniform_int_distribution<long> pick(0, m - 1);
    for (int k = 0; k < 256; ++k) pairs.emplace_back(pick(rng), pick(rng));
  }
  for (auto [i, j] : pairs) {
    Mat prod = basis_[i] * basis_[j];
    double n = prod.norm();
    if (n < 1e-14) continue;
    v.mult_defect = std::max(v.mult_defect, (prod - project(prod)).norm() / n);
  }
  return v;
}

Mat MatrixAlgebra::random_element(Rng& rng) const {
  std::normal_distribution<double> g;
  Mat out = Mat::Zero(ambient_dim(), ambient_dim());
  for (const Mat& b : basis_) out += Complex(g(rng), g(rng)) * b;
  return out;
}

Mat MatrixAlgebra::random_self_adjoint(Rng& rng) const {
  Mat x = random_element(rng);
  Mat h = (x + x.adjoint()) / 2.0;
  double n = op_norm(h);
  return n > 0 ? Mat(h / n) : h;
}

Mat MatrixAlgebra::random_unitary_in(Rng& rng) const {
  // Polar part of a generic element; stays in the algebra.
  Mat x = random_element(rng);
  Eigen::BDCSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

MatrixAlgebra from_generators(const std::vector<Mat>& gens, double rank_tol) {
  require(!gens.empty(), ErrorKind::InvalidInput, "from_generators: no generators");
  const long d = gens[0].rows();
  for (const Mat& g : gens)
    require(g.rows() == d && g.cols() == d, ErrorKind::InvalidInput,
            "from_generators: dimension mismatch");
  std::vector<Mat> span;
  span.push_back(Mat::Identity(d, d));
  for (const Mat& g : gens) {
    span.push_back(g);
    span.push_back(g.adjoint());
  }
  std::vector<Mat> onb = orthonormalize_span(span, rank_tol);
  while (true) {
    std::vector<Mat> grown = onb;
    for (const Mat& a : onb) {
      grown.push_back(a.adjoint());
      for (const Mat& b : onb) grown.push_back(a * b);
    }
    std::vector<Mat> next = orthonormalize_span(grown, rank_tol);
    if (next.size() == onb.size()) break;
    onb = std::move(next);
  }
  return MatrixAlgebra::from_orthonormal_basis(std::move(onb));
}

MatrixAlgebra commutant(const MatrixAlgebra& a, double rank_tol) {
  const long d = a.ambient_dim();
  require(d <= 32, ErrorKind::InvalidInput,
          "full-ambient commutant limited to D <= 32; use relative_commutant");
  const long d2 = d * d;
  Mat m = Mat::Zero(d2, d2);
  Mat id = Mat::Identity(d, d);
  for (const Mat& g : a.basis()) {
    // vec([g, x]) = (I (x) g - g^T (x) I) vec(x), column-major.
    Mat k = kron(id, g) - kron(g.transpose(), id);
    m += k.adjoint() * k;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  std::vector<Mat> basis;
  for (long i = 0; i < d2; ++i)
    if (es.eigenvalues()(i) < rank_tol * rank_tol)
      basis.push_back(unvec(es.eigenvectors().col(i), d));
  require(!basis.empty(), ErrorKind::Numerical, "commutant: empty result");
  return MatrixAlgebra::from_orthonormal_basis(std::move(basis));
}

MatrixAlgebra relative_commutant(const MatrixAlgebra& a,
                                 const MatrixAlgebra& ambient,
                                 double rank_tol) {
  const long m = ambient.dim_algebra();
  Mat gram = Mat::Zero(m, m);
  std::vector<std::vector<Mat>> comms(m);
  for (long j = 0; j < m; ++j)
    for (const Mat& g : a.basis())
      comms[j].push_back(ambient.basis()[j] * g - g * ambient.basis()[j]);
  for (long j = 0; j < m; ++j)
    for (long l = j; l < m; ++l) {
      Complex s = 0;
      for (size_t i = 0; i < comms[j].size(); ++i)
        s += hs_inner(comms[j][i], comms[l][i]);
      gram(j, l) = s;
      gram(l, j) = std::conj(s);
    }
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  std::vector<Mat> basis;
  for (long i = 0; i < m; ++i) {
    if (es.eigenvalues()(i) < rank_tol * rank_tol) {
      Mat x = Mat::Zero(a.ambient_dim(), a.ambient_dim());
      for (long j = 0; j < m; ++j) x += es.eigenvectors()(j, i) * ambient.basis()[j];
      basis.push_back(x);
    }
  }
  require(!basis.empty(), ErrorKind::Numerical, "relative_commutant: empty result");
  return MatrixAlgebra::from_orthonormal_basis(std::move(basis));
}

Mat twirl(const MatrixAlgebra& a, const Mat& x) {
  return commutant(a).project(x);
}

double subspace_distance(const std::vector<Mat>& a_onb,
                         const std::vector<Mat>& b_onb) {
  if (a_onb.empty() || b_onb.empty())
    return (a_onb.empty() && b_onb.empty()) ? 0.0 : 1.0;
  // Both inputs are HS-orthonormal, so the projection residual of a_j onto
  // span(b) is sqrt(1 - ||column j of the cross Gram||^2); one matrix product
  // instead of a double loop of inner products.
  const long da = static_cast<long>(a_onb.size());
  const long db = static_cast<long>(b_onb.size());
  const long v = static_cast<long>(a_onb[0].size());
  Mat sa(v, da), sb(v, db);
  for (long i = 0; i < da; ++i)
    sa.col(i) = Eigen::Map<const Vec>(a_onb[i].data(), v);
  for (long j = 0; j < db; ++j)
    sb.col(j) = Eigen::Map<const Vec>(b_onb[j].data(), v);
  Mat cross = sa.adjoint() * sb;
  double worst = 0.0;
  for (long i = 0; i < da; ++i)
    worst = std::max(worst, 1.0 - cross.row(i).squaredNorm());
  for (long j = 0; j < db; ++j)
    worst = std::max(worst, 1.0 - cross.col(j).squaredNorm());
  return std::sqrt(std::max(worst, 0.0));
}

double subspace_distance(const MatrixAlgebra& a, const MatrixAlgebra& b) {
  return subspace_distance(a.basis(), b.basis());
}

namespace {

// Clusters sorted eigenvalues at gaps larger than `gap`; returns cluster
// index per eigenvalue.
std::vector<int> cluster_sorted(const Eigen::VectorXd& vals, double gap) {
  std::vector<int> id(vals.size());
  int c = 0;
  for (long i = 0; i < vals.size(); ++i) {
    if (i > 0 && vals(i) - vals(i - 1) > gap) ++c;
    id[i] = c;
  }
  return id;
}

struct FactorAttempt {
  bool ok = false;
  Block block;
  std::string why;
};

// Builds matrix units of one (approximately) simple block spanned by `onb`,
// restricted under central projection z (exact ambient projection).  All
// outputs are exact up to float rounding.
FactorAttempt build_factor(const std::vector<Mat>& onb, const Mat& z, long n,
                           double cluster_gap, Rng& rng) {
  FactorAttempt out;
  const long D = onb[0].rows();
  const long zrank = static_cast<long>(std::llround(z.real().trace()));
  if (n <= 0 || zrank % n != 0) {
    out.why = "central rank not divisible by block size";
    return out;
  }
  const long t = zrank / n;

  if (n == 1) {
    out.ok = true;
    out.block.n = 1;
    out.block.units = {z};
    out.block.central_projection = z;
    return out;
  }

  // Random self-adjoint block element, shifted so the block spectrum is
  // separated from the kernel of z.
  std::normal_distribution<double> g;
  Mat x = Mat::Zero(D, D);
  for (const Mat& b : onb) x += Complex(g(rng), g(rng)) * b;
  Mat h = z * ((x + x.adjoint()) / 2.0) * z;
  double hn = op_norm(h);
  if (hn < 1e-12) {
    out.why = "degenerate random element";
    return out;
  }
  h = h / hn + 2.0 * z;

  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  std::vector<long> kept;
  for (long i = 0; i < D; ++i)
    if (es.eigenvalues()(i) > 0.5) kept.push_back(i);
  if (static_cast<long>(kept.size()) != zrank) {
    out.why = "spectral split from kernel failed";
    return out;
  }
  Eigen::VectorXd vals(kept.size());
  for (size_t i = 0; i < kept.size(); ++i) vals(i) = es.eigenvalues()(kept[i]);
  auto cid = cluster_sorted(vals, cluster_gap);
  int nclusters = cid.empty() ? 0 : cid.back() + 1;
  if (nclusters != n) {
    out.why = "cluster count " + std::to_string(nclusters) + " != block size " +
              std::to_string(n);
    return out;
  }
  std::vector<Mat> p(n, Mat::Zero(D, D));
  std::vector<long> ranks(n, 0);
  for (size_t i = 0; i < kept.size(); ++i) {
    const auto v = es.eigenvectors().col(kept[i]);
    p[cid[i]] += v * v.adjoint();
    ++ranks[cid[i]];
  }
  for (long i = 0; i < n; ++i)
    if (ranks[i] != t) {
      out.why = "unequal cluster ranks";
      return out;
    }

  // Partial isometries p_1 -> p_j from the polar part of p_1 a p_j.
  Mat a = Mat::Zero(D, D);
  for (const Mat& b : onb) a += Complex(g(rng), g(rng)) * b;
  std::vector<Mat> e1(n);  // e_{0j}
  e1[0] = p[0];
  for (long j = 1; j < n; ++j) {
    Mat w = p[0] * a * p[j];
    Eigen::BDCSVD<Mat> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    long rank = 0;
    for (long i = 0; i < sv.size(); ++i)
      if (sv(i) > 0.1 * sv(0)) ++rank;
    if (rank != t || sv(0) < 1e-10) {
      out.why = "rank-deficient intertwiner";
      return out;
    }
    e1[j] = svd.matrixU().leftCols(t) * svd.matrixV().leftCols(t).adjoint();
  }

  out.block.n = n;
  out.block.central_projection = z;
  out.block.units.resize(n * n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      if (i == 0)
        out.block.units[j] = e1[j];
      else
        out.block.units[i * n + j] = e1[i].adjoint() * e1[j];
    }
  // Diagonal units snap exactly to the cluster projections.
  for (long i = 0; i < n; ++i) out.block.units[i * n + i] = p[i];
  out.ok = true;
  return out;
}

// Approximate center of the span: nullspace of the commutator Gram within
// the span's own coordinates.
std::vector<Mat> approximate_center(const std::vector<Mat>& onb,
                                    double rank_tol) {
  const long m = static_cast<long>(onb.size());
  const long D = onb[0].rows();
  Mat gram = Mat::Zero(m, m);
  std::vector<std::vector<Mat>> comms(m);
  for (long j = 0; j < m; ++j)
    for (long i = 0; i < m; ++i)
      comms[j].push_back(onb[j] * onb[i] - onb[i] * onb[j]);
  for (long j = 0; j < m; ++j)
    for (long l = j; l < m; ++l) {
      Complex s = 0;
      for (long i = 0; i < m; ++i) s += hs_inner(comms[j][i], comms[l][i]);
      gram(j, l) = s;
      gram(l, j) = std::conj(s);
    }
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  std::vector<Mat> center;
  for (long i = 0; i < m; ++i)
    if (es.eigenvalues()(i) < rank_tol * rank_tol) {
      Mat x = Mat::Zero(D, D);
      for (long j = 0; j < m; ++j) x += es.eigenvectors()(j, i) * onb[j];
      center.push_back(x);
    }
  return center;
}

}  // namespace

BlockStructure build_block_structure(const std::vector<Mat>& onb,
                                     double cluster_gap, std::uint64_t seed,
                                     int max_retries) {
  require(!onb.empty(), ErrorKind::InvalidInput, "empty basis");
  const long D = onb[0].rows();
  const long m = static_cast<long>(onb.size());
  Rng rng(seed);
  std::string last_why;

  // Fast path: single simple block of size sqrt(m).
  long n_single = static_cast<long>(std::llround(std::sqrt(double(m))));
  if (n_single * n_single == m) {
    for (int attempt = 0; attempt < max_retries; ++attempt) {
      auto fa = build_factor(onb, Mat::Identity(D, D), n_single, cluster_gap, rng);
      if (fa.ok) {
        BlockStructure s;
        s.blocks.push_back(std::move(fa.block));
        if (subspace_distance(onb, orthonormalize_span(units_span(s), 1e-8)) <
            0.25)
          return s;
        last_why = "single-block units do not span the input";
      } else {
        last_why = fa.why;
      }
    }
  }

  // General path: split along the (approximate) center first.
  std::vector<Mat> center =
      approximate_center(onb, std::max(cluster_gap * 0.5, 1e-7));
  require(!center.empty(), ErrorKind::Numerical,
          "block structure: no central elements found (" + last_why + ")");

  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::normal_distribution<double> g;
    Mat zc = Mat::Zero(D, D);
    for (const Mat& c : center) zc += g(rng) * c;
    Mat h = (zc + zc.adjoint()) / 2.0;
    double hn = op_norm(h);
    if (hn < 1e-12) continue;
    h /= hn;
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    auto cid = cluster_sorted(es.eigenvalues(), cluster_gap);
    int nblocks = cid.back() + 1;
    std::vector<Mat> zs(nblocks, Mat::Zero(D, D));
    for (long i = 0; i < D; ++i) {
      const auto v = es.eigenvectors().col(i);
      zs[cid[i]] += v * v.adjoint();
    }
    BlockStructure s;
    bool ok = true;
    long dim_sum = 0;
    for (const Mat& z : zs) {
      // Compress the span into this central block.
      std::vector<Mat> blockspan;
      for (const Mat& b : onb) blockspan.push_back(z * b * z);
      std::vector<Mat> bonb =
          orthonormalize_span(blockspan, 0.3);
      long n = static_cast<long>(std::llround(std::sqrt(double(bonb.size()))));
      auto fa = build_factor(bonb, z, n, cluster_gap, rng);
      if (!fa.ok || n * n != static_cast<long>(bonb.size())) {
        ok = false;
        last_why = fa.ok ? "non-square block dimension" : fa.why;
        break;
      }
      dim_sum += n * n;
      s.blocks.push_back(std::move(fa.block));
    }
    if (ok && dim_sum == m) return s;
    if (ok)
      last_why = "block dimensions sum to " + std::to_string(dim_sum) +
                 " != " + std::to_string(m);
  }
  throw Error(ErrorKind::Numerical,
              "block structure: could not resolve blocks after retries (" +
                  last_why + ")");
}

std::vector<Mat> units_span(const BlockStructure& s) {
  std::vector<Mat> out;
  for (const auto& b : s.blocks)
    for (const Mat& u : b.units) out.push_back(u);
  return out;
}

BlockStructure structure(const MatrixAlgebra& a, const StructureOptions& opts) {
  BlockStructure s = build_block_structure(a.basis(), opts.eigen_gap, opts.seed,
                                           opts.max_retries);
  require(s.dim() == a.dim_algebra(), ErrorKind::Numerical,
          "structure: block dimensions do not sum to algebra dimension");
  double dist = subspace_distance(a.basis(), orthonormalize_span(units_span(s)));
  require(dist <= 1e-8, ErrorKind::Numerical,
          "structure: matrix units deviate from the algebra by " +
              std::to_string(dist));
  return s;
}

MatrixAlgebra recover_exact_algebra(const std::vector<Mat>& s_onb,
                                    const SuperOp& q,
                                    const RecoverOptions& opts) {
  require(!s_onb.empty(), ErrorKind::InvalidInput, "recover: empty subspace");
  // Preconditions on (S, Q): idempotent and *-preserving, measured cheaply on
  // random probes.
  Rng rng(opts.seed);
  const long D = s_onb[0].rows();
  double idem = 0.0, star = 0.0;
  for (int k = 0; k < 4; ++k) {
    Mat x = random_matrix(rng, D, D);
    x /= x.norm();
    Mat qx = q.apply(x);
    idem = std::max(idem, (q.apply(qx) - qx).norm());
    star = std::max(star, (q.apply(x.adjoint()) - qx.adjoint()).norm());
  }
  require(idem <= 1e-8, ErrorKind::InvalidInput,
          "recover: Q is not idempotent (defect " + std::to_string(idem) + ")");
  require(star <= 1e-8, ErrorKind::InvalidInput,
          "recover: Q is not *-preserving");
  // Multiplicative closure of S under Q, sampled.
  double eps = 0.0;
  for (int k = 0; k < 8; ++k) {
    std::normal_distribution<double> g;
    Mat x = Mat::Zero(D, D), y = Mat::Zero(D, D);
    for (const Mat& b : s_onb) {
      x += Complex(g(rng), g(rng)) * b;
      y += Complex(g(rng), g(rng)) * b;
    }
    double nx = op_norm(x), ny = op_norm(y);
    if (nx < 1e-12 || ny < 1e-12) continue;
    Mat xy = x * y;
    eps = std::max(eps, op_norm(xy - q.apply(xy)) / (nx * ny));
  }
  require(eps <= 0.05 + 1e-12, ErrorKind::GateFailure,
          "recover: measured closure defect " + std::to_string(eps) +
              " outside recovery radius 0.05");

  BlockStructure s;
  try {
    s = build_block_structure(s_onb, opts.cluster_gap, opts.seed,
                              opts.max_retries);
  } catch (const Error& e) {
    throw Error(ErrorKind::Numerical,
                std::string("recover: outside recovery radius (") + e.what() +
                    ")");
  }
  require(s.dim() == static_cast<long>(s_onb.size()), ErrorKind::Numerical,
          "recover: outside recovery radius (block dims inconsistent)");
  MatrixAlgebra c = MatrixAlgebra::from_orthonormal_basis(
      orthonormalize_span(units_span(s), 1e-8));
  auto v = c.validate();
  double worst = std::max({v.unit_defect, v.star_defect, v.mult_defect});
  require(worst <= opts.validation_tol, ErrorKind::Numerical,
          "recovery failed: rebuilt algebra has defect " + std::to_string(worst));
  return c;
}

}  // namespace qca1d
