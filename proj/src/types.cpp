#include "qca1d/types.hpp"

#include <numeric>

namespace qca1d {

double op_norm(const Mat& a, double rel_tol, int max_iters) {
  if (a.size() == 0) return 0.0;
  const long n = a.cols();
  // Deterministic start vector; restart with a second fixed vector if the
  // first is (near) orthogonal to the top singular space.
  Rng rng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(n));
  double best = 0.0;
  for (int restart = 0; restart < 2; ++restart) {
    Vec v = Vec::NullaryExpr(n, [&](Eigen::Index) {
      std::normal_distribution<double> g;
      return Complex(g(rng), g(rng));
    });
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      Vec w = a.adjoint() * (a * v);
      double lam = w.norm();
      if (lam == 0.0) break;
      v = w / lam;
      double sigma = std::sqrt(lam);
      if (std::abs(sigma - prev) <= rel_tol * std::max(sigma, 1e-300)) {
        prev = sigma;
        break;
      }
      prev = sigma;
    }
    best = std::max(best, prev);
  }
  return best;
}

Mat random_matrix(Rng& rng, long rows, long cols) {
  std::normal_distribution<double> g;
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

Mat random_hermitian(Rng& rng, long dim) {
  Mat m = random_matrix(rng, dim, dim);
  Mat h = (m + m.adjoint()) / 2.0;
  double nrm = op_norm(h);
  if (nrm > 0) h /= nrm;
  return h;
}

Mat random_unitary(Rng& rng, long dim) {
  Mat m = random_matrix(rng, dim, dim);
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ() * Mat::Identity(dim, dim);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long i = 0; i < dim; ++i) {
    Complex d = r(i, i);
    double ad = std::abs(d);
    q.col(i) *= (ad > 0 ? d / ad : Complex(1, 0));
  }
  return q;
}

Rational::Rational(long long p, long long q) : num(p), den(q) {
  if (den == 0) throw Error(ErrorKind::Numerical, "Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator*(const Rational& o) const {
  return Rational(num * o.num, den * o.den);
}

std::string Rational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

long long exact_isqrt(long long n) {
  if (n < 0) throw Error(ErrorKind::Numerical, "exact_isqrt: negative input");
  long long r = static_cast<long long>(std::llround(std::sqrt(double(n))));
  for (long long c : {r - 1, r, r + 1})
    if (c >= 0 && c * c == n) return c;
  throw Error(ErrorKind::Numerical,
              "exact_isqrt: " + std::to_string(n) + " is not a perfect square");
}

}  // namespace qca1d
