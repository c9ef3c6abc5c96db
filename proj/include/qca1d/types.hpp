#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qca1d {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Rng = std::mt19937_64;

// Error categories map onto CLI exit codes.
enum class ErrorKind : int {
  InvalidInput = 3,
  GateFailure = 2,
  Numerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

// Hilbert-Schmidt inner product tr(a^† b).
inline Complex hs_inner(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::InvalidInput, "hs_inner: dimension mismatch");
  return (a.conjugate().cwiseProduct(b)).sum();
}

inline double hs_norm(const Mat& a) { return a.norm(); }

// Largest singular value by power iteration on a^† a; cheap and accurate
// enough for defect measurements.
double op_norm(const Mat& a, double rel_tol = 1e-10, int max_iters = 500);

Mat random_matrix(Rng& rng, long rows, long cols);
// Hermitian with unit operator norm.
Mat random_hermitian(Rng& rng, long dim);
// Haar unitary via QR of a Ginibre matrix with phase fix.
Mat random_unitary(Rng& rng, long dim);

struct Rational {
  long long num = 1;
  long long den = 1;
  Rational() = default;
  Rational(long long p, long long q);
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
  std::string str() const;
};

// Exact integer square root; throws if n is not a perfect square.
long long exact_isqrt(long long n);

}  // namespace qca1d
