#pragma once

#include <memory>

#include "qca1d/types.hpp"

namespace qca1d {

// Matrix-free linear map on the operator space M_D.  Built compositionally;
// never materialized as a D^2 x D^2 matrix.
class SuperOp {
 public:
  SuperOp() = default;

  Mat apply(const Mat& x) const;
  Mat operator()(const Mat& x) const { return apply(x); }
  // HS adjoint: <F†(x), y> = <x, F(y)>.
  SuperOp adjoint() const;
  long dim() const;

  static SuperOp identity(long d);
  static SuperOp zero(long d);
  // Orthogonal projection onto span of an HS-orthonormal family.
  static SuperOp projector(std::vector<Mat> onb);
  // x -> u x u^†
  static SuperOp conjugation(Mat u);
  static SuperOp left_mult(Mat a);
  static SuperOp right_mult(Mat a);
  static SuperOp compose(SuperOp outer, SuperOp inner);
  static SuperOp lincomb(std::vector<std::pair<Complex, SuperOp>> terms);
  // X (X^2)^{-1/2} via the binomial series in (X^2 - I); requires
  // ||X^2 - I|| <= 1/2 for convergence.  term_tol stops the series, max_terms
  // caps it.
  static SuperOp sign_series(SuperOp x, double term_tol = 1e-13,
                             int max_terms = 200);

  SuperOp operator+(const SuperOp& o) const;
  SuperOp operator-(const SuperOp& o) const;
  SuperOp operator*(const SuperOp& o) const { return compose(*this, o); }
  friend SuperOp operator*(Complex c, const SuperOp& f);

  bool valid() const { return node_ != nullptr; }

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
  explicit SuperOp(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
};

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Largest singular value of F as a map on the HS space (power iteration on
// F†F, randomized restarts).
NormEstimate superop_norm(const SuperOp& f, double rel_tol = 1e-8,
                          int max_iters = 2000, int restarts = 3,
                          std::uint64_t seed = 0x5eed5eedULL);

}  // namespace qca1d
