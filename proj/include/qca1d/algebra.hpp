#pragma once

#include <optional>

#include "qca1d/operators.hpp"
#include "qca1d/superop.hpp"

namespace qca1d {

struct AlgebraValidation {
  double unit_defect = 0.0;   // ||I - P(I)||_HS / sqrt(D)
  double star_defect = 0.0;   // max_i ||b_i* - P(b_i*)||_HS
  double mult_defect = 0.0;   // max_ij ||b_i b_j - P(b_i b_j)|| / ||b_i b_j||
};

// Unital *-subalgebra of M_D, stored as an HS-orthonormal basis.
class MatrixAlgebra {
 public:
  // Orthonormalizes the span (SVD, singular values above rank_tol kept) and
  // validates closure.  Throws on validation failure unless validate=false.
  static MatrixAlgebra from_span(std::vector<Mat> span, double rank_tol = 1e-10,
                                 bool validate = true, double closure_tol = 1e-8);
  // Basis is trusted to be HS-orthonormal; no validation.
  static MatrixAlgebra from_orthonormal_basis(std::vector<Mat> basis);

  const std::vector<Mat>& basis() const { return basis_; }
  long dim_algebra() const { return static_cast<long>(basis_.size()); }
  long ambient_dim() const { return basis_.empty() ? 0 : basis_[0].rows(); }

  Mat project(const Mat& x) const;
  SuperOp projector() const { return SuperOp::projector(basis_); }

  AlgebraValidation validate() const;

  // Random element / unitary of the algebra (seeded, for sampling).
  Mat random_element(Rng& rng) const;
  Mat random_self_adjoint(Rng& rng) const;
  Mat random_unitary_in(Rng& rng) const;

 private:
  std::vector<Mat> basis_;
};

// Orthonormalize a spanning family by SVD on vectorized matrices; keep
// singular directions above abs_tol (inputs are normalized first).
std::vector<Mat> orthonormalize_span(const std::vector<Mat>& span,
                                     double abs_tol = 1e-10);
// As above but with the rank decided by an expected {0,1}-clustered singular
// spectrum: keep sv > keep_threshold, error if any sv falls in (band_lo, band_hi).
std::vector<Mat> orthonormalize_clustered(const std::vector<Mat>& span,
                                          double keep_threshold, double band_lo,
                                          double band_hi);

MatrixAlgebra from_generators(const std::vector<Mat>& gens,
                              double rank_tol = 1e-10);

// Commutant in the full ambient M_D (D <= 32) via the nullspace of the
// stacked commutator map.
MatrixAlgebra commutant(const MatrixAlgebra& a, double rank_tol = 1e-7);
// Commutant of A within the algebra spanned by `ambient` (Gram nullspace in
// ambient coordinates); works at any D since only D x D products appear.
MatrixAlgebra relative_commutant(const MatrixAlgebra& a,
                                 const MatrixAlgebra& ambient,
                                 double rank_tol = 1e-7);

Mat twirl(const MatrixAlgebra& a, const Mat& x);

// max residual of either basis against the other's projection (HS norm);
// ~0 iff equal subspaces.
double subspace_distance(const MatrixAlgebra& a, const MatrixAlgebra& b);
double subspace_distance(const std::vector<Mat>& a_onb,
                         const std::vector<Mat>& b_onb);

struct Block {
  long n = 0;                       // block is a full matrix algebra M_n
  std::vector<Mat> units;           // n*n matrix units e_ij, row-major
  Mat central_projection;           // z_k = sum_i e_ii
  const Mat& unit(long i, long j) const { return units[i * n + j]; }
};

struct BlockStructure {
  std::vector<Block> blocks;
  long dim() const {
    long s = 0;
    for (const auto& b : blocks) s += b.n * b.n;
    return s;
  }
};

struct StructureOptions {
  double eigen_gap = 1e-6;     // eigenvalue grouping threshold (exact algebras)
  double snap_threshold = 0.5; // idempotent eigenvalue snapping
  int max_retries = 5;
  std::uint64_t seed = 17;
};

// Wedderburn data of an exact validated algebra.
BlockStructure structure(const MatrixAlgebra& a, const StructureOptions& opts = {});

struct RecoverOptions {
  double cluster_gap = 0.2;    // relative spectral-cluster split for near-exact input
  double snap_threshold = 0.5;
  double validation_tol = 1e-9;
  int max_retries = 5;
  std::uint64_t seed = 23;
};

// Exact algebra near an approximately closed subspace S with idempotent
// *-preserving Q onto S.  Near-exact regime only (measured epsilon <~ 0.05).
MatrixAlgebra recover_exact_algebra(const std::vector<Mat>& s_onb,
                                    const SuperOp& q,
                                    const RecoverOptions& opts = {});

// Matrix units of an approximately closed subspace (shared machinery of
// structure() and recover_exact_algebra()).  The basis is only required to
// span something near an exact algebra; all outputs are exact up to float
// rounding (spectral snapping + polar parts).
BlockStructure build_block_structure(const std::vector<Mat>& onb,
                                     double cluster_gap, std::uint64_t seed,
                                     int max_retries);

std::vector<Mat> units_span(const BlockStructure& s);

}  // namespace qca1d
