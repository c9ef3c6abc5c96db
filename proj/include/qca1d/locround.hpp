#pragma once

#include "qca1d/intersect.hpp"
#include "qca1d/qca.hpp"

namespace qca1d {

// Boundary factorization of alpha(A_{[1,2]}) over an 8-site window whose
// sites carry labels -2..5; `window[k]` is the lattice site with label k-2.
struct BoundaryFactorization {
  std::vector<int> window;          // 8 sites, label -2 first
  int x1 = 0, x2 = 0;               // sites carrying labels 1 and 2
  MatrixAlgebra l_tilde;            // inside A_{[0,1]}
  MatrixAlgebra r_tilde;            // inside A_{[2,3]}
  MatrixAlgebra l, r;               // preimages inside A_{[1,2]}
  Mat fixup_u;                      // alpha(A_{[1,2]}) = u (L~ x R~) u†
  // defect report
  double hypothesis_defect = 0.0;   // worst gate measurement
  double commutation_r = 0.0;       // ||[P_img, P_{[2,3]}]||
  double commutation_l = 0.0;
  double generation_distance = 0.0; // span(L~ R~) vs alpha(A_{[1,2]})
  double fixup_distance = 0.0;      // ||u - I||
  double fixup_residual = 0.0;      // conjugated inclusion residual
};

struct ExtractOptions {
  double gate = 0.02;               // hypothesis-defect gate per condition
  IntersectOptions intersect;       // gates for the two intersections
  ConjugationOptions conjugation;   // fix-up unitary search
  int gate_samples = 32;            // sampling depth for gate measurements
  std::uint64_t seed = 211;
};

// Window = 8 consecutive sites starting at `start` (the label -2 site).
BoundaryFactorization extract_boundary(const QcaMap& alpha, int start,
                                       const ExtractOptions& opts = {});

// Brute-force counterpart for exact inputs: L~ and R~ as exact subspace
// intersections over a 4-site window starting at `start` (the label 0 site).
BoundaryFactorization exact_boundary_factorization(const QcaMap& alpha,
                                                   int start);

struct RoundedQca {
  QcaMap rounded;
  int certified_range = 0;
  DefectEstimate distance;                    // dist_loc(alpha, rounded)
  std::vector<BoundaryFactorization> pairs;
  std::vector<Mat> glue_unitaries;            // per-pair conjugators g_i
  Rational index;
  double locality_certificate = 0.0;          // worst exact-range defect
  double surjectivity_certificate = 0.0;      // worst local-surjectivity defect
};

struct RoundOptions {
  ExtractOptions extract;
  DistLocOptions dist;
  std::uint64_t seed = 223;
};

// Exact QCA near an approximate one on a circle (|sites| >= 8); certified
// range 2 for even circles, 2 on the pair-merged lattice (hence <= 3 on the
// original sites) for odd ones.
RoundedQca round_circle(const QcaMap& alpha, const RoundOptions& opts = {});

// Exact homomorphism near an approximate one on an interval domain [a,b]
// (b - a >= 8); defined on the sub-interval of fully-windowed pairs.
RoundedQca glue_interval(const QcaMap& alpha, const RoundOptions& opts = {});

// sqrt(dim R~)/sqrt(dim A_{x2}) as an exact rational; cross-checked against
// sqrt(dim A_{x1})/sqrt(dim L~).
Rational gnvw_index(const BoundaryFactorization& f, const Lattice& lat);
inline Rational gnvw_index(const RoundedQca& r) {
  require(!r.pairs.empty(), ErrorKind::InvalidInput, "no factorizations");
  return gnvw_index(r.pairs.front(), r.rounded.lattice);
}

// Index from the leftmost admissible window, cross-checked on the window
// offset by half the circle.
Rational index_of_approx(const QcaMap& alpha, const ExtractOptions& opts = {});

// Exact intersection of two spans (Gram singular vectors above 1 - 1e-9).
std::vector<Mat> exact_subspace_intersection(const std::vector<Mat>& a_onb,
                                             const std::vector<Mat>& b_onb);

// Lattice with sites x and x+1 merged into one (dims multiplied); the global
// Hilbert space and site order are unchanged.
Lattice merge_pair(const Lattice& lat, int x);

}  // namespace qca1d
