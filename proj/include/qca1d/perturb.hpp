#pragma once

#include "qca1d/algebra.hpp"

namespace qca1d {

// Near-inclusion defect of A in B, as a (sampled lower, projection upper)
// pair in operator norm; gates use the upper bound.
struct DefectEstimate {
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  std::string method;
};

struct DefectOptions {
  int samples = 256;
  int unitary_samples = 16;
  std::uint64_t seed = 41;
};

DefectEstimate inclusion_defect(const MatrixAlgebra& a, const MatrixAlgebra& b,
                                const DefectOptions& opts = {});

// Rounds a nearly idempotent *-preserving F (||F^2 - F|| <= 1/8) to an exact
// idempotent Q = (I + sign(2F - I)) / 2; also reports the measured input
// defect.
struct RoundedIdempotent {
  SuperOp q;
  double input_defect = 0.0;
};

RoundedIdempotent round_idempotent(const SuperOp& f);

// Polar part u = W V^† of x = W S V^†; requires ||x^† x - I|| < 1/2, then
// ||x - u|| <= 2 ||x^† x - I||.
Mat polar_unitary(const Mat& x);

// Nearest unitary inside B to a unitary u with ||u - P_B(u)|| <= 1/8;
// ||u - v|| <= 6 delta.
Mat unitary_near_subalgebra(const Mat& u, const MatrixAlgebra& b);

struct ConjugationOptions {
  double max_defect = 1.0 / 64;   // gate on inclusion_defect(A,B).upper_bound
  double target = 1e-9;           // residual defect of u†Au in B
  int max_rounds = 20;
  std::uint64_t seed = 43;
};

struct ConjugationResult {
  Mat u;                    // unitary with u† A u included in B
  double residual = 0.0;    // final inclusion defect of u†Au in B (upper bound)
  double distance = 0.0;    // ||u - I||_op
  int rounds = 0;
  bool snapped = false;     // averaging stalled; exact snap stage was applied
};

// Unitary u with u†Au included in B up to `target` and ||u - I|| = O(defect).
// Averaging iteration with a deterministic exact-snap fallback; both A and B
// must be exact algebras.
ConjugationResult conjugating_unitary(const MatrixAlgebra& a,
                                      const MatrixAlgebra& b,
                                      const ConjugationOptions& opts = {});

// Unitary w with w e w† in B exactly (up to float rounding) for every matrix
// unit e of A; requires A's block structure to embed into B with matching
// ranks.  Shared by conjugating_unitary and the boundary pipeline.
Mat exact_inclusion_snap(const MatrixAlgebra& a, const MatrixAlgebra& b,
                         std::uint64_t seed = 47);

}  // namespace qca1d
