#pragma once

#include <optional>

#include "qca1d/perturb.hpp"

namespace qca1d {

// ||P_A P_B - P_B P_A|| as a map on the HS space.
double commutation_defect(const MatrixAlgebra& a, const MatrixAlgebra& b);

struct IntersectionResult {
  MatrixAlgebra c;
  double commutation = 0.0;        // hypothesis defect
  double idempotent_defect = 0.0;  // ||F^2 - F|| before rounding
  double projection_defect = 0.0;  // ||P_C - P_A P_B|| (HS -> HS)
  double recovery_distance = 0.0;  // subspace distance from image(Q) to C
};

struct IntersectOptions {
  double max_commutation = 0.125;
  double keep_threshold = 0.5;   // {0,1}-clustered rank truncation
  double band_lo = 0.25;         // ambiguity band triggers an error
  double band_hi = 0.75;
  RecoverOptions recover;
  // When set, the intersection is assumed supported on this region and the
  // exact-algebra recovery runs in the region's small ambient space.
  const Lattice* lattice = nullptr;
  std::optional<Region> region;
};

// Intersection algebra of A and B from the rounded composite expectation
// Q = round(P_A P_B); exact-algebra output with measured defects.
IntersectionResult approximate_intersection(const MatrixAlgebra& a,
                                            const MatrixAlgebra& b,
                                            const IntersectOptions& opts = {});

}  // namespace qca1d
