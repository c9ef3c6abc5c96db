#pragma once

#include "qca1d/perturb.hpp"

namespace qca1d {

// Locality-preserving map x -> U x U† restricted to the algebra of `domain`.
struct QcaMap {
  Lattice lattice{Geometry::Interval, {2}};
  Region domain;
  Mat u;
  int declared_range = 0;
  std::string recipe;
  double epsilon = 0.0;       // intended perturbation level
  std::uint64_t seed = 0;

  Mat apply(const Mat& x) const { return u * x * u.adjoint(); }
  Mat apply_inverse(const Mat& x) const { return u.adjoint() * x * u; }
  // Exact image algebra of a region (conjugated embedded basis).
  MatrixAlgebra image_algebra(const Region& r) const;
};

struct ShiftSpec {
  int steps = 1;
};
struct BrickworkSpec {
  int depth = 2;
  std::uint64_t gate_seed = 7;
};

QcaMap build_identity(const Lattice& lat);
QcaMap build_shift(const Lattice& lat, int steps);
QcaMap build_brickwork(const Lattice& lat, int depth, std::uint64_t gate_seed);
// alpha_list applied left to right: result(x) = a_n(...a_1(x)...).
QcaMap compose(const std::vector<QcaMap>& alpha_list);

enum class PerturbStyle { LocalUnitaries, HamiltonianBurst };
PerturbStyle perturb_style_from_name(const std::string& s);

QcaMap perturb(const QcaMap& alpha, double epsilon, PerturbStyle style,
               std::uint64_t seed);

struct SpotCheck {
  std::vector<int> sites;
  double measured = 0.0;
  double bound = 0.0;
};

struct LocalityProfile {
  int range = 0;
  std::vector<int> sites;                    // sites with x^{+r} inside S
  std::vector<DefectEstimate> image_defect;  // alpha(A_x) into A_{x^{+r}}
  std::vector<DefectEstimate> surj_defect;   // A_x into alpha(A_{x^{+r}})
  double epsilon_image = 0.0;                // max upper bound
  double epsilon_surj = 0.0;
  std::vector<SpotCheck> region_checks;      // 4*eps*|X| volume-scaling probes
};

struct ProfileOptions {
  int samples = 256;
  int unitary_samples = 16;
  int spot_checks = 5;
  double norm_tol = 1e-4;  // relative tolerance of sampled operator norms
  std::uint64_t seed = 131;
};

LocalityProfile locality_profile(const QcaMap& alpha, int r,
                                 const ProfileOptions& opts = {});

// Near-inclusion of span(basis) into the region algebra of `target`: sampled
// lower bound, 2x basis-residual upper bound, residuals against the
// embed-restrict conditional expectation.
DefectEstimate defect_into_region(const Lattice& lat,
                                  const std::vector<Mat>& basis,
                                  const Region& target, int samples,
                                  int unitary_samples, double norm_tol,
                                  Rng& rng);

struct DistLocOptions {
  int samples = 512;
  int unitary_samples = 16;
  double norm_tol = 1e-4;
  std::uint64_t seed = 137;
};

// sup over unit-operator-norm single-site operators of ||alpha(x) - beta(x)||,
// reported as a sampled lower bound and a basis-factor upper bound.
DefectEstimate dist_loc(const QcaMap& alpha, const QcaMap& beta,
                        const DistLocOptions& opts = {});

// QOP1 unitary at `path` plus a JSON metadata sidecar at `path` + ".json".
void write_qca(const std::string& path, const QcaMap& alpha);
QcaMap read_qca(const std::string& path);

}  // namespace qca1d
