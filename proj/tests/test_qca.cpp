#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "qca1d/qca.hpp"

using namespace qca1d;

namespace {

Mat pauli_x() {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

ProfileOptions fast_profile() {
  ProfileOptions o;
  o.samples = 32;
  o.unitary_samples = 8;
  return o;
}

DistLocOptions fast_dist() {
  DistLocOptions o;
  o.samples = 64;
  o.unitary_samples = 8;
  return o;
}

}  // namespace

TEST_CASE("identity build") {
  Lattice lat(Geometry::Interval, std::vector<int>(4, 2));
  QcaMap id = build_identity(lat);
  CHECK((id.u - Mat::Identity(16, 16)).norm() == 0.0);
  LocalityProfile p = locality_profile(id, 0, fast_profile());
  CHECK(p.epsilon_image < 1e-9);
  CHECK(p.epsilon_surj < 1e-9);
}

TEST_CASE("shift moves site operators and is exactly range-1") {
  Lattice lat(Geometry::Circle, std::vector<int>(6, 2));
  QcaMap sh = build_shift(lat, 1);
  CHECK(op_norm(sh.u.adjoint() * sh.u - Mat::Identity(64, 64)) < 1e-12);
  for (int x = 0; x < 6; ++x) {
    Mat src = embed_local(lat, Region::single(x), pauli_x());
    Mat dst = embed_local(lat, Region::single(lat.wrap(x + 1)), pauli_x());
    CHECK((sh.apply(src) - dst).norm() < 1e-12);
  }
  LocalityProfile p1 = locality_profile(sh, 1, fast_profile());
  CHECK(p1.epsilon_image < 1e-9);
  CHECK(p1.epsilon_surj < 1e-9);

  // At radius 0 the image is fully displaced.
  LocalityProfile p0 = locality_profile(sh, 0, fast_profile());
  for (const auto& d : p0.image_defect) CHECK(d.lower_bound > 0.9);

  CHECK_THROWS_AS(build_shift(Lattice(Geometry::Interval, {2, 2, 2}), 1),
                  Error);
}

TEST_CASE("brickwork is deterministic and exact at its declared range") {
  Lattice lat(Geometry::Interval, std::vector<int>(6, 2));
  QcaMap bw = build_brickwork(lat, 2, 7);
  QcaMap bw2 = build_brickwork(lat, 2, 7);
  CHECK((bw.u - bw2.u).norm() == 0.0);
  CHECK(op_norm(bw.u.adjoint() * bw.u - Mat::Identity(64, 64)) < 1e-12);
  CHECK(bw.declared_range == 2);
  LocalityProfile p = locality_profile(bw, 2, fast_profile());
  CHECK(p.epsilon_image < 1e-9);
  CHECK(p.epsilon_surj < 1e-9);

  // After pairing sites into cells the same unitary is a range-1 QCA.
  QcaMap coarse = bw;
  coarse.lattice = lat.coarse_grain(2);
  coarse.domain = Region::full(coarse.lattice);
  coarse.declared_range = 1;
  LocalityProfile pc = locality_profile(coarse, 1, fast_profile());
  CHECK(pc.epsilon_image < 1e-9);
  CHECK(pc.epsilon_surj < 1e-9);
}

TEST_CASE("composition of shifts") {
  Lattice lat(Geometry::Circle, std::vector<int>(6, 2));
  QcaMap s1 = build_shift(lat, 1);
  QcaMap s2 = build_shift(lat, 2);
  QcaMap comp = compose({s1, s1});
  CHECK((comp.u - s2.u).norm() < 1e-12);
  CHECK(comp.declared_range == 2);
}

TEST_CASE("inverse of an exact QCA has the same range") {
  Lattice lat(Geometry::Circle, std::vector<int>(5, 2));
  QcaMap bw = build_brickwork(lat, 2, 11);
  QcaMap inv = bw;
  inv.u = bw.u.adjoint();
  LocalityProfile p = locality_profile(inv, bw.declared_range, fast_profile());
  CHECK(p.epsilon_image < 1e-9);
}

TEST_CASE("perturbation: zero level is the identity operation") {
  Lattice lat(Geometry::Circle, std::vector<int>(4, 2));
  QcaMap id = build_identity(lat);
  QcaMap same = perturb(id, 0.0, PerturbStyle::LocalUnitaries, 5);
  CHECK((same.u - id.u).norm() == 0.0);
  CHECK_THROWS_AS(perturb(id, 0.5, PerturbStyle::LocalUnitaries, 5), Error);
}

TEST_CASE("perturbed shift stays close and nearly local") {
  Lattice lat(Geometry::Circle, std::vector<int>(5, 2));
  QcaMap sh = build_shift(lat, 1);
  double eps = 1e-2;
  QcaMap pert = perturb(sh, eps, PerturbStyle::LocalUnitaries, 3);
  LocalityProfile p = locality_profile(pert, 2, fast_profile());
  CHECK(p.epsilon_image <= 0.1);
  CHECK(p.epsilon_surj <= 0.1);
  for (const auto& sc : p.region_checks) CHECK(sc.measured <= sc.bound);

  DefectEstimate d = dist_loc(sh, pert, fast_dist());
  CHECK(d.lower_bound <= d.upper_bound + 1e-12);
  CHECK(d.upper_bound <= 30 * eps);

  // Double perturbation roughly doubles the defect scale.
  QcaMap pert2 = perturb(pert, eps, PerturbStyle::LocalUnitaries, 4);
  DefectEstimate d2 = dist_loc(sh, pert2, fast_dist());
  CHECK(d2.upper_bound <= 4 * std::max(d.upper_bound, eps) + 1e-9);

  QcaMap burst = perturb(sh, eps, PerturbStyle::HamiltonianBurst, 3);
  DefectEstimate db = dist_loc(sh, burst, fast_dist());
  CHECK(db.upper_bound <= 30 * eps);
}

TEST_CASE("dist_loc basics and the pure-phase probe") {
  Lattice lat(Geometry::Interval, std::vector<int>(3, 2));
  QcaMap id = build_identity(lat);
  CHECK(dist_loc(id, id, fast_dist()).upper_bound <= 1e-12);

  double phi = 0.3;
  Mat uphase(2, 2);
  uphase << 1, 0, 0, std::polar(1.0, phi);
  QcaMap beta = id;
  beta.u = embed_local(lat, Region::single(1), uphase);
  DefectEstimate d = dist_loc(id, beta, fast_dist());
  CHECK(d.lower_bound >= 2 * std::abs(std::sin(phi / 2)) - 1e-3);
  CHECK(d.lower_bound <= d.upper_bound + 1e-12);
}

TEST_CASE("dist_loc is a pseudometric on sampled instances") {
  Lattice lat(Geometry::Circle, std::vector<int>(4, 2));
  QcaMap a = build_identity(lat);
  QcaMap b = perturb(a, 5e-3, PerturbStyle::LocalUnitaries, 21);
  QcaMap c = perturb(a, 5e-3, PerturbStyle::LocalUnitaries, 22);
  DefectEstimate ab = dist_loc(a, b, fast_dist());
  DefectEstimate ba = dist_loc(b, a, fast_dist());
  CHECK(ab.lower_bound == doctest::Approx(ba.lower_bound).epsilon(1e-3));
  DefectEstimate ac = dist_loc(a, c, fast_dist());
  DefectEstimate bc = dist_loc(b, c, fast_dist());
  CHECK(ac.lower_bound <= ab.upper_bound + bc.upper_bound + 1e-9);
}

TEST_CASE("local-to-global bound on commuting single-site factors") {
  // alpha and beta differ by independent single-site rotations; on products
  // of single-site unitaries the global difference obeys the 2*sqrt(2)*sum
  // bound.
  Lattice lat(Geometry::Interval, std::vector<int>(3, 2));
  Rng rng(151);
  QcaMap alpha = build_identity(lat);
  QcaMap beta = alpha;
  Mat v = Mat::Identity(8, 8);
  for (int x = 0; x < 3; ++x) {
    Mat h = random_hermitian(rng, 2);
    Eigen::SelfAdjointEigenSolver<Mat> es(2e-3 * h);
    Mat rot = es.eigenvectors() *
              (Complex(0, 1) * es.eigenvalues().cast<Complex>()).array().exp()
                  .matrix().asDiagonal() *
              es.eigenvectors().adjoint();
    v = embed_local(lat, Region::single(x), rot) * v;
  }
  beta.u = v;

  // Per-site defect: exact on single-site probes.
  double sum_eps = 0.0;
  for (int x = 0; x < 3; ++x) {
    double worst = 0.0;
    for (int k = 0; k < 16; ++k) {
      Mat a = embed_local(lat, Region::single(x), random_unitary(rng, 2));
      worst = std::max(worst, op_norm(alpha.apply(a) - beta.apply(a)));
    }
    sum_eps += worst;
  }
  for (int k = 0; k < 100; ++k) {
    Mat a = Mat::Identity(8, 8);
    for (int x = 0; x < 3; ++x)
      a = a * embed_local(lat, Region::single(x), random_unitary(rng, 2));
    double diff = op_norm(alpha.apply(a) - beta.apply(a));
    CHECK(diff <= 2 * std::sqrt(2.0) * sum_eps + 1e-9);
  }
}

TEST_CASE("QCA file round trip") {
  Lattice lat(Geometry::Circle, std::vector<int>(4, 2));
  QcaMap pert = perturb(build_shift(lat, 1), 1e-3,
                        PerturbStyle::LocalUnitaries, 9);
  auto path = (std::filesystem::temp_directory_path() / "qca_io_test.qop").string();
  write_qca(path, pert);
  QcaMap back = read_qca(path);
  CHECK((back.u - pert.u).norm() == 0.0);
  CHECK(back.lattice.geometry() == Geometry::Circle);
  CHECK(back.declared_range == pert.declared_range);
  CHECK(back.recipe == pert.recipe);
  CHECK(back.epsilon == pert.epsilon);
  std::filesystem::remove(path + ".json");
  CHECK_THROWS_AS(read_qca(path), Error);
  std::filesystem::remove(path);
}
