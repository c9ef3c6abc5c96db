#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qca1d/perturb.hpp"

using namespace qca1d;

namespace {

Mat pauli_x() {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

Mat pauli_z() {
  Mat z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

MatrixAlgebra left_factor() {
  Mat id2 = Mat::Identity(2, 2);
  return from_generators({kron(pauli_x(), id2), kron(pauli_z(), id2)});
}

MatrixAlgebra full_m4() {
  Mat id2 = Mat::Identity(2, 2);
  return from_generators({kron(pauli_x(), id2), kron(pauli_z(), id2),
                          kron(id2, pauli_x()), kron(id2, pauli_z())});
}

Mat small_rotation(Rng& rng, long d, double delta) {
  Mat h = random_hermitian(rng, d);
  Eigen::SelfAdjointEigenSolver<Mat> es(h * delta);
  return es.eigenvectors() *
         (Complex(0, 1) * es.eigenvalues().cast<Complex>()).array().exp()
             .matrix().asDiagonal() *
         es.eigenvectors().adjoint();
}

MatrixAlgebra conjugate_algebra(const MatrixAlgebra& a, const Mat& v) {
  std::vector<Mat> basis;
  for (const Mat& b : a.basis()) basis.push_back(v * b * v.adjoint());
  return MatrixAlgebra::from_orthonormal_basis(std::move(basis));
}

}  // namespace

TEST_CASE("inclusion_defect: exact inclusion and disjoint sites") {
  MatrixAlgebra sub = left_factor();
  MatrixAlgebra full = full_m4();
  DefectEstimate exact = inclusion_defect(sub, full);
  CHECK(exact.lower_bound <= exact.upper_bound + 1e-12);
  CHECK(exact.upper_bound <= 1e-9);

  // Disjoint qubits: the projection kills the traceless part entirely.
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra right =
      from_generators({kron(id2, pauli_x()), kron(id2, pauli_z())});
  DefectEstimate far = inclusion_defect(sub, right);
  CHECK(far.lower_bound >= 0.9);
}

TEST_CASE("inclusion_defect tracks a small conjugation") {
  Rng rng(51);
  double delta = 5e-3;
  Mat v = small_rotation(rng, 4, delta);
  MatrixAlgebra moved = conjugate_algebra(left_factor(), v);
  DefectEstimate est = inclusion_defect(moved, left_factor());
  double vdist = op_norm(v - Mat::Identity(4, 4));
  CHECK(est.upper_bound <= 4 * vdist);
  CHECK(est.lower_bound <= est.upper_bound + 1e-12);
  CHECK(est.upper_bound > 1e-5);
}

TEST_CASE("round_idempotent fixes idempotents and rounds scaled projections") {
  MatrixAlgebra sub = left_factor();
  SuperOp p = sub.projector();
  Rng rng(53);
  Mat probe = random_matrix(rng, 4, 4);

  RoundedIdempotent r = round_idempotent(p);
  CHECK(r.input_defect < 1e-10);
  CHECK((r.q.apply(probe) - p.apply(probe)).norm() < 1e-10);

  // F = (1 + delta) P rounds back to P.
  SuperOp f = Complex(1.05, 0) * p;
  RoundedIdempotent r2 = round_idempotent(f);
  CHECK((r2.q.apply(probe) - p.apply(probe)).norm() < 1e-9);
  double qdefect =
      superop_norm(r2.q * r2.q - r2.q).value;
  CHECK(qdefect < 1e-10);
  CHECK(superop_norm(r2.q - f).value <= 10 * r2.input_defect + 1e-9);
}

TEST_CASE("round_idempotent refuses far-from-idempotent input") {
  SuperOp f = Complex(0.5, 0) * SuperOp::identity(4);
  CHECK_THROWS_AS(round_idempotent(f), Error);
}

TEST_CASE("polar_unitary") {
  Rng rng(57);
  Mat u = random_unitary(rng, 5);
  CHECK((polar_unitary(u) - u).norm() < 1e-12);

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.1;
  d(1, 1) = 0.9;
  CHECK((polar_unitary(d) - Mat::Identity(2, 2)).norm() < 1e-12);

  Mat x = 0.95 * u;
  Mat pu = polar_unitary(x);
  CHECK((pu - u).norm() < 1e-12);
  CHECK(op_norm(x - pu) == doctest::Approx(0.05).epsilon(1e-9));
  double eps = op_norm(x.adjoint() * x - Mat::Identity(5, 5));
  CHECK(op_norm(x - pu) <= 2 * eps);

  CHECK_THROWS_AS(polar_unitary(Mat(0.1 * u)), Error);
}

TEST_CASE("unitary_near_subalgebra") {
  Rng rng(59);
  MatrixAlgebra sub = left_factor();

  Mat u_in = sub.random_unitary_in(rng);
  Mat v = unitary_near_subalgebra(u_in, sub);
  CHECK((v - u_in).norm() < 1e-9);

  // Drift the unitary slightly out of the subalgebra.
  Mat id2 = Mat::Identity(2, 2);
  Mat k = kron(id2, pauli_x());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.05 * k);
  Mat rot = es.eigenvectors() *
            (Complex(0, 1) * es.eigenvalues().cast<Complex>()).array().exp()
                .matrix().asDiagonal() *
            es.eigenvectors().adjoint();
  Mat u_out = rot * u_in;
  double delta = op_norm(u_out - sub.project(u_out));
  Mat v2 = unitary_near_subalgebra(u_out, sub);
  CHECK(op_norm(v2.adjoint() * v2 - Mat::Identity(4, 4)) < 1e-9);
  CHECK((v2 - sub.project(v2)).norm() < 1e-9);
  CHECK(op_norm(u_out - v2) <= 6 * delta);
}

TEST_CASE("conjugating_unitary restores an exact inclusion") {
  Rng rng(61);
  MatrixAlgebra full = full_m4();

  // Exact inclusion: identity comes back.
  ConjugationResult id_res = conjugating_unitary(left_factor(), full);
  CHECK(id_res.distance < 1e-9);
  CHECK(id_res.residual < 1e-9);

  // Ground-truth conjugation roundtrip at ||v - I|| ~ 5e-3.
  Mat v = small_rotation(rng, 4, 2.5e-3);
  MatrixAlgebra moved = conjugate_algebra(left_factor(), v);
  double delta = inclusion_defect(moved, left_factor()).upper_bound;
  REQUIRE(delta <= 1.0 / 64);
  ConjugationResult res = conjugating_unitary(moved, left_factor());
  CHECK(res.residual <= 1e-9);
  CHECK(res.distance <= 6e-2);
  // Conjugated basis actually lands in the target algebra.
  MatrixAlgebra target = left_factor();
  for (const Mat& b : moved.basis()) {
    Mat c = res.u.adjoint() * b * res.u;
    CHECK((c - target.project(c)).norm() < 1e-8);
  }
}

TEST_CASE("conjugating_unitary refuses coarse inclusions") {
  Rng rng(67);
  Mat v = small_rotation(rng, 4, 0.3);
  MatrixAlgebra moved = conjugate_algebra(left_factor(), v);
  CHECK_THROWS_AS(conjugating_unitary(moved, left_factor()), Error);
}

TEST_CASE("commutator bound for near-inclusions into a commutant") {
  // A within epsilon of B' implies small commutators with B.
  Rng rng(71);
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra right =
      from_generators({kron(id2, pauli_x()), kron(id2, pauli_z())});
  double delta = 1e-3;
  Mat v = small_rotation(rng, 4, delta / 2);
  MatrixAlgebra moved = conjugate_algebra(left_factor(), v);
  double eps = inclusion_defect(moved, left_factor()).upper_bound;
  double worst = 0.0;
  for (int k = 0; k < 32; ++k) {
    Mat a = moved.random_element(rng);
    Mat b = right.random_element(rng);
    a /= op_norm(a);
    b /= op_norm(b);
    worst = std::max(worst, op_norm(a * b - b * a));
  }
  CHECK(worst <= 2 * eps + 1e-9);
}

TEST_CASE("commutant reversal under near-inclusion") {
  Rng rng(73);
  double delta = 1e-3;
  Mat v = small_rotation(rng, 4, delta / 2);
  MatrixAlgebra moved = conjugate_algebra(left_factor(), v);
  double eps = inclusion_defect(moved, left_factor()).upper_bound;
  MatrixAlgebra moved_comm = commutant(moved);
  MatrixAlgebra base_comm = commutant(left_factor());
  double rev = inclusion_defect(base_comm, moved_comm).upper_bound;
  CHECK(rev <= 4 * eps + 1e-9);
}

TEST_CASE("projection composition bound for near-inclusions") {
  Rng rng(79);
  double delta = 1e-3;
  Mat v = small_rotation(rng, 4, delta / 2);
  MatrixAlgebra sub = conjugate_algebra(left_factor(), v);
  MatrixAlgebra big = full_m4();
  double eps = inclusion_defect(sub, big).upper_bound;
  SuperOp pa = big.projector(), pb = sub.projector();
  CHECK(superop_norm(pa * pb - pb).value <= 10 * eps + 1e-12);
}

TEST_CASE("simultaneous inclusion of commuting near-included algebras") {
  // Three qubits: A1 a rotated site-0 algebra (rotation touching site 2, so
  // the inclusion into the sites-{0,1} algebra is only approximate), A2 the
  // exact site-1 algebra.  A1 and A2 commute by disjoint support.
  Rng rng(83);
  Lattice lat(Geometry::Interval, {2, 2, 2});
  MatrixAlgebra big =
      MatrixAlgebra::from_orthonormal_basis(region_algebra_basis(lat, Region({0, 1})));
  MatrixAlgebra site0 =
      MatrixAlgebra::from_orthonormal_basis(region_algebra_basis(lat, Region::single(0)));
  MatrixAlgebra site1 =
      MatrixAlgebra::from_orthonormal_basis(region_algebra_basis(lat, Region::single(1)));
  // A common rotation keeps the pair commuting and the generated algebra
  // small (independent rotations would genuinely inflate the closure).
  Mat v1 = small_rotation(rng, 8, 1e-3);
  MatrixAlgebra a1 = conjugate_algebra(site0, v1);
  MatrixAlgebra site1_moved = conjugate_algebra(site1, v1);
  double e1 = inclusion_defect(a1, big).upper_bound;
  double e2 = inclusion_defect(site1_moved, big).upper_bound;
  CHECK(e1 > 1e-6);
  std::vector<Mat> gens = a1.basis();
  for (const Mat& b : site1_moved.basis()) gens.push_back(b);
  MatrixAlgebra joint = from_generators(gens);
  double joint_defect = inclusion_defect(joint, big).upper_bound;
  CHECK(joint_defect <= 4 * (e1 + e2) + 1e-9);
}
