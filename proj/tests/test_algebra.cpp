#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qca1d/algebra.hpp"

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

// Span of M_2 (+) M_3 inside M_5, as generators.
std::vector<Mat> block_sum_generators() {
  std::vector<Mat> gens;
  Mat g = Mat::Zero(5, 5);
  g.block(0, 0, 2, 2) = pauli_x();
  gens.push_back(g);
  g = Mat::Zero(5, 5);
  g.block(0, 0, 2, 2) = pauli_z();
  gens.push_back(g);
  g = Mat::Zero(5, 5);
  g(2, 3) = 1;
  g(3, 4) = 1;
  gens.push_back(g);
  return gens;
}

}  // namespace

TEST_CASE("from_generators closes Paulis to the full algebra") {
  MatrixAlgebra a = from_generators({pauli_x(), pauli_z()});
  CHECK(a.dim_algebra() == 4);
  auto v = a.validate();
  CHECK(v.unit_defect < 1e-12);
  CHECK(v.star_defect < 1e-12);
  CHECK(v.mult_defect < 1e-12);
}

TEST_CASE("from_generators on a diagonal generator yields the diagonal algebra") {
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 2;
  d(2, 2) = 3;
  MatrixAlgebra a = from_generators({d});
  CHECK(a.dim_algebra() == 3);
}

TEST_CASE("validate flags a non-star-closed span") {
  Mat e01 = Mat::Zero(2, 2);
  e01(0, 1) = 1;
  MatrixAlgebra a = MatrixAlgebra::from_span(
      {Mat::Identity(2, 2), e01}, 1e-10, /*validate=*/false);
  auto v = a.validate();
  CHECK(v.star_defect > 0.5);
}

TEST_CASE("commutant of a tensor factor is the other factor") {
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra left = from_generators(
      {kron(pauli_x(), id2), kron(pauli_z(), id2)});
  CHECK(left.dim_algebra() == 4);
  MatrixAlgebra right = commutant(left);
  CHECK(right.dim_algebra() == 4);
  for (const Mat& b : right.basis())
    for (const Mat& g : left.basis())
      CHECK((b * g - g * b).norm() < 1e-9);

  MatrixAlgebra full = from_generators(
      {kron(pauli_x(), id2), kron(pauli_z(), id2), kron(id2, pauli_x()),
       kron(id2, pauli_z())});
  CHECK(full.dim_algebra() == 16);
  CHECK(commutant(full).dim_algebra() == 1);
}

TEST_CASE("relative commutant agrees with the full commutant") {
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra left =
      from_generators({kron(pauli_x(), id2), kron(pauli_z(), id2)});
  MatrixAlgebra ambient = from_generators(
      {kron(pauli_x(), id2), kron(pauli_z(), id2), kron(id2, pauli_x()),
       kron(id2, pauli_z())});
  MatrixAlgebra rel = relative_commutant(left, ambient);
  CHECK(rel.dim_algebra() == 4);
  CHECK(subspace_distance(rel, commutant(left)) < 1e-9);
}

TEST_CASE("twirl over the full algebra is the normalized trace") {
  Rng rng(19);
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra full = from_generators(
      {kron(pauli_x(), id2), kron(pauli_z(), id2), kron(id2, pauli_x()),
       kron(id2, pauli_z())});
  Mat x = random_matrix(rng, 4, 4);
  Mat t = twirl(full, x);
  CHECK((t - (x.trace() / 4.0) * Mat::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("subspace distance separates different algebras") {
  MatrixAlgebra a = from_generators({pauli_x()});
  MatrixAlgebra b = from_generators({pauli_z()});
  CHECK(subspace_distance(a, a) < 1e-12);
  CHECK(subspace_distance(a, b) > 0.5);
}

TEST_CASE("structure of the full matrix algebra") {
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra full = from_generators(
      {kron(pauli_x(), id2), kron(pauli_z(), id2), kron(id2, pauli_x()),
       kron(id2, pauli_z())});
  BlockStructure s = structure(full);
  REQUIRE(s.blocks.size() == 1);
  CHECK(s.blocks[0].n == 4);
  // Matrix-unit relations e_ij e_kl = delta_jk e_il.
  const Block& blk = s.blocks[0];
  for (long i = 0; i < 4; ++i)
    for (long j = 0; j < 4; ++j)
      for (long k = 0; k < 4; ++k) {
        Mat prod = blk.unit(i, j) * blk.unit(k, 0);
        Mat expect = (j == k) ? blk.unit(i, 0) : Mat::Zero(4, 4);
        CHECK((prod - expect).norm() < 1e-10);
      }
}

TEST_CASE("structure of a tensor factor has multiplicity") {
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra left =
      from_generators({kron(pauli_x(), id2), kron(pauli_z(), id2)});
  BlockStructure s = structure(left);
  REQUIRE(s.blocks.size() == 1);
  CHECK(s.blocks[0].n == 2);
  // Diagonal units are rank-2 projections summing to the identity.
  Mat sum = s.blocks[0].unit(0, 0) + s.blocks[0].unit(1, 1);
  CHECK((sum - Mat::Identity(4, 4)).norm() < 1e-10);
  CHECK(std::abs(s.blocks[0].unit(0, 0).trace().real() - 2.0) < 1e-10);
}

TEST_CASE("structure of the diagonal algebra") {
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 2;
  d(2, 2) = 3;
  BlockStructure s = structure(from_generators({d}));
  CHECK(s.blocks.size() == 3);
  for (const auto& b : s.blocks) CHECK(b.n == 1);
}

TEST_CASE("structure of a direct sum M_2 (+) M_3") {
  MatrixAlgebra a = from_generators(block_sum_generators());
  CHECK(a.dim_algebra() == 13);
  BlockStructure s = structure(a);
  REQUIRE(s.blocks.size() == 2);
  std::vector<long> sizes = {s.blocks[0].n, s.blocks[1].n};
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<long>({2, 3}));
  CHECK(subspace_distance(a.basis(), orthonormalize_span(units_span(s))) <
        1e-9);
}

TEST_CASE("recover_exact_algebra snaps a perturbed factor") {
  Rng rng(29);
  Mat id2 = Mat::Identity(2, 2);
  MatrixAlgebra left =
      from_generators({kron(pauli_x(), id2), kron(pauli_z(), id2)});
  // Perturb a hermitian basis of the algebra so the span stays *-closed.
  std::vector<Mat> herm = {kron(id2, id2) / 2.0, kron(pauli_x(), id2) / 2.0,
                           kron(pauli_z(), id2) / 2.0,
                           kron(pauli_x() * pauli_z(), id2) * Complex(0, 0.5)};
  std::vector<Mat> noisy;
  for (const Mat& h : herm)
    noisy.push_back(h + 0.01 * random_hermitian(rng, 4));
  std::vector<Mat> onb = orthonormalize_span(noisy, 1e-10);
  REQUIRE(onb.size() == 4);
  SuperOp q = SuperOp::projector(onb);
  MatrixAlgebra c = recover_exact_algebra(onb, q);
  auto v = c.validate();
  CHECK(v.unit_defect < 1e-9);
  CHECK(v.star_defect < 1e-9);
  CHECK(v.mult_defect < 1e-9);
  CHECK(subspace_distance(c, left) < 0.2);
  CHECK(subspace_distance(c.basis(), onb) < 0.2);
}

TEST_CASE("recover_exact_algebra rejects a non-algebra subspace") {
  Rng rng(31);
  // Random 3-dimensional *-closed subspace of M_4 containing the identity:
  // almost surely far from any algebra of dimension 3.
  std::vector<Mat> span = {Mat::Identity(4, 4), random_hermitian(rng, 4),
                           random_hermitian(rng, 4)};
  std::vector<Mat> onb = orthonormalize_span(span, 1e-10);
  REQUIRE(onb.size() == 3);
  SuperOp q = SuperOp::projector(onb);
  CHECK_THROWS_AS(recover_exact_algebra(onb, q), Error);
}

TEST_CASE("orthonormalize_clustered resolves {0,1} spectra and flags ambiguity") {
  Rng rng(37);
  Mat a = random_matrix(rng, 3, 3);
  a /= a.norm();
  Mat b = random_matrix(rng, 3, 3);
  b -= hs_inner(a, b) * a;
  b /= b.norm();
  std::vector<Mat> fam = {a, b, 1e-8 * random_matrix(rng, 3, 3)};
  auto onb = orthonormalize_clustered(fam, 0.5, 0.25, 0.75);
  CHECK(onb.size() == 2);
  CHECK_THROWS_AS(orthonormalize_clustered({0.5 * a}, 0.5, 0.25, 0.75), Error);
}
