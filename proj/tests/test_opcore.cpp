#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "qca1d/operators.hpp"
#include "qca1d/qop_io.hpp"
#include "qca1d/superop.hpp"

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

}  // namespace

TEST_CASE("lattice distance and wrapping") {
  Lattice circle(Geometry::Circle, std::vector<int>(6, 2));
  CHECK(circle.distance(0, 5) == 1);
  CHECK(circle.distance(0, 3) == 3);
  CHECK(circle.wrap(-1) == 5);
  CHECK(circle.wrap(7) == 1);

  Lattice interval(Geometry::Interval, std::vector<int>(4, 2));
  CHECK(interval.distance(0, 3) == 3);
  CHECK_THROWS_AS(interval.wrap(4), Error);
}

TEST_CASE("region range wraps on circles") {
  Lattice circle(Geometry::Circle, std::vector<int>(6, 2));
  Region r = Region::range(circle, 4, 7);
  CHECK(r.sites == std::vector<int>({4, 5, 0, 1}));
  CHECK(r.dim(circle) == 16);

  Region nb = neighborhood(circle, Region::single(0), 1);
  CHECK(nb.sites == std::vector<int>({0, 1, 5}));
}

TEST_CASE("coarse graining") {
  Lattice circle(Geometry::Circle, std::vector<int>(8, 2));
  Lattice coarse = circle.coarse_grain(2);
  CHECK(coarse.num_sites() == 4);
  CHECK(coarse.local_dim(0) == 4);
  CHECK(coarse.total_dim() == circle.total_dim());
  CHECK_THROWS_AS(circle.coarse_grain(3), Error);
}

TEST_CASE("embed_local matches explicit kron, site 0 most significant") {
  Lattice lat(Geometry::Interval, {2, 2, 2});
  Mat id2 = Mat::Identity(2, 2);
  Mat expect = kron(pauli_x(), kron(id2, id2));
  CHECK((embed_local(lat, Region::single(0), pauli_x()) - expect).norm() ==
        doctest::Approx(0.0));
  expect = kron(id2, kron(id2, pauli_z()));
  CHECK((embed_local(lat, Region::single(2), pauli_z()) - expect).norm() ==
        doctest::Approx(0.0));

  // Two-site operator on a non-contiguous region {0, 2}.
  Mat xz = kron(pauli_x(), pauli_z());
  Mat emb = embed_local(lat, Region({0, 2}), xz);
  CHECK((emb - kron(pauli_x(), kron(id2, pauli_z()))).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("restrict_to_region inverts embed_local") {
  Rng rng(7);
  Lattice lat(Geometry::Interval, {2, 3, 2});
  Region r({1, 2});
  Mat op = random_matrix(rng, 6, 6);
  Mat back = restrict_to_region(lat, r, embed_local(lat, r, op));
  CHECK((back - op).norm() < 1e-12);
  CHECK(support_defect(lat, r, embed_local(lat, r, op)) < 1e-12);

  // An operator entangling sites 0 and 1 is not supported on {1, 2}.
  Mat swap01 = Mat::Zero(12, 12);
  // build via embedding of SWAP on {0,1} with dims 2 and 3? use a generic
  // hermitian on {0,1} instead.
  Mat h = random_hermitian(rng, 6);
  Mat g = embed_local(lat, Region({0, 1}), h);
  CHECK(support_defect(lat, r, g) > 1e-3);
  (void)swap01;
}

TEST_CASE("region_algebra_basis is HS-orthonormal and complete") {
  Lattice lat(Geometry::Interval, {2, 2});
  auto basis = region_algebra_basis(lat, Region::single(1));
  REQUIRE(basis.size() == 4);
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j) {
      Complex g = hs_inner(basis[i], basis[j]);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("op_norm matches SVD") {
  Rng rng(11);
  for (int k = 0; k < 5; ++k) {
    Mat a = random_matrix(rng, 9, 9);
    Eigen::BDCSVD<Mat> svd(a);
    CHECK(op_norm(a) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-8));
  }
}

TEST_CASE("random_unitary is unitary and deterministic per seed") {
  Rng rng(3);
  Mat u = random_unitary(rng, 8);
  CHECK((u.adjoint() * u - Mat::Identity(8, 8)).norm() < 1e-12);
  Rng rng2(3);
  CHECK((u - random_unitary(rng2, 8)).norm() == 0.0);
}

TEST_CASE("rational arithmetic and exact square roots") {
  CHECK(Rational(4, 2).str() == "2/1");
  CHECK(Rational(-2, 4).str() == "-1/2");
  CHECK((Rational(2, 3) * Rational(3, 4)).str() == "1/2");
  CHECK(exact_isqrt(256) == 16);
  CHECK_THROWS_AS(exact_isqrt(17), Error);
}

TEST_CASE("QOP1 round trip and digest") {
  Rng rng(5);
  QopFile f;
  f.dims = {2, 3};
  f.matrices = {random_matrix(rng, 6, 6), random_matrix(rng, 6, 6)};
  auto path = std::filesystem::temp_directory_path() / "qca1d_test.qop";
  write_qop(path.string(), f);
  QopFile g = read_qop(path.string());
  REQUIRE(g.dims == f.dims);
  REQUIRE(g.matrices.size() == 2);
  CHECK((g.matrices[0] - f.matrices[0]).norm() == 0.0);
  CHECK((g.matrices[1] - f.matrices[1]).norm() == 0.0);
  std::string d1 = file_digest(path.string());
  write_qop(path.string(), f);
  CHECK(file_digest(path.string()) == d1);
  std::filesystem::remove(path);
}

TEST_CASE("superop adjoint and norm") {
  Rng rng(13);
  long d = 6;
  Mat u = random_unitary(rng, d);
  SuperOp c = SuperOp::conjugation(u);
  auto est = superop_norm(c);
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-6));

  // Adjoint identity <F†x, y> = <x, Fy> on random probes.
  Mat a = random_matrix(rng, d, d);
  SuperOp f = SuperOp::left_mult(a) + Complex(0, 1) * SuperOp::conjugation(u);
  SuperOp fad = f.adjoint();
  for (int k = 0; k < 3; ++k) {
    Mat x = random_matrix(rng, d, d);
    Mat y = random_matrix(rng, d, d);
    CHECK(std::abs(hs_inner(fad.apply(x), y) - hs_inner(x, f.apply(y))) < 1e-9);
  }

  // Norm of left multiplication equals the operator norm of a.
  auto est2 = superop_norm(SuperOp::left_mult(a));
  CHECK(est2.value == doctest::Approx(op_norm(a)).epsilon(1e-6));
}

TEST_CASE("sign series fixes exact reflections and rounds perturbed ones") {
  Rng rng(17);
  long d = 4;
  auto onb = matrix_algebra_basis(2);  // hermitian basis of M_2 ...
  // embed as left factor of M_4 (span is an HS-orthogonal family in M_4)
  std::vector<Mat> fam;
  for (const Mat& b : onb) fam.push_back(kron(b, Mat::Identity(2, 2)) / std::sqrt(2.0));
  SuperOp p = SuperOp::projector(fam);
  SuperOp x = Complex(2, 0) * p - SuperOp::identity(d);
  SuperOp s = SuperOp::sign_series(x);
  Mat probe = random_matrix(rng, d, d);
  CHECK((s.apply(probe) - x.apply(probe)).norm() < 1e-10);

  // Perturbed reflection: X + eps * hermitian-conjugation noise.
  SuperOp noisy = x + Complex(0.01, 0) * SuperOp::conjugation(random_unitary(rng, d));
  SuperOp sn = SuperOp::sign_series(noisy);
  // sign(noisy) squares to the identity.
  Mat y = sn.apply(sn.apply(probe));
  CHECK((y - probe).norm() < 1e-8 * probe.norm());
}
