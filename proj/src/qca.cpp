#include "qca1d/qca.hpp"

#include <json.hpp>

#include <fstream>

#include "qca1d/qop_io.hpp"

namespace qca1d {

namespace {

Mat herm_exp(const Mat& h, double scale) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return es.eigenvectors() *
         (Complex(0, scale) * es.eigenvalues().cast<Complex>())
             .array()
             .exp()
             .matrix()
             .asDiagonal() *
         es.eigenvectors().adjoint();
}

std::vector<long> site_strides(const Lattice& lat) {
  const int n = lat.num_sites();
  std::vector<long> stride(n);
  long s = 1;
  for (int x = n - 1; x >= 0; --x) {
    stride[x] = s;
    s *= lat.local_dim(x);
  }
  return stride;
}

// Adjacent pairs (x, x+1) in ascending order; wraps on circles.
std::vector<std::pair<int, int>> adjacent_pairs(const Lattice& lat) {
  std::vector<std::pair<int, int>> pairs;
  const int n = lat.num_sites();
  for (int x = 0; x + 1 < n; ++x) pairs.emplace_back(x, x + 1);
  if (lat.geometry() == Geometry::Circle && n > 2) pairs.emplace_back(n - 1, 0);
  return pairs;
}

}  // namespace

MatrixAlgebra QcaMap::image_algebra(const Region& r) const {
  return MatrixAlgebra::from_orthonormal_basis(
      conjugated_region_basis(lattice, r, u));
}

QcaMap build_identity(const Lattice& lat) {
  QcaMap a;
  a.lattice = lat;
  a.domain = Region::full(lat);
  a.u = Mat::Identity(lat.total_dim(), lat.total_dim());
  a.declared_range = 0;
  a.recipe = "identity";
  return a;
}

QcaMap build_shift(const Lattice& lat, int steps) {
  require(lat.geometry() == Geometry::Circle, ErrorKind::InvalidInput,
          "shift: circle geometry required (interval shifts are disallowed)");
  require(lat.uniform_dims(), ErrorKind::InvalidInput,
          "shift: uniform local dimensions required");
  const int n = lat.num_sites();
  const long D = lat.total_dim();
  auto stride = site_strides(lat);
  Mat u = Mat::Zero(D, D);
  std::vector<int> digits(n);
  for (long col = 0; col < D; ++col) {
    long rem = col;
    for (int x = 0; x < n; ++x) {
      digits[x] = static_cast<int>(rem / stride[x]);
      rem %= stride[x];
    }
    long row = 0;
    for (int x = 0; x < n; ++x) row += digits[x] * stride[lat.wrap(x + steps)];
    u(row, col) = 1.0;
  }
  QcaMap a;
  a.lattice = lat;
  a.domain = Region::full(lat);
  a.u = std::move(u);
  a.declared_range = std::abs(steps);
  a.recipe = "shift(" + std::to_string(steps) + ")";
  return a;
}

QcaMap build_brickwork(const Lattice& lat, int depth, std::uint64_t gate_seed) {
  require(depth >= 1, ErrorKind::InvalidInput, "brickwork: depth >= 1");
  const int n = lat.num_sites();
  const long D = lat.total_dim();
  Rng rng(gate_seed);
  Mat u = Mat::Identity(D, D);
  for (int layer = 0; layer < depth; ++layer) {
    int start = layer % 2;
    Mat layer_u = Mat::Identity(D, D);
    for (int x = start; x + 1 < n + (lat.geometry() == Geometry::Circle &&
                                             start == 1 && n % 2 == 0
                                         ? 1
                                         : 0);
         x += 2) {
      int y = lat.wrap(x + 1);
      Region pair({lat.wrap(x), y});
      long d2 = pair.dim(lat);
      Mat gate = random_unitary(rng, d2);
      layer_u = embed_local(lat, pair, gate) * layer_u;
    }
    u = layer_u * u;
  }
  QcaMap a;
  a.lattice = lat;
  a.domain = Region::full(lat);
  a.u = std::move(u);
  a.declared_range = depth;  // range 1 per layer on original sites
  a.recipe = "brickwork(depth=" + std::to_string(depth) +
             ",seed=" + std::to_string(gate_seed) + ")";
  a.seed = gate_seed;
  return a;
}

QcaMap compose(const std::vector<QcaMap>& alpha_list) {
  require(!alpha_list.empty(), ErrorKind::InvalidInput, "compose: empty list");
  QcaMap out = alpha_list.front();
  for (size_t i = 1; i < alpha_list.size(); ++i) {
    const QcaMap& next = alpha_list[i];
    require(next.lattice.local_dims() == out.lattice.local_dims() &&
                next.lattice.geometry() == out.lattice.geometry(),
            ErrorKind::InvalidInput, "compose: lattice mismatch");
    out.u = next.u * out.u;
    out.declared_range += next.declared_range;
    out.epsilon += next.epsilon;
    out.recipe = "compose(" + out.recipe + "," + next.recipe + ")";
  }
  return out;
}

PerturbStyle perturb_style_from_name(const std::string& s) {
  if (s == "local-unitaries") return PerturbStyle::LocalUnitaries;
  if (s == "hamiltonian-burst") return PerturbStyle::HamiltonianBurst;
  throw Error(ErrorKind::InvalidInput, "unknown perturbation style: " + s);
}

QcaMap perturb(const QcaMap& alpha, double epsilon, PerturbStyle style,
               std::uint64_t seed) {
  require(epsilon >= 0 && epsilon <= 0.2, ErrorKind::InvalidInput,
          "perturb: level must lie in [0, 0.2]");
  QcaMap out = alpha;
  if (epsilon == 0.0) return out;
  Rng rng(seed);
  const Lattice& lat = alpha.lattice;
  const long D = lat.total_dim();
  auto pairs = adjacent_pairs(lat);
  std::vector<Mat> hs;
  std::vector<Region> regions;
  for (auto [x, y] : pairs) {
    Region r({x, y});
    hs.push_back(random_hermitian(rng, r.dim(lat)));
    regions.push_back(r);
  }
  auto layer = [&](double scale) {
    Mat v = Mat::Identity(D, D);
    for (size_t i = 0; i < hs.size(); ++i)
      v = embed_local(lat, regions[i], herm_exp(hs[i], scale)) * v;
    return v;
  };
  Mat v;
  if (style == PerturbStyle::LocalUnitaries) {
    v = layer(epsilon);
  } else {
    Mat step = layer(epsilon / 4.0);
    v = step * step * step * step;
  }
  out.u = v * out.u;
  out.declared_range = alpha.declared_range + 1;
  out.epsilon = alpha.epsilon + epsilon;
  out.seed = seed;
  out.recipe = (style == PerturbStyle::LocalUnitaries)
                   ? "perturb(" + alpha.recipe + ",local-unitaries)"
                   : "perturb(" + alpha.recipe + ",hamiltonian-burst)";
  return out;
}

// Near-inclusion estimate of the span of `basis` (an exact algebra basis,
// possibly conjugated) into the algebra of region `target`: sampled lower
// bound over random combinations and unitaries, 2x basis residual upper
// bound.  All norms are operator norms; residuals are taken against the
// embed-restrict projection, which is the conditional expectation onto the
// region algebra.
DefectEstimate defect_into_region(const Lattice& lat,
                                  const std::vector<Mat>& basis,
                                  const Region& target, int samples,
                                  int unitary_samples, double norm_tol,
                                  Rng& rng) {
  DefectEstimate est;
  est.method = "sampled lower, 2x basis-residual upper";
  auto residual_norm = [&](const Mat& y, double tol) {
    Mat r = y - embed_local(lat, target, restrict_to_region(lat, target, y));
    return op_norm(r, tol);
  };
  std::normal_distribution<double> g;
  for (int k = 0; k < samples; ++k) {
    Mat a = Mat::Zero(basis[0].rows(), basis[0].cols());
    for (const Mat& b : basis) a += Complex(g(rng), g(rng)) * b;
    if (k < unitary_samples) {
      Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
      a = svd.matrixU() * svd.matrixV().adjoint();
    } else {
      double n = op_norm(a, norm_tol);
      if (n < 1e-14) continue;
      a /= n;
    }
    est.lower_bound = std::max(est.lower_bound, residual_norm(a, norm_tol));
  }
  for (const Mat& b : basis) {
    double n = op_norm(b, 1e-8);
    if (n < 1e-14) continue;
    est.upper_bound =
        std::max(est.upper_bound, 2.0 * residual_norm(b, 1e-8) / n);
  }
  return est;
}

LocalityProfile locality_profile(const QcaMap& alpha, int r,
                                 const ProfileOptions& opts) {
  const Lattice& lat = alpha.lattice;
  LocalityProfile prof;
  prof.range = r;
  Rng rng(opts.seed);
  for (int x : alpha.domain.sites) {
    Region nb = neighborhood(lat, Region::single(x), r);
    if (!region_subset(nb, alpha.domain)) continue;
    prof.sites.push_back(x);

    std::vector<Mat> img_basis =
        conjugated_region_basis(lat, Region::single(x), alpha.u);
    prof.image_defect.push_back(defect_into_region(
        lat, img_basis, nb, opts.samples, opts.unitary_samples, opts.norm_tol,
        rng));

    // A_x into alpha(A_nb) equals alpha^{-1}(A_x) into A_nb: conjugating both
    // sides by U† leaves the operator-norm residual unchanged.
    std::vector<Mat> pre_basis =
        conjugated_region_basis(lat, Region::single(x), Mat(alpha.u.adjoint()));
    prof.surj_defect.push_back(defect_into_region(
        lat, pre_basis, nb, opts.samples, opts.unitary_samples, opts.norm_tol,
        rng));
  }
  for (const auto& d : prof.image_defect)
    prof.epsilon_image = std::max(prof.epsilon_image, d.upper_bound);
  for (const auto& d : prof.surj_defect)
    prof.epsilon_surj = std::max(prof.epsilon_surj, d.upper_bound);

  // Volume scaling: region defect <= 4 * eps * |X| on random small regions.
  if (!prof.sites.empty()) {
    std::uniform_int_distribution<size_t> pick(0, prof.sites.size() - 1);
    std::uniform_int_distribution<int> len(2, 3);
    for (int k = 0; k < opts.spot_checks; ++k) {
      int a = prof.sites[pick(rng)];
      int l = len(rng);
      Region x;
      try {
        x = Region::range(lat, a, a + l - 1);
      } catch (const Error&) {
        continue;  // range fell off an interval edge
      }
      Region nb = neighborhood(lat, x, r);
      if (!region_subset(nb, alpha.domain) || !region_subset(x, alpha.domain))
        continue;
      SpotCheck sc;
      sc.sites = x.sites;
      std::vector<Mat> img;
      for (const Mat& b : region_algebra_basis(lat, x))
        img.push_back(alpha.apply(b));
      double worst = 0.0;
      for (const Mat& b : img) {
        double n = op_norm(b, 1e-8);
        if (n < 1e-14) continue;
        Mat res = b - embed_local(lat, nb, restrict_to_region(lat, nb, b));
        worst = std::max(worst, 2.0 * op_norm(res, 1e-8) / n);
      }
      sc.measured = worst;
      sc.bound = 4.0 * prof.epsilon_image * x.size() + 1e-9;
      prof.region_checks.push_back(std::move(sc));
    }
  }
  return prof;
}

DefectEstimate dist_loc(const QcaMap& alpha, const QcaMap& beta,
                        const DistLocOptions& opts) {
  require(alpha.lattice.local_dims() == beta.lattice.local_dims() &&
              alpha.lattice.geometry() == beta.lattice.geometry() &&
              alpha.domain.sites == beta.domain.sites,
          ErrorKind::InvalidInput, "dist_loc: lattice or domain mismatch");
  const Lattice& lat = alpha.lattice;
  // alpha(a) - beta(a) = V (W a W† - a) V† with W = V†U; conjugation by V
  // preserves the operator norm.
  Mat w = beta.u.adjoint() * alpha.u;
  DefectEstimate est;
  est.method =
      "sampled single-site lower, d_x * basis-factor upper (sup not computed "
      "exactly)";
  Rng rng(opts.seed);
  std::normal_distribution<double> g;
  for (int x : alpha.domain.sites) {
    const int d = lat.local_dim(x);
    const auto local = matrix_algebra_basis(d);
    std::vector<Mat> diff;
    for (const Mat& e : local) {
      Mat ee = embed_local(lat, Region::single(x), e);
      diff.push_back(w * ee * w.adjoint() - ee);
    }
    // Upper bound: d_x * max residual over the trace-normalized basis, whose
    // elements are sqrt(d) times the local HS-orthonormal ones.
    double worst = 0.0;
    for (size_t i = 0; i < diff.size(); ++i) {
      double rn = op_norm(diff[i], 1e-8);
      worst = std::max(worst, rn);
      // The basis elements double as deterministic probes for the lower bound.
      double bn = op_norm(local[i]);
      if (bn > 1e-14)
        est.lower_bound = std::max(est.lower_bound, rn / bn);
    }
    est.upper_bound =
        std::max(est.upper_bound, d * std::sqrt(double(d)) * worst);
    for (int k = 0; k < opts.samples; ++k) {
      Vec c(static_cast<long>(local.size()));
      for (long i = 0; i < c.size(); ++i) c(i) = Complex(g(rng), g(rng));
      Mat a_loc = Mat::Zero(d, d);
      for (size_t i = 0; i < local.size(); ++i) a_loc += c(i) * local[i];
      if (k < opts.unitary_samples) {
        Eigen::BDCSVD<Mat> svd(a_loc, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Mat u_loc = svd.matrixU() * svd.matrixV().adjoint();
        for (size_t i = 0; i < local.size(); ++i)
          c(i) = hs_inner(local[i], u_loc);
      } else {
        double scale = op_norm(a_loc);
        if (scale < 1e-14) continue;
        c /= scale;
      }
      Mat r = Mat::Zero(lat.total_dim(), lat.total_dim());
      for (size_t i = 0; i < local.size(); ++i) r += c(i) * diff[i];
      est.lower_bound = std::max(est.lower_bound, op_norm(r, opts.norm_tol));
    }
  }
  return est;
}

void write_qca(const std::string& path, const QcaMap& alpha) {
  QopFile f;
  f.dims = alpha.lattice.local_dims();
  f.matrices = {alpha.u};
  write_qop(path, f);
  nlohmann::ordered_json meta;
  meta["geometry"] = geometry_name(alpha.lattice.geometry());
  meta["dims"] = alpha.lattice.local_dims();
  meta["domain"] = alpha.domain.sites;
  meta["range"] = alpha.declared_range;
  meta["recipe"] = alpha.recipe;
  meta["epsilon"] = alpha.epsilon;
  meta["seed"] = alpha.seed;
  meta["unitary_digest"] = file_digest(path);
  std::ofstream out(path + ".json");
  require(out.good(), ErrorKind::InvalidInput,
          "cannot open for write: " + path + ".json");
  out << meta.dump(2) << "\n";
}

QcaMap read_qca(const std::string& path) {
  QopFile f = read_qop(path);
  std::ifstream in(path + ".json");
  require(in.good(), ErrorKind::InvalidInput,
          "missing metadata sidecar: " + path + ".json");
  nlohmann::json meta = nlohmann::json::parse(in);
  QcaMap a;
  a.lattice = Lattice(geometry_from_name(meta.at("geometry")),
                      meta.at("dims").get<std::vector<int>>());
  require(a.lattice.local_dims() == f.dims, ErrorKind::InvalidInput,
          "QCA file: dims disagree between QOP1 and metadata");
  a.domain = Region(meta.at("domain").get<std::vector<int>>());
  a.declared_range = meta.at("range");
  a.recipe = meta.at("recipe");
  a.epsilon = meta.at("epsilon");
  a.seed = meta.at("seed");
  require(f.matrices.size() == 1, ErrorKind::InvalidInput,
          "QCA file: expected exactly one unitary");
  a.u = f.matrices[0];
  double unit_defect =
      (a.u.adjoint() * a.u - Mat::Identity(a.u.rows(), a.u.cols())).norm();
  require(unit_defect <= 1e-10 * a.u.rows(), ErrorKind::InvalidInput,
          "QCA file: matrix is not unitary");
  return a;
}

}  // namespace qca1d
