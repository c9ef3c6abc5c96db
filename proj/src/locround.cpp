#include "qca1d/locround.hpp"

namespace qca1d {

namespace {

MatrixAlgebra region_mat_algebra(const Lattice& lat, const Region& r) {
  return MatrixAlgebra::from_orthonormal_basis(region_algebra_basis(lat, r));
}

// Polar part without the near-unitary gate: the glue intertwiner carries an
// arbitrary positive scale (and, on intervals, a factor off the processed
// pairs).
Mat polar_part(const Mat& x) {
  Eigen::BDCSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  require(sv(sv.size() - 1) > 1e-12 * sv(0), ErrorKind::Numerical,
          "glue intertwiner is singular");
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Basis of `alg` restricted to `reg`, rescaled to unit local HS norm; valid
// only for algebras exactly supported on reg.
std::vector<Mat> localize_basis(const Lattice& lat, const Region& reg,
                                const MatrixAlgebra& alg) {
  const double scale =
      std::sqrt(double(lat.total_dim()) / double(reg.dim(lat)));
  std::vector<Mat> loc;
  for (const Mat& b : alg.basis())
    loc.push_back(restrict_to_region(lat, reg, b) * scale);
  return loc;
}

MatrixAlgebra embed_basis_algebra(const Lattice& lat, const Region& reg,
                                  const std::vector<Mat>& loc) {
  const double scale =
      std::sqrt(double(reg.dim(lat)) / double(lat.total_dim()));
  std::vector<Mat> global;
  for (const Mat& b : loc)
    global.push_back(embed_local(lat, reg, b) * scale);
  return MatrixAlgebra::from_orthonormal_basis(std::move(global));
}

MatrixAlgebra pullback_algebra(const QcaMap& alpha, const MatrixAlgebra& a) {
  std::vector<Mat> pre;
  for (const Mat& b : a.basis()) pre.push_back(alpha.apply_inverse(b));
  return MatrixAlgebra::from_orthonormal_basis(std::move(pre));
}

}  // namespace

std::vector<Mat> exact_subspace_intersection(const std::vector<Mat>& a_onb,
                                             const std::vector<Mat>& b_onb) {
  require(!a_onb.empty() && !b_onb.empty(), ErrorKind::InvalidInput,
          "exact_subspace_intersection: empty input");
  const long da = static_cast<long>(a_onb.size());
  const long db = static_cast<long>(b_onb.size());
  const long v = static_cast<long>(a_onb[0].size());
  Mat sa(v, da), sb(v, db);
  for (long i = 0; i < da; ++i)
    sa.col(i) = Eigen::Map<const Vec>(a_onb[i].data(), v);
  for (long j = 0; j < db; ++j)
    sb.col(j) = Eigen::Map<const Vec>(b_onb[j].data(), v);
  Mat overlap = sa.adjoint() * sb;
  Eigen::BDCSVD<Mat> svd(overlap, Eigen::ComputeThinU | Eigen::ComputeThinV);
  std::vector<Mat> out;
  for (long k = 0; k < svd.singularValues().size(); ++k) {
    if (svd.singularValues()(k) <= 1.0 - 1e-9) break;
    Mat x = Mat::Zero(a_onb[0].rows(), a_onb[0].cols());
    for (long i = 0; i < da; ++i) x += svd.matrixU()(i, k) * a_onb[i];
    out.push_back(std::move(x));
  }
  return out;
}

Lattice merge_pair(const Lattice& lat, int x) {
  require(x >= 0 && x + 1 < lat.num_sites(), ErrorKind::InvalidInput,
          "merge_pair: sites must be adjacent in storage order");
  std::vector<int> dims;
  for (int i = 0; i < lat.num_sites(); ++i) {
    if (i == x)
      dims.push_back(lat.local_dim(x) * lat.local_dim(x + 1));
    else if (i != x + 1)
      dims.push_back(lat.local_dim(i));
  }
  return Lattice(lat.geometry(), std::move(dims), lat.dim_cap());
}

BoundaryFactorization extract_boundary(const QcaMap& alpha, int start,
                                       const ExtractOptions& opts) {
  const Lattice& lat = alpha.lattice;
  require(lat.num_sites() >= 8, ErrorKind::InvalidInput,
          "extract_boundary: the window needs 8 distinct sites");
  BoundaryFactorization out;
  for (int k = 0; k < 8; ++k) out.window.push_back(lat.wrap(start + k));
  out.x1 = out.window[3];
  out.x2 = out.window[4];
  auto reg = [&](int l1, int l2) {
    return Region::range(lat, start + 2 + l1, start + 2 + l2);
  };

  // Locality hypotheses: every pair straddling the window maps into its
  // 1-neighborhood, and the two flanking pair algebras are reachable from
  // 1-neighborhoods of the image.
  Rng rng(opts.seed);
  auto gate_check = [&](const std::vector<Mat>& mapped, const Region& target,
                        const std::string& what) {
    DefectEstimate d =
        defect_into_region(lat, mapped, target, opts.gate_samples,
                           std::min(opts.gate_samples, 4), 1e-4, rng);
    out.hypothesis_defect = std::max(out.hypothesis_defect, d.upper_bound);
    require(d.upper_bound <= opts.gate, ErrorKind::GateFailure,
            "boundary hypothesis failed (" + what + "): defect " +
                std::to_string(d.upper_bound) + " exceeds gate " +
                std::to_string(opts.gate));
  };
  for (int l : {-1, 1, 3}) {
    gate_check(conjugated_region_basis(lat, reg(l, l + 1), alpha.u),
               reg(l - 1, l + 2),
               "image of the pair at offset " + std::to_string(l));
  }
  const Mat u_inv = alpha.u.adjoint();
  for (auto [l1, l2, t1, t2, what] :
       {std::tuple{0, 1, -1, 2, "left preimage"},
        std::tuple{2, 3, 1, 4, "right preimage"}}) {
    gate_check(conjugated_region_basis(lat, reg(l1, l2), u_inv), reg(t1, t2),
               what);
  }

  MatrixAlgebra img = alpha.image_algebra(reg(1, 2));
  IntersectOptions iopts = opts.intersect;
  iopts.lattice = &lat;
  iopts.region = reg(2, 3);
  IntersectionResult rr =
      approximate_intersection(img, region_mat_algebra(lat, reg(2, 3)), iopts);
  iopts.region = reg(0, 1);
  IntersectionResult rl =
      approximate_intersection(img, region_mat_algebra(lat, reg(0, 1)), iopts);
  out.r_tilde = rr.c;
  out.l_tilde = rl.c;
  out.commutation_r = rr.commutation;
  out.commutation_l = rl.commutation;

  require(out.l_tilde.dim_algebra() * out.r_tilde.dim_algebra() ==
              img.dim_algebra(),
          ErrorKind::GateFailure,
          "boundary factor dimensions do not multiply up to the pair algebra");
  std::vector<Mat> prods;
  for (const Mat& l : out.l_tilde.basis())
    for (const Mat& r : out.r_tilde.basis()) prods.push_back(l * r);
  std::vector<Mat> prod_onb = orthonormalize_span(prods, 1e-8);
  require(static_cast<long>(prod_onb.size()) == img.dim_algebra(),
          ErrorKind::Numerical, "boundary factor product span collapsed");
  out.generation_distance = subspace_distance(prod_onb, img.basis());
  require(out.generation_distance <= 10 * opts.gate, ErrorKind::GateFailure,
          "boundary factors do not generate the pair image (distance " +
              std::to_string(out.generation_distance) + ")");

  ConjugationResult cres = conjugating_unitary(
      MatrixAlgebra::from_orthonormal_basis(prod_onb), img, opts.conjugation);
  out.fixup_u = cres.u.adjoint();
  out.fixup_distance = cres.distance;
  out.fixup_residual = cres.residual;

  out.l = pullback_algebra(alpha, out.l_tilde);
  out.r = pullback_algebra(alpha, out.r_tilde);
  return out;
}

BoundaryFactorization exact_boundary_factorization(const QcaMap& alpha,
                                                   int start) {
  const Lattice& lat = alpha.lattice;
  require(lat.num_sites() >= 4, ErrorKind::InvalidInput,
          "exact_boundary_factorization: the window needs 4 distinct sites");
  BoundaryFactorization out;
  for (int k = 0; k < 4; ++k) out.window.push_back(lat.wrap(start + k));
  out.x1 = out.window[1];
  out.x2 = out.window[2];

  Region win = Region::range(lat, start, start + 3);
  const long D = lat.total_dim();
  const double down = std::sqrt(double(win.dim(lat)) / double(D));
  std::vector<int> wdims;
  for (int s : win.sites) wdims.push_back(lat.local_dim(s));
  Lattice loclat(Geometry::Interval, wdims);

  // The image of the pair must sit exactly inside the window; everything else
  // then happens on the window factor alone.
  MatrixAlgebra img =
      alpha.image_algebra(Region::range(lat, start + 1, start + 2));
  std::vector<Mat> img_loc;
  for (const Mat& b : img.basis()) {
    Mat loc = restrict_to_region(lat, win, b);
    require((b - embed_local(lat, win, loc)).norm() <= 1e-9,
            ErrorKind::GateFailure,
            "the image of the pair algebra leaves the window");
    img_loc.push_back(loc / down);
  }

  auto cut = [&](int l1, int l2) {
    std::vector<Mat> common = exact_subspace_intersection(
        img_loc,
        region_algebra_basis(loclat, Region::range(loclat, l1, l2)));
    require(!common.empty(), ErrorKind::Numerical,
            "exact boundary intersection is empty");
    return MatrixAlgebra::from_span(std::move(common));
  };
  MatrixAlgebra r_loc = cut(2, 3);
  MatrixAlgebra l_loc = cut(0, 1);
  auto embed_back = [&](const std::vector<Mat>& loc) {
    std::vector<Mat> global;
    for (const Mat& b : loc) global.push_back(embed_local(lat, win, b) * down);
    return MatrixAlgebra::from_orthonormal_basis(std::move(global));
  };
  out.r_tilde = embed_back(r_loc.basis());
  out.l_tilde = embed_back(l_loc.basis());

  require(l_loc.dim_algebra() * r_loc.dim_algebra() ==
              static_cast<long>(img_loc.size()),
          ErrorKind::GateFailure,
          "exact boundary factor dimensions do not multiply up to the pair "
          "algebra");
  std::vector<Mat> prods;
  for (const Mat& l : l_loc.basis())
    for (const Mat& r : r_loc.basis()) prods.push_back(l * r);
  std::vector<Mat> prod_onb = orthonormalize_span(prods, 1e-8);
  out.generation_distance = subspace_distance(prod_onb, img_loc);
  require(prod_onb.size() == img_loc.size() &&
              out.generation_distance <= 1e-9,
          ErrorKind::GateFailure,
          "exact boundary factors do not generate the pair image (distance " +
              std::to_string(out.generation_distance) + ")");
  out.fixup_u = Mat::Identity(D, D);

  out.l = pullback_algebra(alpha, out.l_tilde);
  out.r = pullback_algebra(alpha, out.r_tilde);
  return out;
}

Rational gnvw_index(const BoundaryFactorization& f, const Lattice& lat) {
  long long nr = exact_isqrt(f.r_tilde.dim_algebra());
  long long nl = exact_isqrt(f.l_tilde.dim_algebra());
  Rational right(nr, lat.local_dim(f.x2));
  Rational left(lat.local_dim(f.x1), nl);
  require(right == left, ErrorKind::Numerical,
          "index cross-check failed: " + right.str() + " from the right factor "
          "vs " + left.str() + " from the left factor");
  return right;
}

Rational index_of_approx(const QcaMap& alpha, const ExtractOptions& opts) {
  const Lattice& lat = alpha.lattice;
  const int n = lat.num_sites();
  require(n >= 8, ErrorKind::InvalidInput,
          "index_of_approx: at least 8 sites required");
  int s1 = 0;
  int s2 = (lat.geometry() == Geometry::Circle) ? lat.wrap(n / 2)
                                                : std::min(n - 8, n / 2);
  ExtractOptions o2 = opts;
  o2.seed = opts.seed + 1;
  Rational i1 = gnvw_index(extract_boundary(alpha, s1, opts), lat);
  Rational i2 = gnvw_index(extract_boundary(alpha, s2, o2), lat);
  require(i1 == i2, ErrorKind::Numerical,
          "index estimates disagree between windows: " + i1.str() + " vs " +
              i2.str());
  return i1;
}

namespace {

// Shared core: rounds alpha over the pairs [2i, 2i+1] for i in `ids`
// (consecutive; wrapping seam on circles), certifies, and measures.
RoundedQca round_core(const QcaMap& alpha, const std::vector<int>& ids,
                      bool wrap_seam, const Region& domain,
                      const RoundOptions& opts) {
  const Lattice& lat = alpha.lattice;
  const long D = lat.total_dim();
  const size_t m = ids.size();

  RoundedQca out;
  ExtractOptions eopts = opts.extract;
  for (size_t k = 0; k < m; ++k) {
    eopts.seed = opts.extract.seed + 1000 * (k + 1);
    out.pairs.push_back(
        extract_boundary(alpha, lat.wrap(2 * ids[k] - 3), eopts));
  }
  out.index = gnvw_index(out.pairs[0], lat);
  for (size_t k = 1; k < m; ++k) {
    Rational other = gnvw_index(out.pairs[k], lat);
    require(other == out.index, ErrorKind::Numerical,
            "index disagrees between windows: " + out.index.str() + " vs " +
                other.str());
  }

  // Exactness of the glued map needs tighter conjugation targets than the
  // reporting default.
  ConjugationOptions internal = opts.extract.conjugation;
  internal.target = std::min(internal.target, 1e-11);

  // Seam fix: rotate each R~ into the commutant of the next pair's L~ on the
  // two shared sites, so neighboring image factors commute exactly.
  for (size_t k = 0; k < m; ++k) {
    size_t knext = k + 1;
    if (knext == m) {
      if (!wrap_seam) break;
      knext = 0;
    }
    Region seam = Region::range(lat, 2 * ids[k] + 1, 2 * ids[k] + 2);
    const long ds = seam.dim(lat);
    std::vector<Mat> rloc = localize_basis(lat, seam, out.pairs[k].r_tilde);
    std::vector<Mat> lloc =
        localize_basis(lat, seam, out.pairs[knext].l_tilde);
    ConjugationOptions copts = internal;
    copts.seed = internal.seed + 7919 * (k + 1);
    ConjugationResult cr = conjugating_unitary(
        MatrixAlgebra::from_orthonormal_basis(rloc),
        commutant(MatrixAlgebra::from_orthonormal_basis(lloc)), copts);
    Mat wloc = cr.u.adjoint();
    for (Mat& b : rloc) b = wloc * b * wloc.adjoint();
    require(static_cast<long>(rloc.size() * lloc.size()) == ds * ds,
            ErrorKind::GateFailure,
            "seam factor dimensions do not multiply up to the seam algebra");
    std::vector<Mat> prods;
    for (const Mat& r : rloc)
      for (const Mat& l : lloc) prods.push_back(r * l);
    require(
        static_cast<long>(orthonormalize_span(prods, 1e-8).size()) == ds * ds,
        ErrorKind::GateFailure,
        "seam factors do not generate the two-site algebra");
    out.pairs[k].r_tilde = embed_basis_algebra(lat, seam, rloc);
    out.pairs[k].r = pullback_algebra(alpha, out.pairs[k].r_tilde);
  }

  // Per-pair conjugator g with g (pair image) g† = L~ v R~; g U then maps the
  // pair algebra onto the factored image.
  std::vector<Mat> gmats;
  for (size_t k = 0; k < m; ++k) {
    Region bp = Region::range(lat, 2 * ids[k], 2 * ids[k] + 1);
    std::vector<Mat> prods;
    for (const Mat& l : out.pairs[k].l_tilde.basis())
      for (const Mat& r : out.pairs[k].r_tilde.basis())
        prods.push_back(l * r);
    std::vector<Mat> onb = orthonormalize_span(prods, 1e-8);
    MatrixAlgebra img = alpha.image_algebra(bp);
    require(static_cast<long>(onb.size()) == img.dim_algebra(),
            ErrorKind::GateFailure,
            "boundary factors do not span the pair image dimension");
    ConjugationOptions copts = internal;
    copts.seed = internal.seed + 104729 * (k + 1);
    ConjugationResult cr = conjugating_unitary(
        MatrixAlgebra::from_orthonormal_basis(onb), img, copts);
    out.glue_unitaries.push_back(cr.u);
    gmats.push_back(cr.u * alpha.u);
  }

  // Global unitary from the factored intertwiner Phi = Psi_1 ... Psi_m,
  // Psi_p(W) = sum_b ghat_p(b) W b† over an orthonormal basis of the pair
  // algebra.  The basis sum collapses to a conditional expectation; when a
  // common unitary implements every per-pair map, Phi(W) is that unitary
  // times a scalar (times a factor off the processed pairs on intervals), so
  // the polar part glues all per-pair maps into one.
  Rng rng(opts.seed);
  Mat wmat = random_matrix(rng, D, D);
  for (size_t k = m; k-- > 0;) {
    Region bp = Region::range(lat, 2 * ids[k], 2 * ids[k] + 1);
    Region rest = region_complement(lat, bp);
    Mat y = gmats[k].adjoint() * wmat;
    wmat = gmats[k] * embed_local(lat, rest, restrict_to_region(lat, rest, y));
  }

  out.rounded = alpha;
  out.rounded.u = polar_part(wmat);
  out.rounded.domain = domain;
  out.rounded.declared_range = 2;
  out.rounded.recipe = "rounded(" + alpha.recipe + ")";
  out.rounded.seed = opts.seed;
  out.certified_range = 2;

  ProfileOptions popts;
  popts.samples = 16;
  popts.unitary_samples = 4;
  popts.spot_checks = 3;
  popts.seed = opts.seed + 1;
  LocalityProfile prof = locality_profile(out.rounded, 2, popts);
  out.locality_certificate = prof.epsilon_image;
  out.surjectivity_certificate = prof.epsilon_surj;
  require(std::max(prof.epsilon_image, prof.epsilon_surj) <= 1e-9,
          ErrorKind::GateFailure,
          "rounding failed to certify an exact range-2 map (image defect " +
              std::to_string(prof.epsilon_image) + ", surjectivity defect " +
              std::to_string(prof.epsilon_surj) + ")");

  QcaMap acmp = alpha;
  acmp.domain = domain;
  out.distance = dist_loc(acmp, out.rounded, opts.dist);
  return out;
}

}  // namespace

RoundedQca round_circle(const QcaMap& alpha, const RoundOptions& opts) {
  const Lattice& lat = alpha.lattice;
  require(lat.geometry() == Geometry::Circle, ErrorKind::InvalidInput,
          "round_circle: circle geometry required");
  const int n = lat.num_sites();
  require(n >= 8, ErrorKind::InvalidInput,
          "round_circle: at least 8 sites required");
  if (n % 2 == 1) {
    // Odd circles: merge one adjacent pair into a single site and round the
    // even circle; range 2 there is at most 3 on the original sites.
    QcaMap merged = alpha;
    merged.lattice = merge_pair(lat, 0);
    merged.domain = Region::full(merged.lattice);
    RoundedQca out = round_circle(merged, opts);
    out.rounded.recipe += "[pair-merged]";
    return out;
  }
  std::vector<int> ids(n / 2);
  for (int i = 0; i < n / 2; ++i) ids[i] = i;
  return round_core(alpha, ids, true, Region::full(lat), opts);
}

RoundedQca glue_interval(const QcaMap& alpha, const RoundOptions& opts) {
  const Lattice& lat = alpha.lattice;
  require(lat.geometry() == Geometry::Interval, ErrorKind::InvalidInput,
          "glue_interval: interval geometry required");
  const int n = lat.num_sites();
  const int imin = 2, imax = (n - 5) / 2;  // pairs with full 8-site windows
  require(imin <= imax, ErrorKind::InvalidInput,
          "glue_interval: at least 9 sites required");
  std::vector<int> ids;
  for (int i = imin; i <= imax; ++i) ids.push_back(i);
  return round_core(alpha, ids, false,
                    Region::range(lat, 2 * imin, 2 * imax + 1), opts);
}

}  // namespace qca1d
