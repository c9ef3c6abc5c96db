#include "qca1d/intersect.hpp"

namespace qca1d {

double commutation_defect(const MatrixAlgebra& a, const MatrixAlgebra& b) {
  require(a.ambient_dim() == b.ambient_dim(), ErrorKind::InvalidInput,
          "commutation_defect: ambient dimension mismatch");
  SuperOp pa = a.projector(), pb = b.projector();
  return superop_norm(pa * pb - pb * pa).value;
}

namespace {

// Binomial-series sign of a matrix with real spectrum and ||y^2 - I|| <= 1/2;
// the same series as SuperOp::sign_series, evaluated on a small coordinate
// matrix.
Mat sign_series_matrix(const Mat& y, double term_tol = 1e-13,
                       int max_terms = 200) {
  const long w = y.rows();
  Mat z = y * y - Mat::Identity(w, w);
  Mat term = Mat::Identity(w, w);
  Mat acc = Mat::Zero(w, w);
  double coeff = 1.0;
  int k = 0;
  while (true) {
    acc += coeff * term;
    if (std::abs(coeff) * term.norm() < term_tol * std::sqrt(double(w))) break;
    if (++k > max_terms)
      throw Error(ErrorKind::Numerical,
                  "intersection: sign series did not converge within " +
                      std::to_string(max_terms) + " terms");
    coeff *= -double(2 * k - 1) / double(2 * k);
    term = z * term;
  }
  return y * acc;
}

}  // namespace

IntersectionResult approximate_intersection(const MatrixAlgebra& a,
                                            const MatrixAlgebra& b,
                                            const IntersectOptions& opts) {
  require(a.ambient_dim() == b.ambient_dim(), ErrorKind::InvalidInput,
          "approximate_intersection: ambient dimension mismatch");
  IntersectionResult out;
  const long bigd = a.ambient_dim();
  const long da = a.dim_algebra(), db = b.dim_algebra();

  // F = P_A P_B vanishes on span(A u B)^perp and maps into span A, so the
  // composite expectation can be rounded in coordinates on W = span(A u B).
  std::vector<Mat> family = a.basis();
  family.insert(family.end(), b.basis().begin(), b.basis().end());
  std::vector<Mat> wb = orthonormalize_span(family, 1e-10);
  const long w = static_cast<long>(wb.size());
  Mat ta(w, da), tb(w, db);
  for (long k = 0; k < w; ++k) {
    for (long i = 0; i < da; ++i) ta(k, i) = hs_inner(wb[k], a.basis()[i]);
    for (long j = 0; j < db; ++j) tb(k, j) = hs_inner(wb[k], b.basis()[j]);
  }
  Mat pa = ta * ta.adjoint();
  Mat pb = tb * tb.adjoint();

  out.commutation = op_norm(pa * pb - pb * pa);
  require(out.commutation <= opts.max_commutation + 1e-12,
          ErrorKind::GateFailure,
          "approximate_intersection: commutation defect " +
              std::to_string(out.commutation) + " exceeds gate " +
              std::to_string(opts.max_commutation));

  Mat fw = pa * pb;
  out.idempotent_defect = op_norm(fw * fw - fw);
  require(out.idempotent_defect <= 0.125 + 1e-12, ErrorKind::GateFailure,
          "approximate_intersection: ||F^2 - F|| = " +
              std::to_string(out.idempotent_defect) + " exceeds 1/8");
  Mat qw = 0.5 * (Mat::Identity(w, w) +
                  sign_series_matrix(2.0 * fw - Mat::Identity(w, w)));

  // Image of Q, spanned through B's basis (Q maps into a neighborhood of B).
  Mat img_coords = qw * tb;
  std::vector<Mat> image;
  for (long j = 0; j < db; ++j) {
    Mat mj = Mat::Zero(bigd, bigd);
    for (long k = 0; k < w; ++k) mj += img_coords(k, j) * wb[k];
    image.push_back(std::move(mj));
  }
  std::vector<Mat> s_onb;
  try {
    s_onb = orthonormalize_clustered(image, opts.keep_threshold, opts.band_lo,
                                     opts.band_hi);
  } catch (const Error& e) {
    throw Error(ErrorKind::Numerical,
                std::string("intersection dimension unresolved: ") + e.what());
  }
  require(!s_onb.empty(), ErrorKind::Numerical,
          "approximate_intersection: empty image");

  if (opts.lattice != nullptr && opts.region.has_value()) {
    // Recovery inside the small ambient of the supporting region.
    std::vector<Mat> local;
    for (const Mat& s : s_onb)
      local.push_back(restrict_to_region(*opts.lattice, *opts.region, s));
    std::vector<Mat> local_onb = orthonormalize_span(local, 1e-6);
    require(local_onb.size() == s_onb.size(), ErrorKind::Numerical,
            "approximate_intersection: image is not supported on the given "
            "region");
    SuperOp q_loc = SuperOp::projector(local_onb);
    MatrixAlgebra c_loc =
        recover_exact_algebra(local_onb, q_loc, opts.recover);
    const double scale = std::sqrt(
        double(opts.region->dim(*opts.lattice)) /
        double(opts.lattice->total_dim()));
    std::vector<Mat> global_basis;
    for (const Mat& cb : c_loc.basis())
      global_basis.push_back(
          embed_local(*opts.lattice, *opts.region, cb) * scale);
    out.c = MatrixAlgebra::from_orthonormal_basis(std::move(global_basis));
  } else {
    SuperOp q_proj = SuperOp::projector(s_onb);
    out.c = recover_exact_algebra(s_onb, q_proj, opts.recover);
  }

  out.recovery_distance = subspace_distance(s_onb, out.c.basis());
  SuperOp f = a.projector() * b.projector();
  out.projection_defect = superop_norm(out.c.projector() - f).value;
  return out;
}

}  // namespace qca1d
