#include "qca1d/operators.hpp"

#include <algorithm>

namespace qca1d {

namespace {

// Mixed-radix strides in global site order; site 0 is the most significant
// factor (row-major Kronecker convention).
std::vector<long> global_strides(const Lattice& lat) {
  const int n = lat.num_sites();
  std::vector<long> stride(n);
  long s = 1;
  for (int x = n - 1; x >= 0; --x) {
    stride[x] = s;
    s *= lat.local_dim(x);
  }
  return stride;
}

// For each global index, the index of its region part (in x's factor order)
// and of its complement part.
void split_indices(const Lattice& lat, const Region& x, std::vector<long>& reg_of,
                   std::vector<long>& comp_of) {
  const long D = lat.total_dim();
  const auto stride = global_strides(lat);
  std::vector<long> lstride(x.sites.size());
  long s = 1;
  for (int p = static_cast<int>(x.sites.size()) - 1; p >= 0; --p) {
    lstride[p] = s;
    s *= lat.local_dim(x.sites[p]);
  }
  reg_of.assign(D, 0);
  comp_of.assign(D, 0);
  for (long I = 0; I < D; ++I) {
    long rem = I, r = 0, c = 0;
    for (int site = 0; site < lat.num_sites(); ++site) {
      long digit = rem / stride[site];
      rem -= digit * stride[site];
      auto it = std::find(x.sites.begin(), x.sites.end(), site);
      if (it != x.sites.end()) {
        r += digit * lstride[it - x.sites.begin()];
      } else {
        c = c * lat.local_dim(site) + digit;
      }
    }
    reg_of[I] = r;
    comp_of[I] = c;
  }
}

}  // namespace

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat embed_local(const Lattice& lat, const Region& x, const Mat& op) {
  for (int s : x.sites)
    require(s >= 0 && s < lat.num_sites(), ErrorKind::InvalidInput,
            "embed_local: region site not in lattice");
  const long dx = x.dim(lat);
  require(op.rows() == dx && op.cols() == dx, ErrorKind::InvalidInput,
          "embed_local: operator dimension does not match region");
  const long D = lat.total_dim();
  std::vector<long> reg_of, comp_of;
  split_indices(lat, x, reg_of, comp_of);

  Mat out = Mat::Zero(D, D);
  for (long I = 0; I < D; ++I)
    for (long J = 0; J < D; ++J)
      if (comp_of[I] == comp_of[J]) out(I, J) = op(reg_of[I], reg_of[J]);
  return out;
}

Mat restrict_to_region(const Lattice& lat, const Region& x, const Mat& op) {
  const long D = lat.total_dim();
  require(op.rows() == D && op.cols() == D, ErrorKind::InvalidInput,
          "restrict_to_region: operator is not a global operator");
  const long dx = x.dim(lat);
  const long dc = D / dx;
  std::vector<long> reg_of, comp_of;
  split_indices(lat, x, reg_of, comp_of);

  Mat out = Mat::Zero(dx, dx);
  for (long I = 0; I < D; ++I)
    for (long J = 0; J < D; ++J)
      if (comp_of[I] == comp_of[J]) out(reg_of[I], reg_of[J]) += op(I, J);
  return out / static_cast<double>(dc);
}

double support_defect(const Lattice& lat, const Region& x, const Mat& op) {
  Mat local = restrict_to_region(lat, x, op);
  return (op - embed_local(lat, x, local)).norm();
}

std::vector<Mat> matrix_algebra_basis(long d) {
  std::vector<Mat> basis;
  basis.reserve(d * d);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (long p = 0; p < d; ++p) {
    Mat e = Mat::Zero(d, d);
    e(p, p) = 1.0;
    basis.push_back(e);
  }
  for (long p = 0; p < d; ++p)
    for (long q = p + 1; q < d; ++q) {
      Mat re = Mat::Zero(d, d), im = Mat::Zero(d, d);
      re(p, q) = inv_sqrt2;
      re(q, p) = inv_sqrt2;
      im(p, q) = Complex(0, inv_sqrt2);
      im(q, p) = Complex(0, -inv_sqrt2);
      basis.push_back(re);
      basis.push_back(im);
    }
  return basis;
}

std::vector<Mat> conjugated_region_basis(const Lattice& lat, const Region& x,
                                         const Mat& u) {
  const long D = lat.total_dim();
  require(u.rows() == D && u.cols() == D, ErrorKind::InvalidInput,
          "conjugated_region_basis: matrix does not act on the lattice");
  const long dx = x.dim(lat);
  const long dc = D / dx;
  std::vector<long> reg_of, comp_of;
  split_indices(lat, x, reg_of, comp_of);

  // u (e_pq x I) u† = M_p M_q†, where M_r gathers the columns of u whose
  // region index is r.  One thin product per matrix unit instead of two full
  // ones per basis element.
  std::vector<Mat> slabs(dx, Mat(D, dc));
  for (long I = 0; I < D; ++I) slabs[reg_of[I]].col(comp_of[I]) = u.col(I);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dc));
  std::vector<Mat> out;
  out.reserve(dx * dx);
  for (long p = 0; p < dx; ++p)
    for (long q = 0; q < dx; ++q)
      out.push_back(scale * (slabs[p] * slabs[q].adjoint()));
  return out;
}

std::vector<Mat> region_algebra_basis(const Lattice& lat, const Region& x) {
  const long dx = x.dim(lat);
  const long D = lat.total_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(D / dx));
  std::vector<Mat> out;
  out.reserve(dx * dx);
  for (const Mat& b : matrix_algebra_basis(dx))
    out.push_back(scale * embed_local(lat, x, b));
  return out;
}

}  // namespace qca1d
