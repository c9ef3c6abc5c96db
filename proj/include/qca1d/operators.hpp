#pragma once

#include "qca1d/lattice.hpp"
#include "qca1d/types.hpp"

namespace qca1d {

// op acts on the tensor factors of region X (in X's site order); the result
// acts on the full lattice, identity on the complement, factors arranged in
// global site order.
Mat embed_local(const Lattice& lat, const Region& x, const Mat& op);

// Partial trace onto region X (traces out the complement), normalized so that
// embed_local followed by restrict_to_region is the identity on local
// operators.  Result acts on the factors of X in increasing site order.
Mat restrict_to_region(const Lattice& lat, const Region& x, const Mat& op);

// HS distance between op and embed(restrict(op)); zero iff op is supported
// on X up to the identity.
double support_defect(const Lattice& lat, const Region& x, const Mat& op);

// HS-orthonormal hermitian basis of the full local algebra on region X,
// embedded globally.  Deterministic (matrix-unit combinations).
std::vector<Mat> region_algebra_basis(const Lattice& lat, const Region& x);

// HS-orthonormal basis {u embed(e_pq) u† / sqrt(D/dx)} of the conjugated
// region algebra over all matrix units e_pq of X, computed from column slabs
// of u (one thin product per unit).  Deterministic; elements are not
// hermitian.
std::vector<Mat> conjugated_region_basis(const Lattice& lat, const Region& x,
                                         const Mat& u);

// Local (non-embedded) HS-orthonormal hermitian basis of M_d.
std::vector<Mat> matrix_algebra_basis(long d);

Mat kron(const Mat& a, const Mat& b);

}  // namespace qca1d
