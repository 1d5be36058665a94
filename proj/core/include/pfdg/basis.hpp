#pragma once

#include "pfdg/types.hpp"

namespace pfdg {

enum class BasisFamily { Chebyshev, Legendre, Monomial };

BasisFamily basis_family_from_string(const std::string& name);
std::string to_string(BasisFamily family);

// Number of d-variate polynomials of total degree <= p.
int basis_count(int dim, int p);

// Exponent tuples of the d-variate monomials of total degree <= p in graded
// lexicographic order (degree ascending, first exponent descending within a
// degree). Row k gives the exponents of basis function k.
Eigen::MatrixXi graded_lex_exponents(int dim, int p);

// Values and derivatives of one element's scaled basis at a set of physical
// points. Basis k is the product of 1D family polynomials in the local
// coordinates xi_a = (2/h) (x_a - xm_a); derivatives are w.r.t. physical x.
//
// Layouts (n = #points, m = basis_count(dim,p)):
//   values:  n x m
//   grads:   n x (m*dim)             column m*a + k  = d(psi_k)/dx_a... see note
//   hess:    n x (m*n2), n2 = dim(dim+1)/2, pairs in lexicographic order
//            (1D: xx; 2D: xx,xy,yy; 3D: xx,xy,xz,yy,yz,zz)
//   third:   n x (m*n3), n3 = C(dim+2,3), triples in lexicographic order
//            (2D: xxx,xxy,xyy,yyy)
//
// Note on layout: block for basis k occupies contiguous columns
// [k*dim, (k+1)*dim) in grads, [k*n2, (k+1)*n2) in hess, etc.
struct BasisEval {
  Mat values;
  Mat grads;
  Mat hess;
  Mat third;
  int m = 0;
  int dim = 0;
};

// orders: how many derivative levels to fill (0 = values only, up to 3).
BasisEval evaluate_basis(BasisFamily family, int dim, int p, const Vec3& midpoint, double h,
                         const Mat& points, int orders);

}  // namespace pfdg
