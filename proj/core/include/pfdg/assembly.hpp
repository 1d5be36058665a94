#pragma once

#include <functional>
#include <vector>

#include "pfdg/constraints.hpp"
#include "pfdg/space.hpp"
#include "pfdg/types.hpp"

namespace pfdg {

using ScalarFn = std::function<double(const Vec3&)>;
using VectorFn = std::function<Vec3(const Vec3&)>;

// Global stiffness and load of the broken weak form: K(i,j) = a(basis_j, basis_i).
struct DiscreteSystem {
  SpMat K;
  Vec f;
  std::vector<int64_t> dof_map;  // element offsets, size E+1
};

// -div(grad u) = f, u = ubar on the Dirichlet boundary, grad u . n = neumann
// on the Neumann boundary. Continuity and Dirichlet data are enforced by the
// admissible subset; the face terms here keep the form consistent.
DiscreteSystem assemble_poisson(const Space& space, const ScalarFn& source,
                                const ScalarFn& neumann = {});

// Plane-strain linear elasticity from (E, nu) with body force and boundary
// traction on Neumann-tagged faces.
DiscreteSystem assemble_elasticity(const Space& space, double E, double nu,
                                   const VectorFn& body = {}, const VectorFn& traction = {});

// div grad(m1 lap u) + div(m2 grad u) + m3 u = f with clamped-type boundary
// data handled by the constraints; grad_m1 supplies the coefficient gradient
// needed by the third-order face terms.
DiscreteSystem assemble_biharmonic(const Space& space, const ScalarFn& m1,
                                   const VectorFn& grad_m1, const ScalarFn& m2,
                                   const ScalarFn& m3, const ScalarFn& source);

struct SolveOptions {
  // DenseLU/SparseLU factor the reduced operator Wbar' K Wbar. Augmented
  // skips the nullspace basis entirely and factors the sparse saddle system
  // [[K, D'],[D, 0]] over an independent subset D of the constraint rows;
  // the two routes produce the same field (same family, same test space).
  enum class Method { Auto, DenseLU, SparseLU, Augmented };
  Method method = Method::Auto;
  int64_t dense_cutoff = 4000;      // reduced path: dense at or below, sparse above
  int64_t augmented_cutoff = 2000;  // Auto: augmented path when dofs exceed this
};

struct SolveDiagnostics {
  double reduced_residual = 0.0;  // ||Wbar' (K q - f)||
  int64_t reduced_dim = 0;
};

struct Solution {
  Vec q;           // full dof vector, q = Wbar z0 + q_b
  Vec z0;          // reduced solution
  SpMat reduced;   // Wbar' K Wbar
  Vec reduced_rhs; // Wbar' (f - K q_b)
  SolveDiagnostics diag;
};

// Solve the reduced nonsymmetric system and expand to the full dof vector.
Solution reduce_and_solve(const DiscreteSystem& sys, const AdmissibleSubset& adm,
                          const SolveOptions& opts = {});

// Augmented route: D must have full row rank (see sparse_echelon_rows) and
// b its matching right-hand side. Solves [[K, D'],[D, 0]] [q; y] = [f; b],
// whose unique q satisfies D q = b with K q - f orthogonal to the family,
// i.e. the same field reduce_and_solve produces. z0/reduced are left empty;
// diag.reduced_residual reports the relative residual of the saddle solve.
Solution solve_constrained(const DiscreteSystem& sys, const SpMat& D, const Vec& b);

}  // namespace pfdg
