#pragma once

#include "pfdg/assembly.hpp"
#include "pfdg/constraints.hpp"
#include "pfdg/space.hpp"
#include "pfdg/types.hpp"

namespace pfdg {

// Compressible neo-Hookean-type model
//   psi = mu/2 (tr C - 3) + lambda/4 (J^2 - 1) - (lambda/2 + mu) ln J.
struct Material {
  double lambda = 0.0;
  double mu = 0.0;
  static Material from_youngs(double E, double nu);
};

// Energy density. C is the right Cauchy-Green tensor, either 3x3 or a 2x2
// in-plane block (embedded with C33 = 1 for plane strain).
double energy(const Mat& C, const Material& mat);

// Second Piola-Kirchhoff stress S = lambda/2 (J^2-1) C^-1 + mu (I - C^-1),
// same shape as C.
Mat stress(const Mat& C, const Material& mat);

// Material tangent (2 dS/dC) of the 2x2 plane-strain state in Voigt form:
// rows/cols ordered (11, 22, 12), engineering shear on the strain side, so
// Delta S_voigt = tangent * (eps11, eps22, 2 eps12).
Mat tangent(const Mat& C, const Material& mat);

struct NewtonOptions {
  int steps = 10;        // equal load increments to Lambda = 1
  double tol = 1e-10;    // on ||Wbar' r|| relative to 1 + ||external load||
  int max_iters = 30;    // per increment
  int64_t dense_cutoff = 4000;
};

struct NewtonReport {
  int total_iterations = 0;
  double final_residual = 0.0;
  std::vector<int> iterations_per_step;
};

// Incremental-iterative solve of the plane-strain hyperelastic problem on the
// reference configuration. The admissible subset is built once by the caller
// (zero Dirichlet data on clamped edges); `traction` is the full reference
// traction on Neumann faces and is ramped by the load multiplier.
// Returns the displacement dof vector.
Vec newton_solve(const Space& space, const AdmissibleSubset& adm, const Material& mat,
                 const VectorFn& traction, const NewtonOptions& opts = {},
                 NewtonReport* report = nullptr);

}  // namespace pfdg
