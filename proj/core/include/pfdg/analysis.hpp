#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pfdg/assembly.hpp"
#include "pfdg/constraints.hpp"
#include "pfdg/hyperelastic.hpp"
#include "pfdg/problems.hpp"

namespace pfdg {

// Relative error measures of a discrete field against an exact solution:
//   eta   = ||u_h - u||_L2 / ||u||_L2
//   eta_E = |u_h - u|_H1,broken / |u|_H1        (broken H1 seminorm ratio)
//   eta_s = sqrt(int_{Gamma_s} [u_h]^2 dS) / |Gamma_s|
//   eta_D = sqrt(int_{Gamma_D} (u_h - ubar)^2 dS) / |Gamma_D|
// Vector fields sum the squares over components. A zero exact solution makes
// the volume ratios absolute instead of relative.
struct ErrorReport {
  double eta = 0.0;
  double eta_E = 0.0;
  double eta_s = 0.0;
  double eta_D = 0.0;
  int64_t dofs = 0;
  double h = 0.0;  // max element diameter
};

ErrorReport error_norms(const Space& space, const Vec& q,
                        const std::function<double(const Vec3&, int)>& exact,
                        const std::function<Vec3(const Vec3&, int)>& exact_gradient,
                        const DirichletData& bc);

struct RateRow {
  int64_t dofs = 0;
  double h = 0.0;
  double eta = 0.0, eta_E = 0.0, eta_s = 0.0, eta_D = 0.0;
};

// Mesh-refinement error table with least-squares slopes of log(err) vs
// log(h), fitted over the last three rows. Column order: eta, eta_E, eta_s,
// eta_D. A slope is flagged invalid when its errors sit at machine epsilon
// (exact solution inside the trial space) or vanish.
struct RateTable {
  std::vector<RateRow> rows;
  std::array<double, 4> slopes{};
  std::array<bool, 4> slope_valid{};

  double slope_eta() const { return slopes[0]; }
  double slope_eta_E() const { return slopes[1]; }
  double slope_eta_s() const { return slopes[2]; }
  double slope_eta_D() const { return slopes[3]; }
};

// Least-squares slope of log(err) against log(h). Sets *valid to false (and
// returns 0) when fewer than two points remain or any error is below the
// meaningful floor of 1e-13.
double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& err,
                        bool* valid = nullptr);

// Fits all four slope columns over the last three rows.
void fit_rate_slopes(RateTable& table);

// CSV with header `N,h,eta,eta_E,eta_s,eta_D`, one row per mesh, %.16e floats.
std::string rate_table_csv(const RateTable& table);

// sigma_max / sigma_min: exact SVD for n <= 2000, power/inverse iteration
// estimate (within about 20%) above that. Numerically singular matrices
// (sigma_min < 1e-14 sigma_max) report +infinity.
double condition_estimate(const SpMat& A);

// Shared solve-pipeline configuration for benchmark runs and studies.
struct RunOptions {
  int p = 3;
  BasisFamily family = BasisFamily::Chebyshev;
  ConstraintOptions constraints;
  SolveOptions solve;
  NewtonOptions newton;
};

// One benchmark solve: mesh, space, admissible family, solution, and
// diagnostics. The mesh is heap-held so the space's reference stays valid
// across moves.
struct BenchmarkRun {
  std::shared_ptr<Mesh> mesh;
  Space space;
  AdmissibleSubset adm;
  Vec q;

  int64_t constraint_rows = 0;       // stacked rows before reduction
  double constraint_residual = 0.0;  // ||D q - b|| / (1 + ||b||), stacked system
  int64_t reduced_dim = 0;
  double reduced_residual = 0.0;  // linear classes
  SpMat reduced;                  // reduced operator (linear classes)
  NewtonReport newton;            // hyperelastic
  ErrorReport errors;             // filled when the benchmark has an exact solution
  double probe_value = 0.0;       // filled when the benchmark has a probe
  double constraints_seconds = 0.0, assemble_seconds = 0.0, solve_seconds = 0.0;
};

BenchmarkRun solve_benchmark(const BenchmarkSpec& spec, std::shared_ptr<Mesh> mesh,
                             const RunOptions& opts);

// Runs spec.mesh_builder over the given refinement parameters (>= 3 of them)
// and tabulates the error measures. Requires an exact solution; hyperelastic
// benchmarks are rejected.
RateTable convergence_study(const BenchmarkSpec& spec, const std::vector<int>& sizes,
                            const RunOptions& opts);

// Value of component `comp` of the discrete field at x, located by element
// containment (boundary-inclusive). Throws CheckError when x is outside the
// mesh.
double evaluate_solution(const Space& space, const Vec& q, const Vec3& x, int comp);

}  // namespace pfdg
