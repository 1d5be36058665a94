#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pfdg/assembly.hpp"
#include "pfdg/constraints.hpp"
#include "pfdg/mesh.hpp"
#include "pfdg/types.hpp"

namespace pfdg {

enum class PdeClass { Poisson, Elasticity, Biharmonic, Hyperelastic };

// A fully specified benchmark problem: geometry family, exact solution with
// analytic derivatives (where known), source/boundary data derived from it,
// and material/coefficient functions.
struct BenchmarkSpec {
  std::string name;
  PdeClass pde = PdeClass::Poisson;
  int dim = 2;
  int components = 1;
  ProblemClass problem_class = ProblemClass::SecondOrder;
  int min_order = 1;

  // Analytic exact solution (empty for Cook's membrane, which has none).
  std::function<double(const Vec3&, int)> exact;        // (point, component)
  std::function<Vec3(const Vec3&, int)> exact_gradient; // physical gradient
  std::function<double(const Vec3&, int)> exact_laplacian;

  ScalarFn source;     // Poisson / biharmonic right-hand side
  VectorFn body;       // elasticity body force
  VectorFn traction;   // traction on Neumann faces
  ScalarFn neumann;    // Poisson Neumann flux
  DirichletData dirichlet;

  // Fourth-order coefficients.
  ScalarFn m1, m2, m3;
  VectorFn grad_m1;

  // Elastic / hyperelastic material.
  double E = 0.0, nu = 0.0;
  double p0 = 0.0;  // Cook shear load

  // Structured mesh family indexed by refinement parameter n, plus the sizes
  // used by default in studies.
  std::function<Mesh(int)> mesh_builder;
  std::vector<int> default_sizes;

  // Point probe (Cook's membrane tip A) and its reference value.
  bool has_probe = false;
  Vec3 probe_point = Vec3::Zero();
  int probe_component = 0;
  double probe_reference = 0.0;

  uint64_t seed = 42;
};

// name in {ex1_trig, ex2_exp2d, ex3_lshape_poisson, ex4_lshape_elastic,
// ex5_cook, ex6_biharmonic, ex7_exp3d}; unknown names are ConfigErrors.
BenchmarkSpec get_benchmark(const std::string& name, uint64_t seed = 42);

std::vector<std::string> benchmark_names();

}  // namespace pfdg
