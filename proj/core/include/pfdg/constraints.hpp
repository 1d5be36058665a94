#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "pfdg/nullspace.hpp"
#include "pfdg/space.hpp"
#include "pfdg/types.hpp"

namespace pfdg {

enum class ProblemClass { SecondOrder, FourthOrder };

enum class ConstraintMode { Global, Sequential };

// Dirichlet data. `value(x, comp)` gives the prescribed component (scalar
// problems use comp 0); `normal_deriv` supplies the boundary normal derivative
// required by fourth-order problems.
struct DirichletData {
  std::function<double(const Vec3&, int)> value;
  std::function<double(const Vec3&, const Vec3&)> normal_deriv;  // (point, outward normal)
};

struct ConstraintOptions {
  ConstraintMode mode = ConstraintMode::Sequential;
  ProblemClass problem_class = ProblemClass::SecondOrder;
  bool exact_test_order = false;  // test with pbar = p instead of p - 1
  RankTolerance tol{};
};

// One face's least-squares rows over the face's scalar element dofs.
// Skeleton blocks: columns are (minus element's m_p dofs, plus element's);
// rows are (minus element's m_pbar tests, plus element's) for the value part,
// followed by the same layout for the h^2-scaled normal-gradient part
// (fourth-order only). Boundary blocks: columns/rows of the owning element.
struct FaceConstraintBlock {
  Mat M;
  Vec rhs;
  int pbar = 0;
  int value_rows = 0;  // gradient rows (if any) follow
};

FaceConstraintBlock segment_jump_matrix(const Space& space, const SkeletonFace& face,
                                        ProblemClass problem_class, bool exact_test_order = false);

FaceConstraintBlock dirichlet_matrix(const Space& space, const BoundaryFace& face,
                                     const DirichletData& bc, int component,
                                     ProblemClass problem_class, bool exact_test_order = false);

// Stacked per-face constraint system D q = b over all skeleton and Dirichlet
// faces (all components). face_row_map holds one row range per face, skeleton
// faces first, then Dirichlet boundary faces in mesh order.
struct ConstraintProblem {
  SpMat Dbar;
  Vec bbar;
  std::vector<std::pair<int64_t, int64_t>> face_row_map;
};

ConstraintProblem build_constraint_problem(const Space& space, const DirichletData& bc,
                                           const ConstraintOptions& opts = {});

// Row permutation for sparse elimination over the stacked rows: recursive
// coordinate bisection of the constraint faces (faces straddling a cut are
// deferred to the end of their level, nested-dissection style) keeps
// elimination chains geometrically local and the kept-row factor sparse.
// The result lists every row of cp exactly once.
std::vector<int64_t> constraint_row_order(const Mesh& mesh, const ConstraintProblem& cp);

// The admissible family q = Wbar z + q_b satisfying all constraints.
struct AdmissibleSubset {
  SpMat Wbar;  // N x n_free
  Vec q_b;     // N
  int rank = 0;
  std::vector<int> free_dofs;  // ascending original dof ids, one per column
};

AdmissibleSubset build_admissible(const Space& space, const DirichletData& bc,
                                  const ConstraintOptions& opts = {});

// Element-assembled (test-dof indexed) constraint matrix: row (e, i) sums the
// contributions of every face of element e against its i-th reduced-order test
// function. This is the compact form the worked 1D examples print. Scalar
// spaces only.
std::pair<Mat, Vec> aggregated_constraints(const Space& space, const DirichletData& bc,
                                           const ConstraintOptions& opts = {});

// ||D q - b|| / (1 + ||b||) over the stacked system.
double constraint_residual(const ConstraintProblem& cp, const Vec& q);

}  // namespace pfdg
