#pragma once

#include <cstdint>
#include <vector>

#include "pfdg/types.hpp"

namespace pfdg {

// Governs dependent-row detection: a row is dependent when every remaining
// entry falls below rel_pivot_tol times the row's max |entry| at input.
// rel_consistency_tol separately bounds how large a dependent row's rhs
// residual may be (relative to the system's rhs scale) before the system is
// declared inconsistent. Moment-matched boundary data can be overdetermined at
// approximation-error scale on some mesh families (structured hexahedra most
// prominently); raising rel_consistency_tol drops such rows instead of
// erroring, which reproduces the classical assume-consistent elimination. The
// violation remains visible in the stacked-constraint residual diagnostics.
struct RankTolerance {
  double rel_pivot_tol = 1e-10;
  double rel_consistency_tol = 1e-10;
};

enum class PivotStrategy {
  LargestAbs,  // largest |entry| in the row, ties to the lowest column
  MinFill,     // fewest nonzeros in the accumulated basis column, ties to
               // largest |entry|, then lowest column
};

// Full solution family x = W z + s of a consistent linear system A x = b.
// Rows of W at free_vars form an identity block; columns follow free_vars.
struct GeneralSolution {
  Mat W;  // m x (m - rank)
  Vec s;  // m
  std::vector<int> basic_vars;  // ascending
  std::vector<int> free_vars;   // ascending
  int rank = 0;
  // Largest pre-cancellation right-hand-side magnitude folded into this family
  // so far. Floors the dependent-row consistency reference, so a residual that
  // is roundoff relative to the system's rhs never reads as an inconsistency
  // even when the row's own chain carried only near-zero right-hand sides.
  double rhs_unit = 0.0;
};

// Gauss-Jordan with per-row pivot search. Dependent rows are deleted after a
// right-hand-side consistency check (|rhs| <= rel_pivot_tol * ||b||_inf).
// Throws SolveError on inconsistency or an empty matrix.
GeneralSolution solve_general(const Mat& A, const Vec& b, const RankTolerance& tol = {});

// Minimum-Euclidean-norm member of the family: solves W'W z = -W's.
Vec min_norm(const GeneralSolution& sol);

// Indices (ascending) of a maximal independent subset of A's rows; A is not
// modified (elimination runs on a working copy).
std::vector<int> independent_rows(const Mat& A, const RankTolerance& tol = {});

// Fresh accumulator state: W = identity, s = 0 (every variable free).
GeneralSolution identity_state(int m);

// Substitutes x = W z + s into A_i x = b_i (A_i over the ORIGINAL variables),
// solves (A_i W) y = b_i - A_i s for its own family (W_i, s_i), and returns
// the composition W <- W W_i, s <- W s_i + s.
GeneralSolution compose(const GeneralSolution& state, const Mat& A_i, const Vec& b_i,
                        PivotStrategy strategy = PivotStrategy::LargestAbs,
                        const RankTolerance& tol = {});

// Forward elimination over the rows of a sparse system, in row order.
// Identifies a maximal subset of rows that are independent of their
// predecessors without forming a nullspace basis, which keeps the cost
// mesh-local even when the basis of the solution family would be dense.
// Dependent rows use the same pre-cancellation scale rule as compose(), and
// a dependent row whose right-hand side disagrees with the rows that imply
// it raises SolveError.
struct SparseEchelon {
  std::vector<int64_t> kept;  // row indices in elimination order, |kept| == rank
  int64_t rank = 0;
};

// row_order (optional) is the processing order, a permutation of the rows;
// a fill-reducing order (see constraint_row_order) changes which rows are
// kept but not the row space they span.
SparseEchelon sparse_echelon_rows(const SpMat& A, const Vec& b, const RankTolerance& tol = {},
                                  const std::vector<int64_t>* row_order = nullptr);

// Sparse accumulator for the same composition at mesh scale. Columns are
// identified by the original index of their free variable (never renumbered),
// so the free-identity block is maintained by construction.
class SparseComposer {
 public:
  struct Row {
    std::vector<std::pair<int, double>> a;  // (original variable, coefficient)
    double b = 0.0;
  };

  explicit SparseComposer(int m);

  // Absorb one constraint block; strictly sequential and deterministic.
  void add_block(const std::vector<Row>& rows, PivotStrategy strategy = PivotStrategy::MinFill,
                 const RankTolerance& tol = {});

  int dofs() const { return m_; }
  int free_count() const { return n_live_; }
  int rank() const { return m_ - n_live_; }
  std::vector<int> free_vars() const;  // ascending original indices
  SpMat basis() const;                 // m x free_count, columns follow free_vars()
  const Vec& shift() const { return s_; }
  int64_t nnz() const;

 private:
  double entry(int row, int col) const;
  void add_entry(int row, int col, double delta);

  int m_ = 0;
  int n_live_ = 0;
  std::vector<std::vector<std::pair<int, double>>> rows_;  // per variable: (col, val)
  std::vector<std::vector<int>> col_rows_;                 // per col: rows with a nonzero
  std::vector<char> live_;
  Vec s_;
  double rhs_unit_ = 0.0;  // running rhs magnitude; floors the consistency check
};

}  // namespace pfdg
