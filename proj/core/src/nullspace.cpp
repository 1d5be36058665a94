#include "pfdg/nullspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace pfdg {

namespace {

struct Elimination {
  std::vector<int> kept_rows;     // rows that carry a pivot, in elimination order
  std::vector<int> pivot_col;     // pivot column of each kept row
  std::vector<char> is_basic;     // per column
};

// In-place Gauss-Jordan on [A | b]. weights (optional) drive MinFill pivoting.
// row_scales/rhs_scales override the per-row magnitude reference used for
// dependent-row detection; composition passes pre-cancellation (absolute-
// value-folded) magnitudes so rows that cancel to roundoff read as dependent.
// rhs_floor is the caller's global rhs unit: it keeps the consistency check
// meaningful for rows whose own rhs chain is near zero (homogeneous rows
// folded against an inhomogeneous state compare noise against noise without
// it).
Elimination gauss_jordan(Mat& A, Vec& b, const RankTolerance& tol, PivotStrategy strategy,
                         const std::vector<int64_t>* weights, const Vec* row_scales = nullptr,
                         const Vec* rhs_scales = nullptr, double rhs_floor = 0.0) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(A.cols());
  Elimination out;
  out.is_basic.assign(m, 0);
  Vec row_scale(n);
  for (int i = 0; i < n; ++i)
    row_scale(i) = row_scales ? (*row_scales)(i)
                              : (m == 0 ? 0.0 : A.row(i).cwiseAbs().maxCoeff());
  const double b_scale =
      std::max(rhs_floor, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);

  for (int i = 0; i < n; ++i) {
    int pc = -1;
    const double floor = tol.rel_pivot_tol * row_scale(i);
    if (strategy == PivotStrategy::LargestAbs) {
      double best = floor;
      for (int j = 0; j < m; ++j) {
        if (out.is_basic[j]) continue;
        const double v = std::abs(A(i, j));
        if (v > best) {
          best = v;
          pc = j;
        }
      }
    } else {
      int64_t best_w = std::numeric_limits<int64_t>::max();
      double best_v = 0.0;
      for (int j = 0; j < m; ++j) {
        if (out.is_basic[j]) continue;
        const double v = std::abs(A(i, j));
        if (v <= floor) continue;
        const int64_t w = weights ? (*weights)[j] : 1;
        if (w < best_w || (w == best_w && v > best_v)) {
          best_w = w;
          best_v = v;
          pc = j;
        }
      }
    }
    if (pc < 0) {
      // Dependent row: must be consistent with what has been eliminated.
      const double ref = rhs_scales ? std::max((*rhs_scales)(i), b_scale) : b_scale;
      if (std::abs(b(i)) > tol.rel_pivot_tol * ref)
        throw SolveError("inconsistent system: dependent row with nonzero right-hand side");
      continue;
    }
    const double p = A(i, pc);
    A.row(i) /= p;
    b(i) /= p;
    for (int r = 0; r < n; ++r) {
      if (r == i) continue;
      const double f = A(r, pc);
      if (f != 0.0) {
        A.row(r) -= f * A.row(i);
        A(r, pc) = 0.0;  // clear exactly
        b(r) -= f * b(i);
      }
    }
    out.is_basic[pc] = 1;
    out.kept_rows.push_back(i);
    out.pivot_col.push_back(pc);
  }
  return out;
}

GeneralSolution extract_family(const Mat& A, const Vec& b, const Elimination& e) {
  const int m = static_cast<int>(A.cols());
  GeneralSolution sol;
  sol.rank = static_cast<int>(e.kept_rows.size());
  for (int j = 0; j < m; ++j)
    (e.is_basic[j] ? sol.basic_vars : sol.free_vars).push_back(j);
  const int nf = static_cast<int>(sol.free_vars.size());
  sol.W = Mat::Zero(m, nf);
  sol.s = Vec::Zero(m);
  for (size_t k = 0; k < e.kept_rows.size(); ++k) {
    const int row = e.kept_rows[k];
    const int pc = e.pivot_col[k];
    sol.s(pc) = b(row);
    for (int jf = 0; jf < nf; ++jf) sol.W(pc, jf) = -A(row, sol.free_vars[jf]);
  }
  for (int jf = 0; jf < nf; ++jf) sol.W(sol.free_vars[jf], jf) = 1.0;
  return sol;
}

}  // namespace

GeneralSolution solve_general(const Mat& A, const Vec& b, const RankTolerance& tol) {
  if (A.rows() == 0 || A.cols() == 0) throw SolveError("solve_general: empty matrix");
  if (A.rows() != b.size()) throw SolveError("solve_general: size mismatch");
  Mat R = A;
  Vec rhs = b;
  Elimination e = gauss_jordan(R, rhs, tol, PivotStrategy::LargestAbs, nullptr);
  return extract_family(R, rhs, e);
}

Vec min_norm(const GeneralSolution& sol) {
  if (sol.W.cols() == 0) return sol.s;
  Mat G = sol.W.transpose() * sol.W;
  Vec rhs = -sol.W.transpose() * sol.s;
  Vec z = G.ldlt().solve(rhs);
  return sol.W * z + sol.s;
}

std::vector<int> independent_rows(const Mat& A, const RankTolerance& tol) {
  Mat R = A;
  Vec rhs = Vec::Zero(A.rows());
  Elimination e = gauss_jordan(R, rhs, tol, PivotStrategy::LargestAbs, nullptr);
  std::vector<int> rows = e.kept_rows;
  std::sort(rows.begin(), rows.end());
  return rows;
}

GeneralSolution identity_state(int m) {
  GeneralSolution sol;
  sol.W = Mat::Identity(m, m);
  sol.s = Vec::Zero(m);
  sol.free_vars.resize(m);
  for (int j = 0; j < m; ++j) sol.free_vars[j] = j;
  sol.rank = 0;
  return sol;
}

GeneralSolution compose(const GeneralSolution& state, const Mat& A_i, const Vec& b_i,
                        PivotStrategy strategy, const RankTolerance& tol) {
  const int m = static_cast<int>(state.W.rows());
  Mat Ahat = A_i * state.W;
  Vec bhat = b_i - A_i * state.s;
  std::vector<int64_t> weights(state.W.cols());
  for (int j = 0; j < state.W.cols(); ++j)
    weights[j] = (state.W.col(j).array() != 0.0).count();
  // Pre-cancellation magnitudes: a row whose substituted form collapses to
  // roundoff relative to these counts as dependent.
  Vec row_scales(A_i.rows());
  if (state.W.cols() == 0) {
    row_scales.setZero();
  } else {
    Mat abs_fold = A_i.cwiseAbs() * state.W.cwiseAbs();
    for (int i = 0; i < A_i.rows(); ++i) row_scales(i) = abs_fold.row(i).maxCoeff();
  }
  Vec rhs_scales = b_i.cwiseAbs() + A_i.cwiseAbs() * state.s.cwiseAbs();
  const double rhs_unit =
      std::max(state.rhs_unit, rhs_scales.size() ? rhs_scales.maxCoeff() : 0.0);
  Elimination e = gauss_jordan(Ahat, bhat, tol, strategy, &weights, &row_scales, &rhs_scales,
                               rhs_unit);
  GeneralSolution local = extract_family(Ahat, bhat, e);

  GeneralSolution out;
  out.W = state.W * local.W;
  out.s = state.s + state.W * local.s;
  out.rank = state.rank + local.rank;
  out.rhs_unit = rhs_unit;
  out.free_vars.reserve(local.free_vars.size());
  for (int lf : local.free_vars) out.free_vars.push_back(state.free_vars[lf]);
  std::vector<char> is_free(m, 0);
  for (int f : out.free_vars) is_free[f] = 1;
  for (int j = 0; j < m; ++j)
    if (!is_free[j]) out.basic_vars.push_back(j);
  return out;
}

SparseComposer::SparseComposer(int m)
    : m_(m), n_live_(m), rows_(m), col_rows_(m), live_(m, 1), s_(Vec::Zero(m)) {
  for (int i = 0; i < m; ++i) {
    rows_[i].push_back({i, 1.0});
    col_rows_[i].push_back(i);
  }
}

double SparseComposer::entry(int row, int col) const {
  for (const auto& [c, v] : rows_[row])
    if (c == col) return v;
  return 0.0;
}

void SparseComposer::add_entry(int row, int col, double delta) {
  auto& r = rows_[row];
  for (auto it = r.begin(); it != r.end(); ++it) {
    if (it->first == col) {
      it->second += delta;
      if (it->second == 0.0) {
        r.erase(it);
        auto& cr = col_rows_[col];
        cr.erase(std::find(cr.begin(), cr.end(), row));
      }
      return;
    }
  }
  if (delta != 0.0) {
    r.push_back({col, delta});
    col_rows_[col].push_back(row);
  }
}

void SparseComposer::add_block(const std::vector<Row>& block, PivotStrategy strategy,
                               const RankTolerance& tol) {
  if (block.empty()) return;
  const int nr = static_cast<int>(block.size());

  // Substitute the accumulated family: Dhat = D * W, bhat = b - D * s.
  // Absolute-value folds run alongside to measure the pre-cancellation
  // magnitude of each substituted row; dependent rows collapse to roundoff
  // relative to that reference.
  std::vector<std::map<int, double>> acc(nr);
  Vec bhat(nr), row_scales(nr), rhs_scales(nr);
  for (int i = 0; i < nr; ++i) {
    bhat(i) = block[i].b;
    double rhs_abs = std::abs(block[i].b);
    std::map<int, double> acc_abs;
    for (const auto& [var, coef] : block[i].a) {
      if (var < 0 || var >= m_) throw SolveError("constraint references unknown variable");
      bhat(i) -= coef * s_(var);
      rhs_abs += std::abs(coef) * std::abs(s_(var));
      for (const auto& [c, v] : rows_[var]) {
        acc[i][c] += coef * v;
        acc_abs[c] += std::abs(coef * v);
      }
    }
    double scale = 0.0;
    for (const auto& [c, v] : acc_abs) scale = std::max(scale, v);
    row_scales(i) = scale;
    rhs_scales(i) = rhs_abs;
    rhs_unit_ = std::max(rhs_unit_, rhs_abs);
  }
  std::vector<int> active;
  for (const auto& row : acc)
    for (const auto& [c, v] : row)
      if (v != 0.0) active.push_back(c);
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());

  const int na = static_cast<int>(active.size());
  Mat local = Mat::Zero(nr, na);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < na; ++j) {
      auto it = acc[i].find(active[j]);
      if (it != acc[i].end()) local(i, j) = it->second;
    }
  std::vector<int64_t> weights(na);
  for (int j = 0; j < na; ++j) weights[j] = static_cast<int64_t>(col_rows_[active[j]].size());

  Elimination e =
      gauss_jordan(local, bhat, tol, strategy, &weights, &row_scales, &rhs_scales, rhs_unit_);

  // Fold each pivot column into the surviving columns, then retire it.
  for (size_t k = 0; k < e.kept_rows.size(); ++k) {
    const int row = e.kept_rows[k];
    const int pc_global = active[e.pivot_col[k]];
    const std::vector<int> src_rows = col_rows_[pc_global];
    std::vector<std::pair<int, double>> src;
    src.reserve(src_rows.size());
    for (int r : src_rows) src.push_back({r, entry(r, pc_global)});

    for (int j = 0; j < na; ++j) {
      if (e.is_basic[j]) continue;  // targets are the surviving (free) columns only
      const double coef = -local(row, j);
      if (coef == 0.0) continue;
      const int target = active[j];
      for (const auto& [r, v] : src) add_entry(r, target, coef * v);
    }
    const double shift = bhat(row);
    if (shift != 0.0)
      for (const auto& [r, v] : src) s_(r) += shift * v;

    for (const auto& [r, v] : src) {
      (void)v;
      auto& rr = rows_[r];
      for (auto it = rr.begin(); it != rr.end(); ++it)
        if (it->first == pc_global) {
          rr.erase(it);
          break;
        }
    }
    col_rows_[pc_global].clear();
    live_[pc_global] = 0;
    --n_live_;
  }
}

std::vector<int> SparseComposer::free_vars() const {
  std::vector<int> out;
  out.reserve(n_live_);
  for (int j = 0; j < m_; ++j)
    if (live_[j]) out.push_back(j);
  return out;
}

SpMat SparseComposer::basis() const {
  std::vector<int> col_index(m_, -1);
  int n = 0;
  for (int j = 0; j < m_; ++j)
    if (live_[j]) col_index[j] = n++;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(nnz()));
  for (int r = 0; r < m_; ++r)
    for (const auto& [c, v] : rows_[r]) trips.push_back({r, col_index[c], v});
  SpMat W(m_, n);
  W.setFromTriplets(trips.begin(), trips.end());
  return W;
}

int64_t SparseComposer::nnz() const {
  int64_t t = 0;
  for (const auto& r : rows_) t += static_cast<int64_t>(r.size());
  return t;
}

SparseEchelon sparse_echelon_rows(const SpMat& A, const Vec& b, const RankTolerance& tol,
                                  const std::vector<int64_t>* row_order) {
  if (b.size() != A.rows()) throw ConfigError("sparse_echelon_rows: rhs size mismatch");
  if (row_order && static_cast<int64_t>(row_order->size()) != A.rows())
    throw ConfigError("sparse_echelon_rows: row order is not a permutation of the rows");
  const int64_t ncols = A.cols();
  Eigen::SparseMatrix<double, Eigen::RowMajor> Ar(A);
  // Global rhs unit: floors the consistency reference so a homogeneous row
  // whose chain picked up only near-zero rhs values compares its residual
  // against the system's rhs scale, not against noise.
  const double rhs_unit = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;

  // Kept rows are stored normalized (unit pivot, pivot entry implicit). A row
  // added later was eliminated against every earlier kept row, so it has no
  // entry at their pivot columns; folding a new row against kept rows in
  // ascending order therefore terminates in one sweep.
  struct KeptRow {
    std::vector<std::pair<int32_t, double>> cols;  // excludes the pivot column
    double beta = 0.0;                             // rhs after normalization
    double scale = 1.0;                            // max |entry| incl. unit pivot
    double rhs_scale = 0.0;                        // |beta| fold for consistency checks
  };
  std::vector<KeptRow> kept_rows;
  std::vector<int32_t> pivot_of(ncols, -1);  // column -> kept row index
  std::vector<int32_t> pivot_col;            // kept row index -> column

  std::vector<double> acc(ncols, 0.0);
  std::vector<char> in_touched(ncols, 0);
  std::vector<int32_t> touched;
  std::priority_queue<int32_t, std::vector<int32_t>, std::greater<int32_t>> work;

  SparseEchelon out;
  for (int64_t rr = 0; rr < Ar.rows(); ++rr) {
    const int64_t r = row_order ? (*row_order)[rr] : rr;
    touched.clear();
    double row_scale = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Ar, r); it; ++it) {
      const int32_t c = static_cast<int32_t>(it.col());
      acc[c] = it.value();
      in_touched[c] = 1;
      touched.push_back(c);
      row_scale = std::max(row_scale, std::abs(it.value()));
      if (pivot_of[c] >= 0) work.push(pivot_of[c]);
    }
    double beta = b(r);
    double rhs_scale = std::abs(beta);

    while (!work.empty()) {
      const int32_t k = work.top();
      work.pop();
      const double coef = acc[pivot_col[k]];
      if (coef == 0.0) continue;  // cancelled, or duplicate queue entry
      acc[pivot_col[k]] = 0.0;
      const KeptRow& kr = kept_rows[k];
      for (const auto& [c, v] : kr.cols) {
        if (!in_touched[c]) {
          in_touched[c] = 1;
          touched.push_back(c);
          acc[c] = 0.0;
        }
        acc[c] -= coef * v;
        if (pivot_of[c] > k) work.push(pivot_of[c]);
      }
      beta -= coef * kr.beta;
      row_scale = std::max(row_scale, std::abs(coef) * kr.scale);
      rhs_scale += std::abs(coef) * kr.rhs_scale;
    }

    // Pivot: largest |entry|, ties to the lowest column.
    int32_t best_col = -1;
    double best = 0.0;
    for (const int32_t c : touched) {
      const double a = std::abs(acc[c]);
      if (a > best || (a == best && best > 0.0 && c < best_col)) {
        best = a;
        best_col = c;
      }
    }

    if (best <= tol.rel_pivot_tol * row_scale) {
      if (std::abs(beta) > tol.rel_pivot_tol * std::max(rhs_scale, rhs_unit))
        throw SolveError("inconsistent system: dependent row with nonzero right-hand side");
    } else {
      const double piv = acc[best_col];
      KeptRow kr;
      kr.cols.reserve(touched.size());
      double max_abs = 1.0;  // the implicit unit pivot
      for (const int32_t c : touched) {
        if (c == best_col || acc[c] == 0.0) continue;
        kr.cols.push_back({c, acc[c] / piv});
        max_abs = std::max(max_abs, std::abs(kr.cols.back().second));
      }
      kr.beta = beta / piv;
      // scales reflect the stored entries, as a later fold subtracts exactly
      // coef * entry; chaining historical magnitudes instead would inflate the
      // dependence threshold without bound
      kr.scale = max_abs;
      kr.rhs_scale = std::abs(kr.beta);
      pivot_of[best_col] = static_cast<int32_t>(kept_rows.size());
      pivot_col.push_back(best_col);
      kept_rows.push_back(std::move(kr));
      out.kept.push_back(r);
    }

    for (const int32_t c : touched) {
      acc[c] = 0.0;
      in_touched[c] = 0;
    }
  }
  out.rank = static_cast<int64_t>(out.kept.size());
  return out;
}

}  // namespace pfdg
