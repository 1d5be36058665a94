#include "pfdg/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "element_rules.hpp"
#include "pfdg/quadrature.hpp"

namespace pfdg {

namespace {

using detail::quad_point;

int pbar_for(int pmin, ProblemClass problem_class, bool exact) {
  if (problem_class == ProblemClass::FourthOrder && pmin < 2)
    throw ConfigError("fourth-order constraints require p >= 2");
  if (exact) return pmin;
  const int floor_v = problem_class == ProblemClass::FourthOrder ? 1 : 0;
  return std::max(floor_v, pmin - 1);
}

QuadRule face_rule(const Mesh& mesh, const std::vector<int>& verts, int degree) {
  if (mesh.dim == 1) {
    QuadRule r;
    r.points = mesh.vertices[verts[0]].transpose();
    r.weights = Vec::Ones(1);
    return r;
  }
  if (mesh.dim == 2)
    return rule_segment(mesh.vertices[verts[0]], mesh.vertices[verts[1]], degree);
  return rule_rect3d({mesh.vertices[verts[0]], mesh.vertices[verts[1]], mesh.vertices[verts[2]],
                      mesh.vertices[verts[3]]},
                     degree);
}

Vec normal_component(const BasisEval& ev, const Vec3& n, int q) {
  Vec out(ev.m);
  for (int k = 0; k < ev.m; ++k) {
    double g = 0.0;
    for (int d = 0; d < ev.dim; ++d) g += ev.grads(q, k * ev.dim + d) * n[d];
    out(k) = g;
  }
  return out;
}

}  // namespace

FaceConstraintBlock segment_jump_matrix(const Space& space, const SkeletonFace& face,
                                        ProblemClass problem_class, bool exact_test_order) {
  const Mesh& mesh = *space.mesh;
  const int em = face.minus, ep = face.plus;
  const int pm = space.order(em), pp = space.order(ep);
  const bool fourth = problem_class == ProblemClass::FourthOrder;
  const int pbar = pbar_for(std::min(pm, pp), problem_class, exact_test_order);
  const int mbar = basis_count(mesh.dim, pbar);
  const int mm = space.mcount(em), mp = space.mcount(ep);

  QuadRule rule = face_rule(mesh, face.vertices, pm + pp + 2);
  const int deriv = fourth ? 1 : 0;
  BasisEval tbm = space.eval(em, rule.points, deriv, pbar);
  BasisEval tbp = space.eval(ep, rule.points, deriv, pbar);
  BasisEval trm = space.eval(em, rule.points, deriv);
  BasisEval trp = space.eval(ep, rule.points, deriv);

  FaceConstraintBlock blk;
  blk.pbar = pbar;
  blk.value_rows = 2 * mbar;
  const int rows = fourth ? 4 * mbar : 2 * mbar;
  blk.M = Mat::Zero(rows, mm + mp);
  blk.rhs = Vec::Zero(rows);

  const double h2 = face.measure * face.measure;
  Vec test(2 * mbar), trial(mm + mp);
  for (int q = 0; q < rule.weights.size(); ++q) {
    const double w = rule.weights(q);
    test.head(mbar) = -tbm.values.row(q).transpose();
    test.tail(mbar) = tbp.values.row(q).transpose();
    trial.head(mm) = -trm.values.row(q).transpose();
    trial.tail(mp) = trp.values.row(q).transpose();
    blk.M.topRows(2 * mbar) += w * test * trial.transpose();
    if (fourth) {
      test.head(mbar) = -normal_component(tbm, face.normal, q);
      test.tail(mbar) = normal_component(tbp, face.normal, q);
      trial.head(mm) = -normal_component(trm, face.normal, q);
      trial.tail(mp) = normal_component(trp, face.normal, q);
      blk.M.bottomRows(2 * mbar) += w * h2 * test * trial.transpose();
    }
  }
  return blk;
}

FaceConstraintBlock dirichlet_matrix(const Space& space, const BoundaryFace& face,
                                     const DirichletData& bc, int component,
                                     ProblemClass problem_class, bool exact_test_order) {
  const Mesh& mesh = *space.mesh;
  const int e = face.element;
  const int p = space.order(e);
  const bool fourth = problem_class == ProblemClass::FourthOrder;
  const int pbar = pbar_for(p, problem_class, exact_test_order);
  const int mbar = basis_count(mesh.dim, pbar);
  const int m = space.mcount(e);
  if (!bc.value) throw ConfigError("Dirichlet face without boundary data");
  if (fourth && !bc.normal_deriv)
    throw ConfigError("fourth-order Dirichlet face without normal-derivative data");

  QuadRule rule = face_rule(mesh, face.vertices, 2 * p + 2);
  const int deriv = fourth ? 1 : 0;
  BasisEval tb = space.eval(e, rule.points, deriv, pbar);
  BasisEval tr = space.eval(e, rule.points, deriv);

  FaceConstraintBlock blk;
  blk.pbar = pbar;
  blk.value_rows = mbar;
  const int rows = fourth ? 2 * mbar : mbar;
  blk.M = Mat::Zero(rows, m);
  blk.rhs = Vec::Zero(rows);

  const double h2 = face.measure * face.measure;
  for (int q = 0; q < rule.weights.size(); ++q) {
    const double w = rule.weights(q);
    const Vec3 x = quad_point(rule.points, q);
    Vec test = tb.values.row(q).transpose();
    Vec trial = tr.values.row(q).transpose();
    blk.M.topRows(mbar) += w * test * trial.transpose();
    blk.rhs.head(mbar) += w * bc.value(x, component) * test;
    if (fourth) {
      Vec gtest = normal_component(tb, face.normal, q);
      Vec gtrial = normal_component(tr, face.normal, q);
      blk.M.bottomRows(mbar) += w * h2 * gtest * gtrial.transpose();
      blk.rhs.tail(mbar) += w * h2 * bc.normal_deriv(x, face.normal) * gtest;
    }
  }
  return blk;
}

ConstraintProblem build_constraint_problem(const Space& space, const DirichletData& bc,
                                           const ConstraintOptions& opts) {
  const Mesh& mesh = *space.mesh;
  const int nc = space.components;
  ConstraintProblem cp;
  std::vector<Triplet> trips;
  int64_t row = 0;

  auto append_block = [&](const Mat& M, const Vec& rhs, const std::vector<int64_t>& cols) {
    for (int i = 0; i < M.rows(); ++i)
      for (int j = 0; j < M.cols(); ++j)
        if (M(i, j) != 0.0)
          trips.push_back({static_cast<int>(row + i), static_cast<int>(cols[j]), M(i, j)});
    cp.bbar.conservativeResize(row + M.rows());
    cp.bbar.segment(row, M.rows()) = rhs;
    row += M.rows();
  };

  cp.bbar = Vec::Zero(0);
  for (const auto& face : mesh.skeleton) {
    const int64_t begin = row;
    FaceConstraintBlock blk = segment_jump_matrix(space, face, opts.problem_class,
                                                  opts.exact_test_order);
    const int mm = space.mcount(face.minus), mp = space.mcount(face.plus);
    for (int c = 0; c < nc; ++c) {
      std::vector<int64_t> cols(mm + mp);
      for (int k = 0; k < mm; ++k) cols[k] = space.dof(face.minus, c, k);
      for (int k = 0; k < mp; ++k) cols[mm + k] = space.dof(face.plus, c, k);
      append_block(blk.M, blk.rhs, cols);
    }
    cp.face_row_map.push_back({begin, row});
  }
  for (const auto& face : mesh.boundary) {
    if (face.tag != BoundaryTag::Dirichlet) continue;
    const int64_t begin = row;
    const int m = space.mcount(face.element);
    for (int c = 0; c < nc; ++c) {
      FaceConstraintBlock blk =
          dirichlet_matrix(space, face, bc, c, opts.problem_class, opts.exact_test_order);
      std::vector<int64_t> cols(m);
      for (int k = 0; k < m; ++k) cols[k] = space.dof(face.element, c, k);
      append_block(blk.M, blk.rhs, cols);
    }
    cp.face_row_map.push_back({begin, row});
  }

  cp.Dbar.resize(row, space.total());
  cp.Dbar.setFromTriplets(trips.begin(), trips.end());
  return cp;
}

namespace {

struct FaceSite {
  int64_t face = 0;     // index into face_row_map
  Vec3 mid = Vec3::Zero();
  int e0 = -1, e1 = -1;  // adjacent elements (e1 < 0 on the boundary)
};

void order_faces(const Mesh& mesh, std::vector<FaceSite>& sites, int64_t lo, int64_t hi,
                 std::vector<int64_t>& out) {
  const int64_t n = hi - lo;
  if (n <= 0) return;
  if (n <= 24) {
    for (int64_t i = lo; i < hi; ++i) out.push_back(sites[i].face);
    return;
  }
  Vec3 bmin = sites[lo].mid, bmax = sites[lo].mid;
  for (int64_t i = lo + 1; i < hi; ++i) {
    bmin = bmin.cwiseMin(sites[i].mid);
    bmax = bmax.cwiseMax(sites[i].mid);
  }
  int axis = 0;
  (bmax - bmin).maxCoeff(&axis);
  std::nth_element(sites.begin() + lo, sites.begin() + lo + n / 2, sites.begin() + hi,
                   [axis](const FaceSite& a, const FaceSite& b) { return a.mid[axis] < b.mid[axis]; });
  const double cut = sites[lo + n / 2].mid[axis];
  auto side = [&](int e) { return mesh.elements[e].midpoint[axis] < cut; };
  // partition: both elements left | both right | straddling the cut (deferred)
  std::vector<FaceSite> left, right, sep;
  for (int64_t i = lo; i < hi; ++i) {
    const FaceSite& s = sites[i];
    const bool s0 = side(s.e0);
    const bool s1 = s.e1 < 0 ? s0 : side(s.e1);
    if (s0 && s1)
      left.push_back(s);
    else if (!s0 && !s1)
      right.push_back(s);
    else
      sep.push_back(s);
  }
  if (left.empty() || right.empty()) {  // degenerate cut: fall back to a plain split
    order_faces(mesh, sites, lo, lo + n / 2, out);
    order_faces(mesh, sites, lo + n / 2, hi, out);
    return;
  }
  int64_t w = lo;
  for (const auto& s : left) sites[w++] = s;
  const int64_t mid_l = w;
  for (const auto& s : right) sites[w++] = s;
  const int64_t mid_r = w;
  for (const auto& s : sep) sites[w++] = s;
  order_faces(mesh, sites, lo, mid_l, out);
  order_faces(mesh, sites, mid_l, mid_r, out);
  for (int64_t i = mid_r; i < hi; ++i) out.push_back(sites[i].face);
}

}  // namespace

std::vector<int64_t> constraint_row_order(const Mesh& mesh, const ConstraintProblem& cp) {
  std::vector<FaceSite> sites;
  sites.reserve(cp.face_row_map.size());
  auto face_mid = [&](const std::vector<int>& verts) {
    Vec3 m = Vec3::Zero();
    for (int v : verts) m += mesh.vertices[v];
    return Vec3(m / std::max<size_t>(1, verts.size()));
  };
  int64_t id = 0;
  for (const auto& face : mesh.skeleton) {
    sites.push_back({id++, face_mid(face.vertices), face.minus, face.plus});
  }
  for (const auto& face : mesh.boundary) {
    if (face.tag != BoundaryTag::Dirichlet) continue;
    sites.push_back({id++, face_mid(face.vertices), face.element, -1});
  }
  if (id != static_cast<int64_t>(cp.face_row_map.size()))
    throw ConfigError("constraint_row_order: face map does not match the mesh");

  std::vector<int64_t> face_order;
  face_order.reserve(sites.size());
  order_faces(mesh, sites, 0, static_cast<int64_t>(sites.size()), face_order);

  std::vector<int64_t> rows;
  rows.reserve(static_cast<size_t>(cp.Dbar.rows()));
  for (int64_t f : face_order)
    for (int64_t r = cp.face_row_map[f].first; r < cp.face_row_map[f].second; ++r)
      rows.push_back(r);
  return rows;
}

AdmissibleSubset build_admissible(const Space& space, const DirichletData& bc,
                                  const ConstraintOptions& opts) {
  const Mesh& mesh = *space.mesh;
  const int64_t N = space.total();
  AdmissibleSubset adm;

  if (opts.mode == ConstraintMode::Global) {
    ConstraintProblem cp = build_constraint_problem(space, bc, opts);
    if (cp.Dbar.rows() == 0) {
      adm.Wbar = SpMat(N, N);
      adm.Wbar.setIdentity();
      adm.q_b = Vec::Zero(N);
      adm.rank = 0;
      adm.free_dofs.resize(N);
      for (int64_t j = 0; j < N; ++j) adm.free_dofs[j] = static_cast<int>(j);
      return adm;
    }
    Mat D(cp.Dbar);
    GeneralSolution sol = solve_general(D, cp.bbar, opts.tol);
    adm.Wbar = sol.W.sparseView();
    adm.q_b = sol.s;
    adm.rank = sol.rank;
    adm.free_dofs = sol.free_vars;
    return adm;
  }

  SparseComposer composer(static_cast<int>(N));
  const int nc = space.components;
  auto add_rows = [&](const Mat& M, const Vec& rhs, const std::vector<int>& keep,
                      const std::vector<int64_t>& cols) {
    std::vector<SparseComposer::Row> rows;
    rows.reserve(keep.size());
    for (int r : keep) {
      SparseComposer::Row sr;
      sr.b = rhs(r);
      for (int j = 0; j < M.cols(); ++j)
        if (M(r, j) != 0.0) sr.a.push_back({static_cast<int>(cols[j]), M(r, j)});
      rows.push_back(std::move(sr));
    }
    composer.add_block(rows, PivotStrategy::MinFill, opts.tol);
  };

  for (const auto& face : mesh.skeleton) {
    FaceConstraintBlock blk = segment_jump_matrix(space, face, opts.problem_class,
                                                  opts.exact_test_order);
    std::vector<int> keep = independent_rows(blk.M, opts.tol);
    const int mm = space.mcount(face.minus), mp = space.mcount(face.plus);
    for (int c = 0; c < nc; ++c) {
      std::vector<int64_t> cols(mm + mp);
      for (int k = 0; k < mm; ++k) cols[k] = space.dof(face.minus, c, k);
      for (int k = 0; k < mp; ++k) cols[mm + k] = space.dof(face.plus, c, k);
      add_rows(blk.M, blk.rhs, keep, cols);
    }
  }
  for (const auto& face : mesh.boundary) {
    if (face.tag != BoundaryTag::Dirichlet) continue;
    const int m = space.mcount(face.element);
    for (int c = 0; c < nc; ++c) {
      FaceConstraintBlock blk =
          dirichlet_matrix(space, face, bc, c, opts.problem_class, opts.exact_test_order);
      std::vector<int> keep = independent_rows(blk.M, opts.tol);
      std::vector<int64_t> cols(m);
      for (int k = 0; k < m; ++k) cols[k] = space.dof(face.element, c, k);
      add_rows(blk.M, blk.rhs, keep, cols);
    }
  }

  adm.Wbar = composer.basis();
  adm.q_b = composer.shift();
  adm.rank = composer.rank();
  adm.free_dofs = composer.free_vars();
  return adm;
}

std::pair<Mat, Vec> aggregated_constraints(const Space& space, const DirichletData& bc,
                                           const ConstraintOptions& opts) {
  const Mesh& mesh = *space.mesh;
  if (space.components != 1)
    throw ConfigError("aggregated constraint form is defined for scalar spaces");
  const size_t E = mesh.elements.size();
  for (size_t e = 1; e < E; ++e)
    if (space.order(static_cast<int>(e)) != space.order(0))
      throw ConfigError("aggregated constraint form requires a uniform order");
  const int pbar = pbar_for(space.order(0), opts.problem_class, opts.exact_test_order);
  const int mbar = basis_count(mesh.dim, pbar);

  Mat D = Mat::Zero(static_cast<int64_t>(E) * mbar, space.total());
  Vec b = Vec::Zero(D.rows());
  auto scatter = [&](const Mat& M, const Vec& rhs, int row0, int value_rows,
                     const std::vector<int64_t>& cols, int test_elem_offset) {
    // Fold value rows and (fourth-order) gradient rows of one test side into
    // the element's test-dof rows.
    for (int i = 0; i < mbar; ++i) {
      for (int pass = 0; pass < (M.rows() > value_rows ? 2 : 1); ++pass) {
        const int r = row0 + pass * value_rows + i;
        for (size_t j = 0; j < cols.size(); ++j) D(test_elem_offset + i, cols[j]) += M(r, j);
        b(test_elem_offset + i) += rhs(r);
      }
    }
  };

  for (const auto& face : mesh.skeleton) {
    FaceConstraintBlock blk = segment_jump_matrix(space, face, opts.problem_class,
                                                  opts.exact_test_order);
    const int mm = space.mcount(face.minus), mp = space.mcount(face.plus);
    std::vector<int64_t> cols(mm + mp);
    for (int k = 0; k < mm; ++k) cols[k] = space.dof(face.minus, 0, k);
    for (int k = 0; k < mp; ++k) cols[mm + k] = space.dof(face.plus, 0, k);
    scatter(blk.M, blk.rhs, 0, blk.value_rows, cols, face.minus * mbar);
    scatter(blk.M, blk.rhs, mbar, blk.value_rows, cols, face.plus * mbar);
  }
  for (const auto& face : mesh.boundary) {
    if (face.tag != BoundaryTag::Dirichlet) continue;
    FaceConstraintBlock blk =
        dirichlet_matrix(space, face, bc, 0, opts.problem_class, opts.exact_test_order);
    const int m = space.mcount(face.element);
    std::vector<int64_t> cols(m);
    for (int k = 0; k < m; ++k) cols[k] = space.dof(face.element, 0, k);
    scatter(blk.M, blk.rhs, 0, blk.value_rows, cols, face.element * mbar);
  }
  return {D, b};
}

double constraint_residual(const ConstraintProblem& cp, const Vec& q) {
  if (cp.Dbar.rows() == 0) return 0.0;
  return (cp.Dbar * q - cp.bbar).norm() / (1.0 + cp.bbar.norm());
}

}  // namespace pfdg
