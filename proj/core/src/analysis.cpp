#include "pfdg/analysis.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "element_rules.hpp"

namespace pfdg {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct VolumePartial {
  double err2 = 0, ref2 = 0;        // L2
  double gerr2 = 0, gref2 = 0;      // H1 seminorm
};

}  // namespace

ErrorReport error_norms(const Space& space, const Vec& q,
                        const std::function<double(const Vec3&, int)>& exact,
                        const std::function<Vec3(const Vec3&, int)>& exact_gradient,
                        const DirichletData& bc) {
  const Mesh& mesh = *space.mesh;
  const int64_t ne = static_cast<int64_t>(mesh.elements.size());
  const int dim = mesh.dim;

  std::vector<VolumePartial> partial(ne);
  parallel_for(ne, [&](int64_t e) {
    const int ei = static_cast<int>(e);
    const int p = space.order(ei);
    QuadRule rule = detail::volume_rule(mesh, ei, 2 * p + 4);
    BasisEval ev = space.eval(ei, rule.points, 1);
    VolumePartial acc;
    for (int g = 0; g < rule.weights.size(); ++g) {
      const double w = rule.weights(g);
      Vec3 x = Vec3::Zero();
      for (int d = 0; d < dim; ++d) x[d] = rule.points(g, d);
      for (int c = 0; c < space.components; ++c) {
        double uh = 0.0;
        Vec3 guh = Vec3::Zero();
        for (int k = 0; k < ev.m; ++k) {
          const double coef = q(space.dof(ei, c, k));
          uh += coef * ev.values(g, k);
          for (int d = 0; d < dim; ++d) guh[d] += coef * ev.grads(g, k * dim + d);
        }
        const double u = exact(x, c);
        const Vec3 gu = exact_gradient ? exact_gradient(x, c) : Vec3::Zero();
        acc.err2 += w * (uh - u) * (uh - u);
        acc.ref2 += w * u * u;
        acc.gerr2 += w * (guh - gu).squaredNorm();
        acc.gref2 += w * gu.squaredNorm();
      }
    }
    partial[e] = acc;
  });

  VolumePartial total;
  for (const auto& acc : partial) {
    total.err2 += acc.err2;
    total.ref2 += acc.ref2;
    total.gerr2 += acc.gerr2;
    total.gref2 += acc.gref2;
  }

  ErrorReport rep;
  rep.eta = total.ref2 > 0 ? std::sqrt(total.err2 / total.ref2) : std::sqrt(total.err2);
  rep.eta_E = total.gref2 > 0 ? std::sqrt(total.gerr2 / total.gref2) : std::sqrt(total.gerr2);

  double jump2 = 0.0, skel_measure = 0.0;
  for (const auto& face : mesh.skeleton) {
    const int pm = space.order(face.minus), pp = space.order(face.plus);
    QuadRule rule = detail::face_rule(mesh, face.vertices, pm + pp + 4);
    BasisEval evm = space.eval(face.minus, rule.points, 0);
    BasisEval evp = space.eval(face.plus, rule.points, 0);
    for (int g = 0; g < rule.weights.size(); ++g) {
      const double w = rule.weights(g);
      for (int c = 0; c < space.components; ++c) {
        double jump = 0.0;
        for (int k = 0; k < evm.m; ++k)
          jump += q(space.dof(face.minus, c, k)) * evm.values(g, k);
        for (int k = 0; k < evp.m; ++k)
          jump -= q(space.dof(face.plus, c, k)) * evp.values(g, k);
        jump2 += w * jump * jump;
      }
    }
    skel_measure += face.measure;
  }
  rep.eta_s = skel_measure > 0 ? std::sqrt(jump2) / skel_measure : 0.0;

  double viol2 = 0.0, dir_measure = 0.0;
  for (const auto& face : mesh.boundary) {
    if (face.tag != BoundaryTag::Dirichlet) continue;
    const int p = space.order(face.element);
    QuadRule rule = detail::face_rule(mesh, face.vertices, 2 * p + 4);
    BasisEval ev = space.eval(face.element, rule.points, 0);
    for (int g = 0; g < rule.weights.size(); ++g) {
      const double w = rule.weights(g);
      Vec3 x = Vec3::Zero();
      for (int d = 0; d < dim; ++d) x[d] = rule.points(g, d);
      for (int c = 0; c < space.components; ++c) {
        double uh = 0.0;
        for (int k = 0; k < ev.m; ++k) uh += q(space.dof(face.element, c, k)) * ev.values(g, k);
        const double diff = uh - bc.value(x, c);
        viol2 += w * diff * diff;
      }
    }
    dir_measure += face.measure;
  }
  rep.eta_D = dir_measure > 0 ? std::sqrt(viol2) / dir_measure : 0.0;

  rep.dofs = space.total();
  rep.h = 0.0;
  for (const auto& el : mesh.elements) rep.h = std::max(rep.h, el.diameter);
  return rep;
}

double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& err,
                        bool* valid) {
  if (valid) *valid = false;
  if (h.size() != err.size() || h.size() < 2) return 0.0;
  const double floor = 1e-13;
  for (double e : err)
    if (!(e > floor)) return 0.0;
  for (double hv : h)
    if (!(hv > 0)) return 0.0;

  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    lx[i] = std::log(h[i]);
    ly[i] = std::log(err[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return 0.0;
  if (valid) *valid = true;
  return sxy / sxx;
}

void fit_rate_slopes(RateTable& table) {
  table.slopes = {};
  table.slope_valid = {};
  const int n = static_cast<int>(table.rows.size());
  if (n < 3) return;
  const int start = n - 3;
  std::vector<double> h, e;
  for (int col = 0; col < 4; ++col) {
    h.clear();
    e.clear();
    for (int i = start; i < n; ++i) {
      const RateRow& r = table.rows[i];
      h.push_back(r.h);
      const double vals[4] = {r.eta, r.eta_E, r.eta_s, r.eta_D};
      e.push_back(vals[col]);
    }
    bool ok = false;
    table.slopes[col] = fit_loglog_slope(h, e, &ok);
    table.slope_valid[col] = ok;
  }
}

std::string rate_table_csv(const RateTable& table) {
  std::string out = "N,h,eta,eta_E,eta_s,eta_D\n";
  char buf[256];
  for (const RateRow& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.16e,%.16e,%.16e,%.16e,%.16e\n",
                  static_cast<long long>(r.dofs), r.h, r.eta, r.eta_E, r.eta_s, r.eta_D);
    out += buf;
  }
  return out;
}

double condition_estimate(const SpMat& A) {
  if (A.rows() != A.cols()) throw ConfigError("condition estimate needs a square matrix");
  const int64_t n = A.rows();
  if (n == 0) return 1.0;
  const double inf = std::numeric_limits<double>::infinity();

  if (n <= 2000) {
    Mat dense = Mat(A);
    Eigen::BDCSVD<Mat> svd(dense);
    const Vec& sv = svd.singularValues();
    const double smax = sv(0), smin = sv(sv.size() - 1);
    if (smax == 0.0 || smin < 1e-14 * smax) return inf;
    return smax / smin;
  }

  // Power iteration on A^T A for sigma_max.
  std::mt19937_64 rng(0x5eed5eedULL);
  Vec x(n);
  for (int64_t i = 0; i < n; ++i) x(i) = uniform(rng, -1.0, 1.0);
  x.normalize();
  for (int it = 0; it < 20; ++it) {
    Vec z = A.transpose() * (A * x);
    const double nz = z.norm();
    if (nz == 0.0) return inf;
    x = z / nz;
  }
  const double smax = (A * x).norm();
  if (smax == 0.0) return inf;

  // Inverse iteration on A^T A for sigma_min: v <- A^{-1} A^{-T} v.
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return inf;
  SpMat At = A.transpose();
  Eigen::SparseLU<SpMat> luT;
  luT.compute(At);
  if (luT.info() != Eigen::Success) return inf;

  Vec v(n);
  for (int64_t i = 0; i < n; ++i) v(i) = uniform(rng, -1.0, 1.0);
  v.normalize();
  for (int it = 0; it < 20; ++it) {
    Vec y = luT.solve(v);
    Vec z = lu.solve(y);
    if (!z.allFinite()) return inf;
    const double nz = z.norm();
    if (nz == 0.0) return inf;
    v = z / nz;
  }
  const double smin = (A * v).norm();
  if (smin < 1e-14 * smax) return inf;
  return smax / smin;
}

namespace {

bool contains_point(const Mesh& mesh, int e, const Vec3& x) {
  const Element& el = mesh.elements[e];
  const double tol = 1e-9 * std::max(1.0, el.diameter);
  if (mesh.dim == 1) {
    double a = mesh.vertices[el.vertices[0]][0], b = mesh.vertices[el.vertices[1]][0];
    if (a > b) std::swap(a, b);
    return x[0] >= a - tol && x[0] <= b + tol;
  }
  if (mesh.dim == 2) {
    // Convex loops (axis-aligned refinements keep convexity, collinear
    // vertices allowed): inside iff never strictly outside any edge.
    std::vector<Vec3> loop = mesh.loop(e);
    double area2 = 0.0;
    for (size_t i = 0; i < loop.size(); ++i) {
      const Vec3& a = loop[i];
      const Vec3& b = loop[(i + 1) % loop.size()];
      area2 += a[0] * b[1] - b[0] * a[1];
    }
    const double orient = area2 >= 0 ? 1.0 : -1.0;
    for (size_t i = 0; i < loop.size(); ++i) {
      const Vec3& a = loop[i];
      const Vec3& b = loop[(i + 1) % loop.size()];
      const double cross = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
      if (orient * cross < -tol * (b - a).norm()) return false;
    }
    return true;
  }
  Vec3 lo = mesh.vertices[el.vertices[0]], hi = lo;
  for (int vi : el.vertices) {
    lo = lo.cwiseMin(mesh.vertices[vi]);
    hi = hi.cwiseMax(mesh.vertices[vi]);
  }
  for (int d = 0; d < 3; ++d)
    if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
  return true;
}

}  // namespace

double evaluate_solution(const Space& space, const Vec& q, const Vec3& x, int comp) {
  const Mesh& mesh = *space.mesh;
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    if (!contains_point(mesh, static_cast<int>(e), x)) continue;
    Mat pt(1, mesh.dim);
    for (int d = 0; d < mesh.dim; ++d) pt(0, d) = x[d];
    BasisEval ev = space.eval(static_cast<int>(e), pt, 0);
    double val = 0.0;
    for (int k = 0; k < ev.m; ++k) val += q(space.dof(static_cast<int>(e), comp, k)) * ev.values(0, k);
    return val;
  }
  throw CheckError("probe point lies outside the mesh");
}

BenchmarkRun solve_benchmark(const BenchmarkSpec& spec, std::shared_ptr<Mesh> mesh,
                             const RunOptions& opts) {
  if (!mesh) throw ConfigError("solve_benchmark needs a mesh");
  if (opts.p < spec.min_order)
    throw ConfigError(spec.name + " requires p >= " + std::to_string(spec.min_order));

  BenchmarkRun run;
  run.mesh = std::move(mesh);
  run.mesh->set_uniform_order(opts.p);
  run.space = Space::build(*run.mesh, opts.family, spec.components);

  ConstraintOptions copts = opts.constraints;
  copts.problem_class = spec.problem_class;

  // The nullspace basis of the constraints fills in globally, so past a few
  // thousand dofs the saddle-system route (independent constraint rows kept
  // sparse) is the economical one. Nonlinear runs always need the basis.
  const bool augmented =
      spec.pde != PdeClass::Hyperelastic &&
      (opts.solve.method == SolveOptions::Method::Augmented ||
       (opts.solve.method == SolveOptions::Method::Auto &&
        run.space.total() > opts.solve.augmented_cutoff));

  auto t0 = std::chrono::steady_clock::now();
  ConstraintProblem cp = build_constraint_problem(run.space, spec.dirichlet, copts);
  run.constraint_rows = cp.Dbar.rows();
  SparseEchelon echelon;
  if (augmented) {
    const std::vector<int64_t> order = constraint_row_order(*run.mesh, cp);
    echelon = sparse_echelon_rows(cp.Dbar, cp.bbar, copts.tol, &order);
    run.reduced_dim = run.space.total() - echelon.rank;
  } else {
    run.adm = build_admissible(run.space, spec.dirichlet, copts);
    run.reduced_dim = run.adm.Wbar.cols();
  }
  run.constraints_seconds = seconds_since(t0);

  if (spec.pde == PdeClass::Hyperelastic) {
    t0 = std::chrono::steady_clock::now();
    run.q = newton_solve(run.space, run.adm, Material::from_youngs(spec.E, spec.nu),
                         spec.traction, opts.newton, &run.newton);
    run.solve_seconds = seconds_since(t0);
  } else {
    t0 = std::chrono::steady_clock::now();
    DiscreteSystem sys;
    switch (spec.pde) {
      case PdeClass::Poisson:
        sys = assemble_poisson(run.space, spec.source, spec.neumann);
        break;
      case PdeClass::Elasticity:
        sys = assemble_elasticity(run.space, spec.E, spec.nu, spec.body, spec.traction);
        break;
      case PdeClass::Biharmonic:
        sys = assemble_biharmonic(run.space, spec.m1, spec.grad_m1, spec.m2, spec.m3, spec.source);
        break;
      default:
        throw ConfigError("unsupported PDE class");
    }
    run.assemble_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    Solution sol;
    if (augmented) {
      std::vector<Triplet> trips;
      trips.reserve(static_cast<size_t>(cp.Dbar.nonZeros()));
      Vec br(echelon.rank);
      std::vector<char> keep(cp.Dbar.rows(), 0);
      std::vector<int> new_row(cp.Dbar.rows(), -1);
      for (int64_t i = 0; i < echelon.rank; ++i) {
        keep[echelon.kept[i]] = 1;
        new_row[echelon.kept[i]] = static_cast<int>(i);
        br(i) = cp.bbar(echelon.kept[i]);
      }
      for (int64_t j = 0; j < cp.Dbar.outerSize(); ++j)
        for (SpMat::InnerIterator it(cp.Dbar, j); it; ++it)
          if (keep[it.row()])
            trips.push_back({new_row[it.row()], static_cast<int>(it.col()), it.value()});
      SpMat Dr(echelon.rank, cp.Dbar.cols());
      Dr.setFromTriplets(trips.begin(), trips.end());
      sol = solve_constrained(sys, Dr, br);
    } else {
      sol = reduce_and_solve(sys, run.adm, opts.solve);
    }
    run.solve_seconds = seconds_since(t0);
    run.q = sol.q;
    run.reduced = std::move(sol.reduced);
    run.reduced_dim = sol.diag.reduced_dim;
    run.reduced_residual = sol.diag.reduced_residual;
  }

  run.constraint_residual = constraint_residual(cp, run.q);

  if (spec.exact) {
    run.errors = error_norms(run.space, run.q, spec.exact, spec.exact_gradient, spec.dirichlet);
  } else {
    run.errors.dofs = run.space.total();
    for (const auto& el : run.mesh->elements)
      run.errors.h = std::max(run.errors.h, el.diameter);
  }
  if (spec.has_probe)
    run.probe_value = evaluate_solution(run.space, run.q, spec.probe_point, spec.probe_component);
  return run;
}

RateTable convergence_study(const BenchmarkSpec& spec, const std::vector<int>& sizes,
                            const RunOptions& opts) {
  if (sizes.size() < 3) throw ConfigError("convergence study needs at least 3 meshes");
  if (spec.pde == PdeClass::Hyperelastic || !spec.exact)
    throw ConfigError("convergence study needs a benchmark with an exact solution");

  RateTable table;
  for (int n : sizes) {
    auto mesh = std::make_shared<Mesh>(spec.mesh_builder(n));
    BenchmarkRun run = solve_benchmark(spec, std::move(mesh), opts);
    RateRow row;
    row.dofs = run.errors.dofs;
    row.h = run.errors.h;
    row.eta = run.errors.eta;
    row.eta_E = run.errors.eta_E;
    row.eta_s = run.errors.eta_s;
    row.eta_D = run.errors.eta_D;
    table.rows.push_back(row);
  }
  fit_rate_slopes(table);
  return table;
}

}  // namespace pfdg
