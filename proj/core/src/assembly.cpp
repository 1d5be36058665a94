#include "pfdg/assembly.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "element_rules.hpp"
#include "pfdg/quadrature.hpp"

namespace pfdg {

namespace {

using detail::face_rule;
using detail::quad_point;
using detail::volume_rule;

Vec normal_component(const BasisEval& ev, const Vec3& n, int q) {
  Vec out(ev.m);
  for (int k = 0; k < ev.m; ++k) {
    double g = 0.0;
    for (int d = 0; d < ev.dim; ++d) g += ev.grads(q, k * ev.dim + d) * n[d];
    out(k) = g;
  }
  return out;
}

// Laplacian of each basis function at point q (trace of the Hessian block).
Vec laplacian(const BasisEval& ev, int q) {
  Vec out(ev.m);
  const int n2 = ev.dim * (ev.dim + 1) / 2;
  for (int k = 0; k < ev.m; ++k) {
    double lap = 0.0;
    // diagonal second derivatives sit at lexicographic pair positions
    // (a,a): 1D 0; 2D 0,2; 3D 0,3,5
    if (ev.dim == 1) lap = ev.hess(q, k * n2);
    else if (ev.dim == 2) lap = ev.hess(q, k * n2) + ev.hess(q, k * n2 + 2);
    else lap = ev.hess(q, k * n2) + ev.hess(q, k * n2 + 3) + ev.hess(q, k * n2 + 5);
    out(k) = lap;
  }
  return out;
}

// Gradient of the Laplacian of each basis function (rows of a m x dim block),
// from the third-derivative block. Supported for dim <= 2.
Mat grad_laplacian(const BasisEval& ev, int q) {
  Mat out(ev.m, ev.dim);
  if (ev.dim == 1) {
    for (int k = 0; k < ev.m; ++k) out(k, 0) = ev.third(q, k);
    return out;
  }
  for (int k = 0; k < ev.m; ++k) {
    // 2D triples in lexicographic order: xxx, xxy, xyy, yyy
    out(k, 0) = ev.third(q, k * 4 + 0) + ev.third(q, k * 4 + 2);
    out(k, 1) = ev.third(q, k * 4 + 1) + ev.third(q, k * 4 + 3);
  }
  return out;
}

void scatter_block(std::vector<Triplet>& trips, const Mat& Ke, const std::vector<int64_t>& rows,
                   const std::vector<int64_t>& cols) {
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      if (Ke(i, j) != 0.0)
        trips.push_back({static_cast<int>(rows[i]), static_cast<int>(cols[j]), Ke(i, j)});
}

std::vector<int64_t> element_dofs(const Space& space, int e) {
  const int m = space.mcount(e);
  std::vector<int64_t> out(static_cast<size_t>(space.components) * m);
  for (int c = 0; c < space.components; ++c)
    for (int k = 0; k < m; ++k) out[c * m + k] = space.dof(e, c, k);
  return out;
}

std::vector<int64_t> pair_dofs(const Space& space, int em, int ep) {
  std::vector<int64_t> out = element_dofs(space, em);
  std::vector<int64_t> plus = element_dofs(space, ep);
  out.insert(out.end(), plus.begin(), plus.end());
  return out;
}

DiscreteSystem finish(const Space& space, std::vector<Triplet>& trips, Vec f) {
  DiscreteSystem sys;
  sys.K.resize(space.total(), space.total());
  sys.K.setFromTriplets(trips.begin(), trips.end());
  sys.f = std::move(f);
  sys.dof_map = space.offsets;
  return sys;
}

}  // namespace

DiscreteSystem assemble_poisson(const Space& space, const ScalarFn& source,
                                const ScalarFn& neumann) {
  if (space.components != 1) throw ConfigError("scalar assembly needs a one-component space");
  const Mesh& mesh = *space.mesh;
  std::vector<Triplet> trips;
  Vec f = Vec::Zero(space.total());

  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const int ei = static_cast<int>(e);
    const int p = space.order(ei), m = space.mcount(ei);
    QuadRule rule = volume_rule(mesh, ei, 2 * p + 3);
    BasisEval ev = space.eval(ei, rule.points, 1);
    Mat Ke = Mat::Zero(m, m);
    Vec fe = Vec::Zero(m);
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double w = rule.weights(q);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double dot = 0.0;
          for (int d = 0; d < mesh.dim; ++d)
            dot += ev.grads(q, i * mesh.dim + d) * ev.grads(q, j * mesh.dim + d);
          Ke(i, j) += w * dot;
        }
      if (source) {
        const Vec3 x = quad_point(rule.points, q);
        fe += w * source(x) * ev.values.row(q).transpose();
      }
    }
    std::vector<int64_t> dofs = element_dofs(space, ei);
    scatter_block(trips, Ke, dofs, dofs);
    for (int k = 0; k < m; ++k) f(dofs[k]) += fe(k);
  }

  for (const auto& face : mesh.skeleton) {
    const int mm = space.mcount(face.minus), mp = space.mcount(face.plus);
    QuadRule rule =
        face_rule(mesh, face.vertices, space.order(face.minus) + space.order(face.plus) + 3);
    BasisEval evm = space.eval(face.minus, rule.points, 1);
    BasisEval evp = space.eval(face.plus, rule.points, 1);
    Mat Ke = Mat::Zero(mm + mp, mm + mp);
    Vec jump(mm + mp), avg(mm + mp);
    for (int q = 0; q < rule.weights.size(); ++q) {
      jump.head(mm) = -evm.values.row(q).transpose();
      jump.tail(mp) = evp.values.row(q).transpose();
      avg.head(mm) = 0.5 * normal_component(evm, face.normal, q);
      avg.tail(mp) = 0.5 * normal_component(evp, face.normal, q);
      Ke += rule.weights(q) * jump * avg.transpose();
    }
    std::vector<int64_t> dofs = pair_dofs(space, face.minus, face.plus);
    scatter_block(trips, Ke, dofs, dofs);
  }

  for (const auto& face : mesh.boundary) {
    const int e = face.element;
    const int m = space.mcount(e);
    QuadRule rule = face_rule(mesh, face.vertices, 2 * space.order(e) + 3);
    BasisEval ev = space.eval(e, rule.points, 1);
    std::vector<int64_t> dofs = element_dofs(space, e);
    if (face.tag == BoundaryTag::Dirichlet) {
      Mat Ke = Mat::Zero(m, m);
      for (int q = 0; q < rule.weights.size(); ++q)
        Ke -= rule.weights(q) * ev.values.row(q).transpose() *
              normal_component(ev, face.normal, q).transpose();
      scatter_block(trips, Ke, dofs, dofs);
    } else {
      if (!neumann) throw ConfigError("Neumann face without flux data");
      for (int q = 0; q < rule.weights.size(); ++q) {
        const Vec3 x = quad_point(rule.points, q);
        const double wh = rule.weights(q) * neumann(x);
        for (int k = 0; k < m; ++k) f(dofs[k]) += wh * ev.values(q, k);
      }
    }
  }
  return finish(space, trips, std::move(f));
}

namespace {

// Plane-strain Voigt elasticity matrix for strain (exx, eyy, gxy).
Mat elasticity_matrix(double E, double nu) {
  if (!(nu > -1.0 && nu < 0.5)) throw ConfigError("plane strain needs -1 < nu < 0.5");
  if (!(E > 0.0)) throw ConfigError("Young's modulus must be positive");
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  Mat C = Mat::Zero(3, 3);
  C(0, 0) = C(1, 1) = lambda + 2.0 * mu;
  C(0, 1) = C(1, 0) = lambda;
  C(2, 2) = mu;
  return C;
}

// Voigt strain columns of one element's displacement dofs at point q:
// B is 3 x (2m), local dof order all-x then all-y.
Mat strain_matrix(const BasisEval& ev, int q) {
  const int m = ev.m;
  Mat B = Mat::Zero(3, 2 * m);
  for (int k = 0; k < m; ++k) {
    const double gx = ev.grads(q, k * 2 + 0), gy = ev.grads(q, k * 2 + 1);
    B(0, k) = gx;
    B(2, k) = gy;
    B(1, m + k) = gy;
    B(2, m + k) = gx;
  }
  return B;
}

// Traction vectors t = sigma(phi) . n for each local dof: 2 x (2m).
Mat traction_matrix(const Mat& C, const BasisEval& ev, const Vec3& n, int q) {
  Mat S = C * strain_matrix(ev, q);  // Voigt stresses per dof
  Mat T(2, S.cols());
  T.row(0) = n[0] * S.row(0) + n[1] * S.row(2);
  T.row(1) = n[0] * S.row(2) + n[1] * S.row(1);
  return T;
}

// Component-value matrix: V(c, local dof) = phi value if the dof carries
// component c, else 0; 2 x (2m).
Mat value_matrix(const BasisEval& ev, int q) {
  const int m = ev.m;
  Mat V = Mat::Zero(2, 2 * m);
  V.row(0).head(m) = ev.values.row(q);
  V.row(1).tail(m) = ev.values.row(q);
  return V;
}

}  // namespace

DiscreteSystem assemble_elasticity(const Space& space, double E, double nu, const VectorFn& body,
                                   const VectorFn& traction) {
  if (space.components != 2) throw ConfigError("plane-strain assembly needs a two-component space");
  const Mesh& mesh = *space.mesh;
  if (mesh.dim != 2) throw ConfigError("plane-strain assembly needs a two-dimensional mesh");
  const Mat C = elasticity_matrix(E, nu);
  std::vector<Triplet> trips;
  Vec f = Vec::Zero(space.total());

  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const int ei = static_cast<int>(e);
    const int p = space.order(ei), m = space.mcount(ei);
    QuadRule rule = volume_rule(mesh, ei, 2 * p + 3);
    BasisEval ev = space.eval(ei, rule.points, 1);
    Mat Ke = Mat::Zero(2 * m, 2 * m);
    Vec fe = Vec::Zero(2 * m);
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double w = rule.weights(q);
      Mat B = strain_matrix(ev, q);
      Ke += w * B.transpose() * (C * B);
      if (body) {
        const Vec3 b = body(quad_point(rule.points, q));
        for (int k = 0; k < m; ++k) {
          fe(k) += w * ev.values(q, k) * b[0];
          fe(m + k) += w * ev.values(q, k) * b[1];
        }
      }
    }
    std::vector<int64_t> dofs = element_dofs(space, ei);
    scatter_block(trips, Ke, dofs, dofs);
    for (size_t k = 0; k < dofs.size(); ++k) f(dofs[k]) += fe(k);
  }

  for (const auto& face : mesh.skeleton) {
    const int mm = space.mcount(face.minus), mp = space.mcount(face.plus);
    QuadRule rule =
        face_rule(mesh, face.vertices, space.order(face.minus) + space.order(face.plus) + 3);
    BasisEval evm = space.eval(face.minus, rule.points, 1);
    BasisEval evp = space.eval(face.plus, rule.points, 1);
    Mat Ke = Mat::Zero(2 * (mm + mp), 2 * (mm + mp));
    Mat J(2, 2 * (mm + mp)), A(2, 2 * (mm + mp));
    for (int q = 0; q < rule.weights.size(); ++q) {
      J.leftCols(2 * mm) = -value_matrix(evm, q);
      J.rightCols(2 * mp) = value_matrix(evp, q);
      A.leftCols(2 * mm) = 0.5 * traction_matrix(C, evm, face.normal, q);
      A.rightCols(2 * mp) = 0.5 * traction_matrix(C, evp, face.normal, q);
      Ke += rule.weights(q) * J.transpose() * A;
    }
    std::vector<int64_t> dofs = pair_dofs(space, face.minus, face.plus);
    scatter_block(trips, Ke, dofs, dofs);
  }

  for (const auto& face : mesh.boundary) {
    const int e = face.element;
    const int m = space.mcount(e);
    QuadRule rule = face_rule(mesh, face.vertices, 2 * space.order(e) + 3);
    BasisEval ev = space.eval(e, rule.points, 1);
    std::vector<int64_t> dofs = element_dofs(space, e);
    if (face.tag == BoundaryTag::Dirichlet) {
      Mat Ke = Mat::Zero(2 * m, 2 * m);
      for (int q = 0; q < rule.weights.size(); ++q)
        Ke -= rule.weights(q) * value_matrix(ev, q).transpose() *
              traction_matrix(C, ev, face.normal, q);
      scatter_block(trips, Ke, dofs, dofs);
    } else {
      if (!traction) throw ConfigError("Neumann face without traction data");
      for (int q = 0; q < rule.weights.size(); ++q) {
        const Vec3 t = traction(quad_point(rule.points, q));
        const double w = rule.weights(q);
        for (int k = 0; k < m; ++k) {
          f(dofs[k]) += w * ev.values(q, k) * t[0];
          f(dofs[m + k]) += w * ev.values(q, k) * t[1];
        }
      }
    }
  }
  return finish(space, trips, std::move(f));
}

DiscreteSystem assemble_biharmonic(const Space& space, const ScalarFn& m1, const VectorFn& grad_m1,
                                   const ScalarFn& m2, const ScalarFn& m3,
                                   const ScalarFn& source) {
  if (space.components != 1) throw ConfigError("scalar assembly needs a one-component space");
  const Mesh& mesh = *space.mesh;
  if (mesh.dim > 2) throw ConfigError("fourth-order assembly supports one and two dimensions");
  if (!m1 || !m2 || !m3) throw ConfigError("fourth-order assembly needs all three coefficients");
  if (!grad_m1) throw ConfigError("fourth-order assembly needs the gradient of the leading coefficient");
  for (size_t e = 0; e < mesh.elements.size(); ++e)
    if (space.order(static_cast<int>(e)) < 2)
      throw ConfigError("fourth-order assembly requires p >= 2");

  std::vector<Triplet> trips;
  Vec f = Vec::Zero(space.total());

  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const int ei = static_cast<int>(e);
    const int p = space.order(ei), m = space.mcount(ei);
    QuadRule rule = volume_rule(mesh, ei, 2 * p + 4);
    BasisEval ev = space.eval(ei, rule.points, 2);
    Mat Ke = Mat::Zero(m, m);
    Vec fe = Vec::Zero(m);
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double w = rule.weights(q);
      const Vec3 x = quad_point(rule.points, q);
      const double c1 = m1(x), c2 = m2(x), c3 = m3(x);
      Vec lap = laplacian(ev, q);
      Ke += w * c1 * lap * lap.transpose();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double dot = 0.0;
          for (int d = 0; d < mesh.dim; ++d)
            dot += ev.grads(q, i * mesh.dim + d) * ev.grads(q, j * mesh.dim + d);
          Ke(i, j) += w * (-c2 * dot + c3 * ev.values(q, i) * ev.values(q, j));
        }
      if (source) fe += w * source(x) * ev.values.row(q).transpose();
    }
    std::vector<int64_t> dofs = element_dofs(space, ei);
    scatter_block(trips, Ke, dofs, dofs);
    for (int k = 0; k < m; ++k) f(dofs[k]) += fe(k);
  }

  // grad(m1 lap u) . n per trial dof of one side.
  auto flux_vec = [&](const BasisEval& ev, const Vec3& n, int q, const Vec3& x) {
    const double c1 = m1(x);
    const Vec3 g1 = grad_m1(x);
    Vec lap = laplacian(ev, q);
    Mat glap = grad_laplacian(ev, q);
    Vec out(ev.m);
    for (int k = 0; k < ev.m; ++k) {
      double v = 0.0;
      for (int d = 0; d < ev.dim; ++d) v += (g1[d] * lap(k) + c1 * glap(k, d)) * n[d];
      out(k) = v;
    }
    return out;
  };

  for (const auto& face : mesh.skeleton) {
    const int mm = space.mcount(face.minus), mp = space.mcount(face.plus);
    QuadRule rule =
        face_rule(mesh, face.vertices, space.order(face.minus) + space.order(face.plus) + 4);
    BasisEval evm = space.eval(face.minus, rule.points, 3);
    BasisEval evp = space.eval(face.plus, rule.points, 3);
    Mat Ke = Mat::Zero(mm + mp, mm + mp);
    Vec jv(mm + mp), jg(mm + mp), af(mm + mp), al(mm + mp), ag(mm + mp);
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double w = rule.weights(q);
      const Vec3 x = quad_point(rule.points, q);
      const double c1 = m1(x), c2 = m2(x);
      jv.head(mm) = -evm.values.row(q).transpose();
      jv.tail(mp) = evp.values.row(q).transpose();
      jg.head(mm) = -normal_component(evm, face.normal, q);
      jg.tail(mp) = normal_component(evp, face.normal, q);
      af.head(mm) = 0.5 * flux_vec(evm, face.normal, q, x);
      af.tail(mp) = 0.5 * flux_vec(evp, face.normal, q, x);
      al.head(mm) = 0.5 * c1 * laplacian(evm, q);
      al.tail(mp) = 0.5 * c1 * laplacian(evp, q);
      ag.head(mm) = 0.5 * normal_component(evm, face.normal, q);
      ag.tail(mp) = 0.5 * normal_component(evp, face.normal, q);
      Ke += w * (-jv * af.transpose() + jg * al.transpose() - c2 * jv * ag.transpose());
    }
    std::vector<int64_t> dofs = pair_dofs(space, face.minus, face.plus);
    scatter_block(trips, Ke, dofs, dofs);
  }

  for (const auto& face : mesh.boundary) {
    if (face.tag != BoundaryTag::Dirichlet)
      throw ConfigError("fourth-order assembly supports Dirichlet boundaries only");
    const int e = face.element;
    const int m = space.mcount(e);
    QuadRule rule = face_rule(mesh, face.vertices, 2 * space.order(e) + 4);
    BasisEval ev = space.eval(e, rule.points, 3);
    Mat Ke = Mat::Zero(m, m);
    for (int q = 0; q < rule.weights.size(); ++q) {
      const double w = rule.weights(q);
      const Vec3 x = quad_point(rule.points, q);
      const double c1 = m1(x), c2 = m2(x);
      Vec v = ev.values.row(q).transpose();
      Vec gn = normal_component(ev, face.normal, q);
      Ke += w * (v * flux_vec(ev, face.normal, q, x).transpose() -
                 gn * (c1 * laplacian(ev, q)).transpose() + c2 * v * gn.transpose());
    }
    std::vector<int64_t> dofs = element_dofs(space, e);
    scatter_block(trips, Ke, dofs, dofs);
  }
  return finish(space, trips, std::move(f));
}

Solution reduce_and_solve(const DiscreteSystem& sys, const AdmissibleSubset& adm,
                          const SolveOptions& opts) {
  if (adm.Wbar.rows() != sys.K.rows())
    throw ConfigError("admissible subset does not match the system size");
  SpMat Wt = SpMat(adm.Wbar.transpose());
  Solution sol;
  sol.reduced = (Wt * sys.K * adm.Wbar).pruned();
  sol.reduced_rhs = Wt * (sys.f - sys.K * adm.q_b);
  const int64_t n = sol.reduced.rows();
  sol.diag.reduced_dim = n;

  Vec z = Vec::Zero(n);
  if (n > 0) {
    const bool dense = opts.method == SolveOptions::Method::DenseLU ||
                       (opts.method == SolveOptions::Method::Auto && n <= opts.dense_cutoff);
    if (dense) {
      Mat Rd(sol.reduced);
      Eigen::PartialPivLU<Mat> lu(Rd);
      Vec du = lu.matrixLU().diagonal().cwiseAbs();
      const double dmax = du.maxCoeff();
      if (dmax == 0.0 || du.minCoeff() < 1e-14 * dmax)
        throw SolveError("reduced system is singular");
      z = lu.solve(sol.reduced_rhs);
    } else {
      Eigen::SparseLU<SpMat> lu;
      lu.compute(sol.reduced);
      if (lu.info() != Eigen::Success)
        throw SolveError("sparse factorization of the reduced system failed");
      z = lu.solve(sol.reduced_rhs);
    }
    const double scale =
        sol.reduced_rhs.norm() + sol.reduced.norm() * z.norm() + 1.0;
    if (!z.allFinite() || (sol.reduced * z - sol.reduced_rhs).norm() > 1e-8 * scale)
      throw SolveError("reduced solve did not reach backward stability");
  }
  sol.z0 = z;
  sol.q = adm.Wbar * z + adm.q_b;
  sol.diag.reduced_residual = (Wt * (sys.K * sol.q - sys.f)).norm();
  return sol;
}

Solution solve_constrained(const DiscreteSystem& sys, const SpMat& D, const Vec& b) {
  const int64_t n = sys.K.rows();
  const int64_t r = D.rows();
  if (D.cols() != n) throw ConfigError("constraint matrix does not match the system size");
  if (b.size() != r) throw ConfigError("constraint right-hand side size mismatch");

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(sys.K.nonZeros() + 2 * D.nonZeros()));
  for (int64_t j = 0; j < sys.K.outerSize(); ++j)
    for (SpMat::InnerIterator it(sys.K, j); it; ++it)
      trips.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
  for (int64_t j = 0; j < D.outerSize(); ++j)
    for (SpMat::InnerIterator it(D, j); it; ++it) {
      const int row = static_cast<int>(it.row()), col = static_cast<int>(it.col());
      trips.push_back({static_cast<int>(n) + row, col, it.value()});
      trips.push_back({col, static_cast<int>(n) + row, it.value()});
    }
  SpMat A(n + r, n + r);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Vec rhs(n + r);
  rhs.head(n) = sys.f;
  rhs.tail(r) = b;

  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SolveError("sparse factorization of the constrained system failed");
  Vec x = lu.solve(rhs);

  Solution sol;
  sol.diag.reduced_dim = n - r;
  const double scale = rhs.norm() + 1.0;
  const double residual = (A * x - rhs).norm() / scale;
  if (!x.allFinite() || residual > 1e-8)
    throw SolveError("constrained solve did not reach backward stability");
  sol.q = x.head(n);
  sol.diag.reduced_residual = residual;
  return sol;
}

}  // namespace pfdg
