#include "pfdg/hyperelastic.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>
#include <cmath>

#include "element_rules.hpp"
#include "pfdg/quadrature.hpp"

namespace pfdg {

namespace {

using detail::quad_point;

// Embed a 2x2 in-plane tensor as 3x3 with unit out-of-plane stretch.
Mat embed3(const Mat& C) {
  if (C.rows() == 3) return C;
  Mat C3 = Mat::Identity(3, 3);
  C3.topLeftCorner(2, 2) = C;
  return C3;
}

double jacobian_from(const Mat& C3) {
  const double detC = C3.determinant();
  if (!(detC > 0.0)) throw SolveError("right Cauchy-Green tensor lost positive definiteness");
  return std::sqrt(detC);
}

}  // namespace

Material Material::from_youngs(double E, double nu) {
  if (!(nu > -1.0 && nu < 0.5)) throw ConfigError("plane strain needs -1 < nu < 0.5");
  if (!(E > 0.0)) throw ConfigError("Young's modulus must be positive");
  Material m;
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  m.mu = E / (2.0 * (1.0 + nu));
  return m;
}

double energy(const Mat& C, const Material& mat) {
  Mat C3 = embed3(C);
  const double J = jacobian_from(C3);
  return 0.5 * mat.mu * (C3.trace() - 3.0) + 0.25 * mat.lambda * (J * J - 1.0) -
         (0.5 * mat.lambda + mat.mu) * std::log(J);
}

Mat stress(const Mat& C, const Material& mat) {
  Mat C3 = embed3(C);
  const double J = jacobian_from(C3);
  Mat Cinv = C3.inverse();
  Mat S3 = 0.5 * mat.lambda * (J * J - 1.0) * Cinv + mat.mu * (Mat::Identity(3, 3) - Cinv);
  if (C.rows() == 2) return S3.topLeftCorner(2, 2);
  return S3;
}

Mat tangent(const Mat& C, const Material& mat) {
  if (C.rows() != 2) throw ConfigError("tangent is defined for the 2x2 plane-strain state");
  const double J = jacobian_from(embed3(C));
  Mat Cinv = C.inverse();
  Vec v(3);
  v << Cinv(0, 0), Cinv(1, 1), Cinv(0, 1);
  // I_{Cinv}, the symmetrized -d(C^-1)/dC kernel, in the same Voigt layout.
  Mat IC(3, 3);
  IC(0, 0) = Cinv(0, 0) * Cinv(0, 0);
  IC(1, 1) = Cinv(1, 1) * Cinv(1, 1);
  IC(0, 1) = IC(1, 0) = Cinv(0, 1) * Cinv(0, 1);
  IC(0, 2) = IC(2, 0) = Cinv(0, 0) * Cinv(0, 1);
  IC(1, 2) = IC(2, 1) = Cinv(1, 1) * Cinv(0, 1);
  IC(2, 2) = 0.5 * (Cinv(0, 0) * Cinv(1, 1) + Cinv(0, 1) * Cinv(0, 1));
  return mat.lambda * J * J * v * v.transpose() + (2.0 * mat.mu - mat.lambda * (J * J - 1.0)) * IC;
}

namespace {

QuadRule volume_rule_2d(const Mesh& mesh, int e, int degree) {
  std::vector<Vec3> loop = mesh.loop(e);
  if (loop.size() == 3) return rule_triangle(loop[0], loop[1], loop[2], degree);
  if (loop.size() == 4) return rule_quad({loop[0], loop[1], loop[2], loop[3]}, degree);
  return rule_polygon(loop, degree);
}

// Displacement gradient of the current state at quadrature point q.
Mat displacement_gradient(const Space& space, const BasisEval& ev, const Vec& q_dofs, int e,
                          int q) {
  Mat G = Mat::Zero(2, 2);
  const int m = ev.m;
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < m; ++k) {
      const double coef = q_dofs(space.dof(e, c, k));
      G(c, 0) += coef * ev.grads(q, k * 2 + 0);
      G(c, 1) += coef * ev.grads(q, k * 2 + 1);
    }
  return G;
}

// delta E(v) columns at the current F: 3 x (2m) in Voigt order
// (E11, E22, 2 E12) for local dofs ordered all-x then all-y.
Mat variation_matrix(const BasisEval& ev, const Mat& F, int q) {
  const int m = ev.m;
  Mat B(3, 2 * m);
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < m; ++k) {
      const double gx = ev.grads(q, k * 2 + 0), gy = ev.grads(q, k * 2 + 1);
      B(0, c * m + k) = gx * F(c, 0);
      B(1, c * m + k) = gy * F(c, 1);
      B(2, c * m + k) = gx * F(c, 1) + gy * F(c, 0);
    }
  return B;
}

// Small-strain columns (trial side of the linearized increment).
Mat small_strain_matrix(const BasisEval& ev, int q) {
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

}  // namespace

Vec newton_solve(const Space& space, const AdmissibleSubset& adm, const Material& mat,
                 const VectorFn& traction, const NewtonOptions& opts, NewtonReport* report) {
  if (space.components != 2)
    throw ConfigError("hyperelastic solve needs a two-component space");
  const Mesh& mesh = *space.mesh;
  if (mesh.dim != 2) throw ConfigError("hyperelastic solve is plane strain (2D)");
  if (opts.steps < 1) throw ConfigError("load stepping needs at least one increment");
  const int64_t N = space.total();
  if (adm.Wbar.rows() != N) throw ConfigError("admissible subset does not match the space");

  // Reference external load at full Lambda = 1.
  Vec fext = Vec::Zero(N);
  for (const auto& face : mesh.boundary) {
    if (face.tag != BoundaryTag::Neumann) continue;
    if (!traction) throw ConfigError("Neumann face without traction data");
    const int e = face.element;
    const int m = space.mcount(e);
    QuadRule rule = rule_segment(mesh.vertices[face.vertices[0]], mesh.vertices[face.vertices[1]],
                                 2 * space.order(e) + 3);
    BasisEval ev = space.eval(e, rule.points, 0);
    for (int q = 0; q < rule.weights.size(); ++q) {
      const Vec3 t = traction(quad_point(rule.points, q));
      const double w = rule.weights(q);
      for (int k = 0; k < m; ++k) {
        fext(space.dof(e, 0, k)) += w * ev.values(q, k) * t[0];
        fext(space.dof(e, 1, k)) += w * ev.values(q, k) * t[1];
      }
    }
  }

  SpMat Wt = SpMat(adm.Wbar.transpose());
  const double load_scale = 1.0 + (Wt * fext).norm();

  // Per-element quadrature and basis data are state-independent; cache them.
  struct ElemData {
    QuadRule rule;
    BasisEval ev;
    std::vector<int64_t> dofs;
  };
  std::vector<ElemData> cache(mesh.elements.size());
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const int ei = static_cast<int>(e);
    cache[e].rule = volume_rule_2d(mesh, ei, 2 * space.order(ei) + 3);
    cache[e].ev = space.eval(ei, cache[e].rule.points, 1);
    const int m = space.mcount(ei);
    cache[e].dofs.resize(2 * static_cast<size_t>(m));
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < m; ++k) cache[e].dofs[c * m + k] = space.dof(ei, c, k);
  }

  // Internal force: f_int(i) = int grad(Psi_i) : P with P = F S.
  auto internal_force = [&](const Vec& q_dofs) {
    Vec fint = Vec::Zero(N);
    for (size_t e = 0; e < mesh.elements.size(); ++e) {
      const ElemData& ed = cache[e];
      const int m = ed.ev.m;
      Vec fe = Vec::Zero(2 * m);
      for (int q = 0; q < ed.rule.weights.size(); ++q) {
        const double w = ed.rule.weights(q);
        Mat F = Mat::Identity(2, 2) +
                displacement_gradient(space, ed.ev, q_dofs, static_cast<int>(e), q);
        Mat C = F.transpose() * F;
        Mat P = F * stress(C, mat);
        for (int c = 0; c < 2; ++c)
          for (int k = 0; k < m; ++k)
            fe(c * m + k) += w * (ed.ev.grads(q, k * 2 + 0) * P(c, 0) +
                                  ed.ev.grads(q, k * 2 + 1) * P(c, 1));
      }
      for (size_t k = 0; k < ed.dofs.size(); ++k) fint(ed.dofs[k]) += fe(k);
    }
    return fint;
  };

  // Tangent stiffness int deltaE(v) : C_tan : eps(du) at the current state.
  auto tangent_matrix = [&](const Vec& q_dofs) {
    std::vector<Triplet> trips;
    for (size_t e = 0; e < mesh.elements.size(); ++e) {
      const ElemData& ed = cache[e];
      const int m = ed.ev.m;
      Mat Ke = Mat::Zero(2 * m, 2 * m);
      for (int q = 0; q < ed.rule.weights.size(); ++q) {
        const double w = ed.rule.weights(q);
        Mat F = Mat::Identity(2, 2) +
                displacement_gradient(space, ed.ev, q_dofs, static_cast<int>(e), q);
        Mat C = F.transpose() * F;
        Mat Ct = tangent(C, mat);
        Mat Bt = variation_matrix(ed.ev, F, q);
        Mat Bs = small_strain_matrix(ed.ev, q);
        Ke += w * Bt.transpose() * (Ct * Bs);
      }
      for (size_t i = 0; i < ed.dofs.size(); ++i)
        for (size_t j = 0; j < ed.dofs.size(); ++j)
          if (Ke(i, j) != 0.0)
            trips.push_back({static_cast<int>(ed.dofs[i]), static_cast<int>(ed.dofs[j]), Ke(i, j)});
    }
    SpMat K(N, N);
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
  };

  Vec q_dofs = adm.q_b;
  NewtonReport rep;
  const int64_t n = adm.Wbar.cols();
  for (int step = 1; step <= opts.steps; ++step) {
    const double Lambda = static_cast<double>(step) / opts.steps;
    SpMat Kr = (Wt * tangent_matrix(q_dofs) * adm.Wbar).pruned();
    const bool dense = n <= opts.dense_cutoff;
    Eigen::PartialPivLU<Mat> dlu;
    Eigen::SparseLU<SpMat> slu;
    if (dense) {
      dlu.compute(Mat(Kr));
    } else {
      slu.compute(Kr);
      if (slu.info() != Eigen::Success)
        throw SolveError("sparse factorization of the tangent failed");
    }
    bool converged = false;
    int iters = 0;
    for (; iters <= opts.max_iters; ++iters) {
      Vec rr = Wt * (Lambda * fext - internal_force(q_dofs));
      rep.final_residual = rr.norm();
      if (rep.final_residual < opts.tol * load_scale) {
        converged = true;
        break;
      }
      if (iters == opts.max_iters) break;
      Vec dz = dense ? Vec(dlu.solve(rr)) : Vec(slu.solve(rr));
      if (!dz.allFinite()) throw SolveError("tangent solve produced a non-finite update");
      q_dofs += adm.Wbar * dz;
      ++rep.total_iterations;
    }
    rep.iterations_per_step.push_back(iters);
    if (!converged)
      throw SolveError("load increment did not converge within the iteration budget");
  }
  if (report) *report = rep;
  return q_dofs;
}

}  // namespace pfdg
