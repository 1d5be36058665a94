#include "pfdg/problems.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace pfdg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// u = x^2 y + sin(a x) sin(a y), a = 11 pi / 2: the oscillatory field shared
// by the trigonometric Poisson and biharmonic benchmarks.
struct TrigField {
  double a = 5.5 * kPi;
  double value(double x, double y) const { return x * x * y + std::sin(a * x) * std::sin(a * y); }
  Vec3 gradient(double x, double y) const {
    Vec3 g = Vec3::Zero();
    g[0] = 2.0 * x * y + a * std::cos(a * x) * std::sin(a * y);
    g[1] = x * x + a * std::sin(a * x) * std::cos(a * y);
    return g;
  }
  double laplacian(double x, double y) const {
    return 2.0 * y - 2.0 * a * a * std::sin(a * x) * std::sin(a * y);
  }
  Vec3 grad_laplacian(double x, double y) const {
    Vec3 g = Vec3::Zero();
    g[0] = -2.0 * a * a * a * std::cos(a * x) * std::sin(a * y);
    g[1] = 2.0 - 2.0 * a * a * a * std::sin(a * x) * std::cos(a * y);
    return g;
  }
  double bilaplacian(double x, double y) const {
    return 4.0 * a * a * a * a * std::sin(a * x) * std::sin(a * y);
  }
};

struct Gaussian {
  double a = 0, b = 0, c = 0;
  double x = 0, y = 0, z = 0;
};

// Draw order per bump: widths first, then the center, matching the
// documented reproducibility contract (seeded, [1,60] widths).
std::vector<Gaussian> random_bumps(uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  std::vector<Gaussian> bumps(50);
  for (auto& g : bumps) {
    g.a = uniform(rng, 1.0, 60.0);
    g.b = uniform(rng, 1.0, 60.0);
    if (dim == 3) g.c = uniform(rng, 1.0, 60.0);
    g.x = uniform(rng, -1.0, 1.0);
    g.y = uniform(rng, -1.0, 1.0);
    if (dim == 3) g.z = uniform(rng, -1.0, 1.0);
  }
  return bumps;
}

BenchmarkSpec make_ex1() {
  BenchmarkSpec bs;
  bs.name = "ex1_trig";
  bs.pde = PdeClass::Poisson;
  TrigField tf;
  bs.exact = [tf](const Vec3& x, int) { return tf.value(x[0], x[1]); };
  bs.exact_gradient = [tf](const Vec3& x, int) { return tf.gradient(x[0], x[1]); };
  bs.exact_laplacian = [tf](const Vec3& x, int) { return tf.laplacian(x[0], x[1]); };
  bs.source = [tf](const Vec3& x) { return -tf.laplacian(x[0], x[1]); };
  bs.dirichlet.value = [tf](const Vec3& x, int) { return tf.value(x[0], x[1]); };
  bs.mesh_builder = [](int n) {
    return build_quad_mesh(Vec3(-1, -1, 0), Vec3(1, 1, 0), n, n);
  };
  bs.default_sizes = {4, 8, 16, 32};
  return bs;
}

BenchmarkSpec make_ex2(uint64_t seed) {
  BenchmarkSpec bs;
  bs.name = "ex2_exp2d";
  bs.pde = PdeClass::Poisson;
  bs.seed = seed;
  auto bumps = std::make_shared<std::vector<Gaussian>>(random_bumps(seed, 2));
  auto value = [bumps](const Vec3& p, int) {
    double s = 0.0;
    for (const auto& g : *bumps) {
      const double dx = p[0] - g.x, dy = p[1] - g.y;
      s += std::exp(-(g.a * dx * dx + g.b * dy * dy));
    }
    return s;
  };
  bs.exact = value;
  bs.exact_gradient = [bumps](const Vec3& p, int) {
    Vec3 out = Vec3::Zero();
    for (const auto& g : *bumps) {
      const double dx = p[0] - g.x, dy = p[1] - g.y;
      const double e = std::exp(-(g.a * dx * dx + g.b * dy * dy));
      out[0] += -2.0 * g.a * dx * e;
      out[1] += -2.0 * g.b * dy * e;
    }
    return out;
  };
  bs.exact_laplacian = [bumps](const Vec3& p, int) {
    double s = 0.0;
    for (const auto& g : *bumps) {
      const double dx = p[0] - g.x, dy = p[1] - g.y;
      const double e = std::exp(-(g.a * dx * dx + g.b * dy * dy));
      s += (4.0 * g.a * g.a * dx * dx + 4.0 * g.b * g.b * dy * dy - 2.0 * (g.a + g.b)) * e;
    }
    return s;
  };
  auto lap = bs.exact_laplacian;
  bs.source = [lap](const Vec3& p) { return -lap(p, 0); };
  bs.dirichlet.value = bs.exact;
  bs.mesh_builder = [](int n) {
    return build_quad_mesh(Vec3(-1, -1, 0), Vec3(1, 1, 0), n, n);
  };
  bs.default_sizes = {8, 16, 32};
  return bs;
}

// theta measured from the positive x-axis, wrapped to [0, 2 pi).
double wrapped_angle(double x, double y) {
  double t = std::atan2(y, x);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

BenchmarkSpec make_ex3() {
  BenchmarkSpec bs;
  bs.name = "ex3_lshape_poisson";
  bs.pde = PdeClass::Poisson;
  bs.exact = [](const Vec3& p, int) {
    const double r = std::hypot(p[0], p[1]);
    if (r == 0.0) return 0.0;
    return std::pow(r, 2.0 / 3.0) * std::sin(2.0 / 3.0 * wrapped_angle(p[0], p[1]));
  };
  bs.exact_gradient = [](const Vec3& p, int) {
    Vec3 g = Vec3::Zero();
    const double r = std::hypot(p[0], p[1]);
    if (r == 0.0) return g;
    const double t = wrapped_angle(p[0], p[1]);
    const double s = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0);
    g[0] = -s * std::sin(t / 3.0);
    g[1] = s * std::cos(t / 3.0);
    return g;
  };
  bs.exact_laplacian = [](const Vec3&, int) { return 0.0; };  // harmonic
  bs.source = [](const Vec3&) { return 0.0; };
  bs.dirichlet.value = bs.exact;
  // L-shape missing the {x>0, y<0} quadrant, graded twice toward the
  // re-entrant corner at the origin.
  bs.mesh_builder = [](int n) {
    Mesh mesh = build_lshape_quad_mesh(n, 3);
    for (double radius : {0.5, 0.25}) {
      std::vector<int> marked;
      for (size_t e = 0; e < mesh.elements.size(); ++e)
        if (mesh.elements[e].midpoint.norm() < radius) marked.push_back(static_cast<int>(e));
      mesh = refine_quadtree(mesh, marked);
    }
    return mesh;
  };
  bs.default_sizes = {4, 8, 16};
  return bs;
}

// Singular wedge solution with traction-free faces outside the mesh: the
// corner is rotated/shifted so the singular point lies off the domain.
struct WedgeField {
  double beta = 0, C1 = 0, C2 = 0, k = 0;  // k = 1/(2 mu)
  double omega = 0.75 * kPi;
  double phi = -0.75 * kPi;
  double xs = 0.5, ys = 0.5;

  static double critical_exponent() {
    const double omega = 0.75 * kPi;
    auto g = [omega](double b) { return b * std::sin(2.0 * omega) + std::sin(2.0 * omega * b); };
    double lo = 0.5, hi = 0.6;
    for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (g(lo) * g(mid) <= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  }

  static WedgeField build(double E, double nu) {
    WedgeField w;
    const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = E / (2.0 * (1.0 + nu));
    w.beta = critical_exponent();
    w.C1 = -std::cos((w.beta + 1.0) * w.omega) / std::cos((w.beta - 1.0) * w.omega);
    w.C2 = 2.0 * (lambda + 2.0 * mu) / (lambda + mu);
    w.k = 1.0 / (2.0 * mu);
    return w;
  }

  // Angular profiles of the polar displacement components and their
  // derivatives.
  void profiles(double t, double& A, double& B, double& dA, double& dB) const {
    const double b1 = beta + 1.0, b2 = beta - 1.0;
    A = -b1 * std::cos(b1 * t) + (C2 - b1) * C1 * std::cos(b2 * t);
    B = b1 * std::sin(b1 * t) + (C2 + b2) * C1 * std::sin(b2 * t);
    dA = b1 * b1 * std::sin(b1 * t) - b2 * (C2 - b1) * C1 * std::sin(b2 * t);
    dB = b1 * b1 * std::cos(b1 * t) + b2 * (C2 + b2) * C1 * std::cos(b2 * t);
  }

  void aux_coords(const Vec3& p, double& xi, double& eta) const {
    const double dx = p[0] - xs, dy = p[1] - ys;
    xi = std::cos(phi) * dx + std::sin(phi) * dy;
    eta = -std::sin(phi) * dx + std::cos(phi) * dy;
  }

  // Displacement in global components.
  Vec3 displacement(const Vec3& p) const {
    double xi, eta;
    aux_coords(p, xi, eta);
    const double r = std::hypot(xi, eta), t = std::atan2(eta, xi);
    double A, B, dA, dB;
    profiles(t, A, B, dA, dB);
    const double ur = k * std::pow(r, beta) * A;
    const double ut = k * std::pow(r, beta) * B;
    const double uxi = ur * std::cos(t) - ut * std::sin(t);
    const double ueta = ur * std::sin(t) + ut * std::cos(t);
    Vec3 u = Vec3::Zero();
    u[0] = std::cos(phi) * uxi - std::sin(phi) * ueta;
    u[1] = std::sin(phi) * uxi + std::cos(phi) * ueta;
    return u;
  }

  // Gradient of the global displacement components w.r.t. global coordinates.
  Mat gradient(const Vec3& p) const {
    double xi, eta;
    aux_coords(p, xi, eta);
    const double r = std::hypot(xi, eta), t = std::atan2(eta, xi);
    double A, B, dA, dB;
    profiles(t, A, B, dA, dB);
    const double ct = std::cos(t), st = std::sin(t);
    // Cartesian components in the auxiliary frame, u = k r^beta (P, Q)(theta).
    const double P = A * ct - B * st, Q = A * st + B * ct;
    const double dP = dA * ct - A * st - dB * st - B * ct;
    const double dQ = dA * st + A * ct + dB * ct - B * st;
    const double rb1 = k * std::pow(r, beta - 1.0);
    Mat G(2, 2);  // rows: component, cols: d/dxi, d/deta
    G(0, 0) = rb1 * (beta * P * ct - dP * st);
    G(0, 1) = rb1 * (beta * P * st + dP * ct);
    G(1, 0) = rb1 * (beta * Q * ct - dQ * st);
    G(1, 1) = rb1 * (beta * Q * st + dQ * ct);
    // Push forward to global coordinates: u_glob = R u_aux, x_aux = R^T x_glob
    // with R = rotation(phi), so grad_glob = R G R^T.
    Mat R(2, 2);
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return R * G * R.transpose();
  }
};

BenchmarkSpec make_ex4() {
  BenchmarkSpec bs;
  bs.name = "ex4_lshape_elastic";
  bs.pde = PdeClass::Elasticity;
  bs.components = 2;
  // The text pairs E = 1 with an impossible shear value; we read the second
  // parameter as Poisson's ratio 0.2, which keeps plane strain well posed.
  bs.E = 1.0;
  bs.nu = 0.2;
  auto wf = std::make_shared<WedgeField>(WedgeField::build(bs.E, bs.nu));
  bs.exact = [wf](const Vec3& p, int c) { return wf->displacement(p)[c]; };
  bs.exact_gradient = [wf](const Vec3& p, int c) {
    Mat G = wf->gradient(p);
    Vec3 g = Vec3::Zero();
    g[0] = G(c, 0);
    g[1] = G(c, 1);
    return g;
  };
  bs.body = [](const Vec3&) { return Vec3::Zero(); };
  bs.dirichlet.value = bs.exact;
  // L-shape missing the {x>0, y>0} quadrant; the shifted singular point
  // (0.5, 0.5) sits inside the removed quadrant.
  bs.mesh_builder = [](int n) { return build_lshape_quad_mesh(n, 0); };
  bs.default_sizes = {4, 8, 16};
  return bs;
}

BenchmarkSpec make_ex5() {
  BenchmarkSpec bs;
  bs.name = "ex5_cook";
  bs.pde = PdeClass::Hyperelastic;
  bs.components = 2;
  bs.E = 500.0;
  bs.nu = 0.35;
  const double p0 = 20.0;
  bs.p0 = p0;
  bs.dirichlet.value = [](const Vec3&, int) { return 0.0; };  // clamped edge
  bs.traction = [p0](const Vec3&) {
    Vec3 t = Vec3::Zero();
    t[1] = p0;
    return t;
  };
  bs.mesh_builder = [](int n) {
    Mesh mesh = build_mapped_quad_mesh(
        {Vec3(0, 0, 0), Vec3(48, 44, 0), Vec3(48, 60, 0), Vec3(0, 44, 0)}, n);
    for (auto& face : mesh.boundary) {
      const Vec3 mid =
          0.5 * (mesh.vertices[face.vertices[0]] + mesh.vertices[face.vertices[1]]);
      face.tag = std::abs(mid[0]) < 1e-9 ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
    }
    return mesh;
  };
  bs.default_sizes = {2, 4, 8};
  bs.has_probe = true;
  bs.probe_point = Vec3(48, 60, 0);
  bs.probe_component = 1;
  bs.probe_reference = 10.59;
  return bs;
}

BenchmarkSpec make_ex6() {
  BenchmarkSpec bs;
  bs.name = "ex6_biharmonic";
  bs.pde = PdeClass::Biharmonic;
  bs.problem_class = ProblemClass::FourthOrder;
  bs.min_order = 2;
  TrigField tf;
  bs.exact = [tf](const Vec3& x, int) { return tf.value(x[0], x[1]); };
  bs.exact_gradient = [tf](const Vec3& x, int) { return tf.gradient(x[0], x[1]); };
  bs.exact_laplacian = [tf](const Vec3& x, int) { return tf.laplacian(x[0], x[1]); };
  const double b = 1.3 * kPi, c = 1.8 * kPi;
  bs.m1 = [b, c](const Vec3& p) { return std::sin(b * p[0]) * std::cos(c * p[1]) + 2.0; };
  bs.grad_m1 = [b, c](const Vec3& p) {
    Vec3 g = Vec3::Zero();
    g[0] = b * std::cos(b * p[0]) * std::cos(c * p[1]);
    g[1] = -c * std::sin(b * p[0]) * std::sin(c * p[1]);
    return g;
  };
  bs.m2 = [](const Vec3& p) {
    const double x = p[0], y = p[1];
    return 4.0 * x * x * y * y + 2.0 * x * y * y + y + 1.0;
  };
  bs.m3 = [](const Vec3& p) {
    const double x = p[0], y = p[1];
    return 3.0 * x * y * y - 2.0 * x * y + 2.0;
  };
  // f = lap(m1 lap u) + div(m2 grad u) + m3 u, expanded analytically:
  // lap(m1 w) = m1 lap w + 2 grad m1 . grad w + w lap m1 with w = lap u,
  // div(m2 grad u) = m2 lap u + grad m2 . grad u.
  auto m1 = bs.m1, m2 = bs.m2, m3 = bs.m3;
  auto g1fn = bs.grad_m1;
  bs.source = [tf, b, c, m1, m2, m3, g1fn](const Vec3& p) {
    const double x = p[0], y = p[1];
    const double w = tf.laplacian(x, y);
    const Vec3 gw = tf.grad_laplacian(x, y);
    const Vec3 g1 = g1fn(p);
    const double lap_m1 = -(b * b + c * c) * std::sin(b * x) * std::cos(c * y);
    const double term1 = m1(p) * tf.bilaplacian(x, y) +
                         2.0 * (g1[0] * gw[0] + g1[1] * gw[1]) + w * lap_m1;
    const Vec3 gu = tf.gradient(x, y);
    const Vec3 g2(8.0 * x * y * y + 2.0 * y * y, 8.0 * x * x * y + 4.0 * x * y + 1.0, 0.0);
    const double term2 = m2(p) * w + g2[0] * gu[0] + g2[1] * gu[1];
    return term1 + term2 + m3(p) * tf.value(x, y);
  };
  bs.dirichlet.value = bs.exact;
  bs.dirichlet.normal_deriv = [tf](const Vec3& x, const Vec3& n) {
    return tf.gradient(x[0], x[1]).dot(n);
  };
  // Triangles: on quadrilaterals the clamped value+gradient moment rows
  // saturate the total-degree space (no admissible family left); triangles
  // carry 1.5 faces per element and keep a spline-like family with full
  // approximation power.
  bs.mesh_builder = [](int n) {
    return build_tri_mesh(Vec3(-1, -1, 0), Vec3(1, 1, 0), n, n);
  };
  bs.default_sizes = {8, 16, 32};
  return bs;
}

BenchmarkSpec make_ex7(uint64_t seed) {
  BenchmarkSpec bs;
  bs.name = "ex7_exp3d";
  bs.pde = PdeClass::Poisson;
  bs.dim = 3;
  bs.seed = seed;
  auto bumps = std::make_shared<std::vector<Gaussian>>(random_bumps(seed, 3));
  bs.exact = [bumps](const Vec3& p, int) {
    double s = 0.0;
    for (const auto& g : *bumps) {
      const double dx = p[0] - g.x, dy = p[1] - g.y, dz = p[2] - g.z;
      s += std::exp(-(g.a * dx * dx + g.b * dy * dy + g.c * dz * dz));
    }
    return s;
  };
  bs.exact_gradient = [bumps](const Vec3& p, int) {
    Vec3 out = Vec3::Zero();
    for (const auto& g : *bumps) {
      const double dx = p[0] - g.x, dy = p[1] - g.y, dz = p[2] - g.z;
      const double e = std::exp(-(g.a * dx * dx + g.b * dy * dy + g.c * dz * dz));
      out[0] += -2.0 * g.a * dx * e;
      out[1] += -2.0 * g.b * dy * e;
      out[2] += -2.0 * g.c * dz * e;
    }
    return out;
  };
  bs.exact_laplacian = [bumps](const Vec3& p, int) {
    double s = 0.0;
    for (const auto& g : *bumps) {
      const double dx = p[0] - g.x, dy = p[1] - g.y, dz = p[2] - g.z;
      const double e = std::exp(-(g.a * dx * dx + g.b * dy * dy + g.c * dz * dz));
      s += (4.0 * (g.a * g.a * dx * dx + g.b * g.b * dy * dy + g.c * g.c * dz * dz) -
            2.0 * (g.a + g.b + g.c)) *
           e;
    }
    return s;
  };
  auto lap = bs.exact_laplacian;
  bs.source = [lap](const Vec3& p) { return -lap(p, 0); };
  bs.dirichlet.value = bs.exact;
  bs.mesh_builder = [](int n) {
    return build_hex_mesh(Vec3(-1, -1, -1), Vec3(1, 1, 1), n, n, n);
  };
  bs.default_sizes = {4, 8, 16};
  return bs;
}

}  // namespace

BenchmarkSpec get_benchmark(const std::string& name, uint64_t seed) {
  if (name == "ex1_trig") return make_ex1();
  if (name == "ex2_exp2d") return make_ex2(seed);
  if (name == "ex3_lshape_poisson") return make_ex3();
  if (name == "ex4_lshape_elastic") return make_ex4();
  if (name == "ex5_cook") return make_ex5();
  if (name == "ex6_biharmonic") return make_ex6();
  if (name == "ex7_exp3d") return make_ex7(seed);
  throw ConfigError("unknown benchmark: " + name);
}

std::vector<std::string> benchmark_names() {
  return {"ex1_trig",  "ex2_exp2d",      "ex3_lshape_poisson", "ex4_lshape_elastic",
          "ex5_cook",  "ex6_biharmonic", "ex7_exp3d"};
}

}  // namespace pfdg
