#include "pfdg/quadrature.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace pfdg {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw Error("gauss_legendre: n must be >= 1");
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
      // Chebyshev-like initial guess, then Newton on P_n.
      double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-15) break;
      }
      x[i] = -t;
      x[n - 1 - i] = t;
      double wi = 2.0 / ((1.0 - t * t) * dp * dp);
      w[i] = wi;
      w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
    it = cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first;
  }
  nodes = it->second.first;
  weights = it->second.second;
}

static int points_for_degree(int degree) { return degree / 2 + 1; }

QuadRule rule_interval(double a, double b, int degree) {
  std::vector<double> x, w;
  gauss_legendre(points_for_degree(degree), x, w);
  int n = static_cast<int>(x.size());
  QuadRule r;
  r.points.resize(n, 1);
  r.weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.points(i, 0) = mid + half * x[i];
    r.weights(i) = half * w[i];
  }
  return r;
}

QuadRule rule_segment(const Vec3& a, const Vec3& b, int degree) {
  std::vector<double> x, w;
  gauss_legendre(points_for_degree(degree), x, w);
  int n = static_cast<int>(x.size());
  QuadRule r;
  r.points.resize(n, 2);
  r.weights.resize(n);
  const double half_len = 0.5 * (b - a).head<2>().norm();
  for (int i = 0; i < n; ++i) {
    Vec3 p = 0.5 * (a + b) + 0.5 * x[i] * (b - a);
    r.points(i, 0) = p[0];
    r.points(i, 1) = p[1];
    r.weights(i) = half_len * w[i];
  }
  return r;
}

QuadRule rule_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int degree) {
  // Duffy map from the square: (s,t) in [-1,1]^2 -> barycentric
  // u = (1+s)/2, v = (1-s)/2 * (1+t)/2; the collapse makes the pullback of a
  // total-degree-d polynomial degree d+1 in s (Jacobian included), d in t.
  std::vector<double> xs, ws, xt, wt;
  gauss_legendre(points_for_degree(degree + 1), xs, ws);
  gauss_legendre(points_for_degree(degree), xt, wt);
  const double area2 = std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  int ns = static_cast<int>(xs.size()), nt = static_cast<int>(xt.size());
  QuadRule r;
  r.points.resize(ns * nt, 2);
  r.weights.resize(ns * nt);
  int k = 0;
  for (int i = 0; i < ns; ++i) {
    double u = 0.5 * (1.0 + xs[i]);
    for (int j = 0; j < nt; ++j) {
      double v = 0.5 * (1.0 - xs[i]) * 0.5 * (1.0 + xt[j]);
      Vec3 p = a + u * (b - a) + v * (c - a);
      r.points(k, 0) = p[0];
      r.points(k, 1) = p[1];
      // d(u,v)/d(s,t) = (1-s)/8; physical area factor = area2 (= 2*area).
      r.weights(k) = ws[i] * wt[j] * (1.0 - xs[i]) / 8.0 * area2;
      ++k;
    }
  }
  return r;
}

QuadRule rule_quad(const std::array<Vec3, 4>& corners, int degree) {
  std::vector<double> x, w;
  gauss_legendre(points_for_degree(degree + 1), x, w);
  int n = static_cast<int>(x.size());
  QuadRule r;
  r.points.resize(n * n, 2);
  r.weights.resize(n * n);
  const auto& c = corners;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = x[i], t = x[j];
      double n0 = 0.25 * (1 - s) * (1 - t), n1 = 0.25 * (1 + s) * (1 - t);
      double n2 = 0.25 * (1 + s) * (1 + t), n3 = 0.25 * (1 - s) * (1 + t);
      Vec3 p = n0 * c[0] + n1 * c[1] + n2 * c[2] + n3 * c[3];
      Vec3 dps = 0.25 * (-(1 - t) * c[0] + (1 - t) * c[1] + (1 + t) * c[2] - (1 + t) * c[3]);
      Vec3 dpt = 0.25 * (-(1 - s) * c[0] - (1 + s) * c[1] + (1 + s) * c[2] + (1 - s) * c[3]);
      double jac = dps[0] * dpt[1] - dps[1] * dpt[0];
      r.points(k, 0) = p[0];
      r.points(k, 1) = p[1];
      r.weights(k) = w[i] * w[j] * std::abs(jac);
      ++k;
    }
  }
  return r;
}

QuadRule rule_polygon(const std::vector<Vec3>& loop, int degree) {
  const int m = static_cast<int>(loop.size());
  if (m < 3) throw Error("rule_polygon: fewer than 3 vertices");
  Vec3 star = Vec3::Zero();
  for (const auto& v : loop) star += v;
  star /= m;

  auto fan_ok = [&](const Vec3& s) {
    for (int i = 0; i < m; ++i) {
      const Vec3& a = loop[i];
      const Vec3& b = loop[(i + 1) % m];
      double cross = (a[0] - s[0]) * (b[1] - s[1]) - (b[0] - s[0]) * (a[1] - s[1]);
      if (cross <= 0) return false;  // assumes counter-clockwise loops
    }
    return true;
  };

  if (!fan_ok(star)) {
    // Weakly convex input: probe along rays from the centroid toward edge midpoints.
    bool found = false;
    for (int i = 0; i < m && !found; ++i) {
      Vec3 mid = 0.5 * (loop[i] + loop[(i + 1) % m]);
      for (double t : {0.25, 0.5, 0.75}) {
        Vec3 cand = star + t * (mid - star);
        if (fan_ok(cand)) {
          star = cand;
          found = true;
          break;
        }
      }
    }
    if (!found) throw Error("rule_polygon: no star point found (non-convex element?)");
  }

  std::vector<QuadRule> parts;
  int total = 0;
  for (int i = 0; i < m; ++i) {
    parts.push_back(rule_triangle(star, loop[i], loop[(i + 1) % m], degree));
    total += static_cast<int>(parts.back().weights.size());
  }
  QuadRule r;
  r.points.resize(total, 2);
  r.weights.resize(total);
  int k = 0;
  for (const auto& part : parts) {
    int np = static_cast<int>(part.weights.size());
    r.points.middleRows(k, np) = part.points;
    r.weights.segment(k, np) = part.weights;
    k += np;
  }
  return r;
}

QuadRule rule_box(const Vec3& lo, const Vec3& hi, int degree) {
  std::vector<double> x, w;
  gauss_legendre(points_for_degree(degree), x, w);
  int n = static_cast<int>(x.size());
  QuadRule r;
  r.points.resize(n * n * n, 3);
  r.weights.resize(n * n * n);
  Vec3 mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        r.points(k, 0) = mid[0] + half[0] * x[i];
        r.points(k, 1) = mid[1] + half[1] * x[j];
        r.points(k, 2) = mid[2] + half[2] * x[l];
        r.weights(k) = w[i] * w[j] * w[l] * half[0] * half[1] * half[2];
        ++k;
      }
  return r;
}

QuadRule rule_rect3d(const std::array<Vec3, 4>& corners, int degree) {
  std::vector<double> x, w;
  gauss_legendre(points_for_degree(degree), x, w);
  int n = static_cast<int>(x.size());
  QuadRule r;
  r.points.resize(n * n, 3);
  r.weights.resize(n * n);
  const Vec3 e1 = 0.5 * (corners[1] - corners[0]);
  const Vec3 e2 = 0.5 * (corners[3] - corners[0]);
  const Vec3 mid = corners[0] + e1 + e2;
  const double jac = e1.cross(e2).norm();
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec3 p = mid + x[i] * e1 + x[j] * e2;
      r.points.row(k) = p.transpose();
      r.weights(k) = w[i] * w[j] * jac;
      ++k;
    }
  return r;
}

}  // namespace pfdg
