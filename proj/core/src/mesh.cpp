#include "pfdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

namespace pfdg {

namespace {

constexpr double kSnap = 1e-9;  // coordinate hash grid for dedup/collinearity

int64_t snap(double x) { return static_cast<int64_t>(std::llround(x / kSnap)); }

struct Key2 {
  int64_t a, b;
  bool operator<(const Key2& o) const { return std::tie(a, b) < std::tie(o.a, o.b); }
};
struct Key3 {
  int64_t a, b, c;
  bool operator<(const Key3& o) const { return std::tie(a, b, c) < std::tie(o.a, o.b, o.c); }
};

Key3 point_key(const Vec3& p) { return {snap(p[0]), snap(p[1]), snap(p[2])}; }

void finalize_element_geometry(Mesh& mesh) {
  for (auto& el : mesh.elements) {
    Vec3 mid = Vec3::Zero();
    for (int v : el.vertices) mid += mesh.vertices[v];
    el.midpoint = mid / static_cast<double>(el.vertices.size());
    double d = 0.0;
    for (size_t i = 0; i < el.vertices.size(); ++i)
      for (size_t j = i + 1; j < el.vertices.size(); ++j)
        d = std::max(d, (mesh.vertices[el.vertices[i]] - mesh.vertices[el.vertices[j]]).norm());
    el.diameter = d;
  }
}

double polygon_area(const Mesh& mesh, const Element& el) {
  double a = 0.0;
  const auto& vs = el.vertices;
  for (size_t i = 0; i < vs.size(); ++i) {
    const Vec3& p = mesh.vertices[vs[i]];
    const Vec3& q = mesh.vertices[vs[(i + 1) % vs.size()]];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

// Generic 2D skeleton/boundary extraction. Element edges are grouped by their
// supporting line; overlapping intervals between two elements become skeleton
// faces (fine sub-segments on hanging-node interfaces come out naturally),
// uncovered intervals become boundary faces.
struct EdgeRec {
  int element;
  int va, vb;      // directed as the element traverses (CCW)
  double ta, tb;   // parameters along the canonical line direction
  Vec3 pa, pb;
};

void extract_faces_2d(Mesh& mesh) {
  mesh.skeleton.clear();
  mesh.boundary.clear();
  std::map<Key3, int> vert_lookup;
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    vert_lookup[point_key(mesh.vertices[i])] = static_cast<int>(i);
  auto vertex_at = [&](const Vec3& p) {
    auto k = point_key(p);
    auto it = vert_lookup.find(k);
    if (it != vert_lookup.end()) return it->second;
    mesh.vertices.push_back(p);
    int id = static_cast<int>(mesh.vertices.size()) - 1;
    vert_lookup[k] = id;
    return id;
  };

  std::map<Key3, std::vector<EdgeRec>> lines;
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& vs = mesh.elements[e].vertices;
    for (size_t i = 0; i < vs.size(); ++i) {
      int va = vs[i], vb = vs[(i + 1) % vs.size()];
      Vec3 a = mesh.vertices[va], b = mesh.vertices[vb];
      Vec3 d = (b - a).normalized();
      if (d[0] < -kSnap || (std::abs(d[0]) <= kSnap && d[1] < 0)) d = -d;  // canonical sign
      double offset = a[0] * d[1] - a[1] * d[0];  // signed distance of line from origin
      Key3 key{snap(d[0]), snap(d[1]), snap(offset)};
      EdgeRec rec{static_cast<int>(e), va, vb, a.dot(d), b.dot(d), a, b};
      lines[key].push_back(rec);
    }
  }

  const double tol = 1e-12;
  for (auto& [key, recs] : lines) {
    (void)key;
    for (auto& r : recs) {
      // Collect the parts of this edge covered by opposite-direction edges of
      // other elements; emit a skeleton face per overlap (owned by the lower
      // edge direction to avoid duplicates).
      double lo = std::min(r.ta, r.tb), hi = std::max(r.ta, r.tb);
      std::vector<std::pair<double, double>> covered;
      for (auto& s : recs) {
        if (s.element == r.element) continue;
        if ((r.tb - r.ta) * (s.tb - s.ta) > 0) continue;  // same direction: not facing
        double slo = std::min(s.ta, s.tb), shi = std::max(s.ta, s.tb);
        double olo = std::max(lo, slo), ohi = std::min(hi, shi);
        if (ohi - olo <= tol) continue;
        covered.emplace_back(olo, ohi);
        bool forward = r.tb > r.ta;  // emit once: from the forward-directed edge
        if (forward) {
          SkeletonFace f;
          // Stored orientation follows the minus element's traversal.
          int e1 = r.element, e2 = s.element;
          f.minus = std::min(e1, e2);
          f.plus = std::max(e1, e2);
          Vec3 dir = (r.pb - r.pa).normalized();
          Vec3 p_lo = r.pa + (olo - r.ta) * dir;
          Vec3 p_hi = r.pa + (ohi - r.ta) * dir;
          Vec3 q0 = (f.minus == e1) ? p_lo : p_hi;
          Vec3 q1 = (f.minus == e1) ? p_hi : p_lo;
          f.vertices = {vertex_at(q0), vertex_at(q1)};
          Vec3 t = (q1 - q0).normalized();
          f.normal = Vec3(t[1], -t[0], 0.0);
          f.measure = (q1 - q0).norm();
          f.h = f.measure;
          mesh.skeleton.push_back(std::move(f));
        }
      }
      // Remaining uncovered parts are boundary.
      std::sort(covered.begin(), covered.end());
      double cur = lo;
      covered.emplace_back(hi, hi);
      for (auto& [clo, chi] : covered) {
        if (clo - cur > 1e-9) {
          bool forward = r.tb > r.ta;
          Vec3 dcan = (r.pb - r.pa).normalized();
          if (!forward) dcan = -dcan;  // canonical line direction (t increases along it)
          Vec3 plo = r.pa + (cur - r.ta) * dcan;
          Vec3 phi = r.pa + (clo - r.ta) * dcan;
          Vec3 q0 = forward ? plo : phi;  // keep element traversal order
          Vec3 q1 = forward ? phi : plo;
          BoundaryFace f;
          f.element = r.element;
          f.vertices = {vertex_at(q0), vertex_at(q1)};
          Vec3 t = (q1 - q0).normalized();
          f.normal = Vec3(t[1], -t[0], 0.0);
          f.measure = (q1 - q0).norm();
          f.h = f.measure;
          mesh.boundary.push_back(std::move(f));
        }
        cur = std::max(cur, chi);
      }
    }
  }

  // Deterministic face order: sort by (minus, plus, midpoint), then (element, midpoint).
  auto face_mid = [&](const std::vector<int>& vs) {
    Vec3 m = Vec3::Zero();
    for (int v : vs) m += mesh.vertices[v];
    return m / static_cast<double>(vs.size());
  };
  std::sort(mesh.skeleton.begin(), mesh.skeleton.end(),
            [&](const SkeletonFace& x, const SkeletonFace& y) {
              if (x.minus != y.minus) return x.minus < y.minus;
              if (x.plus != y.plus) return x.plus < y.plus;
              Vec3 mx = face_mid(x.vertices), my = face_mid(y.vertices);
              return std::lexicographical_compare(mx.data(), mx.data() + 3, my.data(),
                                                  my.data() + 3);
            });
  std::sort(mesh.boundary.begin(), mesh.boundary.end(),
            [&](const BoundaryFace& x, const BoundaryFace& y) {
              if (x.element != y.element) return x.element < y.element;
              Vec3 mx = face_mid(x.vertices), my = face_mid(y.vertices);
              return std::lexicographical_compare(mx.data(), mx.data() + 3, my.data(),
                                                  my.data() + 3);
            });
}

}  // namespace

void Mesh::set_uniform_order(int p) {
  if (p < 1) throw ConfigError("element order must be >= 1");
  for (auto& el : elements) el.order = p;
}

double Mesh::element_measure(int e) const {
  const Element& el = elements[e];
  if (dim == 1) return std::abs(vertices[el.vertices[1]][0] - vertices[el.vertices[0]][0]);
  if (dim == 2) return std::abs(polygon_area(*this, el));
  // Structured hexes are axis-aligned boxes.
  Vec3 lo = vertices[el.vertices[0]], hi = lo;
  for (int v : el.vertices) {
    lo = lo.cwiseMin(vertices[v]);
    hi = hi.cwiseMax(vertices[v]);
  }
  Vec3 ext = hi - lo;
  return ext[0] * ext[1] * ext[2];
}

double Mesh::total_measure() const {
  double t = 0.0;
  for (size_t e = 0; e < elements.size(); ++e) t += element_measure(static_cast<int>(e));
  return t;
}

std::vector<Vec3> Mesh::loop(int e) const {
  std::vector<Vec3> out;
  for (int v : elements[e].vertices) out.push_back(vertices[v]);
  return out;
}

Mesh build_interval_mesh(double a, double b, int n) {
  if (n < 1 || !(b > a)) throw ConfigError("build_interval_mesh: need n >= 1 and b > a");
  Mesh mesh;
  mesh.dim = 1;
  for (int i = 0; i <= n; ++i)
    mesh.vertices.push_back(Vec3(a + (b - a) * i / n, 0, 0));
  for (int i = 0; i < n; ++i) {
    Element el;
    el.vertices = {i, i + 1};
    mesh.elements.push_back(el);
  }
  for (int i = 1; i < n; ++i) {
    SkeletonFace f;
    f.minus = i - 1;
    f.plus = i;
    f.vertices = {i};
    f.normal = Vec3(1, 0, 0);
    f.measure = 1.0;
    f.h = (b - a) / n;
    mesh.skeleton.push_back(f);
  }
  BoundaryFace left;
  left.element = 0;
  left.vertices = {0};
  left.normal = Vec3(-1, 0, 0);
  left.measure = 1.0;
  left.h = (b - a) / n;
  BoundaryFace right;
  right.element = n - 1;
  right.vertices = {n};
  right.normal = Vec3(1, 0, 0);
  right.measure = 1.0;
  right.h = (b - a) / n;
  mesh.boundary = {left, right};
  finalize_element_geometry(mesh);
  return mesh;
}

Mesh build_quad_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("build_quad_mesh: need nx, ny >= 1");
  Mesh mesh;
  mesh.dim = 2;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back(
          Vec3(lo[0] + (hi[0] - lo[0]) * i / nx, lo[1] + (hi[1] - lo[1]) * j / ny, 0));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Element el;
      el.vertices = {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)};
      mesh.elements.push_back(el);
    }
  finalize_element_geometry(mesh);
  extract_faces_2d(mesh);
  return mesh;
}

Mesh build_tri_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("build_tri_mesh: need nx, ny >= 1");
  Mesh mesh;
  mesh.dim = 2;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back(
          Vec3(lo[0] + (hi[0] - lo[0]) * i / nx, lo[1] + (hi[1] - lo[1]) * j / ny, 0));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Element t1, t2;
      t1.vertices = {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)};
      t2.vertices = {vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)};
      mesh.elements.push_back(t1);
      mesh.elements.push_back(t2);
    }
  finalize_element_geometry(mesh);
  extract_faces_2d(mesh);
  return mesh;
}

Mesh build_mapped_quad_mesh(const std::array<Vec3, 4>& c, int n) {
  if (n < 1) throw ConfigError("build_mapped_quad_mesh: need n >= 1");
  Mesh mesh;
  mesh.dim = 2;
  auto map = [&](double s, double t) {
    return ((1 - s) * (1 - t) * c[0] + s * (1 - t) * c[1] + s * t * c[2] + (1 - s) * t * c[3])
        .eval();
  };
  auto vid = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.push_back(map(double(i) / n, double(j) / n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Element el;
      el.vertices = {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)};
      mesh.elements.push_back(el);
    }
  finalize_element_geometry(mesh);
  extract_faces_2d(mesh);
  return mesh;
}

Mesh build_lshape_quad_mesh(int n, int missing_quadrant) {
  if (n < 1) throw ConfigError("build_lshape_quad_mesh: need n >= 1");
  Mesh mesh;
  mesh.dim = 2;
  std::map<Key2, int> ids;
  auto vid = [&](double x, double y) {
    Key2 k{snap(x), snap(y)};
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    mesh.vertices.push_back(Vec3(x, y, 0));
    int id = static_cast<int>(mesh.vertices.size()) - 1;
    ids[k] = id;
    return id;
  };
  const double h = 1.0 / n;
  for (int j = -n; j < n; ++j)
    for (int i = -n; i < n; ++i) {
      double x0 = i * h, y0 = j * h;
      double cx = x0 + 0.5 * h, cy = y0 + 0.5 * h;
      bool in_missing = false;
      switch (missing_quadrant) {
        case 0: in_missing = cx > 0 && cy > 0; break;
        case 1: in_missing = cx < 0 && cy > 0; break;
        case 2: in_missing = cx < 0 && cy < 0; break;
        case 3: in_missing = cx > 0 && cy < 0; break;
        default: throw ConfigError("build_lshape_quad_mesh: quadrant must be 0..3");
      }
      if (in_missing) continue;
      Element el;
      el.vertices = {vid(x0, y0), vid(x0 + h, y0), vid(x0 + h, y0 + h), vid(x0, y0 + h)};
      mesh.elements.push_back(el);
    }
  finalize_element_geometry(mesh);
  extract_faces_2d(mesh);
  return mesh;
}

Mesh build_hex_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("build_hex_mesh: need nx, ny, nz >= 1");
  Mesh mesh;
  mesh.dim = 3;
  auto vid = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        mesh.vertices.push_back(Vec3(lo[0] + (hi[0] - lo[0]) * i / nx,
                                     lo[1] + (hi[1] - lo[1]) * j / ny,
                                     lo[2] + (hi[2] - lo[2]) * k / nz));
  auto eid = [&](int i, int j, int k) { return (k * ny + j) * nx + i; };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        Element el;
        el.vertices = {vid(i, j, k),         vid(i + 1, j, k),     vid(i + 1, j + 1, k),
                       vid(i, j + 1, k),     vid(i, j, k + 1),     vid(i + 1, j, k + 1),
                       vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)};
        mesh.elements.push_back(el);
      }
  finalize_element_geometry(mesh);

  auto add_skel = [&](int em, int ep, std::array<int, 4> vs, const Vec3& nrm, double area,
                      double hf) {
    SkeletonFace f;
    f.minus = em;
    f.plus = ep;
    f.vertices = {vs[0], vs[1], vs[2], vs[3]};
    f.normal = nrm;
    f.measure = area;
    f.h = hf;
    mesh.skeleton.push_back(std::move(f));
  };
  auto add_bdry = [&](int e, std::array<int, 4> vs, const Vec3& nrm, double area, double hf) {
    BoundaryFace f;
    f.element = e;
    f.vertices = {vs[0], vs[1], vs[2], vs[3]};
    f.normal = nrm;
    f.measure = area;
    f.h = hf;
    mesh.boundary.push_back(std::move(f));
  };
  const double hx = (hi[0] - lo[0]) / nx, hy = (hi[1] - lo[1]) / ny, hz = (hi[2] - lo[2]) / nz;
  const double ax = hy * hz, ay = hx * hz, az = hx * hy;
  const double dx = std::hypot(hy, hz), dy = std::hypot(hx, hz), dz = std::hypot(hx, hy);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        // x-faces
        std::array<int, 4> fx = {vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1),
                                 vid(i, j, k + 1)};
        std::array<int, 4> fX = {vid(i + 1, j, k), vid(i + 1, j + 1, k),
                                 vid(i + 1, j + 1, k + 1), vid(i + 1, j, k + 1)};
        if (i == 0) add_bdry(eid(i, j, k), fx, Vec3(-1, 0, 0), ax, dx);
        if (i + 1 < nx)
          add_skel(eid(i, j, k), eid(i + 1, j, k), fX, Vec3(1, 0, 0), ax, dx);
        else
          add_bdry(eid(i, j, k), fX, Vec3(1, 0, 0), ax, dx);
        // y-faces
        std::array<int, 4> fy = {vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j, k + 1),
                                 vid(i, j, k + 1)};
        std::array<int, 4> fY = {vid(i, j + 1, k), vid(i + 1, j + 1, k),
                                 vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)};
        if (j == 0) add_bdry(eid(i, j, k), fy, Vec3(0, -1, 0), ay, dy);
        if (j + 1 < ny)
          add_skel(eid(i, j, k), eid(i, j + 1, k), fY, Vec3(0, 1, 0), ay, dy);
        else
          add_bdry(eid(i, j, k), fY, Vec3(0, 1, 0), ay, dy);
        // z-faces
        std::array<int, 4> fz = {vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k),
                                 vid(i, j + 1, k)};
        std::array<int, 4> fZ = {vid(i, j, k + 1), vid(i + 1, j, k + 1),
                                 vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)};
        if (k == 0) add_bdry(eid(i, j, k), fz, Vec3(0, 0, -1), az, dz);
        if (k + 1 < nz)
          add_skel(eid(i, j, k), eid(i, j, k + 1), fZ, Vec3(0, 0, 1), az, dz);
        else
          add_bdry(eid(i, j, k), fZ, Vec3(0, 0, 1), az, dz);
      }
  return mesh;
}

Mesh refine_quadtree(const Mesh& mesh, const std::vector<int>& marked) {
  if (mesh.dim != 2) throw Error("refine_quadtree: 2D meshes only");
  std::vector<bool> mark(mesh.elements.size(), false);
  for (int m : marked) {
    if (m < 0 || m >= static_cast<int>(mesh.elements.size()))
      throw Error("refine_quadtree: marked element out of range");
    if (mesh.elements[m].vertices.size() != 4)
      throw Error("refine_quadtree: marked element is not a quad");
    mark[m] = true;
  }
  Mesh out;
  out.dim = 2;
  std::map<Key3, int> ids;
  auto vid = [&](const Vec3& p) {
    Key3 k = point_key(p);
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    out.vertices.push_back(p);
    int id = static_cast<int>(out.vertices.size()) - 1;
    ids[k] = id;
    return id;
  };
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& vs = mesh.elements[e].vertices;
    if (!mark[e]) {
      Element el;
      for (int v : vs) el.vertices.push_back(vid(mesh.vertices[v]));
      el.order = mesh.elements[e].order;
      out.elements.push_back(std::move(el));
      continue;
    }
    Vec3 p0 = mesh.vertices[vs[0]], p1 = mesh.vertices[vs[1]], p2 = mesh.vertices[vs[2]],
         p3 = mesh.vertices[vs[3]];
    Vec3 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m23 = 0.5 * (p2 + p3),
         m30 = 0.5 * (p3 + p0);
    Vec3 cc = 0.25 * (p0 + p1 + p2 + p3);
    const std::array<std::array<Vec3, 4>, 4> kids = {{{p0, m01, cc, m30},
                                                      {m01, p1, m12, cc},
                                                      {cc, m12, p2, m23},
                                                      {m30, cc, m23, p3}}};
    for (const auto& kid : kids) {
      Element el;
      for (const auto& p : kid) el.vertices.push_back(vid(p));
      el.order = mesh.elements[e].order;
      out.elements.push_back(std::move(el));
    }
  }
  finalize_element_geometry(out);
  extract_faces_2d(out);

  // Inherit boundary tags from the input mesh: a new boundary face adopts the
  // tag of the original face whose segment contains its midpoint.
  for (auto& nf : out.boundary) {
    Vec3 mid = 0.5 * (out.vertices[nf.vertices[0]] + out.vertices[nf.vertices[1]]);
    for (const auto& of : mesh.boundary) {
      Vec3 a = mesh.vertices[of.vertices[0]], b = mesh.vertices[of.vertices[1]];
      Vec3 ab = b - a, am = mid - a;
      double len2 = ab.squaredNorm();
      double cross = ab[0] * am[1] - ab[1] * am[0];
      double t = am.dot(ab) / len2;
      if (std::abs(cross) < 1e-9 * std::sqrt(len2) && t > -1e-9 && t < 1.0 + 1e-9) {
        nf.tag = of.tag;
        break;
      }
    }
  }
  return out;
}

MeshLoadResult load_polygon_mesh(std::istream& in) {
  MeshLoadResult res;
  Mesh& mesh = res.mesh;
  std::string tok;
  auto expect = [&](const char* kw) {
    if (!(in >> tok) || tok != kw) throw ConfigError(std::string("mesh file: expected ") + kw);
  };
  expect("DIM");
  int dim;
  in >> dim;
  if (dim != 2) throw ConfigError("mesh file: only DIM 2 is supported");
  mesh.dim = 2;
  expect("VERTICES");
  int nv;
  if (!(in >> nv) || nv < 3) throw ConfigError("mesh file: bad vertex count");
  for (int i = 0; i < nv; ++i) {
    double x, y;
    if (!(in >> x >> y)) throw ConfigError("mesh file: bad vertex line");
    mesh.vertices.push_back(Vec3(x, y, 0));
  }
  expect("ELEMENTS");
  int ne;
  if (!(in >> ne) || ne < 1) throw ConfigError("mesh file: bad element count");
  for (int e = 0; e < ne; ++e) {
    int k;
    if (!(in >> k) || k < 3) throw ConfigError("mesh file: bad element size");
    Element el;
    for (int i = 0; i < k; ++i) {
      int id;
      if (!(in >> id)) throw ConfigError("mesh file: bad element line");
      if (id < 0 || id >= nv)
        throw ConfigError("mesh file: dangling vertex id " + std::to_string(id));
      el.vertices.push_back(id);
    }
    for (int i = 0; i < k; ++i)
      if (el.vertices[i] == el.vertices[(i + 1) % k])
        throw ConfigError("mesh file: element " + std::to_string(e) + " repeats a vertex");
    mesh.elements.push_back(std::move(el));
  }

  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    auto& el = mesh.elements[e];
    // Orientation: repair clockwise loops.
    if (polygon_area(mesh, el) < 0) {
      std::reverse(el.vertices.begin(), el.vertices.end());
      res.repaired_orientation = true;
      res.warnings.push_back("element " + std::to_string(e) + ": repaired clockwise loop");
    }
    // Simplicity: no two non-adjacent edges may intersect.
    const auto& vs = el.vertices;
    const int k = static_cast<int>(vs.size());
    auto seg = [&](int i) {
      return std::pair<Vec3, Vec3>(mesh.vertices[vs[i]], mesh.vertices[vs[(i + 1) % k]]);
    };
    auto intersects = [](const std::pair<Vec3, Vec3>& s1, const std::pair<Vec3, Vec3>& s2) {
      auto orient = [](const Vec3& a, const Vec3& b, const Vec3& c) {
        double v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        return (v > 1e-14) ? 1 : (v < -1e-14 ? -1 : 0);
      };
      int o1 = orient(s1.first, s1.second, s2.first), o2 = orient(s1.first, s1.second, s2.second);
      int o3 = orient(s2.first, s2.second, s1.first), o4 = orient(s2.first, s2.second, s1.second);
      return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
    };
    for (int i = 0; i < k; ++i)
      for (int j = i + 2; j < k; ++j) {
        if (i == 0 && j == k - 1) continue;  // adjacent around the loop
        if (intersects(seg(i), seg(j)))
          throw ConfigError("mesh file: element " + std::to_string(e) + " is non-simple");
      }
  }

  // Optional BOUNDARY section with tags keyed by (element, local edge).
  std::map<std::pair<int, int>, BoundaryTag> tag_of_edge;  // undirected vertex pair -> tag
  if (in >> tok) {
    if (tok != "BOUNDARY") throw ConfigError("mesh file: expected BOUNDARY, got " + tok);
    int nb;
    if (!(in >> nb) || nb < 0) throw ConfigError("mesh file: bad boundary count");
    for (int i = 0; i < nb; ++i) {
      int e, le;
      std::string tag;
      if (!(in >> e >> le >> tag)) throw ConfigError("mesh file: bad boundary line");
      if (e < 0 || e >= ne) throw ConfigError("mesh file: boundary element out of range");
      const auto& vs = mesh.elements[e].vertices;
      if (le < 0 || le >= static_cast<int>(vs.size()))
        throw ConfigError("mesh file: boundary local edge out of range");
      BoundaryTag t;
      if (tag == "DIRICHLET")
        t = BoundaryTag::Dirichlet;
      else if (tag == "NEUMANN")
        t = BoundaryTag::Neumann;
      else
        throw ConfigError("mesh file: unknown boundary tag " + tag);
      int a = vs[le], b = vs[(le + 1) % vs.size()];
      tag_of_edge[{std::min(a, b), std::max(a, b)}] = t;
    }
  }

  finalize_element_geometry(mesh);
  extract_faces_2d(mesh);
  for (auto& f : mesh.boundary) {
    auto it = tag_of_edge.find({std::min(f.vertices[0], f.vertices[1]),
                                std::max(f.vertices[0], f.vertices[1])});
    if (it != tag_of_edge.end()) f.tag = it->second;
  }
  return res;
}

MeshLoadResult load_polygon_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file: " + path);
  return load_polygon_mesh(in);
}

double polygon_inradius(const std::vector<Vec3>& loop) {
  const int m = static_cast<int>(loop.size());
  // Distance to the edge lines; positive inside a CCW convex polygon.
  auto depth = [&](double x, double y) {
    double d = std::numeric_limits<double>::max();
    for (int i = 0; i < m; ++i) {
      const Vec3& a = loop[i];
      const Vec3& b = loop[(i + 1) % m];
      double ex = b[0] - a[0], ey = b[1] - a[1];
      double len = std::hypot(ex, ey);
      d = std::min(d, (ex * (y - a[1]) - ey * (x - a[0])) / len);
    }
    return d;
  };
  Vec3 lo = loop[0], hi = loop[0];
  for (const auto& v : loop) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  double cx = 0.5 * (lo[0] + hi[0]), cy = 0.5 * (lo[1] + hi[1]);
  double wx = 0.5 * (hi[0] - lo[0]), wy = 0.5 * (hi[1] - lo[1]);
  double best = -std::numeric_limits<double>::max(), bx = cx, by = cy;
  const int grid = 11;
  for (int iter = 0; iter < 40; ++iter) {
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        double x = cx - wx + 2.0 * wx * i / (grid - 1);
        double y = cy - wy + 2.0 * wy * j / (grid - 1);
        double d = depth(x, y);
        if (d > best) {
          best = d;
          bx = x;
          by = y;
        }
      }
    cx = bx;
    cy = by;
    wx *= 0.4;
    wy *= 0.4;
    if (std::max(wx, wy) < 1e-9) break;
  }
  return best;
}

double mesh_regularity(const Mesh& mesh) {
  double mu = std::numeric_limits<double>::max();
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const Element& el = mesh.elements[e];
    double rho;
    if (mesh.dim == 1) {
      rho = 0.5 * el.diameter;
    } else if (mesh.dim == 2) {
      rho = polygon_inradius(mesh.loop(static_cast<int>(e)));
    } else {
      Vec3 lo = mesh.vertices[el.vertices[0]], hi = lo;
      for (int v : el.vertices) {
        lo = lo.cwiseMin(mesh.vertices[v]);
        hi = hi.cwiseMax(mesh.vertices[v]);
      }
      rho = 0.5 * (hi - lo).minCoeff();
    }
    mu = std::min(mu, 2.0 * rho / el.diameter);
  }
  return mu;
}

}  // namespace pfdg
