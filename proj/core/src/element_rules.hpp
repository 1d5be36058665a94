#pragma once

// Internal helpers shared by the assembly and analysis translation units:
// dimension dispatch from mesh entities to quadrature rules.

#include "pfdg/mesh.hpp"
#include "pfdg/quadrature.hpp"

namespace pfdg::detail {

// Quadrature points are stored n x dim; physical closures take zero-padded
// 3-vectors.
inline Vec3 quad_point(const Mat& points, int q) {
  Vec3 x = Vec3::Zero();
  for (int d = 0; d < points.cols(); ++d) x[d] = points(q, d);
  return x;
}

inline QuadRule volume_rule(const Mesh& mesh, int e, int degree) {
  const Element& el = mesh.elements[e];
  if (mesh.dim == 1)
    return rule_interval(mesh.vertices[el.vertices[0]][0], mesh.vertices[el.vertices[1]][0],
                         degree);
  if (mesh.dim == 2) {
    std::vector<Vec3> loop = mesh.loop(e);
    if (loop.size() == 3) return rule_triangle(loop[0], loop[1], loop[2], degree);
    if (loop.size() == 4) return rule_quad({loop[0], loop[1], loop[2], loop[3]}, degree);
    return rule_polygon(loop, degree);
  }
  Vec3 lo = mesh.vertices[el.vertices[0]], hi = lo;
  for (int v : el.vertices) {
    lo = lo.cwiseMin(mesh.vertices[v]);
    hi = hi.cwiseMax(mesh.vertices[v]);
  }
  return rule_box(lo, hi, degree);
}

inline QuadRule face_rule(const Mesh& mesh, const std::vector<int>& verts, int degree) {
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

}  // namespace pfdg::detail
