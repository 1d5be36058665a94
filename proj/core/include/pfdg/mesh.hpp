#pragma once

#include "pfdg/types.hpp"

#include <iosfwd>

namespace pfdg {

enum class BoundaryTag { Dirichlet, Neumann };

struct Element {
  std::vector<int> vertices;  // 1D: 2, 2D: CCW loop, 3D hex: 8 in ijk order
  Vec3 midpoint = Vec3::Zero();  // vertex centroid
  double diameter = 0.0;         // max pairwise vertex distance
  int order = 1;                 // polynomial order p of this element
};

// Interior face. `vertices` is oriented as the minus element traverses it
// (2D); `normal` points from the minus element into the plus element.
// 1D faces are single points, 3D hex faces axis-aligned rectangles.
struct SkeletonFace {
  int minus = -1, plus = -1;
  std::vector<int> vertices;
  Vec3 normal = Vec3::Zero();
  double measure = 0.0;  // 1 (1D point), length (2D), area (3D)
  double h = 0.0;        // face diameter; 1D: mean of adjacent element sizes
};

struct BoundaryFace {
  int element = -1;
  std::vector<int> vertices;
  Vec3 normal = Vec3::Zero();  // outward
  double measure = 0.0;
  double h = 0.0;
  BoundaryTag tag = BoundaryTag::Dirichlet;
};

struct Mesh {
  int dim = 0;
  std::vector<Vec3> vertices;
  std::vector<Element> elements;
  std::vector<SkeletonFace> skeleton;
  std::vector<BoundaryFace> boundary;

  void set_uniform_order(int p);
  double element_measure(int e) const;  // length/area/volume
  double total_measure() const;
  // Vertex loop of a 2D element as coordinates.
  std::vector<Vec3> loop(int e) const;
};

// Structured generators on an axis-aligned box (counter-clockwise loops).
Mesh build_interval_mesh(double a, double b, int n);
Mesh build_quad_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny);
Mesh build_tri_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny);  // quads split SW-NE
Mesh build_hex_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz);

// n x n quads mapped bilinearly onto the quadrilateral c0..c3 (CCW).
Mesh build_mapped_quad_mesh(const std::array<Vec3, 4>& corners, int n);

// L-shaped domain [-1,1]^2 minus one open quadrant, 3*n*n structured quads.
// missing_quadrant: 0 -> {x>0,y>0}, 3 -> {x>0,y<0}.
Mesh build_lshape_quad_mesh(int n, int missing_quadrant);

// Splits the marked (2D quad-tree style) elements into four; hanging nodes
// are handled by emitting the fine sub-segments on coarse/fine interfaces.
Mesh refine_quadtree(const Mesh& mesh, const std::vector<int>& marked);

struct MeshLoadResult {
  Mesh mesh;
  bool repaired_orientation = false;
  std::vector<std::string> warnings;
};

// Text format (0-based vertex ids):
//   DIM 2
//   VERTICES n      followed by n lines "x y"
//   ELEMENTS m      followed by m lines "k id_1 ... id_k" (CCW loops)
//   BOUNDARY b      followed by b lines "elem local_edge TAG"
// Untagged boundary edges default to DIRICHLET. Clockwise loops are repaired
// with a warning; non-simple polygons and dangling vertex ids are errors.
MeshLoadResult load_polygon_mesh(std::istream& in);
MeshLoadResult load_polygon_mesh_file(const std::string& path);

// min over elements of 2*rho_e/h_e (rho = inradius). Diagnostic only.
double mesh_regularity(const Mesh& mesh);

// Inradius of a convex polygon by grid search with local refinement.
double polygon_inradius(const std::vector<Vec3>& loop);

}  // namespace pfdg
