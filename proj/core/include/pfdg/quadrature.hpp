#pragma once

#include "pfdg/types.hpp"

#include <array>

namespace pfdg {

// Quadrature points in physical coordinates with physical weights
// (weights sum to the measure of the integration domain).
struct QuadRule {
  Mat points;   // n x dim
  Vec weights;  // n
};

// Gauss-Legendre nodes/weights on [-1,1], exact for polynomials of degree 2n-1.
// Computed by Newton iteration and cached per n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// 1D rule on [a,b] exact for the given polynomial degree.
QuadRule rule_interval(double a, double b, int degree);

// Segment in dim-dimensional space (2D face); weights carry arc length.
QuadRule rule_segment(const Vec3& a, const Vec3& b, int degree);

// Triangle via the collapsed (Duffy) tensor rule; exact for total degree <= degree.
QuadRule rule_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int degree);

// Convex quadrilateral via the bilinear map from [-1,1]^2; the map is affine
// per variable, so one extra point per axis covers the Jacobian factor.
QuadRule rule_quad(const std::array<Vec3, 4>& corners, int degree);

// Convex polygon by fanning triangles from the vertex centroid. If the
// centroid fan degenerates (weakly convex input), a star point is searched
// along rays toward edge midpoints.
QuadRule rule_polygon(const std::vector<Vec3>& loop, int degree);

// Axis-aligned box [lo, hi] in 3D, tensor Gauss-Legendre.
QuadRule rule_box(const Vec3& lo, const Vec3& hi, int degree);

// Planar axis-aligned rectangle in 3D given by 4 corners (hex face).
QuadRule rule_rect3d(const std::array<Vec3, 4>& corners, int degree);

}  // namespace pfdg
