#pragma once

#include <cstdint>
#include <vector>

#include "pfdg/basis.hpp"
#include "pfdg/mesh.hpp"

namespace pfdg {

// Broken polynomial space over a mesh: per-element total-degree bases with
// `components` fields sharing the scalar basis. Element-local dof order is all
// coefficients of component 0, then component 1, ...
struct Space {
  const Mesh* mesh = nullptr;
  BasisFamily family = BasisFamily::Chebyshev;
  int components = 1;
  std::vector<int64_t> offsets;  // per element, size E+1

  static Space build(const Mesh& m, BasisFamily fam, int components = 1) {
    Space s;
    s.mesh = &m;
    s.family = fam;
    s.components = components;
    s.offsets.resize(m.elements.size() + 1, 0);
    for (size_t e = 0; e < m.elements.size(); ++e)
      s.offsets[e + 1] =
          s.offsets[e] + static_cast<int64_t>(components) * basis_count(m.dim, m.elements[e].order);
    return s;
  }

  int order(int e) const { return mesh->elements[e].order; }
  int mcount(int e) const { return basis_count(mesh->dim, order(e)); }
  int64_t total() const { return offsets.back(); }
  int64_t dof(int e, int comp, int k) const {
    return offsets[e] + static_cast<int64_t>(comp) * mcount(e) + k;
  }

  // Evaluate this element's scalar basis (optionally at a reduced order).
  BasisEval eval(int e, const Mat& points, int deriv_orders, int order_override = -1) const {
    const Element& el = mesh->elements[e];
    const int p = order_override >= 0 ? order_override : el.order;
    return evaluate_basis(family, mesh->dim, p, el.midpoint, el.diameter, points, deriv_orders);
  }
};

}  // namespace pfdg
