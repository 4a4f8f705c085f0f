// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stepcert/element.hpp"
#include "stepcert/interval.hpp"
#include "stepcert/rational.hpp"
#include "stepcert/transforms.hpp"

namespace stepcert {

// Geometry of one element over a time step: the control points of its
// polynomial map at the start and at the end of the step, listed in
// canonical grid order (see enumerate_grid). `end` is empty for elements
// that only need static checks; every stored coordinate must be a finite
// machine real. Coordinates beyond spatial_dim(cls) are ignored.
struct ElementSpec {
  ElementClass cls = ElementClass::Triangle;
  int order = 1;
  std::vector<std::array<double, 3>> start;
  std::vector<std::array<double, 3>> end;
  long id = -1;

  bool dynamic() const { return !end.empty(); }
};

// Throws BadOrder, DimensionMismatch, or NonFiniteInput if the spec cannot
// describe a well-formed element of its class and order.
void validate_spec(const ElementSpec& spec);

// Exact gradients of the geometry basis, tabulated once per (class, order)
// at every node of the static determinant grid. The table is shared by all
// elements of that class and order; dynamic queries reuse the same spatial
// table and only vary the time value.
struct GradientTable {
  ElementClass cls = ElementClass::Triangle;
  int order = 0;
  BlockOrders spatial_shape;     // determinant grid without the time axis
  std::size_t geometry_count = 0;
  // nodes[g]: coordinates of determinant-grid node g.
  std::vector<std::vector<Rational>> nodes;
  // grads_exact[g][i * dim + d]: d/dxi_d of geometry basis function i at
  // node g, and grads[g] the tightest interval enclosures of the same.
  std::vector<std::vector<Rational>> grads_exact;
  std::vector<std::vector<Interval>> grads;
};

// Returns the memoized table for the given class and order, building it on
// first use. References stay valid for the lifetime of the process.
const GradientTable& gradient_table(ElementClass cls, int order);

// Coefficients of the Jacobian determinant on a grid, together with the
// grid they live on. Depending on provenance the values are Lagrange
// (one per node) or Bernstein (one per multi-index) coefficients.
struct CoefficientVector {
  BlockOrders shape;
  std::vector<Interval> values;
};

// Lagrange coefficients of the space-time Jacobian determinant of `spec`
// on the dynamic determinant grid: the value of det J at every grid node,
// with control points interpolated linearly in time between `start` and
// `end`. Each coefficient is a rigorous enclosure of the exact value.
CoefficientVector lagrange_coeffs_dynamic(const ElementSpec& spec);

// Lagrange coefficients of the spatial Jacobian determinant at the fixed
// time `t` on the static determinant grid. `t` must be 0 for a spec
// without end-of-step control points.
CoefficientVector lagrange_coeffs_static(const ElementSpec& spec,
                                         const Rational& t);

// Converts Lagrange coefficients to Bernstein coefficients in place using
// the from_lagrange factors of `transforms`, whose shape must match.
void to_bezier(CoefficientVector& coeffs, const TransformSet& transforms);

// Exact Jacobian determinant of `spec` at reference point `xi` and time
// `t`, evaluated in rational arithmetic with no rounding. `xi` has
// spatial_dim(spec.cls) entries; `t` must be 0 for a static-only spec.
Rational jacobian_exact(const ElementSpec& spec, std::span<const Rational> xi,
                        const Rational& t);

}  // namespace stepcert
