// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Reference domains and coefficient grids.
//
// Every supported reference domain is a product of one unit simplex block
// (the first s coordinates: xi_i >= 0, sum over the block <= 1) with an
// axis-aligned unit box (each remaining coordinate in [0, 1]):
//
//   triangle      n=2, s=2      quadrilateral n=2, s=1
//   tetrahedron   n=3, s=3      prism         n=3, s=2 (triangle x segment)
//   hexahedron    n=3, s=1
//
// A deforming element adds time as one more box coordinate, so the dynamic
// domain of a triangle has the shape of a prism, and so on. All grid
// bookkeeping below is written against that unified shape, not against the
// five classes individually.
//
// Grids are enumerated canonically: the multi-index runs with the first
// coordinate fastest and the last coordinate slowest. Everything downstream
// (coefficient vectors, transform matrices, cache files) relies on this
// single ordering.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stepcert/rational.hpp"

namespace stepcert {

enum class ElementClass : std::uint8_t {
  Triangle,
  Quadrilateral,
  Tetrahedron,
  Prism,
  Hexahedron,
};

constexpr const char* element_class_name(ElementClass c) {
  switch (c) {
    case ElementClass::Triangle:
      return "triangle";
    case ElementClass::Quadrilateral:
      return "quadrilateral";
    case ElementClass::Tetrahedron:
      return "tetrahedron";
    case ElementClass::Prism:
      return "prism";
    case ElementClass::Hexahedron:
      return "hexahedron";
  }
  return "?";
}

// Parses the names above; throws MalformedInput otherwise.
ElementClass element_class_from_name(const std::string& name);

constexpr int spatial_dim(ElementClass c) {
  switch (c) {
    case ElementClass::Triangle:
    case ElementClass::Quadrilateral:
      return 2;
    default:
      return 3;
  }
}

// Size of the leading simplex block.
constexpr int simplex_block(ElementClass c) {
  switch (c) {
    case ElementClass::Triangle:
      return 2;
    case ElementClass::Quadrilateral:
      return 1;
    case ElementClass::Tetrahedron:
      return 3;
    case ElementClass::Prism:
      return 2;
    case ElementClass::Hexahedron:
      return 1;
  }
  return 0;
}

constexpr int corner_count(ElementClass c) {
  switch (c) {
    case ElementClass::Triangle:
      return 3;
    case ElementClass::Quadrilateral:
      return 4;
    case ElementClass::Tetrahedron:
      return 4;
    case ElementClass::Prism:
      return 6;
    case ElementClass::Hexahedron:
      return 8;
  }
  return 0;
}

// Per-block polynomial orders of a coefficient grid: one order shared by the
// simplex block, one order per box axis. dim == s + axis_orders.size().
struct BlockOrders {
  int dim = 0;
  int s = 0;
  int simplex_order = 0;
  std::vector<int> axis_orders;

  bool operator==(const BlockOrders&) const = default;
};

using MultiIndex = std::vector<int>;

// Grid over the geometric map's control points: order p in every block.
BlockOrders geometry_orders(ElementClass c, int p);

// Grid holding the Jacobian determinant of an order-p map: the determinant
// of an n x n matrix of gradients has order n*p - s in the simplex block and
// n*p - 1 on each spatial box axis. with_time appends a time axis of order n
// (each gradient column is degree 1 in t for a linearly deforming element).
BlockOrders determinant_orders(ElementClass c, int p, bool with_time);

// Number of grid points: binom(simplex_order + s, s) * prod(axis_orders + 1).
std::size_t grid_size(const BlockOrders& shape);

// All multi-indices in canonical order. A multi-index stores the s simplex
// block entries first (their implicit slack completes simplex_order), then
// one entry per box axis.
std::vector<MultiIndex> enumerate_grid(const BlockOrders& shape);

// Rational coordinates of one grid node: simplex entries i_k / simplex_order
// and axis entries j / axis_order.
std::vector<Rational> grid_point(const BlockOrders& shape,
                                 const MultiIndex& idx);

// All grid nodes in canonical order.
std::vector<std::vector<Rational>> domain_points(const BlockOrders& shape);

// Flat canonical position of a multi-index (inverse of enumerate_grid).
std::size_t grid_rank(const BlockOrders& shape, const MultiIndex& idx);

// Which grid nodes sit at corners of the domain. With last_axis_at_end set,
// only corners whose final box axis is at its far end are returned (used for
// deforming elements, where the relevant corner values are the end-of-step
// ones). Order: canonical grid order.
std::vector<std::size_t> corner_indices(const BlockOrders& shape,
                                        bool last_axis_at_end);

// Membership test for the reference domain of the given shape (orders are
// irrelevant; only dim and s matter). Exact.
bool domain_contains(int s, std::span<const Rational> xi);

// binom(n, k) as an exact integer; n small (grid bookkeeping only).
std::size_t binomial(int n, int k);

}  // namespace stepcert
