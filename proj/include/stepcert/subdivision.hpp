// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Exact affine subdivision of the reference domains.
//
// Each domain splits into congruence-classes of children, all images of the
// parent under rational affine maps with |det| = 2^-dim:
//   triangle      4 children (3 corner copies + 1 central, point-reflected)
//   quadrilateral 4 children (bisect both axes)
//   tetrahedron   8 children (4 corner copies + 4 tets tiling the central
//                 octahedron around the diagonal (1/2,0,0)-(0,1/2,1/2))
//   prism         8 children (triangle split x height bisection)
//   hexahedron    8 children (bisect all three axes)
// A deforming element also halves the time coordinate, doubling the child
// count; the lower-time children come first, in spatial order.
//
// Child order is part of the format: subdivision sequences stored in reports
// and replayed by the quadrature builder index into exactly these lists.

#pragma once

#include <array>
#include <vector>

#include "stepcert/element.hpp"

namespace stepcert {

// Rational affine map xi -> A xi + b on `dim` coordinates.
struct AffineMap {
  RationalMatrix A;
  std::vector<Rational> b;

  int dim() const { return A.rows; }

  std::vector<Rational> apply(std::span<const Rational> xi) const;

  // this ∘ other: first apply `other`, then this map. Exact.
  AffineMap compose(const AffineMap& other) const;

  static AffineMap identity(int dim);
};

// Exact determinant of the linear part (volume scale of the map).
Rational affine_det(const AffineMap& map);

// The spatial subdivision maps of one reference domain, in canonical child
// order (4 maps in 2D, 8 in 3D).
const std::vector<AffineMap>& subdivision_maps(ElementClass c);

// The two maps halving only the last of `dim` coordinates: child 0 keeps the
// lower half (t -> t/2), child 1 the upper (t -> (t+1)/2).
std::array<AffineMap, 2> time_subdivision_maps(int dim);

// Subdivision maps of the dynamic domain (spatial domain x time): spatial
// children of the lower time half first, then of the upper half. Acts on
// spatial_dim + 1 coordinates.
const std::vector<AffineMap>& dynamic_subdivision_maps(ElementClass c);

// Closed dyadic time window [begin, end] within the step, kept exact.
struct TimeSpan {
  Rational begin;
  Rational end;
};

}  // namespace stepcert
