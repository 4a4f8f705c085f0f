// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "stepcert/element_map.hpp"
#include "stepcert/subdivision.hpp"

namespace stepcert {

// An adaptive quadrature rule over the spatial reference domain. Weighted
// points come from a fixed base rule mapped through every leaf of a
// subdivision tree; on top of those, every leaf corner appears among the
// points (with weight zero when not already a weighted point) so that
// integrands can be probed exactly where invalidity certificates live.
struct QuadratureRule {
  std::vector<std::vector<Rational>> points;
  std::vector<Rational> weights;
  std::vector<AffineMap> leaf_maps;
};

// Volume of the reference domain of the class (simplex block volume times
// the unit box).
Rational domain_volume(ElementClass cls);

// Partition of the reference domain induced by a spatial subdivision
// sequence, as produced by the validity search: at every level the chosen
// child is refined further while its siblings become leaves; the final
// chosen child is emitted last. An empty sequence yields the identity.
// Throws BadSequence if an index does not name a subdivision map.
std::vector<AffineMap> build_leaves(ElementClass cls,
                                    std::span<const int> spatial_seq);

// The fixed base rule of the class: positive exact-rational weights that
// sum to the domain volume, exact for polynomials up to `base_order`
// (2 on simplex blocks, 3 on tensor axes). Throws UnsupportedOrder when no
// shipped rule reaches the requested order.
QuadratureRule base_rule(ElementClass cls, int base_order);

// Base rule mapped through every leaf (weights scaled by the leaf volume
// fraction) plus the zero-weight leaf corners. Weights still sum to the
// domain volume exactly.
QuadratureRule build_rule(ElementClass cls, int base_order,
                          const std::vector<AffineMap>& leaves);

// Integrand contract: return an enclosure of the value at the (exact)
// point, or nullopt to signal a singular or undefined evaluation there.
using Integrand =
    std::function<std::optional<Interval>(std::span<const Rational>)>;

// Weighted sum of enclosures over all rule points. Zero-weight points are
// still evaluated: any nullopt from the integrand makes the whole
// integral Divergent, reported as nullopt.
std::optional<Interval> integrate(const QuadratureRule& rule,
                                  const Integrand& f);

// The integrand 1 / J(xi, t) of `spec`, guarded by exact arithmetic: the
// determinant is evaluated rationally, non-positive values signal
// divergence, and positive values are enclosed tightly.
Integrand guarded_reciprocal(const ElementSpec& spec, const Rational& t);

// Plain-records export: one line per point with its weight, coordinates
// and weights as exact decimal rationals.
void write_rule(std::ostream& os, const QuadratureRule& rule);

}  // namespace stepcert
