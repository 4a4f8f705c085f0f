// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/quadrature.hpp"

#include <map>
#include <utility>

#include "stepcert/errors.hpp"

namespace stepcert {

namespace {

Rational make_fraction(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

struct RuleTable {
  std::vector<std::vector<Rational>> points;
  std::vector<Rational> weights;
  int order = 0;  // largest polynomial degree integrated exactly
};

// Simpson's rule on [0, 1]: exact through cubics, positive weights.
RuleTable simpson() {
  RuleTable t;
  t.points = {{Rational(0)}, {make_fraction(1, 2)}, {Rational(1)}};
  t.weights = {make_fraction(1, 6), make_fraction(2, 3), make_fraction(1, 6)};
  t.order = 3;
  return t;
}

// Edge midpoints of the unit triangle, weight 1/6 each: exact through
// quadratics, the smallest positive rule with rational data.
RuleTable triangle_table() {
  RuleTable t;
  const Rational h = make_fraction(1, 2);
  t.points = {{h, Rational(0)}, {h, h}, {Rational(0), h}};
  t.weights.assign(3, make_fraction(1, 6));
  t.order = 2;
  return t;
}

// Vertices plus centroid of the unit tetrahedron: exact through
// quadratics with positive rational weights.
RuleTable tetrahedron_table() {
  RuleTable t;
  const Rational z(0);
  const Rational one(1);
  const Rational q = make_fraction(1, 4);
  t.points = {{z, z, z}, {one, z, z}, {z, one, z}, {z, z, one}, {q, q, q}};
  t.weights.assign(4, make_fraction(1, 120));
  t.weights.push_back(make_fraction(2, 15));
  t.order = 2;
  return t;
}

RuleTable tensor(const RuleTable& a, const RuleTable& b) {
  RuleTable t;
  t.order = std::min(a.order, b.order);
  for (std::size_t j = 0; j < b.points.size(); ++j) {
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      std::vector<Rational> point = a.points[i];
      point.insert(point.end(), b.points[j].begin(), b.points[j].end());
      t.points.push_back(std::move(point));
      t.weights.push_back(a.weights[i] * b.weights[j]);
    }
  }
  return t;
}

const RuleTable& class_table(ElementClass cls) {
  static const RuleTable tri = triangle_table();
  static const RuleTable quad = tensor(simpson(), simpson());
  static const RuleTable tet = tetrahedron_table();
  static const RuleTable prism = tensor(triangle_table(), simpson());
  static const RuleTable hexa = tensor(tensor(simpson(), simpson()), simpson());
  switch (cls) {
    case ElementClass::Triangle: return tri;
    case ElementClass::Quadrilateral: return quad;
    case ElementClass::Tetrahedron: return tet;
    case ElementClass::Prism: return prism;
    case ElementClass::Hexahedron: return hexa;
  }
  throw UnsupportedOrder("quadrature: unknown element class");
}

}  // namespace

Rational domain_volume(ElementClass cls) {
  // 1 / s! for the simplex block; the box axes contribute factor 1.
  Rational vol(1);
  for (int k = 2; k <= simplex_block(cls); ++k) vol /= k;
  return vol;
}

std::vector<AffineMap> build_leaves(ElementClass cls,
                                    std::span<const int> spatial_seq) {
  const std::vector<AffineMap>& maps = subdivision_maps(cls);
  AffineMap prefix = AffineMap::identity(spatial_dim(cls));
  std::vector<AffineMap> leaves;
  for (std::size_t level = 0; level < spatial_seq.size(); ++level) {
    const int chosen = spatial_seq[level];
    if (chosen < 0 || std::size_t(chosen) >= maps.size())
      throw BadSequence("subdivision sequence entry " + std::to_string(chosen) +
                        " does not name a child (expected 0.." +
                        std::to_string(maps.size() - 1) + ")");
    for (std::size_t q = 0; q < maps.size(); ++q)
      if (int(q) != chosen) leaves.push_back(prefix.compose(maps[q]));
    prefix = prefix.compose(maps[std::size_t(chosen)]);
  }
  leaves.push_back(prefix);
  return leaves;
}

QuadratureRule base_rule(ElementClass cls, int base_order) {
  const RuleTable& table = class_table(cls);
  if (base_order < 1 || base_order > table.order)
    throw UnsupportedOrder("no shipped quadrature rule of order " +
                           std::to_string(base_order) + " for " +
                           std::string(element_class_name(cls)));
  QuadratureRule rule;
  rule.points = table.points;
  rule.weights = table.weights;
  rule.leaf_maps = {AffineMap::identity(spatial_dim(cls))};
  return rule;
}

QuadratureRule build_rule(ElementClass cls, int base_order,
                          const std::vector<AffineMap>& leaves) {
  const QuadratureRule base = base_rule(cls, base_order);
  const int dim = spatial_dim(cls);
  QuadratureRule rule;
  rule.leaf_maps = leaves;
  std::map<std::vector<Rational>, std::size_t> position;
  for (const AffineMap& leaf : leaves) {
    if (leaf.dim() != dim)
      throw DimensionMismatch("quadrature leaf map has dimension " +
                              std::to_string(leaf.dim()) + ", expected " +
                              std::to_string(dim));
    const Rational scale = abs(affine_det(leaf));
    for (std::size_t i = 0; i < base.points.size(); ++i) {
      std::vector<Rational> point = leaf.apply(base.points[i]);
      const auto [it, fresh] = position.try_emplace(std::move(point),
                                                    rule.points.size());
      if (fresh) {
        rule.points.push_back(it->first);
        rule.weights.push_back(base.weights[i] * scale);
      } else {
        rule.weights[it->second] += base.weights[i] * scale;
      }
    }
  }
  // Corner samples: evaluation points that carry no weight, so they flag
  // singular integrands without perturbing the integral.
  const std::vector<std::vector<Rational>> corners =
      domain_points(geometry_orders(cls, 1));
  for (const AffineMap& leaf : leaves) {
    for (const std::vector<Rational>& corner : corners) {
      std::vector<Rational> point = leaf.apply(corner);
      const auto [it, fresh] = position.try_emplace(std::move(point),
                                                    rule.points.size());
      if (fresh) {
        rule.points.push_back(it->first);
        rule.weights.push_back(Rational(0));
      }
    }
  }
  return rule;
}

std::optional<Interval> integrate(const QuadratureRule& rule,
                                  const Integrand& f) {
  check_rounding_environment();
  Interval total{0.0, 0.0};
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const std::optional<Interval> value = f(rule.points[i]);
    if (!value) return std::nullopt;
    if (sgn(rule.weights[i]) != 0)
      total = iv_add(total, iv_mul(rat_to_interval(rule.weights[i]), *value));
  }
  return total;
}

Integrand guarded_reciprocal(const ElementSpec& spec, const Rational& t) {
  validate_spec(spec);
  if (sgn(t) != 0 && !spec.dynamic())
    throw DimensionMismatch(
        "guarded reciprocal away from t = 0 needs end-of-step control points");
  return [spec, t](std::span<const Rational> point) -> std::optional<Interval> {
    const Rational j = jacobian_exact(spec, point, t);
    if (sgn(j) <= 0) return std::nullopt;
    return rat_to_interval(Rational(1) / j);
  };
}

void write_rule(std::ostream& os, const QuadratureRule& rule) {
  os << "points " << rule.points.size() << " dim "
     << (rule.points.empty() ? 0 : int(rule.points[0].size())) << "\n";
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    for (const Rational& c : rule.points[i]) os << rational_to_string(c) << ' ';
    os << ": " << rational_to_string(rule.weights[i]) << "\n";
  }
}

}  // namespace stepcert
