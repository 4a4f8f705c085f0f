// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/quadrature.hpp"

#include <array>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "stepcert/checker.hpp"
#include "stepcert/errors.hpp"

namespace stepcert {
namespace {

constexpr ElementClass kAllClasses[] = {
    ElementClass::Triangle, ElementClass::Quadrilateral,
    ElementClass::Tetrahedron, ElementClass::Prism, ElementClass::Hexahedron};

Rational factorial(int n) {
  Rational f(1);
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Exact moment of one monomial over the reference domain: the unit simplex
// in the first s coordinates gives (prod e_i!) / ((sum e_i) + s)!, each box
// axis contributes 1 / (e_j + 1).
Rational exact_moment(ElementClass cls, std::span<const int> exps) {
  const int s = simplex_block(cls);
  Rational moment(1);
  int simplex_total = 0;
  for (int i = 0; i < s; ++i) {
    moment *= factorial(exps[std::size_t(i)]);
    simplex_total += exps[std::size_t(i)];
  }
  moment /= factorial(simplex_total + s);
  for (int j = s; j < spatial_dim(cls); ++j) {
    Rational axis(1, exps[std::size_t(j)] + 1);
    axis.canonicalize();
    moment *= axis;
  }
  return moment;
}

Rational rule_moment(const QuadratureRule& rule, std::span<const int> exps) {
  Rational sum(0);
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    Rational term = rule.weights[i];
    for (std::size_t d = 0; d < exps.size(); ++d)
      for (int k = 0; k < exps[d]; ++k) term *= rule.points[i][d];
    sum += term;
  }
  return sum;
}

bool maps_equal(const AffineMap& a, const AffineMap& b) {
  return rat_mat_equal(a.A, b.A) && a.b == b.b;
}

ElementSpec flipping_triangle() {
  ElementSpec spec;
  spec.cls = ElementClass::Triangle;
  spec.order = 1;
  spec.start = {{{0.0, 0.0, 0.0}}, {{5.0, 1.0, 0.0}}, {{2.0, 3.0, 0.0}}};
  spec.end = {{{0.0, 0.0, 0.0}}, {{0.0, -4.0, 0.0}}, {{2.0, -7.0, 0.0}}};
  return spec;
}

// See test_element_map.cpp: invalid only at the corner (1, 0), by ~6e-16.
ElementSpec hairline_invalid_triangle() {
  ElementSpec spec;
  spec.cls = ElementClass::Triangle;
  spec.order = 2;
  spec.start = {{{0.33333333333333331, 0.33333333333333331, 0.0}},
                {{0.83333333333333326, 0.33333333333333331, 0.0}},
                {{1.3333333333333333, 0.33333333333333331, 0.0}},
                {{0.33333333333333331, 0.83333333333333326, 0.0}},
                {{0.83333333333333326, 0.58333333333333315, 0.0}},
                {{0.33333333333333331, 1.3333333333333333, 0.0}}};
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("leaf enumeration follows the refinement path") {
  // No refinement: the single leaf is the whole domain.
  for (ElementClass cls : kAllClasses) {
    const std::vector<AffineMap> leaves = build_leaves(cls, {});
    REQUIRE(leaves.size() == 1);
    CHECK(maps_equal(leaves[0], AffineMap::identity(spatial_dim(cls))));
  }

  // One refinement step into child 1 of the triangle: the three siblings in
  // child order, then the refined child itself last.
  const std::vector<AffineMap>& tri = subdivision_maps(ElementClass::Triangle);
  const std::array<int, 1> once = {1};
  const std::vector<AffineMap> leaves = build_leaves(ElementClass::Triangle, once);
  REQUIRE(leaves.size() == 4);
  CHECK(maps_equal(leaves[0], tri[0]));
  CHECK(maps_equal(leaves[1], tri[2]));
  CHECK(maps_equal(leaves[2], tri[3]));
  CHECK(maps_equal(leaves[3], tri[1]));

  // Two steps: 3 siblings at the first level, 3 at the second, 1 leaf.
  const std::array<int, 2> twice = {0, 3};
  const std::vector<AffineMap> deep = build_leaves(ElementClass::Triangle, twice);
  REQUIRE(deep.size() == 7);
  CHECK(maps_equal(deep.back(), tri[0].compose(tri[3])));

  const std::array<int, 1> bad_high = {4};
  const std::array<int, 1> bad_low = {-1};
  CHECK_THROWS_AS(build_leaves(ElementClass::Triangle, bad_high), BadSequence);
  CHECK_THROWS_AS(build_leaves(ElementClass::Triangle, bad_low), BadSequence);
}

TEST_CASE("leaves partition the domain for random refinement paths") {
  std::mt19937_64 rng(0x5eed0010ULL);
  for (ElementClass cls : kAllClasses) {
    const std::size_t children = subdivision_maps(cls).size();
    std::uniform_int_distribution<int> pick(0, int(children) - 1);
    for (int depth = 0; depth <= 6; ++depth) {
      std::vector<int> seq;
      for (int i = 0; i < depth; ++i) seq.push_back(pick(rng));
      const std::vector<AffineMap> leaves = build_leaves(cls, seq);
      CHECK(leaves.size() == 1 + std::size_t(depth) * (children - 1));
      Rational total(0);
      for (const AffineMap& leaf : leaves) total += abs(affine_det(leaf));
      CHECK(total == Rational(1));
    }
  }
}

TEST_CASE("base rules integrate monomials exactly up to their degree") {
  struct Degrees {
    ElementClass cls;
    int simplex_deg;  // exact total degree over the simplex block
    int axis_deg;     // exact per-axis degree over the box axes
  };
  const Degrees table[] = {{ElementClass::Triangle, 2, 0},
                           {ElementClass::Quadrilateral, 0, 3},
                           {ElementClass::Tetrahedron, 2, 0},
                           {ElementClass::Prism, 2, 3},
                           {ElementClass::Hexahedron, 0, 3}};
  for (const Degrees& deg : table) {
    const QuadratureRule rule = base_rule(deg.cls, deg.simplex_deg > 0
                                                       ? deg.simplex_deg
                                                       : deg.axis_deg);
    const int dim = spatial_dim(deg.cls);
    const int s = simplex_block(deg.cls);
    for (const Rational& w : rule.weights) CHECK(sgn(w) > 0);

    // Enumerate every admissible exponent tuple with an odometer.
    std::vector<int> exps(std::size_t(dim), 0);
    while (true) {
      int simplex_total = 0;
      for (int i = 0; i < s; ++i) simplex_total += exps[std::size_t(i)];
      if (simplex_total <= deg.simplex_deg)
        CHECK(rule_moment(rule, exps) == exact_moment(deg.cls, exps));
      int d = 0;
      for (; d < dim; ++d) {
        const int cap = d < s ? deg.simplex_deg : deg.axis_deg;
        if (exps[std::size_t(d)] < cap) {
          ++exps[std::size_t(d)];
          break;
        }
        exps[std::size_t(d)] = 0;
      }
      if (d == dim) break;
    }
  }
}

TEST_CASE("base rules are not exact one degree higher") {
  const auto moment_gap = [](ElementClass cls, std::vector<int> exps) {
    const QuadratureRule rule = base_rule(cls, 1);
    return rule_moment(rule, exps) != exact_moment(cls, exps);
  };
  CHECK(moment_gap(ElementClass::Triangle, {3, 0}));
  CHECK(moment_gap(ElementClass::Quadrilateral, {4, 0}));
  CHECK(moment_gap(ElementClass::Tetrahedron, {3, 0, 0}));
  CHECK(moment_gap(ElementClass::Prism, {3, 0, 0}));
  CHECK(moment_gap(ElementClass::Hexahedron, {4, 0, 0}));
}

TEST_CASE("requests beyond the shipped degree are refused") {
  CHECK_THROWS_AS(base_rule(ElementClass::Triangle, 3), UnsupportedOrder);
  CHECK_THROWS_AS(base_rule(ElementClass::Tetrahedron, 3), UnsupportedOrder);
  CHECK_THROWS_AS(base_rule(ElementClass::Quadrilateral, 4), UnsupportedOrder);
  CHECK_THROWS_AS(base_rule(ElementClass::Triangle, 0), UnsupportedOrder);
  CHECK_THROWS_AS(base_rule(ElementClass::Hexahedron, -1), UnsupportedOrder);
}

TEST_CASE("built rules keep the exact volume and carry every leaf corner") {
  std::mt19937_64 rng(0x5eed0011ULL);
  for (ElementClass cls : kAllClasses) {
    const std::size_t children = subdivision_maps(cls).size();
    std::uniform_int_distribution<int> pick(0, int(children) - 1);
    std::uniform_int_distribution<int> depth_pick(0, 4);
    const std::vector<std::vector<Rational>> ref_corners =
        domain_points(geometry_orders(cls, 1));
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<int> seq;
      const int depth = depth_pick(rng);
      for (int i = 0; i < depth; ++i) seq.push_back(pick(rng));
      const std::vector<AffineMap> leaves = build_leaves(cls, seq);
      const QuadratureRule rule = build_rule(cls, 1, leaves);

      Rational total(0);
      for (const Rational& w : rule.weights) {
        CHECK(sgn(w) >= 0);
        total += w;
      }
      CHECK(total == domain_volume(cls));

      std::set<std::vector<Rational>> points(rule.points.begin(),
                                             rule.points.end());
      CHECK(points.size() == rule.points.size());
      for (const AffineMap& leaf : leaves)
        for (const std::vector<Rational>& corner : ref_corners)
          CHECK(points.count(leaf.apply(corner)) == 1);
    }
  }
}

TEST_CASE("corner samples merge with weighted points instead of duplicating") {
  // The tetrahedron base rule already carries all four vertices with weight,
  // so appending corner samples must add only... nothing new: 5 points stay.
  const QuadratureRule rule =
      build_rule(ElementClass::Tetrahedron, 2,
                 build_leaves(ElementClass::Tetrahedron, {}));
  CHECK(rule.points.size() == 5);
  for (const Rational& w : rule.weights) CHECK(sgn(w) > 0);

  // The triangle base rule uses edge midpoints, so the three vertices arrive
  // as fresh zero-weight samples.
  const QuadratureRule tri = build_rule(
      ElementClass::Triangle, 2, build_leaves(ElementClass::Triangle, {}));
  CHECK(tri.points.size() == 6);
  int zero_weight = 0;
  for (const Rational& w : tri.weights) zero_weight += sgn(w) == 0 ? 1 : 0;
  CHECK(zero_weight == 3);
}

TEST_CASE("integration enclosures cover exact polynomial integrals") {
  const std::array<int, 2> seq = {1, 0};
  const QuadratureRule rule = build_rule(
      ElementClass::Triangle, 2, build_leaves(ElementClass::Triangle, seq));

  const Integrand one = [](std::span<const Rational>) {
    return std::optional<Interval>(Interval{1.0, 1.0});
  };
  std::optional<Interval> enclosure = integrate(rule, one);
  REQUIRE(enclosure.has_value());
  CHECK(iv_contains(*enclosure, 0.5));
  CHECK(iv_width(*enclosure) < 1e-14);

  // First coordinate: exact integral over the unit triangle is 1/6.
  const Integrand coord = [](std::span<const Rational> x) {
    return std::optional<Interval>(rat_to_interval(x[0]));
  };
  enclosure = integrate(rule, coord);
  REQUIRE(enclosure.has_value());
  CHECK(iv_contains(*enclosure, 1.0 / 6.0));
  CHECK(iv_width(*enclosure) < 1e-14);
}

TEST_CASE("a singular sample diverges the rule even at zero weight") {
  const QuadratureRule rule = build_rule(
      ElementClass::Triangle, 2, build_leaves(ElementClass::Triangle, {}));
  const std::vector<Rational> origin = {Rational(0), Rational(0)};
  const Integrand singular_at_origin =
      [&origin](std::span<const Rational> x) -> std::optional<Interval> {
    if (std::vector<Rational>(x.begin(), x.end()) == origin)
      return std::nullopt;
    return Interval{1.0, 1.0};
  };
  // The origin is a zero-weight corner sample, yet it must still be
  // evaluated: silently skipping it would hide the singularity.
  CHECK(!integrate(rule, singular_at_origin).has_value());
}

TEST_CASE("guarded reciprocal refuses non-positive Jacobians") {
  const ElementSpec spec = flipping_triangle();
  const QuadratureRule rule = build_rule(
      ElementClass::Triangle, 2, build_leaves(ElementClass::Triangle, {}));

  // At t = 1/2 the Jacobian determinant is -2 everywhere. An unguarded
  // reciprocal returns a finite, silently wrong value; the guard diverges.
  Rational half(1, 2);
  half.canonicalize();
  const Integrand raw = [&spec, &half](std::span<const Rational> x) {
    const Rational j = jacobian_exact(spec, x, half);
    return std::optional<Interval>(rat_to_interval(Rational(1) / j));
  };
  const std::optional<Interval> unguarded = integrate(rule, raw);
  REQUIRE(unguarded.has_value());
  CHECK(unguarded->hi < 0.0);

  CHECK(!integrate(rule, guarded_reciprocal(spec, half)).has_value());

  // At t = 0 the element is valid and both agree on a positive enclosure.
  const std::optional<Interval> at_start =
      integrate(rule, guarded_reciprocal(spec, Rational(0)));
  REQUIRE(at_start.has_value());
  CHECK(at_start->lo > 0.0);
  // Exact integral of 1/13 over the half-unit triangle.
  CHECK(iv_contains(*at_start, 1.0 / 26.0));
}

TEST_CASE("corner samples expose a sign flip the weighted points miss") {
  // The hairline element is invalid only at the corner (1, 0). All weighted
  // points of the base rule (edge midpoints) have a safely positive
  // Jacobian, so the bare rule integrates 1/J to a finite value; the built
  // rule's corner samples catch the flip and diverge.
  const ElementSpec spec = hairline_invalid_triangle();
  const Integrand guarded = guarded_reciprocal(spec, Rational(0));

  const std::optional<Interval> bare =
      integrate(base_rule(ElementClass::Triangle, 2), guarded);
  REQUIRE(bare.has_value());
  CHECK(bare->lo > 0.0);

  const QuadratureRule guarded_rule = build_rule(
      ElementClass::Triangle, 2, build_leaves(ElementClass::Triangle, {}));
  CHECK(!integrate(guarded_rule, guarded).has_value());
}

TEST_CASE("rules built from a checker refinement path contain the witness") {
  const ElementSpec spec = flipping_triangle();
  CheckOptions opts;
  opts.delta = 1e-4;
  const DynamicResult res = max_valid_step(spec);
  REQUIRE(res.verdict == DynamicVerdict::Inversion);
  REQUIRE(res.witness.has_value());

  const QuadratureRule rule = build_rule(
      ElementClass::Triangle, 2, build_leaves(ElementClass::Triangle,
                                              res.quad_seq));
  const std::set<std::vector<Rational>> points(rule.points.begin(),
                                               rule.points.end());
  REQUIRE(points.count(res.witness->point) == 1);
  CHECK(sgn(jacobian_exact(spec, res.witness->point, res.witness->time)) <= 0);
}

TEST_CASE("rule files round numbers as exact rationals") {
  const QuadratureRule rule = base_rule(ElementClass::Triangle, 2);
  std::ostringstream os;
  write_rule(os, rule);
  const std::string text = os.str();
  CHECK(text.rfind("points 3 dim 2", 0) == 0);
  CHECK(text.find("1/6") != std::string::npos);
  CHECK(text.find("1/2") != std::string::npos);
}

TEST_SUITE_END();

}  // namespace stepcert
