// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/checker.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "stepcert/errors.hpp"

namespace stepcert {
namespace {

bool same_bits(double a, double b) {
  std::uint64_t ua = 0, ub = 0;
  std::memcpy(&ua, &a, sizeof a);
  std::memcpy(&ub, &b, sizeof b);
  return ua == ub;
}

// Signed area polynomial of the flipping triangle: 13 - 55 t + 50 t^2.
Rational flip_area(const Rational& t) {
  return Rational(13) - Rational(55) * t + Rational(50) * t * t;
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

// Control points at the reference nodes: the geometric map is the identity.
ElementSpec reference_element(ElementClass cls, int order, bool dynamic) {
  ElementSpec spec;
  spec.cls = cls;
  spec.order = order;
  const int dim = spatial_dim(cls);
  for (const std::vector<Rational>& node :
       domain_points(geometry_orders(cls, order))) {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) p[std::size_t(d)] = node[std::size_t(d)].get_d();
    spec.start.push_back(p);
    if (dynamic) spec.end.push_back(p);
  }
  return spec;
}

ElementSpec random_spec(ElementClass cls, int order, std::mt19937_64& rng,
                        double wiggle_max, double speed_max) {
  std::uniform_real_distribution<double> wiggle(-wiggle_max, wiggle_max);
  std::uniform_real_distribution<double> speed(-speed_max, speed_max);
  ElementSpec spec = reference_element(cls, order, true);
  const int dim = spatial_dim(cls);
  for (std::size_t i = 0; i < spec.start.size(); ++i) {
    for (int d = 0; d < dim; ++d) {
      spec.start[i][std::size_t(d)] += wiggle(rng);
      spec.end[i][std::size_t(d)] =
          spec.start[i][std::size_t(d)] + speed(rng);
    }
  }
  return spec;
}

// Exact rational sample points of the spatial domain: the lattice
// (1/r) Z^dim intersected with the reference domain.
std::vector<std::vector<Rational>> spatial_lattice(ElementClass cls, int r) {
  const int dim = spatial_dim(cls);
  const int s = simplex_block(cls);
  std::vector<std::vector<Rational>> out;
  std::vector<int> idx(std::size_t(dim), 0);
  while (true) {
    int simplex_sum = 0;
    for (int d = 0; d < s; ++d) simplex_sum += idx[std::size_t(d)];
    if (simplex_sum <= r) {
      std::vector<Rational> point;
      point.reserve(std::size_t(dim));
      for (int d = 0; d < dim; ++d) {
        Rational c(idx[std::size_t(d)], r);
        c.canonicalize();
        point.push_back(c);
      }
      out.push_back(std::move(point));
    }
    int d = 0;
    while (d < dim) {
      if (++idx[std::size_t(d)] <= r) break;
      idx[std::size_t(d)] = 0;
      ++d;
    }
    if (d == dim) break;
  }
  return out;
}

TEST_SUITE("checker") {

TEST_CASE("min inclusion combines coefficient bounds with corner samples") {
  CoefficientVector coeffs;
  coeffs.shape = determinant_orders(ElementClass::Triangle, 2, false);
  const std::vector<std::size_t> corners = corner_indices(coeffs.shape, false);
  REQUIRE(corners == std::vector<std::size_t>{0, 2, 5});

  coeffs.values.assign(6, Interval{1.0, 1.0});
  Interval incl = min_inclusion(coeffs, corners);
  CHECK(incl.lo == 1.0);
  CHECK(incl.hi == 1.0);

  // A certifiably negative corner bounds the minimum from above.
  coeffs.values.assign(6, Interval{2.0, 2.0});
  coeffs.values[2] = Interval{-1.0, -1.0};
  incl = min_inclusion(coeffs, corners);
  CHECK(incl.lo == -1.0);
  CHECK(incl.hi == -1.0);

  // A negative interior coefficient alone leaves the verdict open.
  coeffs.values.assign(6, Interval{2.0, 2.0});
  coeffs.values[1] = Interval{-1.0, -1.0};
  incl = min_inclusion(coeffs, corners);
  CHECK(incl.lo == -1.0);
  CHECK(incl.hi == 2.0);
}

TEST_CASE("reference elements are valid in a single pop") {
  for (ElementClass cls :
       {ElementClass::Triangle, ElementClass::Tetrahedron,
        ElementClass::Hexahedron}) {
    int pops = 0;
    CheckOptions opts;
    opts.observer = [&](const Rational&, const Rational&) { ++pops; };
    const DynamicResult res = max_valid_step(reference_element(cls, 1, true),
                                             opts);
    CHECK(res.verdict == DynamicVerdict::ValidThroughout);
    CHECK(res.t_lower == 1.0);
    CHECK(!res.witness.has_value());
    CHECK(pops == 1);
    CHECK(check_static(reference_element(cls, 1, false)).verdict ==
          StaticVerdict::Valid);
  }
}

TEST_CASE("flipping triangle brackets the first inversion time") {
  const ElementSpec spec = flipping_triangle();
  CheckOptions opts;
  opts.delta = 1e-6;
  const DynamicResult res = max_valid_step(spec, opts);
  REQUIRE(res.verdict == DynamicVerdict::Inversion);
  // The first root of 13 - 55 t + 50 t^2 is (55 - sqrt(425)) / 100: the
  // returned step must be at most the root and within delta of it, checked
  // exactly through the sign of the area polynomial.
  const Rational t_lower = rational_from_double(res.t_lower);
  CHECK(res.t_lower > 0.0);
  CHECK(flip_area(t_lower) >= 0);
  CHECK(flip_area(t_lower + rational_from_double(opts.delta)) <= 0);
  CHECK(res.t_lower == doctest::Approx(0.34384471871911697).epsilon(1e-5));

  REQUIRE(res.witness.has_value());
  CHECK(verify_witness(spec, *res.witness));
  CHECK(res.witness->time <= t_lower + rational_from_double(opts.delta));

  // Same bracket for a looser accuracy target.
  opts.delta = 1e-2;
  const DynamicResult loose = max_valid_step(spec, opts);
  REQUIRE(loose.verdict == DynamicVerdict::Inversion);
  const Rational loose_lower = rational_from_double(loose.t_lower);
  CHECK(flip_area(loose_lower) >= 0);
  CHECK(flip_area(loose_lower + rational_from_double(opts.delta)) <= 0);
}

TEST_CASE("certified bounds stay monotone over the whole run") {
  CheckOptions opts;
  opts.delta = 1e-6;
  Rational last_lower(-1);
  Rational last_upper(2);
  int pops = 0;
  opts.observer = [&](const Rational& lo, const Rational& hi) {
    CHECK(lo >= last_lower);
    CHECK(hi <= last_upper);
    last_lower = lo;
    last_upper = hi;
    ++pops;
  };
  const DynamicResult res = max_valid_step(flipping_triangle(), opts);
  CHECK(res.verdict == DynamicVerdict::Inversion);
  CHECK(pops > 10);  // the search actually had to refine
}

TEST_CASE("element degenerating exactly at the end of the step") {
  // C collapses onto the edge AB at t = 1: the area is 1 - t, so the
  // element first becomes invalid (area zero) exactly at the endpoint.
  ElementSpec spec;
  spec.cls = ElementClass::Triangle;
  spec.order = 1;
  spec.start = {{{0.0, 0.0, 0.0}}, {{1.0, 0.0, 0.0}}, {{0.0, 1.0, 0.0}}};
  spec.end = {{{0.0, 0.0, 0.0}}, {{1.0, 0.0, 0.0}}, {{0.0, 0.0, 0.0}}};
  CheckOptions opts;
  opts.delta = 1e-6;
  const DynamicResult res = max_valid_step(spec, opts);
  REQUIRE(res.verdict == DynamicVerdict::Inversion);
  CHECK(res.t_lower > 1.0 - 2e-6);
  CHECK(res.t_lower < 1.0);
  REQUIRE(res.witness.has_value());
  CHECK(res.witness->time == 1);  // zero area counts as invalid
  CHECK(verify_witness(spec, *res.witness));
}

TEST_CASE("invalid start configurations are rejected up front") {
  // Reflected triangle: vertices B and C swapped, negative area at both
  // ends of the step.
  ElementSpec spec;
  spec.cls = ElementClass::Triangle;
  spec.order = 1;
  spec.start = {{{0.0, 0.0, 0.0}}, {{0.0, 1.0, 0.0}}, {{1.0, 0.0, 0.0}}};
  spec.end = spec.start;
  spec.id = 17;
  CHECK_THROWS_AS(max_valid_step(spec), InvalidAtStart);

  const StaticResult stat = check_static(spec);
  REQUIRE(stat.verdict == StaticVerdict::Invalid);
  REQUIRE(stat.witness.has_value());
  CHECK(stat.witness->time == 0);
  CHECK(verify_witness(spec, *stat.witness));
}

TEST_CASE("hairline-invalid quadratic triangle is caught statically") {
  const ElementSpec spec = hairline_invalid_triangle();
  const StaticResult res = check_static(spec);
  REQUIRE(res.verdict == StaticVerdict::Invalid);
  REQUIRE(res.witness.has_value());
  CHECK(verify_witness(spec, *res.witness));
  // The bad corner's coefficient straddles zero already at the root, so
  // the exact fallback fires before any subdivision happens.
  CHECK(res.quad_seq.empty());
}

TEST_CASE("cutoff, depth cap, and queue cap all give up conservatively") {
  const ElementSpec spec = flipping_triangle();

  CheckOptions opts;
  opts.t_cutoff = 0.1;
  DynamicResult res = max_valid_step(spec, opts);
  CHECK(res.verdict == DynamicVerdict::GaveUp);
  CHECK(res.t_lower >= 0.1);
  CHECK(flip_area(rational_from_double(res.t_lower)) >= 0);

  opts = CheckOptions{};
  opts.max_depth = 3;
  res = max_valid_step(spec, opts);
  CHECK(res.verdict == DynamicVerdict::GaveUp);
  CHECK(flip_area(rational_from_double(res.t_lower)) >= 0);

  opts = CheckOptions{};
  opts.queue_cap = 8;
  res = max_valid_step(spec, opts);
  CHECK(res.verdict == DynamicVerdict::GaveUp);
  CHECK(flip_area(rational_from_double(res.t_lower)) >= 0);
}

TEST_CASE("accuracy and input validation") {
  CheckOptions opts;
  opts.delta = 0.0;
  CHECK_THROWS_AS(max_valid_step(flipping_triangle(), opts), BadAccuracy);
  opts.delta = -1e-9;
  CHECK_THROWS_AS(max_valid_step(flipping_triangle(), opts), BadAccuracy);
  opts.delta = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(max_valid_step(flipping_triangle(), opts), BadAccuracy);

  ElementSpec stat = flipping_triangle();
  stat.end.clear();
  CHECK_THROWS_AS(max_valid_step(stat), DimensionMismatch);

  // Malformed witnesses never verify.
  const ElementSpec spec = flipping_triangle();
  Witness w;
  w.point = {Rational(1, 4)};
  w.time = Rational(1, 2);
  CHECK(!verify_witness(spec, w));
  w.point = {Rational(3), Rational(3)};  // outside the reference triangle
  CHECK(!verify_witness(spec, w));
  w.point = {Rational(1, 4), Rational(1, 4)};
  w.time = Rational(2);
  CHECK(!verify_witness(spec, w));
  w.time = Rational(1, 2);
  CHECK(verify_witness(spec, w));  // J(., 1/2) = -2 < 0 everywhere
}

TEST_CASE("random elements: conservativeness against exact sampling") {
  std::mt19937_64 rng(0x5eed0008ULL);
  CheckOptions opts;
  opts.delta = 1e-3;
  const std::array<ElementClass, 5> classes = {
      ElementClass::Triangle, ElementClass::Quadrilateral,
      ElementClass::Tetrahedron, ElementClass::Prism, ElementClass::Hexahedron};
  int inversions = 0;
  for (ElementClass cls : classes) {
    const int trials = spatial_dim(cls) == 2 ? 8 : 4;
    const std::vector<std::vector<Rational>> lattice = spatial_lattice(cls, 3);
    for (int trial = 0; trial < trials; ++trial) {
      // Large velocities so a good share of the elements truly invert.
      const ElementSpec spec = random_spec(cls, 1, rng, 0.15, 1.2);
      DynamicResult res;
      try {
        res = max_valid_step(spec, opts);
      } catch (const InvalidAtStart&) {
        // Certified non-positive at t = 0: confirm exactly at a corner of
        // the sampling lattice.
        bool hit = false;
        for (const auto& point : lattice)
          if (sgn(jacobian_exact(spec, point, Rational(0))) <= 0) hit = true;
        CHECK(hit);
        continue;
      }
      if (res.verdict == DynamicVerdict::Inversion) {
        ++inversions;
        REQUIRE(res.witness.has_value());
        CHECK(verify_witness(spec, *res.witness));
      }
      // No exact sample at or before the certified step may be non-positive.
      const Rational t_lower = rational_from_double(res.t_lower);
      for (int j = 0; j <= 8; ++j) {
        Rational t = t_lower * j;
        t /= 8;
        for (const auto& point : lattice) {
          const Rational value = jacobian_exact(spec, point, t);
          CHECK(sgn(value) > 0);
        }
      }
      if (res.verdict == DynamicVerdict::ValidThroughout) {
        // Agreement with the static check at the far end of the step.
        ElementSpec at_end = spec;
        at_end.start = spec.end;
        at_end.end.clear();
        CHECK(check_static(at_end).verdict != StaticVerdict::Invalid);
      }
    }
  }
  CHECK(inversions > 5);  // the sweep exercised the inversion path
}

TEST_CASE("results are bitwise reproducible") {
  std::mt19937_64 rng(0x5eed0009ULL);
  for (int trial = 0; trial < 4; ++trial) {
    const ElementSpec spec =
        random_spec(ElementClass::Quadrilateral, 2, rng, 0.1, 1.0);
    CheckOptions opts;
    opts.delta = 1e-4;
    DynamicResult a;
    try {
      a = max_valid_step(spec, opts);
    } catch (const InvalidAtStart&) {
      CHECK_THROWS_AS(max_valid_step(spec, opts), InvalidAtStart);
      continue;
    }
    const DynamicResult b = max_valid_step(spec, opts);
    CHECK(a.verdict == b.verdict);
    CHECK(same_bits(a.t_lower, b.t_lower));
    CHECK(a.quad_seq == b.quad_seq);
    REQUIRE(a.witness.has_value() == b.witness.has_value());
    if (a.witness) {
      CHECK(a.witness->time == b.witness->time);
      CHECK(a.witness->point == b.witness->point);
    }
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace stepcert
