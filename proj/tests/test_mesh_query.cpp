// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/mesh_query.hpp"

#include <array>
#include <cstring>
#include <random>

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

ElementSpec flipping_triangle() {
  ElementSpec spec;
  spec.cls = ElementClass::Triangle;
  spec.order = 1;
  spec.start = {{{0.0, 0.0, 0.0}}, {{5.0, 1.0, 0.0}}, {{2.0, 3.0, 0.0}}};
  spec.end = {{{0.0, 0.0, 0.0}}, {{0.0, -4.0, 0.0}}, {{2.0, -7.0, 0.0}}};
  return spec;
}

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

ElementSpec random_triangle(std::mt19937_64& rng, double speed_max) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> speed(-speed_max, speed_max);
  ElementSpec spec;
  spec.cls = ElementClass::Triangle;
  spec.order = 1;
  for (int i = 0; i < 3; ++i) {
    const double x = coord(rng), y = coord(rng);
    spec.start.push_back({x, y, 0.0});
    spec.end.push_back({x + speed(rng), y + speed(rng), 0.0});
  }
  return spec;
}

const ElementReport& report_for(const MeshResult& result, long id) {
  for (const ElementReport& report : result.reports)
    if (report.id == id) return report;
  REQUIRE(false);
  return result.reports.front();
}

}  // namespace

TEST_SUITE_BEGIN("mesh_query");

TEST_CASE("a mesh of identity elements survives the whole step") {
  MeshQuery query;
  long next_id = 0;
  for (ElementClass cls : {ElementClass::Triangle, ElementClass::Quadrilateral,
                           ElementClass::Tetrahedron, ElementClass::Prism,
                           ElementClass::Hexahedron}) {
    for (int copy = 0; copy < 4; ++copy) {
      ElementSpec spec = reference_element(cls, 1, true);
      spec.id = next_id++;
      query.elements.push_back(std::move(spec));
    }
  }
  const MeshResult result = max_valid_step_mesh(query);
  CHECK(result.t_global == 1.0);
  CHECK(result.argmin_id == -1);
  REQUIRE(result.reports.size() == query.elements.size());
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    CHECK(result.reports[i].id == long(i));  // input order preserved
    CHECK(result.reports[i].verdict == DynamicVerdict::ValidThroughout);
    CHECK(result.reports[i].t_lower == 1.0);
    CHECK(!result.reports[i].pruned);
  }
}

TEST_CASE("one flipping element pins the mesh bound") {
  MeshQuery query;
  for (long i = 0; i < 99; ++i) {
    ElementSpec spec = reference_element(ElementClass::Triangle, 1, true);
    spec.id = i < 42 ? i : i + 1;
    query.elements.push_back(std::move(spec));
  }
  ElementSpec flip = flipping_triangle();
  flip.id = 42;
  query.elements.insert(query.elements.begin() + 31, std::move(flip));

  const MeshResult result = max_valid_step_mesh(query);
  const DynamicResult alone = max_valid_step(flipping_triangle());

  CHECK(same_bits(result.t_global, alone.t_lower));
  CHECK(result.argmin_id == 42);
  const ElementReport& culprit = report_for(result, 42);
  CHECK(culprit.verdict == DynamicVerdict::Inversion);
  REQUIRE(culprit.witness.has_value());
  CHECK(verify_witness(flipping_triangle(), *culprit.witness));
  for (const ElementReport& report : result.reports)
    CHECK(report.t_lower >= result.t_global);
}

TEST_CASE("the running minimum prunes duplicates without changing the answer") {
  // Two identical flipping triangles: ids tie-break the sort, so id 3 runs
  // first and id 7 is cut off at the bound id 3 established.
  MeshQuery query;
  ElementSpec a = flipping_triangle();
  a.id = 7;
  ElementSpec b = flipping_triangle();
  b.id = 3;
  query.elements = {a, b};

  const MeshResult pruned = max_valid_step_mesh(query);
  CHECK(pruned.argmin_id == 3);
  CHECK(report_for(pruned, 3).verdict == DynamicVerdict::Inversion);
  const ElementReport& cut = report_for(pruned, 7);
  CHECK(cut.pruned);
  CHECK(cut.verdict == DynamicVerdict::GaveUp);
  CHECK(cut.t_lower >= pruned.t_global);

  query.prune = false;
  const MeshResult full = max_valid_step_mesh(query);
  CHECK(same_bits(full.t_global, pruned.t_global));
  CHECK(full.argmin_id == 3);
  CHECK(!report_for(full, 7).pruned);
  CHECK(same_bits(report_for(full, 7).t_lower, report_for(full, 3).t_lower));
}

TEST_CASE("pruning and parallelism never change the global bound or argmin") {
  std::mt19937_64 rng(0x5eed0014ULL);
  for (int round = 0; round < 3; ++round) {
    MeshQuery query;
    for (long i = 0; i < 40; ++i) {
      ElementSpec spec = random_triangle(rng, 1.1);
      spec.id = i;
      // Skip configurations that are already inverted at the start; they
      // are exercised separately.
      const std::vector<Rational> origin = {Rational(0), Rational(0)};
      if (sgn(jacobian_exact(spec, origin, Rational(0))) <= 0) {
        spec = reference_element(ElementClass::Triangle, 1, true);
        spec.id = i;
      }
      query.elements.push_back(std::move(spec));
    }

    query.prune = true;
    MeshResult baseline;
    bool starts_invalid = false;
    try {
      baseline = max_valid_step_mesh(query);
    } catch (const InvalidAtStart&) {
      // A random triangle can still be flat somewhere besides the origin.
      starts_invalid = true;
    }
    if (starts_invalid) continue;

    query.prune = false;
    const MeshResult unpruned = max_valid_step_mesh(query);
    CHECK(same_bits(unpruned.t_global, baseline.t_global));
    CHECK(unpruned.argmin_id == baseline.argmin_id);
    for (std::size_t i = 0; i < unpruned.reports.size(); ++i)
      CHECK(unpruned.reports[i].t_lower >= baseline.reports[i].t_lower);

    query.prune = true;
    query.workers = 3;
    const MeshResult parallel = max_valid_step_mesh(query);
    CHECK(same_bits(parallel.t_global, baseline.t_global));
    CHECK(parallel.argmin_id == baseline.argmin_id);

    query.share_cutoff = true;
    const MeshResult shared = max_valid_step_mesh(query);
    CHECK(same_bits(shared.t_global, baseline.t_global));
    CHECK(shared.argmin_id == baseline.argmin_id);
    query.share_cutoff = false;
    query.workers = 1;
  }
}

TEST_CASE("an element that starts inverted aborts the query with its id") {
  MeshQuery query;
  ElementSpec healthy = reference_element(ElementClass::Triangle, 1, true);
  healthy.id = 1;
  query.elements.push_back(std::move(healthy));

  // Collinear corners: zero area at t = 0 no matter the motion.
  ElementSpec flat;
  flat.cls = ElementClass::Triangle;
  flat.order = 1;
  flat.start = {{{0.0, 0.0, 0.0}}, {{1.0, 0.0, 0.0}}, {{2.0, 0.0, 0.0}}};
  flat.end = {{{0.0, 0.0, 0.0}}, {{1.0, 0.0, 0.0}}, {{2.0, 1.0, 0.0}}};

  ElementSpec first = flat;
  first.id = 9;
  ElementSpec second = flat;
  second.id = 4;
  query.elements.push_back(std::move(first));
  query.elements.push_back(std::move(second));

  // Identical sort keys tie-break by id, so id 4 is hit first in every mode.
  for (int workers : {1, 3}) {
    query.workers = workers;
    try {
      max_valid_step_mesh(query);
      FAIL("expected InvalidAtStart");
    } catch (const InvalidAtStart& error) {
      CHECK(error.element == 4);
    }
  }
}

TEST_CASE("empty queries are rejected") {
  CHECK_THROWS_AS(max_valid_step_mesh(MeshQuery{}), MalformedInput);
}

TEST_SUITE_END();

}  // namespace stepcert
