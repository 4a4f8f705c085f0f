// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/query_io.hpp"

#include <array>
#include <cstring>
#include <sstream>

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

QueryFile sample_query() {
  QueryFile q;
  q.cls = ElementClass::Triangle;
  q.order = 1;
  q.dynamic = true;

  ElementSpec flip = flipping_triangle();
  flip.id = 0;
  q.elements.push_back(std::move(flip));

  // Awkward coordinates: inexact decimals, a subnormal, a negative zero.
  ElementSpec odd;
  odd.cls = ElementClass::Triangle;
  odd.order = 1;
  odd.id = 5;
  odd.start = {{{0.1, -0.0, 0.0}}, {{1.1, 0x1p-1060, 0.0}}, {{0.3, 2.7, 0.0}}};
  odd.end = {{{0.1, 0.2, 0.0}}, {{1.0, 0.0, 0.0}}, {{0.25, 2.75, 0.0}}};
  q.elements.push_back(std::move(odd));

  ElementSpec third = flipping_triangle();
  third.id = 12;
  for (auto& p : third.end) p[1] += 0.125;
  q.elements.push_back(std::move(third));
  return q;
}

std::string render_query(const QueryFile& q) {
  std::ostringstream os;
  write_query_file(os, q);
  return os.str();
}

QueryFile parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_query_file(in);
}

}  // namespace

TEST_SUITE_BEGIN("query_io");

TEST_CASE("query files round-trip bit-exactly through hex literals") {
  const QueryFile original = sample_query();
  const std::string text = render_query(original);
  const QueryFile parsed = parse_text(text);

  CHECK(parsed.cls == original.cls);
  CHECK(parsed.order == original.order);
  CHECK(parsed.dynamic == original.dynamic);
  REQUIRE(parsed.elements.size() == original.elements.size());
  for (std::size_t e = 0; e < parsed.elements.size(); ++e) {
    const ElementSpec& a = original.elements[e];
    const ElementSpec& b = parsed.elements[e];
    CHECK(b.id == a.id);
    REQUIRE(b.start.size() == a.start.size());
    REQUIRE(b.end.size() == a.end.size());
    for (std::size_t i = 0; i < a.start.size(); ++i)
      for (int d = 0; d < 2; ++d) {
        CHECK(same_bits(a.start[i][std::size_t(d)], b.start[i][std::size_t(d)]));
        CHECK(same_bits(a.end[i][std::size_t(d)], b.end[i][std::size_t(d)]));
      }
  }

  // Writing the parsed copy reproduces the exact same bytes.
  CHECK(render_query(parsed) == text);
}

TEST_CASE("decimal literals parse to their nearest machine values") {
  const std::string text =
      "stepcert-query 1\n"
      "dim 2\n"
      "class triangle\n"
      "order 1\n"
      "dynamic 0\n"
      "element 3\n"
      "0.5 -4\n"
      "1e-3 0x1.8p+1\n"
      "0.1 2\n";
  const QueryFile q = parse_text(text);
  CHECK(!q.dynamic);
  REQUIRE(q.elements.size() == 1);
  const ElementSpec& spec = q.elements[0];
  CHECK(spec.id == 3);
  CHECK(same_bits(spec.start[0][0], 0.5));
  CHECK(same_bits(spec.start[0][1], -4.0));
  CHECK(same_bits(spec.start[1][0], 1e-3));
  CHECK(same_bits(spec.start[1][1], 3.0));
  CHECK(same_bits(spec.start[2][0], 0.1));
  CHECK(spec.end.empty());
}

TEST_CASE("malformed queries are rejected with line diagnostics") {
  const auto head = [](const std::string& tail) {
    return "stepcert-query 1\ndim 2\nclass triangle\norder 1\ndynamic 0\n" +
           tail;
  };

  // Header problems.
  CHECK_THROWS_AS(parse_text(""), MalformedInput);
  CHECK_THROWS_AS(parse_text("stepcert-query 2\n"), MalformedInput);
  CHECK_THROWS_AS(parse_text("stepcert-query 1\ndim 3\nclass triangle\n"),
                  MalformedInput);
  CHECK_THROWS_AS(
      parse_text("stepcert-query 1\ndim 2\nclass heptagon\norder 1\n"),
      MalformedInput);
  CHECK_THROWS_AS(parse_text(
                      "stepcert-query 1\ndim 2\nclass triangle\norder 0\n"),
                  MalformedInput);
  CHECK_THROWS_AS(parse_text(head("")), MalformedInput);  // no elements

  // Element-block problems carry the element id.
  try {
    parse_text(head("element 7\n0 0\n1 0\n"));
    FAIL("expected MalformedInput");
  } catch (const MalformedInput& error) {
    CHECK(error.element == 7);
  }
  CHECK_THROWS_AS(parse_text(head("element 7\n0 0 0\n1 0\n0 1\n")),
                  MalformedInput);
  CHECK_THROWS_AS(parse_text(head("element 7\n0 zero\n1 0\n0 1\n")),
                  MalformedInput);
  CHECK_THROWS_AS(parse_text(head("element 7\n1e999 0\n1 0\n0 1\n")),
                  MalformedInput);
  CHECK_THROWS_AS(parse_text(head("element -2\n0 0\n1 0\n0 1\n")),
                  MalformedInput);
  CHECK_THROWS_AS(
      parse_text(head("element 7\n0 0\n1 0\n0 1\nelement 7\n0 0\n1 0\n0 1\n")),
      MalformedInput);
  CHECK_THROWS_AS(parse_text(head("surprise 1\n")), MalformedInput);

  // A control point that parses but is non-finite arithmetic-wise cannot
  // happen (literals are checked), so the remaining rejection is geometry
  // validation, still flagged with the id.
  try {
    parse_text(head("element 9\n0 0\n1 0\n"));
    FAIL("expected MalformedInput");
  } catch (const MalformedInput& error) {
    CHECK(error.element == 9);
  }
}

TEST_CASE("reports are deterministic and segregate timings") {
  MeshQuery query;
  ElementSpec flip = flipping_triangle();
  flip.id = 0;
  ElementSpec slow = flipping_triangle();
  slow.id = 1;
  query.elements = {flip, slow};

  const MeshResult result = max_valid_step_mesh(query);
  std::ostringstream a, b;
  write_report(a, result);
  write_report(b, result);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("timings") == std::string::npos);
  CHECK(verdict_section(a.str()) == a.str());

  const std::array<long long, 2> wall = {37, 1};
  std::ostringstream timed;
  write_report(timed, result, wall);
  CHECK(timed.str() != a.str());
  CHECK(verdict_section(timed.str()) == a.str());
  CHECK(timed.str().find("element 0 wall_us 37\n") != std::string::npos);
  CHECK(timed.str().find("total wall_us 38\n") != std::string::npos);

  // t_lower round-trips bit-exactly through its hex literal.
  const std::string text = a.str();
  const std::string key = " t_lower ";
  const std::size_t at = text.find(key);
  REQUIRE(at != std::string::npos);
  const std::size_t begin = at + key.size();
  const std::size_t end = text.find(' ', begin);
  const double parsed = double_from_hex(text.substr(begin, end - begin));
  CHECK(same_bits(parsed, result.reports[0].t_lower));

  // The argmin element's witness appears as exact rationals.
  REQUIRE(result.reports[0].witness.has_value());
  CHECK(text.find("witness") != std::string::npos);
  CHECK(text.find("argmin 0") != std::string::npos);
}

TEST_CASE("static reports carry exact witnesses") {
  const ElementSpec spec = hairline_invalid_triangle();
  const StaticResult res = check_static(spec);
  REQUIRE(res.verdict == StaticVerdict::Invalid);
  const std::vector<std::pair<long, StaticResult>> rows = {{11, res}};
  std::ostringstream os;
  write_static_report(os, rows);
  const std::string text = os.str();
  CHECK(text.find("static-verdicts\n") != std::string::npos);
  CHECK(text.find("element 11 verdict invalid\n") != std::string::npos);
  CHECK(text.find("witness 1 0 time 0\n") != std::string::npos);
  CHECK(text.find("\nseq") != std::string::npos);
}

TEST_CASE("missing files raise IoFailure") {
  CHECK_THROWS_AS(load_query_file("/nonexistent/stepcert-query.txt"),
                  IoFailure);
}

TEST_SUITE_END();

}  // namespace stepcert
