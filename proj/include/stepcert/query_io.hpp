// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Text formats for queries and reports.
//
// Query files are line-oriented and self-describing:
//
//   stepcert-query 1
//   dim 2
//   class triangle
//   order 1
//   dynamic 1
//   element 7
//   <x> <y>            one line per control point, canonical grid order,
//   ...                all start-of-step points, then (when dynamic) the
//   <x> <y>            end-of-step points in the same order
//
// Coordinates are machine reals written as decimal or hexadecimal
// literals; hex (the canonical output encoding) round-trips bit-exactly.
// Parsing is strict: fixed header order, exact token counts, no unknown
// fields. Blank lines are ignored.
//
// Reports are line-oriented too, with the determinism-relevant verdict
// lines segregated from the optional timing lines:
//
//   stepcert-report 1
//   verdicts
//   element 7 verdict inversion t_lower 0x1.6...p-2 depth 24 pruned 0
//   witness 1/2 0 time 11/32
//   seq 0 3
//   global t_global 0x1.6...p-2 argmin 7
//   timings
//   element 7 wall_us 1234
//
// The witness line appears only for verdicts carrying one; the seq line is
// always present (possibly bare). t_lower and t_global are hex literals.

#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "stepcert/mesh_query.hpp"

namespace stepcert {

// A parsed query file: one element class, order, and dynamic flag for the
// whole file, plus the element list ready for max_valid_step_mesh.
struct QueryFile {
  ElementClass cls = ElementClass::Triangle;
  int order = 1;
  bool dynamic = false;
  std::vector<ElementSpec> elements;
};

// Strict parse of the format above. Throws MalformedInput with a line
// number and, once inside an element block, the element id.
QueryFile parse_query_file(std::istream& in);

// Convenience wrapper: opens and parses `path`, throwing IoFailure when
// the file cannot be read.
QueryFile load_query_file(const std::string& path);

// Writes `q` in the canonical (hexadecimal) encoding. A write followed by
// a parse reproduces the element list bit-exactly.
void write_query_file(std::ostream& os, const QueryFile& q);

// Writes the verdict section (deterministic given identical inputs and
// options) and, when `wall_us` is non-empty, a timing section with one
// entry per report in the same order.
void write_report(std::ostream& os, const MeshResult& result,
                  std::span<const long long> wall_us = {});

// Static sweep results in the same shape, with verdicts valid / invalid /
// undecided; ids pair each result with its element.
void write_static_report(
    std::ostream& os,
    std::span<const std::pair<long, StaticResult>> results,
    std::span<const long long> wall_us = {});

// The deterministic part of a report: everything up to (and excluding) the
// timings line. Used to compare runs byte-for-byte.
std::string verdict_section(const std::string& report_text);

}  // namespace stepcert
