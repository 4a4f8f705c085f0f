// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/query_io.hpp"

#include <array>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "stepcert/errors.hpp"

namespace stepcert {

namespace {

// Splits a line into whitespace-separated tokens.
std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string token;
  while (in >> token) tokens.push_back(std::move(token));
  return tokens;
}

// Reads lines until a non-blank one arrives; false at end of input.
bool next_line(std::istream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) return true;
  }
  return false;
}

[[noreturn]] void fail(long line_no, const std::string& what,
                       long element = -1) {
  throw MalformedInput("line " + std::to_string(line_no) + ": " + what,
                       element);
}

// Strict machine-real parse: decimal or hexadecimal literal, finite, with
// nothing left over.
double parse_real(const std::string& token, long line_no, long element) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty())
    fail(line_no, "not a real literal: '" + token + "'", element);
  if (!std::isfinite(value))
    fail(line_no, "coordinate out of range: '" + token + "'", element);
  return value;
}

long parse_long(const std::string& token, long line_no, const char* what,
                long element = -1) {
  errno = 0;
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (end != token.c_str() + token.size() || token.empty() || errno == ERANGE)
    fail(line_no, std::string("bad ") + what + ": '" + token + "'", element);
  return value;
}

// One control-point block: `count` lines of `dim` coordinates each.
void parse_controls(std::istream& in, long& line_no, long element, int dim,
                    std::size_t count,
                    std::vector<std::array<double, 3>>& out) {
  std::string line;
  for (std::size_t i = 0; i < count; ++i) {
    if (!next_line(in, line, line_no))
      fail(line_no, "element block truncated", element);
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.size() != std::size_t(dim))
      fail(line_no,
           "expected " + std::to_string(dim) + " coordinates, got " +
               std::to_string(tokens.size()),
           element);
    std::array<double, 3> point{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d)
      point[std::size_t(d)] = parse_real(tokens[std::size_t(d)], line_no,
                                         element);
    out.push_back(point);
  }
}

const char* verdict_name(DynamicVerdict v) {
  switch (v) {
    case DynamicVerdict::ValidThroughout: return "valid_throughout";
    case DynamicVerdict::Inversion: return "inversion";
    case DynamicVerdict::GaveUp: return "gave_up";
  }
  return "unknown";
}

const char* verdict_name(StaticVerdict v) {
  switch (v) {
    case StaticVerdict::Valid: return "valid";
    case StaticVerdict::Invalid: return "invalid";
    case StaticVerdict::Undecided: return "undecided";
  }
  return "unknown";
}

void write_witness_line(std::ostream& os, const Witness& w) {
  os << "witness";
  for (const Rational& c : w.point) os << ' ' << rational_to_string(c);
  os << " time " << rational_to_string(w.time) << "\n";
}

void write_timings(std::ostream& os, std::span<const long long> wall_us,
                   std::span<const long> ids) {
  if (wall_us.empty()) return;
  os << "timings\n";
  long long total = 0;
  for (std::size_t i = 0; i < wall_us.size() && i < ids.size(); ++i) {
    os << "element " << ids[i] << " wall_us " << wall_us[i] << "\n";
    total += wall_us[i];
  }
  os << "total wall_us " << total << "\n";
}

}  // namespace

QueryFile parse_query_file(std::istream& in) {
  long line_no = 0;
  std::string line;
  const auto expect = [&](const char* keyword,
                          std::size_t tokens) -> std::vector<std::string> {
    if (!next_line(in, line, line_no))
      fail(line_no, std::string("missing '") + keyword + "' line");
    const std::vector<std::string> parts = tokenize(line);
    if (parts.size() != tokens || parts[0] != keyword)
      fail(line_no, std::string("expected '") + keyword + "' line, got '" +
                        line + "'");
    return parts;
  };

  if (expect("stepcert-query", 2)[1] != "1")
    fail(line_no, "unsupported query format version");
  const long dim = parse_long(expect("dim", 2)[1], line_no, "dimension");

  QueryFile query;
  const std::string cls_name = expect("class", 2)[1];
  try {
    query.cls = element_class_from_name(cls_name);
  } catch (const Error&) {
    fail(line_no, "unknown element class '" + cls_name + "'");
  }
  if (dim != spatial_dim(query.cls))
    fail(line_no, "dim " + std::to_string(dim) + " does not match class '" +
                      cls_name + "'");

  query.order = int(parse_long(expect("order", 2)[1], line_no, "order"));
  if (query.order < 1) fail(line_no, "order must be at least 1");

  const std::string dynamic_token = expect("dynamic", 2)[1];
  if (dynamic_token != "0" && dynamic_token != "1")
    fail(line_no, "dynamic flag must be 0 or 1");
  query.dynamic = dynamic_token == "1";

  const std::size_t controls = grid_size(geometry_orders(query.cls,
                                                         query.order));
  std::set<long> seen;
  while (next_line(in, line, line_no)) {
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.size() != 2 || tokens[0] != "element")
      fail(line_no, "expected 'element <id>' line, got '" + line + "'");
    const long id = parse_long(tokens[1], line_no, "element id");
    if (id < 0) fail(line_no, "element ids must be non-negative");
    if (!seen.insert(id).second)
      fail(line_no, "duplicate element id", id);

    ElementSpec spec;
    spec.cls = query.cls;
    spec.order = query.order;
    spec.id = id;
    parse_controls(in, line_no, id, int(dim), controls, spec.start);
    if (query.dynamic)
      parse_controls(in, line_no, id, int(dim), controls, spec.end);
    try {
      validate_spec(spec);
    } catch (const Error& error) {
      fail(line_no, error.what(), id);
    }
    query.elements.push_back(std::move(spec));
  }
  if (query.elements.empty()) fail(line_no, "query file has no elements");
  return query;
}

QueryFile load_query_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open query file '" + path + "'");
  return parse_query_file(in);
}

void write_query_file(std::ostream& os, const QueryFile& q) {
  os << "stepcert-query 1\n";
  const int dim = spatial_dim(q.cls);
  os << "dim " << dim << "\n";
  os << "class " << element_class_name(q.cls) << "\n";
  os << "order " << q.order << "\n";
  os << "dynamic " << (q.dynamic ? 1 : 0) << "\n";
  for (const ElementSpec& spec : q.elements) {
    os << "element " << spec.id << "\n";
    const auto write_block =
        [&](const std::vector<std::array<double, 3>>& block) {
          for (const std::array<double, 3>& point : block) {
            for (int d = 0; d < dim; ++d)
              os << (d ? " " : "") << double_to_hex(point[std::size_t(d)]);
            os << "\n";
          }
        };
    write_block(spec.start);
    if (q.dynamic) write_block(spec.end);
  }
}

void write_report(std::ostream& os, const MeshResult& result,
                  std::span<const long long> wall_us) {
  os << "stepcert-report 1\n";
  os << "verdicts\n";
  std::vector<long> ids;
  ids.reserve(result.reports.size());
  for (const ElementReport& report : result.reports) {
    ids.push_back(report.id);
    os << "element " << report.id << " verdict "
       << verdict_name(report.verdict) << " t_lower "
       << double_to_hex(report.t_lower) << " depth " << report.depth
       << " pruned " << (report.pruned ? 1 : 0) << "\n";
    if (report.witness) write_witness_line(os, *report.witness);
    os << "seq";
    for (int q : report.quad_seq) os << ' ' << q;
    os << "\n";
  }
  os << "global t_global " << double_to_hex(result.t_global) << " argmin "
     << result.argmin_id << "\n";
  write_timings(os, wall_us, ids);
}

void write_static_report(
    std::ostream& os, std::span<const std::pair<long, StaticResult>> results,
    std::span<const long long> wall_us) {
  os << "stepcert-report 1\n";
  os << "static-verdicts\n";
  std::vector<long> ids;
  ids.reserve(results.size());
  for (const auto& [id, res] : results) {
    ids.push_back(id);
    os << "element " << id << " verdict " << verdict_name(res.verdict)
       << "\n";
    if (res.witness) write_witness_line(os, *res.witness);
    os << "seq";
    for (int q : res.quad_seq) os << " " << q;
    os << "\n";
  }
  write_timings(os, wall_us, ids);
}

std::string verdict_section(const std::string& report_text) {
  const std::string marker = "\ntimings\n";
  const std::size_t cut = report_text.find(marker);
  if (cut == std::string::npos) return report_text;
  return report_text.substr(0, cut + 1);
}

}  // namespace stepcert
