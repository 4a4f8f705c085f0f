// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Command-line front end. Query files go in, verdict reports and
// quadrature rules come out; see the subcommand help text for the exact
// flags. Exit codes: 0 when every element was processed, 2 when the input
// could not be parsed, 3 when an element is already invalid at the start
// of its step (dynamic checks refuse to run from an invalid state), 1 for
// anything else.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "stepcert/baselines.hpp"
#include "stepcert/checker.hpp"
#include "stepcert/errors.hpp"
#include "stepcert/matrix_cache.hpp"
#include "stepcert/mesh_query.hpp"
#include "stepcert/quadrature.hpp"
#include "stepcert/query_io.hpp"
#include "stepcert/sampling_oracle.hpp"

namespace {

using namespace stepcert;
using Clock = std::chrono::steady_clock;

long long elapsed_us(Clock::time_point from) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() -
                                                               from)
      .count();
}

ElementClass class_from_token(const std::string& token) {
  if (token == "tri") return ElementClass::Triangle;
  if (token == "quad") return ElementClass::Quadrilateral;
  if (token == "tet") return ElementClass::Tetrahedron;
  if (token == "hex" || token == "hexa") return ElementClass::Hexahedron;
  return element_class_from_name(token);  // canonical names, throws
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open '" + path + "' for writing");
  return os;
}

// Shared flags describing one checker configuration.
struct RunConfig {
  std::string input;
  std::string output;
  std::string cache_path;
  double delta = 1e-6;
  int lmax = 40;
  int threads = 1;
  std::size_t queue_cap = std::size_t(1) << 18;
};

void add_run_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "query file to process")
      ->required();
  cmd->add_option("--out", cfg.output, "output file to write")->required();
  cmd->add_option("--delta", cfg.delta,
                  "time accuracy of inversion brackets (> 0)");
  cmd->add_option("--lmax", cfg.lmax, "subdivision depth cap (>= 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cache", cfg.cache_path,
                  "transform cache file from 'precompute'");
  cmd->add_option("--queue-cap", cfg.queue_cap,
                  "work queue size guard per element");
}

CheckOptions make_options(const RunConfig& cfg) {
  CheckOptions opts;
  opts.delta = cfg.delta;
  opts.max_depth = cfg.lmax;
  opts.queue_cap = cfg.queue_cap;
  return opts;
}

MatrixCache& prepared_cache(const RunConfig& cfg) {
  MatrixCache& cache = default_matrix_cache();
  if (!cfg.cache_path.empty()) cache.preload(cfg.cache_path);
  return cache;
}

int run_precompute(const std::string& classes_csv, int max_order,
                   const std::string& out) {
  std::vector<ElementClass> classes;
  for (const std::string& token : split_list(classes_csv))
    classes.push_back(class_from_token(token));
  if (classes.empty())
    throw MalformedInput("precompute: --classes named no element class");
  MatrixCache& cache = default_matrix_cache();
  for (ElementClass cls : classes) {
    for (int p = 1; p <= max_order; ++p) {
      cache.get(cls, p, false);
      cache.get(cls, p, true);
      gradient_table(cls, p);  // warmed for this process; rebuilt cheaply
    }
  }
  const std::vector<TransformSet> sets = cache.snapshot();
  cache_save(out, sets);
  std::cout << "saved " << sets.size() << " transform sets to " << out
            << "\n";
  return 0;
}

int run_check(const RunConfig& cfg, bool static_only, bool timings,
              bool no_prune, bool share_cutoff) {
  const QueryFile query = load_query_file(cfg.input);
  MatrixCache& cache = prepared_cache(cfg);
  const CheckOptions opts = make_options(cfg);
  std::ofstream os = open_out(cfg.output);

  if (static_only || !query.dynamic) {
    std::vector<std::pair<long, StaticResult>> rows;
    std::vector<long long> wall;
    rows.reserve(query.elements.size());
    for (const ElementSpec& spec : query.elements) {
      const Clock::time_point t0 = Clock::now();
      rows.emplace_back(spec.id, check_static(spec, opts, cache));
      wall.push_back(elapsed_us(t0));
    }
    write_static_report(os, rows,
                        timings ? std::span<const long long>(wall)
                                : std::span<const long long>());
    std::cout << "checked " << rows.size() << " elements (static)\n";
    return 0;
  }

  MeshQuery mesh;
  mesh.elements = query.elements;
  mesh.options = opts;
  mesh.workers = cfg.threads;
  mesh.prune = !no_prune;
  mesh.share_cutoff = share_cutoff;
  const Clock::time_point t0 = Clock::now();
  const MeshResult result = max_valid_step_mesh(mesh, cache);
  const long long total_us = elapsed_us(t0);
  write_report(os, result);
  std::cout << "checked " << result.reports.size()
            << " elements, t_global " << result.t_global;
  if (result.argmin_id >= 0) std::cout << " (element " << result.argmin_id << ")";
  if (timings) std::cout << ", wall " << total_us << " us";
  std::cout << "\n";
  return 0;
}

int run_quadrature(const RunConfig& cfg, long element_id, int base_order) {
  const QueryFile query = load_query_file(cfg.input);
  const auto found =
      std::find_if(query.elements.begin(), query.elements.end(),
                   [&](const ElementSpec& s) { return s.id == element_id; });
  if (found == query.elements.end())
    throw MalformedInput("no element with id " +
                             std::to_string(element_id) + " in " + cfg.input,
                         element_id);
  MatrixCache& cache = prepared_cache(cfg);
  const CheckOptions opts = make_options(cfg);

  std::vector<int> seq;
  std::string verdict;
  if (found->dynamic()) {
    const DynamicResult res = max_valid_step(*found, opts, cache);
    seq = res.quad_seq;
    verdict = res.verdict == DynamicVerdict::Inversion ? "inversion"
              : res.verdict == DynamicVerdict::ValidThroughout
                  ? "valid_throughout"
                  : "gave_up";
  } else {
    const StaticResult res = check_static(*found, opts, cache);
    seq = res.quad_seq;
    verdict = res.verdict == StaticVerdict::Invalid   ? "invalid"
              : res.verdict == StaticVerdict::Valid ? "valid"
                                                      : "undecided";
  }

  const QuadratureRule rule = build_rule(
      found->cls, base_order, build_leaves(found->cls, seq));
  std::ofstream os = open_out(cfg.output);
  write_rule(os, rule);
  std::cout << "element " << element_id << ": " << verdict << ", rule with "
            << rule.points.size() << " points over " << rule.leaf_maps.size()
            << " leaves\n";
  return 0;
}

int run_oracle(const RunConfig& cfg, int resolution, int time_samples) {
  const QueryFile query = load_query_file(cfg.input);
  std::ofstream os = open_out(cfg.output);
  os << "stepcert-oracle 1\n";
  std::size_t hits = 0;
  for (const ElementSpec& spec : query.elements) {
    const std::optional<SampleHit> hit =
        falsify_by_sampling(spec, resolution, time_samples);
    if (!hit) {
      os << "element " << spec.id << " none\n";
      continue;
    }
    ++hits;
    os << "element " << spec.id << " hit time " << hit->time.get_str()
       << " value " << hit->value.get_str() << " point";
    for (const Rational& c : hit->point) os << " " << c.get_str();
    os << "\n";
  }
  std::cout << "sampled " << query.elements.size() << " elements, " << hits
            << " invalid\n";
  return 0;
}

// One bench row: verdict counts plus per-element wall times for a method.
struct BenchRow {
  std::string method;
  long valid = 0;
  long invalid = 0;
  long undecided = 0;
  std::vector<long long> us;

  void count(BaselineVerdict v) {
    if (v == BaselineVerdict::Valid) ++valid;
    else if (v == BaselineVerdict::Invalid) ++invalid;
    else ++undecided;
  }
};

double mean_us(const std::vector<long long>& us) {
  if (us.empty()) return 0.0;
  return double(std::accumulate(us.begin(), us.end(), 0LL)) /
         double(us.size());
}

double median_us(std::vector<long long> us) {
  if (us.empty()) return 0.0;
  std::sort(us.begin(), us.end());
  const std::size_t mid = us.size() / 2;
  if (us.size() % 2 == 1) return double(us[mid]);
  return 0.5 * double(us[mid - 1] + us[mid]);
}

// Worst verdict of a baseline over the probed times: any invalid slice
// makes the element invalid, otherwise any undecided slice leaves it
// undecided. Static specs are probed at t = 0 only.
template <typename F>
BaselineVerdict probe_times(const ElementSpec& spec, F&& check) {
  std::vector<double> times = {0.0};
  if (spec.dynamic()) times = {0.0, 0.5, 1.0};
  BaselineVerdict out = BaselineVerdict::Valid;
  for (double t : times) {
    const BaselineVerdict v = check(spec, t);
    if (v == BaselineVerdict::Invalid) return v;
    if (v == BaselineVerdict::Undecided) out = v;
  }
  return out;
}

int run_bench(const RunConfig& cfg, const std::string& baselines_csv,
              int resolution, int time_samples) {
  const QueryFile query = load_query_file(cfg.input);
  MatrixCache& cache = prepared_cache(cfg);
  const CheckOptions opts = make_options(cfg);

  std::vector<BenchRow> rows;
  {
    BenchRow checker{"checker", 0, 0, 0, {}};
    for (const ElementSpec& spec : query.elements) {
      const Clock::time_point t0 = Clock::now();
      if (spec.dynamic()) {
        try {
          const DynamicResult res = max_valid_step(spec, opts, cache);
          if (res.verdict == DynamicVerdict::ValidThroughout)
            ++checker.valid;
          else if (res.verdict == DynamicVerdict::Inversion)
            ++checker.invalid;
          else
            ++checker.undecided;
        } catch (const InvalidAtStart&) {
          ++checker.invalid;  // already inverted before the step begins
        }
      } else {
        const StaticResult res = check_static(spec, opts, cache);
        if (res.verdict == StaticVerdict::Valid) ++checker.valid;
        else if (res.verdict == StaticVerdict::Invalid) ++checker.invalid;
        else ++checker.undecided;
      }
      checker.us.push_back(elapsed_us(t0));
    }
    rows.push_back(std::move(checker));
  }

  for (const std::string& method : split_list(baselines_csv)) {
    BenchRow row{method, 0, 0, 0, {}};
    for (const ElementSpec& spec : query.elements) {
      const Clock::time_point t0 = Clock::now();
      if (method == "sampling") {
        const std::optional<SampleHit> hit =
            falsify_by_sampling(spec, resolution, time_samples);
        hit ? ++row.invalid : ++row.valid;
      } else if (method == "fp-bezier") {
        row.count(probe_times(spec, [&](const ElementSpec& s, double t) {
          return fp_bezier_check(s, t, opts.max_depth);
        }));
      } else if (method == "quadrature-points") {
        row.count(probe_times(spec, [](const ElementSpec& s, double t) {
          return quadrature_point_check(s, t);
        }));
      } else {
        throw MalformedInput("bench: unknown baseline '" + method +
                             "' (expected sampling, fp-bezier, or "
                             "quadrature-points)");
      }
      row.us.push_back(elapsed_us(t0));
    }
    rows.push_back(std::move(row));
  }

  std::ofstream os = open_out(cfg.output);
  os << "method,valid,invalid,undecided,mean_us,median_us\n";
  for (const BenchRow& row : rows) {
    os << row.method << "," << row.valid << "," << row.invalid << ","
       << row.undecided << "," << std::fixed << std::setprecision(1)
       << mean_us(row.us) << "," << median_us(row.us) << "\n";
  }
  std::cout << "benchmarked " << query.elements.size() << " elements with "
            << rows.size() << " methods\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "stepcert: certified validity checking for deforming finite "
      "elements"};
  app.require_subcommand(1);

  // precompute
  std::string classes_csv;
  int max_order = 2;
  std::string precompute_out;
  CLI::App* precompute = app.add_subcommand(
      "precompute", "build and save the transform cache");
  precompute
      ->add_option("--classes", classes_csv,
                   "comma list: triangle,quadrilateral,tetrahedron,prism,"
                   "hexahedron (tri/quad/tet/hex accepted)")
      ->required();
  precompute
      ->add_option("--max-order", max_order, "cache orders 1..p")
      ->check(CLI::PositiveNumber);
  precompute->add_option("--out", precompute_out, "cache file to write")
      ->required();

  // check
  RunConfig check_cfg;
  bool static_only = false;
  bool timings = false;
  bool no_prune = false;
  bool share_cutoff = false;
  CLI::App* check = app.add_subcommand(
      "check", "run the certified checker over a query file");
  add_run_flags(check, check_cfg);
  check->add_option("--threads", check_cfg.threads,
                    "worker threads for mesh queries")
      ->check(CLI::PositiveNumber);
  check->add_flag("--static", static_only,
                  "check start configurations only (t = 0)");
  check->add_flag("--timings", timings,
                  "static reports: append per-element wall times; mesh "
                  "queries: print the total to stdout");
  check->add_flag("--no-prune", no_prune,
                  "disable the running-minimum early-out between elements");
  check->add_flag("--share-cutoff", share_cutoff,
                  "let worker threads share their running minima");

  // quadrature
  RunConfig quad_cfg;
  long element_id = -1;
  int base_order = 1;
  CLI::App* quadrature = app.add_subcommand(
      "quadrature",
      "emit the invalidity-aware rule for one element's refinement");
  add_run_flags(quadrature, quad_cfg);
  quadrature->add_option("--element", element_id, "element id in the file")
      ->required();
  quadrature
      ->add_option("--base-order", base_order,
                   "polynomial degree the base rule must integrate exactly")
      ->check(CLI::PositiveNumber);

  // oracle
  RunConfig oracle_cfg;
  int resolution = 9;
  int time_samples = 64;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "dense-sampling falsifier for cross-checks (not certified)");
  add_run_flags(oracle, oracle_cfg);
  oracle->add_option("--resolution", resolution,
                     "spatial lattice subdivisions per axis (>= 1)");
  oracle->add_option("--time-samples", time_samples,
                     "time samples across the step (>= 2)");

  // bench
  RunConfig bench_cfg;
  std::string baselines_csv = "sampling,fp-bezier";
  int bench_resolution = 9;
  int bench_time_samples = 8;
  CLI::App* bench = app.add_subcommand(
      "bench",
      "compare the checker against non-conservative baselines (CSV out)");
  add_run_flags(bench, bench_cfg);
  bench->add_option("--baselines", baselines_csv,
                    "comma list: sampling, fp-bezier, quadrature-points");
  bench->add_option("--resolution", bench_resolution,
                    "sampling baseline: spatial subdivisions per axis");
  bench->add_option("--time-samples", bench_time_samples,
                    "sampling baseline: time samples across the step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (precompute->parsed())
      return run_precompute(classes_csv, max_order, precompute_out);
    if (check->parsed())
      return run_check(check_cfg, static_only, timings, no_prune,
                       share_cutoff);
    if (quadrature->parsed())
      return run_quadrature(quad_cfg, element_id, base_order);
    if (oracle->parsed())
      return run_oracle(oracle_cfg, resolution, time_samples);
    if (bench->parsed())
      return run_bench(bench_cfg, baselines_csv, bench_resolution,
                       bench_time_samples);
  } catch (const InvalidAtStart& error) {
    std::cerr << "error: " << error.what();
    if (error.element >= 0) std::cerr << " (element " << error.element << ")";
    std::cerr << "\n";
    return 3;
  } catch (const MalformedInput& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const IoFailure& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
