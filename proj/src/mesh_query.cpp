// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/mesh_query.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "stepcert/errors.hpp"

namespace stepcert {

namespace {

struct SortEntry {
  std::size_t input_index = 0;
  long id = -1;
  Rational key;  // exact determinant at the origin corner, t = 0
};

struct StartFailure {
  std::size_t sorted_pos;
  long id;
  std::string message;
};

// Atomic running minimum over doubles; relaxed ordering is enough because
// a stale value only prunes less.
void fetch_min(std::atomic<double>& target, double value) {
  double seen = target.load(std::memory_order_relaxed);
  while (value < seen &&
         !target.compare_exchange_weak(seen, value,
                                       std::memory_order_relaxed)) {
  }
}

}  // namespace

MeshResult max_valid_step_mesh(const MeshQuery& query, MatrixCache& cache) {
  if (query.elements.empty())
    throw MalformedInput("mesh query with no elements");
  const std::size_t count = query.elements.size();

  std::vector<SortEntry> order(count);
  for (std::size_t i = 0; i < count; ++i) {
    const ElementSpec& spec = query.elements[i];
    validate_spec(spec);
    SortEntry& entry = order[i];
    entry.input_index = i;
    entry.id = spec.id >= 0 ? spec.id : long(i);
    const std::vector<Rational> origin(
        std::size_t(spatial_dim(spec.cls)), Rational(0));
    entry.key = jacobian_exact(spec, origin, Rational(0));
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const SortEntry& a, const SortEntry& b) {
                     const int by_key = cmp(a.key, b.key);
                     if (by_key != 0) return by_key < 0;
                     return a.id < b.id;
                   });

  const int workers =
      std::max(1, std::min<int>(query.workers, int(count)));
  std::vector<ElementReport> reports(count);
  std::vector<std::optional<StartFailure>> failures(
      static_cast<std::size_t>(workers));
  std::atomic<double> shared_min(1.0);
  std::atomic<bool> abort(false);

  const auto run_batch = [&](int worker, std::size_t begin, std::size_t end) {
    double private_min = 1.0;
    for (std::size_t pos = begin; pos < end; ++pos) {
      if (abort.load(std::memory_order_relaxed)) return;
      const SortEntry& entry = order[pos];
      const ElementSpec& spec = query.elements[entry.input_index];
      ElementReport& report = reports[entry.input_index];
      report.id = entry.id;

      CheckOptions opts = query.options;
      std::optional<double> cutoff = opts.t_cutoff;
      if (query.prune) {
        double bound = private_min;
        if (query.share_cutoff)
          bound = std::min(bound, shared_min.load(std::memory_order_relaxed));
        cutoff = cutoff ? std::min(*cutoff, bound) : bound;
      }
      opts.t_cutoff = cutoff;

      DynamicResult res;
      try {
        res = max_valid_step(spec, opts, cache);
      } catch (const InvalidAtStart& error) {
        std::optional<StartFailure>& slot = failures[std::size_t(worker)];
        if (!slot || pos < slot->sorted_pos)
          slot = StartFailure{pos, entry.id, error.what()};
        abort.store(true, std::memory_order_relaxed);
        return;
      }

      report.verdict = res.verdict;
      report.t_lower = res.t_lower;
      report.witness = std::move(res.witness);
      report.quad_seq = std::move(res.quad_seq);
      report.depth = res.depth;
      report.pruned = res.verdict == DynamicVerdict::GaveUp && cutoff &&
                      res.t_lower >= *cutoff;

      private_min = std::min(private_min, res.t_lower);
      if (query.share_cutoff) fetch_min(shared_min, private_min);
    }
  };

  if (workers == 1) {
    run_batch(0, 0, count);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = count * std::size_t(w) / std::size_t(workers);
      const std::size_t end =
          count * std::size_t(w + 1) / std::size_t(workers);
      threads.emplace_back(run_batch, w, begin, end);
    }
    for (std::thread& thread : threads) thread.join();
  }

  const StartFailure* worst = nullptr;
  for (const std::optional<StartFailure>& failure : failures)
    if (failure && (!worst || failure->sorted_pos < worst->sorted_pos))
      worst = &*failure;
  if (worst) throw InvalidAtStart(worst->message, worst->id);

  MeshResult result;
  result.reports = std::move(reports);
  for (const ElementReport& report : result.reports)
    result.t_global = std::min(result.t_global, report.t_lower);
  if (result.t_global < 1.0) {
    for (const SortEntry& entry : order) {
      if (result.reports[entry.input_index].t_lower == result.t_global) {
        result.argmin_id = entry.id;
        break;
      }
    }
  }
  return result;
}

}  // namespace stepcert
