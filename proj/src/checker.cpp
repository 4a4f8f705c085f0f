// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/checker.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <utility>

#include "stepcert/errors.hpp"

namespace stepcert {

namespace {

struct QueueItem {
  Subdomain sub;
  std::uint64_t seq = 0;
};

// Heap comparator: "a comes out after b". Earlier start time wins, then the
// smaller inclusion upper bound (the piece most likely to certify an
// invalidity), then insertion order so runs are reproducible.
struct LaterFirst {
  bool operator()(const QueueItem& a, const QueueItem& b) const {
    const int c = cmp(a.sub.span.begin, b.sub.span.begin);
    if (c != 0) return c > 0;
    if (a.sub.incl.hi != b.sub.incl.hi) return a.sub.incl.hi > b.sub.incl.hi;
    return a.seq > b.seq;
  }
};

class WorkQueue {
 public:
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  void push(Subdomain&& sub, std::uint64_t seq) {
    items_.push_back(QueueItem{std::move(sub), seq});
    std::push_heap(items_.begin(), items_.end(), LaterFirst{});
  }

  Subdomain pop() {
    std::pop_heap(items_.begin(), items_.end(), LaterFirst{});
    Subdomain out = std::move(items_.back().sub);
    items_.pop_back();
    return out;
  }

 private:
  std::vector<QueueItem> items_;
};

// Reference points of the listed grid corners, aligned with `corners`.
std::vector<std::vector<Rational>> corner_points(
    const BlockOrders& shape, std::span<const std::size_t> corners) {
  const std::vector<MultiIndex> grid = enumerate_grid(shape);
  std::vector<std::vector<Rational>> points;
  points.reserve(corners.size());
  for (std::size_t rank : corners) points.push_back(grid_point(shape, grid[rank]));
  return points;
}

// Position within `corners` of the corner with the smallest coefficient
// upper bound; first such position on ties, for determinism.
std::size_t corner_argmin(const CoefficientVector& coeffs,
                          std::span<const std::size_t> corners) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < corners.size(); ++i)
    if (coeffs.values[corners[i]].hi < coeffs.values[corners[best]].hi)
      best = i;
  return best;
}

// Pulls a point expressed in a subdomain's spatial frame back to the root
// reference domain by replaying the recorded subdivision choices, deepest
// map first (each map sends a child frame into its parent's frame).
std::vector<Rational> map_to_root(const std::vector<AffineMap>& maps,
                                  const std::vector<int>& spatial_seq,
                                  std::span<const Rational> sub_point) {
  std::vector<Rational> point(sub_point.begin(), sub_point.end());
  for (auto it = spatial_seq.rbegin(); it != spatial_seq.rend(); ++it)
    point = maps[std::size_t(*it)].apply(point);
  return point;
}

CoefficientVector restrict_child(const CoefficientVector& parent,
                                 const FactorSet& op,
                                 std::vector<Interval>& scratch) {
  CoefficientVector child;
  child.shape = parent.shape;
  child.values = parent.values;
  apply_factors(op, child.shape, child.values, scratch);
  return child;
}

}  // namespace

Interval min_inclusion(const CoefficientVector& coeffs,
                       std::span<const std::size_t> corners) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const Interval& v : coeffs.values) lo = std::min(lo, v.lo);
  for (std::size_t rank : corners) hi = std::min(hi, coeffs.values[rank].hi);
  return Interval{lo, hi};
}

MatrixCache& default_matrix_cache() {
  static MatrixCache cache;
  return cache;
}

DynamicResult max_valid_step(const ElementSpec& spec, const CheckOptions& opts,
                             MatrixCache& cache) {
  if (!(opts.delta > 0.0))
    throw BadAccuracy("max_valid_step: accuracy must be a positive real");
  validate_spec(spec);
  if (!spec.dynamic())
    throw DimensionMismatch(
        "max_valid_step needs end-of-step control points");
  if (check_static(spec, opts, cache).verdict == StaticVerdict::Invalid)
    throw InvalidAtStart("element is invalid at the start of the step",
                         spec.id);
  check_rounding_environment();

  const std::shared_ptr<const TransformSet> ts =
      cache.get(spec.cls, spec.order, true);
  const std::vector<std::size_t> corners = corner_indices(ts->shape, true);
  const std::vector<std::vector<Rational>> corner_ref =
      corner_points(ts->shape, corners);
  const std::vector<AffineMap>& spatial_maps = subdivision_maps(spec.cls);
  const std::size_t q_spatial = spatial_maps.size();
  const int dim = spatial_dim(spec.cls);
  const Rational delta = rational_from_double(opts.delta);
  std::optional<Rational> cutoff;
  if (opts.t_cutoff) cutoff = rational_from_double(*opts.t_cutoff);

  WorkQueue queue;
  std::uint64_t seq = 0;
  std::vector<Interval> scratch;
  auto push = [&](CoefficientVector&& coeffs, TimeSpan span, int depth,
                  std::vector<int>&& spatial_seq) {
    Subdomain sub{std::move(coeffs), std::move(span), depth,
                  std::move(spatial_seq), Interval{0.0, 0.0}};
    sub.incl = min_inclusion(sub.coeffs, corners);
    queue.push(std::move(sub), seq++);
  };

  {
    CoefficientVector root = lagrange_coeffs_dynamic(spec);
    to_bezier(root, *ts);
    push(std::move(root), TimeSpan{Rational(0), Rational(1)}, 0, {});
  }

  Rational lower(0);
  Rational upper(1);
  bool found = false;
  std::optional<Witness> witness;
  std::vector<int> witness_seq;
  int deepest = 0;

  auto gave_up = [&](const std::vector<int>& quad_seq) {
    DynamicResult out;
    out.verdict = DynamicVerdict::GaveUp;
    out.t_lower = lower.get_d();  // truncates toward zero: stays conservative
    out.quad_seq = quad_seq;
    out.depth = deepest;
    return out;
  };

  while (true) {
    if (found && upper - lower <= delta && sgn(lower) > 0) {
      DynamicResult out;
      out.verdict = DynamicVerdict::Inversion;
      out.t_lower = lower.get_d();
      out.witness = witness;
      out.quad_seq = witness_seq;
      out.depth = deepest;
      return out;
    }
    if (queue.empty()) {
      DynamicResult out;  // valid throughout the step
      out.depth = deepest;
      return out;
    }

    Subdomain sub = queue.pop();
    deepest = std::max(deepest, sub.depth);
    if (deepest > opts.max_depth) return gave_up(sub.spatial_seq);

    lower = sub.span.begin;
    if (opts.observer) opts.observer(lower, upper);
    if (cutoff && lower >= *cutoff) return gave_up(sub.spatial_seq);

    if (sub.incl.hi <= 0.0) {
      // Certified non-positive somewhere in this slice: remember the
      // certifying corner whenever the time bound improves, then sharpen
      // by bisecting time only.
      const bool lowers = sub.span.end < upper;
      if (!found || lowers) {
        if (lowers) upper = sub.span.end;
        found = true;
        const std::size_t at = corner_argmin(sub.coeffs, corners);
        const std::vector<Rational>& ref = corner_ref[at];
        Witness w;
        w.point = map_to_root(spatial_maps, sub.spatial_seq,
                              std::span<const Rational>(ref.data(),
                                                        std::size_t(dim)));
        w.time = sub.span.end;
        witness = std::move(w);
        witness_seq = sub.spatial_seq;
      }
      if (queue.size() + 2 > opts.queue_cap) return gave_up(sub.spatial_seq);
      const Rational mid = (sub.span.begin + sub.span.end) / 2;
      push(restrict_child(sub.coeffs, ts->time_child[0], scratch),
           TimeSpan{sub.span.begin, mid}, sub.depth + 1,
           std::vector<int>(sub.spatial_seq));
      push(restrict_child(sub.coeffs, ts->time_child[1], scratch),
           TimeSpan{mid, sub.span.end}, sub.depth + 1,
           std::vector<int>(sub.spatial_seq));
    } else if (!(sub.incl.lo > 0.0)) {
      // Undecided: subdivide in all directions. Children of the lower time
      // half come first in the canonical order.
      if (queue.size() + ts->child.size() > opts.queue_cap)
        return gave_up(sub.spatial_seq);
      const Rational mid = (sub.span.begin + sub.span.end) / 2;
      for (std::size_t q = 0; q < ts->child.size(); ++q) {
        TimeSpan span = q < q_spatial ? TimeSpan{sub.span.begin, mid}
                                      : TimeSpan{mid, sub.span.end};
        std::vector<int> child_seq = sub.spatial_seq;
        child_seq.push_back(int(q % q_spatial));
        push(restrict_child(sub.coeffs, ts->child[q], scratch),
             std::move(span), sub.depth + 1, std::move(child_seq));
      }
    }
    // else: certified positive, the slice is resolved and dropped
  }
}

StaticResult check_static(const ElementSpec& spec, const CheckOptions& opts,
                          MatrixCache& cache) {
  validate_spec(spec);
  check_rounding_environment();

  const std::shared_ptr<const TransformSet> ts =
      cache.get(spec.cls, spec.order, false);
  const std::vector<std::size_t> corners = corner_indices(ts->shape, false);
  const std::vector<std::vector<Rational>> corner_ref =
      corner_points(ts->shape, corners);
  const std::vector<AffineMap>& spatial_maps = subdivision_maps(spec.cls);

  WorkQueue queue;
  std::uint64_t seq = 0;
  std::vector<Interval> scratch;
  auto push = [&](CoefficientVector&& coeffs, int depth,
                  std::vector<int>&& spatial_seq) {
    Subdomain sub{std::move(coeffs), TimeSpan{Rational(0), Rational(0)}, depth,
                  std::move(spatial_seq), Interval{0.0, 0.0}};
    sub.incl = min_inclusion(sub.coeffs, corners);
    queue.push(std::move(sub), seq++);
  };

  {
    CoefficientVector root = lagrange_coeffs_static(spec, Rational(0));
    to_bezier(root, *ts);
    push(std::move(root), 0, {});
  }

  // Exact fallback results, keyed by root-frame corner point: subdivision
  // revisits shared corners, and exact evaluation is the expensive path.
  std::map<std::vector<Rational>, bool> nonpositive;
  int deepest = 0;

  auto invalid_at = [&](std::vector<Rational>&& point,
                        const std::vector<int>& quad_seq) {
    StaticResult out;
    out.verdict = StaticVerdict::Invalid;
    out.witness = Witness{std::move(point), Rational(0)};
    out.quad_seq = quad_seq;
    return out;
  };
  auto undecided_at = [&](const std::vector<int>& quad_seq) {
    StaticResult out;
    out.quad_seq = quad_seq;
    return out;
  };

  while (!queue.empty()) {
    Subdomain sub = queue.pop();
    deepest = std::max(deepest, sub.depth);
    if (deepest > opts.max_depth) return undecided_at(sub.spatial_seq);

    if (sub.incl.hi <= 0.0) {
      const std::size_t at = corner_argmin(sub.coeffs, corners);
      return invalid_at(
          map_to_root(spatial_maps, sub.spatial_seq, corner_ref[at]),
          sub.spatial_seq);
    }
    if (sub.incl.lo > 0.0) continue;

    // The enclosure straddles zero. Corners whose own coefficient straddles
    // are settled exactly before subdividing: a corner sitting exactly on or
    // below zero is otherwise invisible at any refinement depth.
    for (std::size_t i = 0; i < corners.size(); ++i) {
      if (sub.coeffs.values[corners[i]].lo > 0.0) continue;
      std::vector<Rational> point =
          map_to_root(spatial_maps, sub.spatial_seq, corner_ref[i]);
      auto [it, fresh] = nonpositive.try_emplace(point, false);
      if (fresh)
        it->second = sgn(jacobian_exact(spec, it->first, Rational(0))) <= 0;
      if (it->second) return invalid_at(std::move(point), sub.spatial_seq);
    }

    if (queue.size() + ts->child.size() > opts.queue_cap)
      return undecided_at(sub.spatial_seq);  // memory guard
    for (std::size_t q = 0; q < ts->child.size(); ++q) {
      std::vector<int> child_seq = sub.spatial_seq;
      child_seq.push_back(int(q));
      push(restrict_child(sub.coeffs, ts->child[q], scratch), sub.depth + 1,
           std::move(child_seq));
    }
  }
  StaticResult out;
  out.verdict = StaticVerdict::Valid;
  return out;
}

bool verify_witness(const ElementSpec& spec, const Witness& w) {
  const int dim = spatial_dim(spec.cls);
  if (w.point.size() != std::size_t(dim)) return false;
  if (!domain_contains(simplex_block(spec.cls), w.point)) return false;
  if (sgn(w.time) < 0 || w.time > 1) return false;
  if (sgn(w.time) != 0 && !spec.dynamic()) return false;
  return sgn(jacobian_exact(spec, w.point, w.time)) <= 0;
}

}  // namespace stepcert
