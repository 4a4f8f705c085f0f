// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stepcert/element_map.hpp"
#include "stepcert/matrix_cache.hpp"
#include "stepcert/subdivision.hpp"

namespace stepcert {

// Tuning knobs for the validity searches. The defaults match the intended
// use inside a time-stepping loop: answers accurate to 1e-6 in time, with
// refinement cut off before it can run away on degenerate input.
struct CheckOptions {
  // Width of the final bracket around the inversion time (delta).
  double delta = 1e-6;
  // A subdomain whose subdivision depth exceeds this cap makes the search
  // give up; the bounds reported so far stay conservative.
  int max_depth = 40;
  // Callers that only consume step sizes below this value may set it so
  // the search stops early once the certified-valid prefix reaches it.
  std::optional<double> t_cutoff;
  // Memory guard: give up rather than grow the work queue beyond this.
  std::size_t queue_cap = std::size_t(1) << 18;
  // Instrumentation: called after every queue pop with the current
  // certified lower and upper bounds on the inversion time.
  std::function<void(const Rational&, const Rational&)> observer;
};

// A point that certifies invalidity: the determinant of the geometric map,
// evaluated exactly at (point, time), is non-positive. `point` holds the
// spatial reference coordinates; `time` is 0 for static verdicts.
struct Witness {
  std::vector<Rational> point;
  Rational time;
};

// One node of the refinement tree: Bernstein coefficients of the Jacobian
// determinant restricted to this piece of the (space x time) domain.
// spatial_seq records the spatial subdivision choices only; time-only
// bisections change `span` but not the sequence.
struct Subdomain {
  CoefficientVector coeffs;
  TimeSpan span;
  int depth = 0;
  std::vector<int> spatial_seq;
  Interval incl;
};

enum class DynamicVerdict : std::uint8_t { ValidThroughout, Inversion, GaveUp };

struct DynamicResult {
  DynamicVerdict verdict = DynamicVerdict::ValidThroughout;
  // Largest time the element is certified valid through. 1 when the whole
  // step is valid; with verdict Inversion the true inversion time lies in
  // [t_lower, t_lower + delta] and t_lower > 0; with GaveUp validity holds
  // on [0, t_lower] but the search stopped before reaching delta accuracy.
  double t_lower = 1.0;
  std::optional<Witness> witness;  // Inversion only; verifies exactly
  // Spatial subdivision history of the subdomain that pinned the verdict;
  // feeds the invalidity-aware quadrature builder.
  std::vector<int> quad_seq;
  // Deepest subdivision level the search visited.
  int depth = 0;
};

enum class StaticVerdict : std::uint8_t { Valid, Invalid, Undecided };

struct StaticResult {
  StaticVerdict verdict = StaticVerdict::Undecided;
  std::optional<Witness> witness;  // Invalid only; verifies exactly
  // Spatial subdivision history of the subdomain that pinned the verdict
  // (empty when the whole domain certified valid at the root); feeds the
  // invalidity-aware quadrature builder like its dynamic counterpart.
  std::vector<int> quad_seq;
};

// Lower bound on the minimum of the polynomial with the given Bernstein
// coefficients, paired with an upper bound on that minimum taken from the
// coefficients at the listed corner positions (whose Bernstein values the
// polynomial attains). The true minimum lies inside the returned interval.
Interval min_inclusion(const CoefficientVector& coeffs,
                       std::span<const std::size_t> corners);

// Shared process-wide transform cache used when callers do not manage one.
MatrixCache& default_matrix_cache();

// Largest valid time step for a deforming element, by adaptive Bernstein
// refinement over the space-time domain: certified-valid regions are
// discarded, certified-invalid slices bisect in time to sharpen the bound,
// and undecided regions subdivide in all directions. Throws BadAccuracy if
// opts.delta is not positive and InvalidAtStart if the start configuration
// is certified invalid.
DynamicResult max_valid_step(const ElementSpec& spec,
                             const CheckOptions& opts = {},
                             MatrixCache& cache = default_matrix_cache());

// Static validity of the start configuration (t = 0), with the same
// refinement machinery restricted to the spatial domain. When an enclosure
// cannot decide a corner sample, the corner is re-evaluated in exact
// rational arithmetic, so hairline-invalid corners are still caught.
StaticResult check_static(const ElementSpec& spec,
                          const CheckOptions& opts = {},
                          MatrixCache& cache = default_matrix_cache());

// Exact certificate check: true iff the Jacobian determinant of `spec` at
// the witness is non-positive, evaluated in rational arithmetic. Every
// Inversion or Invalid verdict must pass this.
bool verify_witness(const ElementSpec& spec, const Witness& w);

}  // namespace stepcert
