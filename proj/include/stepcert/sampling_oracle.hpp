// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Ground-truth machinery that is independent of the certification pipeline:
// an exact sampling falsifier and a closed-form root isolator for moving
// linear triangles. Both can refute a validity claim with an exact rational
// counterexample; neither can prove validity (only the checker can).

#pragma once

#include <optional>
#include <vector>

#include "stepcert/element_map.hpp"

namespace stepcert {

// One refuting sample: the Jacobian determinant at reference point `point`
// and time `time` evaluates exactly to `value` <= 0.
struct SampleHit {
  std::vector<Rational> point;
  Rational time;
  Rational value;
};

// The lattice (1/resolution) Z^n intersected with the reference domain, in
// canonical order (first coordinate varies fastest). Includes all corners
// for every resolution >= 1.
std::vector<std::vector<Rational>> spatial_lattice(ElementClass cls,
                                                   int resolution);

// Sweeps the spatial lattice at times 0, 1/time_samples, ..., 1 and returns
// the earliest-time sample whose exact determinant is <= 0, scanning points
// in canonical order within each time. Static geometries are swept once at
// time 0. Samples are prefiltered with an interval evaluation of the
// per-point determinant polynomial in t; only samples the filter cannot
// prove positive are settled in exact arithmetic, so a returned hit is
// exact and a missed sweep proves every sample positive.
// Throws BadAccuracy unless resolution >= 1 and time_samples >= 2.
std::optional<SampleHit> falsify_by_sampling(const ElementSpec& spec,
                                             int spatial_resolution,
                                             int time_samples);

// Rational bracket around one root of the determinant-in-time polynomial:
// lo <= root <= hi, with lo == hi whenever the root itself is rational.
struct TimeEnclosure {
  Rational lo;
  Rational hi;
};

// Smallest time in (0, 1] where a moving linear triangle's signed area
// vanishes, or nullopt when the area has no root there. The area is a
// degree-2 rational polynomial in t; rational roots (including double
// roots) return zero-width enclosures, irrational ones are isolated by
// integer square roots and bisection-free scaling to at most `width`. A
// triangle that is degenerate at every time reports the zero-width
// enclosure at 0.
// Throws NotLinearTriangle for any other class or order, BadAccuracy when
// width is not positive.
std::optional<TimeEnclosure> linear_triangle_t_star(const ElementSpec& spec,
                                                    const Rational& width);

}  // namespace stepcert
