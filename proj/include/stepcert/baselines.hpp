// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Non-conservative reference checkers for benchmark comparisons.
//
// Everything in this header trades soundness for speed on purpose: the
// arithmetic is plain double precision with no directed rounding and no
// exact confirmation, so a verdict from here is a plausibility estimate,
// not a certificate. The bench subcommand runs these side by side with the
// certified checker to reproduce the classic failure modes (a hairline
// inversion hiding between quadrature points, a sign lost to rounding).
// Nothing else in the library may depend on this module.

#pragma once

#include "stepcert/element_map.hpp"

namespace stepcert {

// What a baseline believes about the static configuration at one time.
// Unlike the certified verdicts, Valid and Invalid here carry no witness
// and no guarantee in either direction.
enum class BaselineVerdict : std::uint8_t { Valid, Invalid, Undecided };

// Lower-case label for reports ("valid", "invalid", "undecided").
const char* baseline_verdict_name(BaselineVerdict v);

// Sign check of the Jacobian determinant at the weighted points of the
// class base quadrature rule, all in double arithmetic: Invalid if any
// sampled determinant is non-positive, Valid otherwise (never Undecided).
// Misses any inversion that lies between the sample points. `t` is the
// evaluation time within the step; it must be 0 for a static-only spec.
// Throws like validate_spec on a malformed element.
BaselineVerdict quadrature_point_check(const ElementSpec& spec, double t);

// Bezier refinement check in plain doubles: the same
// subdivide-until-decided recursion as the certified static checker, but
// with machine-real coefficients instead of enclosures and no exact corner
// fallback. Rounding can flip the sign of a near-zero coefficient, so
// hairline-invalid elements may come back Valid (and vice versa). Pieces
// still undecided at `max_depth` make the whole answer Undecided unless an
// earlier piece already reported Invalid. `t` as above.
BaselineVerdict fp_bezier_check(const ElementSpec& spec, double t,
                                int max_depth = 40);

}  // namespace stepcert
