// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Closed machine-real intervals with outward rounding.
//
// Design notes:
//  - An Interval [lo, hi] asserts that the exact real value it tracks lies
//    inside the closed interval. Every operation preserves that containment
//    unconditionally (soundness); endpoints are additionally the tightest
//    representable ones for +, -, *, so widths never grow faster than one
//    ulp per operation.
//  - Directed rounding is obtained without touching the FPU rounding mode.
//    Each endpoint is computed in round-to-nearest together with its exact
//    residual via an error-free transform (twoSum for sums, an fma-based
//    twoProd for products); the sign of the residual tells whether to step
//    the endpoint one ulp outward. This keeps the ops inlineable and avoids
//    the pipeline flushes of fesetround.
//  - The residual of twoProd is not representable when the product falls
//    into (or near) the subnormal range, so products with magnitude below
//    2^-960 are widened by one ulp unconditionally. Sums need no such
//    guard: twoSum is exact whenever the sum itself does not overflow.
//  - Lower endpoints may be -inf and upper endpoints +inf (unbounded
//    results after overflow); NaN endpoints never occur. Exact inputs are
//    injected via iv_from_exact, which rejects non-finite values.
//
// Correctness of this scheme requires round-to-nearest mode and a compiler
// that does not contract a*b + c into fma(a, b, c) (build with
// -ffp-contract=off). check_rounding_environment() verifies the former at
// runtime and is called by the public entry points of the library.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "stepcert/errors.hpp"

namespace stepcert {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDblMax = std::numeric_limits<double>::max();
// Products smaller than this may have an unrepresentable twoProd residual.
inline constexpr double kTinyProduct = 0x1p-960;

// One ulp toward +inf / -inf for finite x, via the ordered integer encoding
// of IEEE doubles. Saturates at +/-inf from +/-DBL_MAX, which is exactly the
// outward direction we want.
inline double next_up(double x) {
  if (x == 0.0) return 0x0.0000000000001p-1022;
  std::uint64_t u = std::bit_cast<std::uint64_t>(x);
  u = (u >> 63) ? u - 1 : u + 1;
  return std::bit_cast<double>(u);
}

inline double next_down(double x) {
  if (x == 0.0) return -0x0.0000000000001p-1022;
  std::uint64_t u = std::bit_cast<std::uint64_t>(x);
  u = (u >> 63) ? u + 1 : u - 1;
  return std::bit_cast<double>(u);
}

// a + b rounded toward -inf. Valid lower endpoints are finite or -inf, so a
// +inf sum can only come from overflow of finite operands; the best finite
// lower bound for such a value is DBL_MAX.
inline double sum_down(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s > 0 ? kDblMax : -kInf;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return err < 0 ? next_down(s) : s;
}

// a + b rounded toward +inf (for upper endpoints: finite or +inf).
inline double sum_up(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) return s < 0 ? -kDblMax : kInf;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return err > 0 ? next_up(s) : s;
}

// Correctly rounded directed products for the rare case where a * b lands
// in or near the subnormal range and the fma residual is unrepresentable.
// Defined out of line (exact integer arithmetic); never hot.
double tiny_prod_down(double a, double b);
double tiny_prod_up(double a, double b);

// a * b rounded toward -inf, usable with infinite endpoint operands.
// 0 * inf arises when a bounded-at-zero interval meets an unbounded one;
// the exact set product contributed by the zero endpoint is {0}.
inline double prod_down(double a, double b) {
  double p = a * b;
  if (std::isnan(p)) return 0.0;
  if (std::isinf(p)) {
    if (std::isinf(a) || std::isinf(b)) return p;  // exact infinite candidate
    return p > 0 ? kDblMax : p;                    // overflow of finite inputs
  }
  if (p > -kTinyProduct && p < kTinyProduct) {
    if (a == 0.0 || b == 0.0) return 0.0;  // exact zero, no widening needed
    return tiny_prod_down(a, b);
  }
  double err = std::fma(a, b, -p);
  return err < 0 ? next_down(p) : p;
}

inline double prod_up(double a, double b) {
  double p = a * b;
  if (std::isnan(p)) return 0.0;
  if (std::isinf(p)) {
    if (std::isinf(a) || std::isinf(b)) return p;
    return p < 0 ? -kDblMax : p;
  }
  if (p > -kTinyProduct && p < kTinyProduct) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return tiny_prod_up(a, b);
  }
  double err = std::fma(a, b, -p);
  return err > 0 ? next_up(p) : p;
}

}  // namespace detail

// Throws NonFiniteInput unless the FPU is in round-to-nearest mode. The
// result is cached per thread; call sites in hot paths pay one branch.
void check_rounding_environment();

// Degenerate interval holding one exact machine real.
inline Interval iv_from_exact(double x) {
  if (!std::isfinite(x)) {
    throw NonFiniteInput("iv_from_exact: value is not a finite machine real");
  }
  return {x, x};
}

inline Interval iv_add(Interval a, Interval b) {
  return {detail::sum_down(a.lo, b.lo), detail::sum_up(a.hi, b.hi)};
}

inline Interval iv_neg(Interval a) { return {-a.hi, -a.lo}; }

inline Interval iv_sub(Interval a, Interval b) { return iv_add(a, iv_neg(b)); }

inline Interval iv_mul(Interval a, Interval b) {
  using detail::prod_down;
  using detail::prod_up;
  double l = prod_down(a.lo, b.lo);
  double c = prod_down(a.lo, b.hi);
  if (c < l) l = c;
  c = prod_down(a.hi, b.lo);
  if (c < l) l = c;
  c = prod_down(a.hi, b.hi);
  if (c < l) l = c;
  double h = prod_up(a.lo, b.lo);
  c = prod_up(a.lo, b.hi);
  if (c > h) h = c;
  c = prod_up(a.hi, b.lo);
  if (c > h) h = c;
  c = prod_up(a.hi, b.hi);
  if (c > h) h = c;
  return {l, h};
}

// Elementwise min / max: exact, no rounding involved.
inline Interval iv_min(Interval a, Interval b) {
  return {a.lo < b.lo ? a.lo : b.lo, a.hi < b.hi ? a.hi : b.hi};
}

inline Interval iv_max(Interval a, Interval b) {
  return {a.lo > b.lo ? a.lo : b.lo, a.hi > b.hi ? a.hi : b.hi};
}

// Certain order: every point of a is strictly greater than every point of b.
inline bool iv_cmp_gt(Interval a, Interval b) { return a.lo > b.hi; }

// Exact halving, widened outward only when an endpoint is subnormal and its
// low bit would be shifted out. Doubling the half is exact, so comparing it
// against the original tells which side round-to-nearest landed on.
inline Interval iv_halve(Interval a) {
  double lo = 0.5 * a.lo;
  double hi = 0.5 * a.hi;
  if (lo + lo > a.lo) lo = detail::next_down(lo);
  if (hi + hi < a.hi) hi = detail::next_up(hi);
  return {lo, hi};
}

inline Interval iv_hull(Interval a, Interval b) {
  return {a.lo < b.lo ? a.lo : b.lo, a.hi > b.hi ? a.hi : b.hi};
}

inline bool iv_contains(Interval a, double x) { return a.lo <= x && x <= a.hi; }

inline double iv_width(Interval a) { return detail::sum_up(a.hi, -a.lo); }

// Lossless text form of one endpoint: C99 hexadecimal-significand literal,
// or "inf" / "-inf" for unbounded endpoints.
std::string double_to_hex(double x);

// Inverse of double_to_hex. Throws MalformedInput if the string is not a
// full, valid literal.
double double_from_hex(const std::string& text);

std::string iv_to_string(Interval a);           // "[lo_hex, hi_hex]"
Interval iv_from_string(const std::string& s);  // throws MalformedInput

}  // namespace stepcert
