// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Shared helpers for the unit suites: deterministic random generators for
// machine reals, intervals, and small rationals. All seeds are fixed so
// failures reproduce bit-identically.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "stepcert/interval.hpp"
#include "stepcert/rational.hpp"

namespace stepcert::testing {

// Draws from a mix of regimes: exact small values, uniform [-1, 1], widely
// scaled magnitudes, subnormals, and raw bit patterns. Never NaN/inf.
inline double random_double(std::mt19937_64& rng) {
  switch (rng() % 16) {
    case 0:
      return 0.0;
    case 1:
      return -0.0;
    case 2:
      return double(int64_t(rng() % 41)) - 20.0;
    case 3:  // subnormal
      return std::bit_cast<double>(rng() % (uint64_t(1) << 52));
    case 4:  // near the overflow threshold
      return std::ldexp(1.0 + double(rng() % 1024) / 1024.0,
                        1000 + int(rng() % 24));
    case 5:
      return std::ldexp(1.0, int(rng() % 64) - 32);
    default: {
      if (rng() % 4 == 0) {
        // full-range bit pattern, rejecting non-finite draws
        for (;;) {
          double v = std::bit_cast<double>(rng());
          if (std::isfinite(v)) return v;
        }
      }
      double u = double(rng() >> 11) * 0x1p-53;  // [0, 1)
      double v = (2.0 * u - 1.0);
      int e = int(rng() % 40) - 20;
      return std::ldexp(v, e);
    }
  }
}

inline Interval random_interval(std::mt19937_64& rng) {
  double a = random_double(rng);
  if (rng() % 5 == 0) return {a, a};  // point intervals matter too
  double b = random_double(rng);
  return {std::min(a, b), std::max(a, b)};
}

// Small rational with numerator in [-limit, limit] and denominator in
// [1, limit].
inline Rational random_small_rational(std::mt19937_64& rng, int limit = 9) {
  long num = long(rng() % (2 * limit + 1)) - limit;
  long den = long(rng() % limit) + 1;
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace stepcert::testing
