// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Exact rational arithmetic and small dense matrices over the rationals.
//
// Rational is GMP's mpq_class: always in lowest terms with a positive
// denominator once canonicalize() has run (the helpers here take care of
// that). Every machine real converts to a Rational exactly, which is what
// lets the interval layer be checked against an exact oracle and lets
// witnesses be re-verified with no rounding at all.

#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "stepcert/errors.hpp"
#include "stepcert/interval.hpp"

namespace stepcert {

using Rational = mpq_class;

// Exact conversion; throws NonFiniteInput for NaN or +/-inf.
Rational rational_from_double(double x);

// Parses "p/q", "p", or a decimal literal such as "-0.125" (which is exact:
// decimal fractions are rationals). Throws MalformedInput on anything else
// or on a zero denominator.
Rational rational_from_string(const std::string& text);

// Canonical text form "p/q" (or "p" when q == 1), usable as input above.
std::string rational_to_string(const Rational& q);

// Tightest machine interval containing q: a point interval when q is a
// machine real, otherwise the two adjacent machine reals around q. Values
// beyond +/-DBL_MAX get an infinite outer endpoint.
Interval rat_to_interval(const Rational& q);

inline int rat_sign(const Rational& q) { return sgn(q); }

// Dense row-major rational matrix. Small (transform-sized), so no attempt
// at sparsity; exactness is the point.
struct RationalMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Rational> a;

  RationalMatrix() = default;
  RationalMatrix(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c)) {}

  Rational& at(int r, int c) { return a[size_t(r) * cols + c]; }
  const Rational& at(int r, int c) const { return a[size_t(r) * cols + c]; }

  static RationalMatrix identity(int n);
};

bool rat_mat_equal(const RationalMatrix& x, const RationalMatrix& y);

// Exact product; throws DimensionMismatch if inner sizes differ.
RationalMatrix rat_matmul(const RationalMatrix& x, const RationalMatrix& y);

// Exact inverse by Gauss-Jordan elimination with the first nonzero pivot in
// each column (no magnitude pivoting: exact arithmetic needs none, and a
// deterministic pivot rule keeps rebuilds bit-identical). Throws
// SingularMatrix when no pivot exists, DimensionMismatch if not square.
RationalMatrix rat_invert(const RationalMatrix& x);

// Matrix of tightest enclosing intervals.
struct IntervalMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Interval> a;

  IntervalMatrix() = default;
  IntervalMatrix(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c)) {}

  Interval& at(int r, int c) { return a[size_t(r) * cols + c]; }
  const Interval& at(int r, int c) const { return a[size_t(r) * cols + c]; }
};

IntervalMatrix to_interval_matrix(const RationalMatrix& x);

}  // namespace stepcert
