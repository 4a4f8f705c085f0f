// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/rational.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

namespace stepcert {

namespace {

bool is_integer_literal(const std::string& s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

const Rational& dbl_max_as_rational() {
  static const Rational q = rational_from_double(detail::kDblMax);
  return q;
}

}  // namespace

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) {
    throw NonFiniteInput(
        "rational_from_double: value is not a finite machine real");
  }
  return Rational(x);  // mpq from double is exact
}

Rational rational_from_string(const std::string& text) {
  auto fail = [&text]() -> Rational {
    throw MalformedInput("not a rational literal: '" + text + "'");
  };
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::string num = text.substr(0, slash);
    std::string den = text.substr(slash + 1);
    if (!is_integer_literal(num) || !all_digits(den)) return fail();
    Rational q(mpz_class(num, 10), mpz_class(den, 10));
    if (q.get_den() == 0) return fail();
    q.canonicalize();
    return q;
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) {
    if (!is_integer_literal(text)) return fail();
    return Rational(mpz_class(text, 10));
  }
  std::string head = text.substr(0, dot);
  std::string frac = text.substr(dot + 1);
  bool negative = false;
  if (!head.empty() && (head[0] == '+' || head[0] == '-')) {
    negative = head[0] == '-';
    head.erase(0, 1);
  }
  if (!all_digits(head) || !all_digits(frac)) return fail();
  mpz_class den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  mpz_class numerator = mpz_class(head, 10) * den + mpz_class(frac, 10);
  Rational q(numerator, den);
  q.canonicalize();
  if (negative) q = -q;
  return q;
}

std::string rational_to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();  // callers may hold values built from raw num/den pairs
  return c.get_str();
}

Interval rat_to_interval(const Rational& q) {
  int s = sgn(q);
  if (s == 0) return {0.0, 0.0};
  if (q > dbl_max_as_rational()) return {detail::kDblMax, detail::kInf};
  if (q < -dbl_max_as_rational()) return {-detail::kInf, -detail::kDblMax};
  // In range: mpq_get_d rounds toward zero, so d sits between q and zero,
  // at most one ulp away from q.
  double d = mpq_get_d(q.get_mpq_t());
  if (Rational(d) == q) return {d, d};
  if (s > 0) return {d, detail::next_up(d)};
  return {detail::next_down(d), d};
}

RationalMatrix RationalMatrix::identity(int n) {
  RationalMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

bool rat_mat_equal(const RationalMatrix& x, const RationalMatrix& y) {
  if (x.rows != y.rows || x.cols != y.cols) return false;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    if (x.a[i] != y.a[i]) return false;
  }
  return true;
}

RationalMatrix rat_matmul(const RationalMatrix& x, const RationalMatrix& y) {
  if (x.cols != y.rows) {
    throw DimensionMismatch("rat_matmul: inner dimensions differ");
  }
  RationalMatrix r(x.rows, y.cols);
  Rational acc;
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < y.cols; ++j) {
      acc = 0;
      for (int k = 0; k < x.cols; ++k) {
        acc += x.at(i, k) * y.at(k, j);
      }
      r.at(i, j) = acc;
    }
  }
  return r;
}

RationalMatrix rat_invert(const RationalMatrix& x) {
  if (x.rows != x.cols) {
    throw DimensionMismatch("rat_invert: matrix is not square");
  }
  const int n = x.rows;
  RationalMatrix work = x;
  RationalMatrix inv = RationalMatrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int row = col; row < n; ++row) {
      if (work.at(row, col) != 0) {
        pivot = row;
        break;
      }
    }
    if (pivot < 0) {
      throw SingularMatrix("rat_invert: no nonzero pivot in column " +
                           std::to_string(col));
    }
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        swap(work.at(pivot, j), work.at(col, j));
        swap(inv.at(pivot, j), inv.at(col, j));
      }
    }
    Rational scale = 1 / work.at(col, col);
    for (int j = 0; j < n; ++j) {
      work.at(col, j) *= scale;
      inv.at(col, j) *= scale;
    }
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      Rational factor = work.at(row, col);
      if (factor == 0) continue;
      for (int j = 0; j < n; ++j) {
        work.at(row, j) -= factor * work.at(col, j);
        inv.at(row, j) -= factor * inv.at(col, j);
      }
    }
  }
  return inv;
}

IntervalMatrix to_interval_matrix(const RationalMatrix& x) {
  IntervalMatrix m(x.rows, x.cols);
  for (std::size_t i = 0; i < x.a.size(); ++i) m.a[i] = rat_to_interval(x.a[i]);
  return m;
}

}  // namespace stepcert
