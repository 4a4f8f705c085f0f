// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/interval.hpp"

#include <cfenv>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace stepcert {

namespace detail {

namespace {

// Exact product of two finite nonzero doubles as (sign, 106-bit magnitude,
// power-of-two exponent).
struct ExactProduct {
  bool negative;
  unsigned __int128 mag;
  int exp;  // value = sign * mag * 2^exp
};

ExactProduct decompose_product(double a, double b) {
  int ea = 0, eb = 0;
  double fa = std::frexp(a, &ea);
  double fb = std::frexp(b, &eb);
  auto ia = std::int64_t(std::ldexp(fa, 53));  // exact: |fa| in [0.5, 1)
  auto ib = std::int64_t(std::ldexp(fb, 53));
  ExactProduct r;
  r.negative = (ia < 0) != (ib < 0);
  r.mag = (unsigned __int128)(ia < 0 ? -ia : ia) *
          (unsigned __int128)(ib < 0 ? -ib : ib);
  r.exp = ea + eb - 106;
  return r;
}

int bit_length(unsigned __int128 m) {
  auto hi = std::uint64_t(m >> 64);
  if (hi != 0) return 128 - __builtin_clzll(hi);
  auto lo = std::uint64_t(m);
  return lo == 0 ? 0 : 64 - __builtin_clzll(lo);
}

// Round the positive value mag * 2^exp toward zero (floor) and away from
// zero (ceil) onto the double grid. Only used for magnitudes below 2^-960,
// so overflow cannot occur; underflow lands on 0 / the smallest subnormal.
void directed_round_magnitude(unsigned __int128 mag, int exp, double& down,
                              double& up) {
  const int len = bit_length(mag);
  const int value_exp = exp + len - 1;  // value in [2^value_exp, 2^(value_exp+1))
  if (value_exp < -1074) {
    down = 0.0;
    up = 0x0.0000000000001p-1022;
    return;
  }
  int precision = 53;
  if (value_exp < -1022) precision = 53 - (-1022 - value_exp);
  const int shift = len - precision;
  if (shift <= 0) {  // exactly representable
    down = std::ldexp(double(std::uint64_t(mag)), exp);
    up = down;
    return;
  }
  unsigned __int128 q = mag >> shift;
  bool inexact = (q << shift) != mag;
  down = std::ldexp(double(std::uint64_t(q)), exp + shift);
  up = inexact ? std::ldexp(double(std::uint64_t(q) + 1), exp + shift) : down;
}

}  // namespace

double tiny_prod_down(double a, double b) {
  ExactProduct p = decompose_product(a, b);
  double down = 0.0, up = 0.0;
  directed_round_magnitude(p.mag, p.exp, down, up);
  return p.negative ? -up : down;
}

double tiny_prod_up(double a, double b) {
  ExactProduct p = decompose_product(a, b);
  double down = 0.0, up = 0.0;
  directed_round_magnitude(p.mag, p.exp, down, up);
  return p.negative ? -down : up;
}

}  // namespace detail

void check_rounding_environment() {
  thread_local bool checked = false;
  if (checked) return;
  if (std::fegetround() != FE_TONEAREST) {
    throw NonFiniteInput(
        "floating-point environment is not round-to-nearest; "
        "interval endpoints would be unsound");
  }
  checked = true;
}

std::string double_to_hex(double x) {
  if (std::isnan(x)) {
    throw NonFiniteInput("double_to_hex: NaN has no interval meaning");
  }
  if (x == detail::kInf) return "inf";
  if (x == -detail::kInf) return "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double double_from_hex(const std::string& text) {
  if (text == "inf") return detail::kInf;
  if (text == "-inf") return -detail::kInf;
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end != begin + text.size() || text.empty()) {
    throw MalformedInput("not a machine-real literal: '" + text + "'");
  }
  if (std::isnan(v)) {
    throw MalformedInput("NaN endpoint rejected: '" + text + "'");
  }
  return v;
}

std::string iv_to_string(Interval a) {
  return "[" + double_to_hex(a.lo) + ", " + double_to_hex(a.hi) + "]";
}

Interval iv_from_string(const std::string& s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw MalformedInput("interval literal must look like [lo, hi]: '" + s +
                         "'");
  }
  std::string body = s.substr(1, s.size() - 2);
  auto comma = body.find(',');
  if (comma == std::string::npos) {
    throw MalformedInput("interval literal missing comma: '" + s + "'");
  }
  auto trim = [](std::string t) {
    auto b = t.find_first_not_of(" \t");
    auto e = t.find_last_not_of(" \t");
    if (b == std::string::npos) return std::string();
    return t.substr(b, e - b + 1);
  };
  Interval r{double_from_hex(trim(body.substr(0, comma))),
             double_from_hex(trim(body.substr(comma + 1)))};
  if (!(r.lo <= r.hi)) {
    throw MalformedInput("interval endpoints out of order: '" + s + "'");
  }
  return r;
}

}  // namespace stepcert
