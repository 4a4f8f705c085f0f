// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/basis.hpp"

namespace stepcert {

namespace {

// a / b in canonical form. GMP requires canonical operands (positive
// denominator, lowest terms) before any arithmetic touches the value.
Rational make_fraction(long a, long b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

// Silvester factor f(z) = prod_{k=0}^{c-1} (m z - k) / (c - k) and its
// derivative. Empty product (c == 0) is 1 with zero derivative.
void silvester_factor(int c, int m, const Rational& z, Rational& val,
                      Rational& dval) {
  val = 1;
  dval = 0;
  for (int k = 0; k < c; ++k) {
    Rational term = make_fraction(m, c - k);
    Rational lin = term * z - make_fraction(k, c - k);
    // d/dz (val * lin) = dval * lin + val * term
    dval = dval * lin + val * term;
    val *= lin;
  }
}

// Univariate Lagrange factor on nodes {0, 1/q, ..., 1} for node j, plus its
// derivative: l_j(z) = prod_{k != j} (q z - k) / (j - k).
void univariate_factor(int j, int q, const Rational& z, Rational& val,
                       Rational& dval) {
  val = 1;
  dval = 0;
  for (int k = 0; k <= q; ++k) {
    if (k == j) continue;
    Rational slope = make_fraction(q, j - k);
    Rational lin = slope * z - make_fraction(k, j - k);
    dval = dval * lin + val * slope;
    val *= lin;
  }
}

int simplex_index_sum(const BlockOrders& shape, const MultiIndex& i) {
  int sum = 0;
  for (int k = 0; k < shape.s; ++k) sum += i[std::size_t(k)];
  return sum;
}

void check_args(const BlockOrders& shape, const MultiIndex& i,
                std::span<const Rational> xi) {
  if (int(i.size()) != shape.dim || int(xi.size()) != shape.dim) {
    throw DimensionMismatch("basis evaluation: index/point dimension");
  }
  int sum = simplex_index_sum(shape, i);
  if (sum > shape.simplex_order) {
    throw BadOrder("basis evaluation: simplex indices exceed block order");
  }
  for (std::size_t a = 0; a < shape.axis_orders.size(); ++a) {
    int v = i[std::size_t(shape.s) + a];
    if (v < 0 || v > shape.axis_orders[a]) {
      throw BadOrder("basis evaluation: axis index out of range");
    }
  }
}

}  // namespace

Rational lagrange_eval(const BlockOrders& shape, const MultiIndex& i,
                       std::span<const Rational> xi) {
  check_args(shape, i, xi);
  const int m = shape.simplex_order;
  Rational value = 1, d_unused, f;
  // slack factor: index m - sum(i) at coordinate 1 - sum(xi)
  Rational slack_xi = 1;
  for (int k = 0; k < shape.s; ++k) slack_xi -= xi[std::size_t(k)];
  silvester_factor(m - simplex_index_sum(shape, i), m, slack_xi, f, d_unused);
  value *= f;
  for (int k = 0; k < shape.s; ++k) {
    silvester_factor(i[std::size_t(k)], m, xi[std::size_t(k)], f, d_unused);
    value *= f;
  }
  for (std::size_t a = 0; a < shape.axis_orders.size(); ++a) {
    univariate_factor(i[std::size_t(shape.s) + a], shape.axis_orders[a],
                      xi[std::size_t(shape.s) + a], f, d_unused);
    value *= f;
  }
  return value;
}

Rational bernstein_eval(const BlockOrders& shape, const MultiIndex& i,
                        std::span<const Rational> xi) {
  check_args(shape, i, xi);
  const int m = shape.simplex_order;
  // multinomial coefficient m! / (i_0! i_1! ... i_s!)
  mpz_class coeff;
  mpz_fac_ui(coeff.get_mpz_t(), unsigned(m));
  int slack = m - simplex_index_sum(shape, i);
  mpz_class fac;
  mpz_fac_ui(fac.get_mpz_t(), unsigned(slack));
  mpz_class denom = fac;
  for (int k = 0; k < shape.s; ++k) {
    mpz_fac_ui(fac.get_mpz_t(), unsigned(i[std::size_t(k)]));
    denom *= fac;
  }
  Rational value(coeff, denom);
  value.canonicalize();

  Rational slack_xi = 1;
  for (int k = 0; k < shape.s; ++k) slack_xi -= xi[std::size_t(k)];
  for (int e = 0; e < slack; ++e) value *= slack_xi;
  for (int k = 0; k < shape.s; ++k) {
    for (int e = 0; e < i[std::size_t(k)]; ++e) value *= xi[std::size_t(k)];
  }
  for (std::size_t a = 0; a < shape.axis_orders.size(); ++a) {
    const int q = shape.axis_orders[a];
    const int j = i[std::size_t(shape.s) + a];
    mpz_class binom;
    mpz_bin_uiui(binom.get_mpz_t(), unsigned(q), unsigned(j));
    value *= Rational(binom);
    const Rational& z = xi[std::size_t(shape.s) + a];
    Rational one_minus = 1 - z;
    for (int e = 0; e < j; ++e) value *= z;
    for (int e = 0; e < q - j; ++e) value *= one_minus;
  }
  return value;
}

std::vector<Rational> lagrange_grad_eval(const BlockOrders& shape,
                                         const MultiIndex& i,
                                         std::span<const Rational> xi) {
  check_args(shape, i, xi);
  const int m = shape.simplex_order;
  const int dim = shape.dim;
  const int s = shape.s;
  // Evaluate every factor and its derivative once; factor 0 is the slack.
  std::vector<Rational> fval(std::size_t(dim) + 1), fder(std::size_t(dim) + 1);
  Rational slack_xi = 1;
  for (int k = 0; k < s; ++k) slack_xi -= xi[std::size_t(k)];
  silvester_factor(m - simplex_index_sum(shape, i), m, slack_xi, fval[0],
                   fder[0]);
  for (int k = 0; k < s; ++k) {
    silvester_factor(i[std::size_t(k)], m, xi[std::size_t(k)],
                     fval[std::size_t(k) + 1], fder[std::size_t(k) + 1]);
  }
  for (std::size_t a = 0; a < shape.axis_orders.size(); ++a) {
    univariate_factor(i[std::size_t(s) + a], shape.axis_orders[a],
                      xi[std::size_t(s) + a], fval[std::size_t(s) + a + 1],
                      fder[std::size_t(s) + a + 1]);
  }
  // Products of all factors except one, assembled via prefix/suffix products
  // to stay O(dim) in rational multiplies.
  const std::size_t nf = fval.size();
  std::vector<Rational> prefix(nf + 1), suffix(nf + 1);
  prefix[0] = 1;
  for (std::size_t k = 0; k < nf; ++k) prefix[k + 1] = prefix[k] * fval[k];
  suffix[nf] = 1;
  for (std::size_t k = nf; k-- > 0;) suffix[k] = suffix[k + 1] * fval[k];
  auto all_but = [&](std::size_t k) { return prefix[k] * suffix[k + 1]; };

  std::vector<Rational> grad(std::size_t(dim), Rational(0));
  for (int d = 0; d < dim; ++d) {
    // own factor's derivative
    grad[std::size_t(d)] =
        fder[std::size_t(d) + 1] * all_but(std::size_t(d) + 1);
    // slack factor: d(slack_xi)/d(xi_d) = -1 inside the simplex block
    if (d < s) grad[std::size_t(d)] -= fder[0] * all_but(0);
  }
  return grad;
}

}  // namespace stepcert
