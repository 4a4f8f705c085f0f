// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Exact evaluation of the two polynomial bases used on the reference grids.
//
// Both bases factor per coordinate block (simplex block, box axes), matching
// the product structure of the domains:
//  - Lagrange: equispaced interpolation basis. On the simplex block the
//    Silvester form is used, with the slack coordinate xi_0 = 1 - sum(xi)
//    and slack index i_0 = m - sum(i) treated like any other factor.
//  - Bernstein: multinomial form on the simplex block, binomial form on
//    each axis. Nonnegative on the domain and a partition of unity, which
//    is what makes coefficient minima meaningful bounds.
//
// All evaluation is exact rational; machine-interval variants are obtained
// downstream by converting exact transform matrices once.

#pragma once

#include <span>

#include "stepcert/element.hpp"

namespace stepcert {

enum class BasisKind : std::uint8_t { Lagrange, Bernstein };

// Value of the Lagrange function with node multi-index `i` at point xi.
Rational lagrange_eval(const BlockOrders& shape, const MultiIndex& i,
                       std::span<const Rational> xi);

// Value of the Bernstein function with multi-index `i` at point xi.
Rational bernstein_eval(const BlockOrders& shape, const MultiIndex& i,
                        std::span<const Rational> xi);

// Gradient of the Lagrange function with respect to all dim coordinates.
std::vector<Rational> lagrange_grad_eval(const BlockOrders& shape,
                                         const MultiIndex& i,
                                         std::span<const Rational> xi);

}  // namespace stepcert
