// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.
//
// Coefficient transforms between the Lagrange and Bernstein bases, and the
// restriction of Bernstein coefficients to subdivision children.
//
// Every transform here is a Kronecker product of small per-block factors,
// because the bases factor per coordinate block and every subdivision map
// acts block-separably (the tetrahedron children mix coordinates, but only
// inside the simplex block; box axes and time are always mapped axis by
// axis). Storing the factors instead of the assembled matrix keeps the
// per-element work near-linear in the coefficient count: applying a factor
// of size n_b to all coefficients costs N * n_b interval operations instead
// of the N^2 of a dense multiply.
//
// Factors are built exactly (rational) and mirrored once into tightest
// enclosing interval matrices. Applying the interval mirrors encloses the
// exact transform, so soundness of downstream bounds is preserved; the loop
// order of the application is fixed, so results are bit-reproducible.

#pragma once

#include <vector>

#include "stepcert/basis.hpp"
#include "stepcert/element.hpp"
#include "stepcert/subdivision.hpp"

namespace stepcert {

// Sizes of the Kronecker blocks of a grid, fastest block first:
// [binom(m+s, s), axis_0 + 1, axis_1 + 1, ...].
std::vector<int> block_sizes(const BlockOrders& shape);

// One factored linear operator: a rational factor per block plus its
// interval mirror, in block order (simplex factor first). Identity factors
// are flagged so applications can skip them (time-only subdivision leaves
// all spatial blocks untouched).
struct FactorSet {
  std::vector<RationalMatrix> rat;
  std::vector<IntervalMatrix> iv;
  std::vector<bool> identity;
};

// All transforms needed to process one (class, order, dynamic) combination.
struct TransformSet {
  ElementClass cls = ElementClass::Triangle;
  int order = 0;
  bool dynamic = false;
  BlockOrders shape;  // determinant grid the transforms act on

  FactorSet eval_bernstein;  // L <- B: Bernstein basis evaluated at nodes
  FactorSet from_lagrange;   // B <- L: exact inverse of the above
  // One B <- B restriction per subdivision child, in canonical child order
  // (4 / 8 static, 8 / 16 dynamic).
  std::vector<FactorSet> child;
  // Dynamic only: B <- B restriction to the two time halves.
  std::vector<FactorSet> time_child;
};

// Builds the factor set exactly from the basis definitions; p is the order
// of the geometric map. Throws UnsupportedOrder for p outside [1, 12] (the
// grids grow combinatorially and nothing in the pipeline needs more).
TransformSet build_transform(ElementClass cls, int p, bool dynamic);

// Applies the interval mirror of a factored operator in place. scratch is
// resized as needed; passing the same buffers repeatedly avoids churn.
void apply_factors(const FactorSet& op, const BlockOrders& shape,
                   std::vector<Interval>& coeffs,
                   std::vector<Interval>& scratch);

// Applies the exact rational factors (verification and oracles; not hot).
void apply_factors_exact(const FactorSet& op, const BlockOrders& shape,
                         std::vector<Rational>& coeffs);

// Materializes the full operator (tests and small shapes only).
RationalMatrix dense_rational(const FactorSet& op, const BlockOrders& shape);

// Recomputes the interval mirrors and identity flags from the rational
// factors (used after deserializing; only the rationals are persisted).
void rebuild_factor_mirrors(FactorSet& op);

}  // namespace stepcert
