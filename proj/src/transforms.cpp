// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/transforms.hpp"

namespace stepcert {

std::vector<int> block_sizes(const BlockOrders& shape) {
  std::vector<int> sizes;
  sizes.push_back(int(binomial(shape.simplex_order + shape.s, shape.s)));
  for (int q : shape.axis_orders) sizes.push_back(q + 1);
  return sizes;
}

namespace {

BlockOrders simplex_sub_shape(const BlockOrders& shape) {
  BlockOrders sub;
  sub.dim = shape.s;
  sub.s = shape.s;
  sub.simplex_order = shape.simplex_order;
  return sub;
}

BlockOrders axis_sub_shape(int q) {
  BlockOrders sub;
  sub.dim = 1;
  sub.s = 0;
  sub.simplex_order = 0;
  sub.axis_orders = {q};
  return sub;
}

// M[i][j] = B_j(point_i) over the sub-shape's grid, where point_i is the
// image of node i under `map` (or the node itself if map is null).
RationalMatrix bernstein_collocation(const BlockOrders& sub,
                                     const AffineMap* map) {
  auto grid = enumerate_grid(sub);
  auto nodes = domain_points(sub);
  const int n = int(grid.size());
  RationalMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    std::vector<Rational> pt =
        map ? map->apply(nodes[std::size_t(i)]) : nodes[std::size_t(i)];
    for (int j = 0; j < n; ++j) {
      m.at(i, j) = bernstein_eval(sub, grid[std::size_t(j)], pt);
    }
  }
  return m;
}

bool is_identity(const RationalMatrix& m) {
  if (m.rows != m.cols) return false;
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      if (m.at(i, j) != (i == j ? 1 : 0)) return false;
    }
  }
  return true;
}


// Splits a block-separable affine map on the full grid into the simplex
// piece and one (scale, offset) pair per axis. Throws if the map couples
// distinct blocks (none of the built-in subdivision maps do).
void split_map(const AffineMap& map, const BlockOrders& shape,
               AffineMap& simplex_piece,
               std::vector<std::pair<Rational, Rational>>& axis_pieces) {
  const int s = shape.s;
  const int dim = shape.dim;
  for (int i = 0; i < dim; ++i) {
    for (int k = 0; k < dim; ++k) {
      bool same_block = (i < s && k < s) || i == k;
      if (!same_block && map.A.at(i, k) != 0) {
        throw DimensionMismatch(
            "split_map: subdivision map couples separate blocks");
      }
    }
  }
  simplex_piece.A = RationalMatrix(s, s);
  simplex_piece.b.assign(std::size_t(s), Rational(0));
  for (int i = 0; i < s; ++i) {
    simplex_piece.b[std::size_t(i)] = map.b[std::size_t(i)];
    for (int k = 0; k < s; ++k) simplex_piece.A.at(i, k) = map.A.at(i, k);
  }
  axis_pieces.clear();
  for (int a = s; a < dim; ++a) {
    axis_pieces.emplace_back(map.A.at(a, a), map.b[std::size_t(a)]);
  }
}

FactorSet child_factors(const AffineMap& map, const BlockOrders& shape,
                        const FactorSet& from_lagrange) {
  AffineMap simplex_piece;
  std::vector<std::pair<Rational, Rational>> axis_pieces;
  split_map(map, shape, simplex_piece, axis_pieces);

  FactorSet fs;
  // B <- B per block: (L <- B at mapped nodes) then (B <- L).
  RationalMatrix eval =
      bernstein_collocation(simplex_sub_shape(shape), &simplex_piece);
  fs.rat.push_back(rat_matmul(from_lagrange.rat[0], eval));
  for (std::size_t a = 0; a < axis_pieces.size(); ++a) {
    AffineMap axis_map;
    axis_map.A = RationalMatrix(1, 1);
    axis_map.A.at(0, 0) = axis_pieces[a].first;
    axis_map.b = {axis_pieces[a].second};
    RationalMatrix aeval =
        bernstein_collocation(axis_sub_shape(shape.axis_orders[a]), &axis_map);
    fs.rat.push_back(rat_matmul(from_lagrange.rat[a + 1], aeval));
  }
  rebuild_factor_mirrors(fs);
  return fs;
}

}  // namespace

void rebuild_factor_mirrors(FactorSet& op) {
  op.iv.clear();
  op.identity.clear();
  for (const RationalMatrix& m : op.rat) {
    op.iv.push_back(to_interval_matrix(m));
    op.identity.push_back(is_identity(m));
  }
}

TransformSet build_transform(ElementClass cls, int p, bool dynamic) {
  if (p < 1 || p > 12) {
    throw UnsupportedOrder("build_transform: map order " + std::to_string(p) +
                           " outside [1, 12]");
  }
  TransformSet t;
  t.cls = cls;
  t.order = p;
  t.dynamic = dynamic;
  t.shape = determinant_orders(cls, p, dynamic);

  t.eval_bernstein.rat.push_back(
      bernstein_collocation(simplex_sub_shape(t.shape), nullptr));
  for (int q : t.shape.axis_orders) {
    t.eval_bernstein.rat.push_back(
        bernstein_collocation(axis_sub_shape(q), nullptr));
  }
  rebuild_factor_mirrors(t.eval_bernstein);

  for (const RationalMatrix& m : t.eval_bernstein.rat) {
    t.from_lagrange.rat.push_back(rat_invert(m));
  }
  rebuild_factor_mirrors(t.from_lagrange);

  const std::vector<AffineMap>& maps =
      dynamic ? dynamic_subdivision_maps(cls) : subdivision_maps(cls);
  for (const AffineMap& m : maps) {
    t.child.push_back(child_factors(m, t.shape, t.from_lagrange));
  }
  if (dynamic) {
    for (const AffineMap& m : time_subdivision_maps(t.shape.dim)) {
      t.time_child.push_back(child_factors(m, t.shape, t.from_lagrange));
    }
  }
  return t;
}

void apply_factors(const FactorSet& op, const BlockOrders& shape,
                   std::vector<Interval>& coeffs,
                   std::vector<Interval>& scratch) {
  const auto sizes = block_sizes(shape);
  const std::size_t n = coeffs.size();
  if (n != grid_size(shape) || op.iv.size() != sizes.size()) {
    throw DimensionMismatch("apply_factors: coefficient count or factor "
                            "count does not match the grid");
  }
  std::size_t stride = 1;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const std::size_t nb = std::size_t(sizes[b]);
    if (op.identity[b]) {
      stride *= nb;
      continue;
    }
    const IntervalMatrix& m = op.iv[b];
    if (scratch.size() < nb) scratch.resize(nb);
    const std::size_t span = nb * stride;
    for (std::size_t outer = 0; outer < n; outer += span) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        for (std::size_t k = 0; k < nb; ++k) {
          scratch[k] = coeffs[base + k * stride];
        }
        for (std::size_t i = 0; i < nb; ++i) {
          Interval acc = iv_mul(m.at(int(i), 0), scratch[0]);
          for (std::size_t k = 1; k < nb; ++k) {
            acc = iv_add(acc, iv_mul(m.at(int(i), int(k)), scratch[k]));
          }
          coeffs[base + i * stride] = acc;
        }
      }
    }
    stride *= nb;
  }
}

void apply_factors_exact(const FactorSet& op, const BlockOrders& shape,
                         std::vector<Rational>& coeffs) {
  const auto sizes = block_sizes(shape);
  const std::size_t n = coeffs.size();
  if (n != grid_size(shape) || op.rat.size() != sizes.size()) {
    throw DimensionMismatch("apply_factors_exact: coefficient count or "
                            "factor count does not match the grid");
  }
  std::vector<Rational> scratch;
  std::size_t stride = 1;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const std::size_t nb = std::size_t(sizes[b]);
    if (op.identity[b]) {
      stride *= nb;
      continue;
    }
    const RationalMatrix& m = op.rat[b];
    scratch.assign(nb, Rational(0));
    const std::size_t span = nb * stride;
    for (std::size_t outer = 0; outer < n; outer += span) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        for (std::size_t k = 0; k < nb; ++k) {
          scratch[k] = coeffs[base + k * stride];
        }
        for (std::size_t i = 0; i < nb; ++i) {
          Rational acc = 0;
          for (std::size_t k = 0; k < nb; ++k) {
            acc += m.at(int(i), int(k)) * scratch[k];
          }
          coeffs[base + i * stride] = acc;
        }
      }
    }
    stride *= nb;
  }
}

RationalMatrix dense_rational(const FactorSet& op, const BlockOrders& shape) {
  const auto sizes = block_sizes(shape);
  const std::size_t n = grid_size(shape);
  RationalMatrix m{int(n), int(n)};
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) {
      Rational v = 1;
      std::size_t r = row, c = col;
      for (std::size_t b = 0; b < sizes.size() && v != 0; ++b) {
        const std::size_t nb = std::size_t(sizes[b]);
        v *= op.rat[b].at(int(r % nb), int(c % nb));
        r /= nb;
        c /= nb;
      }
      m.at(int(row), int(col)) = v;
    }
  }
  return m;
}

}  // namespace stepcert
