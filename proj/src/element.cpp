// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/element.hpp"

#include <stdexcept>

namespace stepcert {

ElementClass element_class_from_name(const std::string& name) {
  for (ElementClass c :
       {ElementClass::Triangle, ElementClass::Quadrilateral,
        ElementClass::Tetrahedron, ElementClass::Prism,
        ElementClass::Hexahedron}) {
    if (name == element_class_name(c)) return c;
  }
  throw MalformedInput("unknown element class: '" + name + "'");
}

BlockOrders geometry_orders(ElementClass c, int p) {
  if (p < 1) throw BadOrder("geometric map order must be at least 1");
  BlockOrders shape;
  shape.dim = spatial_dim(c);
  shape.s = simplex_block(c);
  shape.simplex_order = p;
  shape.axis_orders.assign(std::size_t(shape.dim - shape.s), p);
  return shape;
}

BlockOrders determinant_orders(ElementClass c, int p, bool with_time) {
  if (p < 1) throw BadOrder("geometric map order must be at least 1");
  const int n = spatial_dim(c);
  const int s = simplex_block(c);
  BlockOrders shape;
  shape.dim = with_time ? n + 1 : n;
  shape.s = s;
  shape.simplex_order = n * p - s;
  shape.axis_orders.assign(std::size_t(n - s), n * p - 1);
  if (with_time) shape.axis_orders.push_back(n);
  return shape;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * std::size_t(n - k + i) / std::size_t(i);
  }
  return r;
}

std::size_t grid_size(const BlockOrders& shape) {
  std::size_t n = binomial(shape.simplex_order + shape.s, shape.s);
  for (int q : shape.axis_orders) n *= std::size_t(q) + 1;
  return n;
}

std::vector<MultiIndex> enumerate_grid(const BlockOrders& shape) {
  std::vector<MultiIndex> simplex_part;
  MultiIndex idx(std::size_t(shape.s), 0);
  // Odometer over the simplex block, last entry slowest.
  for (;;) {
    int sum = 0;
    for (int v : idx) sum += v;
    if (sum <= shape.simplex_order) simplex_part.push_back(idx);
    int pos = 0;
    while (pos < shape.s) {
      ++idx[std::size_t(pos)];
      int total = 0;
      for (int v : idx) total += v;
      if (total <= shape.simplex_order) break;
      idx[std::size_t(pos)] = 0;
      ++pos;
    }
    if (pos == shape.s) break;
  }

  std::vector<MultiIndex> grid;
  grid.reserve(grid_size(shape));
  const int axes = int(shape.axis_orders.size());
  MultiIndex axis_idx(std::size_t(axes), 0);
  for (;;) {
    for (const MultiIndex& sp : simplex_part) {
      MultiIndex full = sp;
      full.insert(full.end(), axis_idx.begin(), axis_idx.end());
      grid.push_back(std::move(full));
    }
    int pos = 0;
    while (pos < axes) {
      if (++axis_idx[std::size_t(pos)] <= shape.axis_orders[std::size_t(pos)])
        break;
      axis_idx[std::size_t(pos)] = 0;
      ++pos;
    }
    if (pos == axes) break;
  }
  return grid;
}

std::vector<Rational> grid_point(const BlockOrders& shape,
                                 const MultiIndex& idx) {
  if (int(idx.size()) != shape.dim) {
    throw DimensionMismatch("grid_point: multi-index size != dim");
  }
  std::vector<Rational> xi(std::size_t(shape.dim));
  for (int k = 0; k < shape.s; ++k) {
    // an order-0 block is a constant: its single node sits at the origin
    if (shape.simplex_order == 0) {
      xi[std::size_t(k)] = 0;
    } else {
      xi[std::size_t(k)] = Rational(idx[std::size_t(k)], shape.simplex_order);
      xi[std::size_t(k)].canonicalize();
    }
  }
  for (std::size_t a = 0; a < shape.axis_orders.size(); ++a) {
    int q = shape.axis_orders[a];
    if (q == 0) {
      xi[std::size_t(shape.s) + a] = 0;
    } else {
      xi[std::size_t(shape.s) + a] = Rational(idx[std::size_t(shape.s) + a], q);
      xi[std::size_t(shape.s) + a].canonicalize();
    }
  }
  return xi;
}

std::vector<std::vector<Rational>> domain_points(const BlockOrders& shape) {
  std::vector<std::vector<Rational>> pts;
  pts.reserve(grid_size(shape));
  for (const MultiIndex& idx : enumerate_grid(shape)) {
    pts.push_back(grid_point(shape, idx));
  }
  return pts;
}

std::size_t grid_rank(const BlockOrders& shape, const MultiIndex& idx) {
  // Simplex block rank: count tuples preceding idx in canonical order.
  // With the first entry fastest, a tuple (i_1..i_s) is preceded, within the
  // block, by tuples whose tail (i_k..i_s) is smaller in the slowest-first
  // sense; count via the standard lattice formula.
  if (int(idx.size()) != shape.dim) {
    throw DimensionMismatch("grid_rank: multi-index size != dim");
  }
  const int s = shape.s;
  const int m = shape.simplex_order;
  // Number of simplex tuples with given remaining budget and k entries:
  // binom(budget + k, k).
  std::size_t rank = 0;
  int budget = m;
  for (int k = s - 1; k >= 0; --k) {
    // entries slower than position k are fixed; count tuples where entry k
    // is smaller, with positions 0..k free.
    for (int v = 0; v < idx[std::size_t(k)]; ++v) {
      rank += binomial(budget - v + k, k);
    }
    budget -= idx[std::size_t(k)];
  }
  std::size_t simplex_count = binomial(m + s, s);
  std::size_t stride = simplex_count;
  std::size_t flat = rank;
  for (std::size_t a = 0; a < shape.axis_orders.size(); ++a) {
    flat += stride * std::size_t(idx[std::size_t(s) + a]);
    stride *= std::size_t(shape.axis_orders[a]) + 1;
  }
  return flat;
}

std::vector<std::size_t> corner_indices(const BlockOrders& shape,
                                        bool last_axis_at_end) {
  std::vector<std::size_t> out;
  const auto grid = enumerate_grid(shape);
  const int s = shape.s;
  const int m = shape.simplex_order;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const MultiIndex& idx = grid[i];
    int sum = 0, maxed = 0;
    for (int k = 0; k < s; ++k) {
      sum += idx[std::size_t(k)];
      if (idx[std::size_t(k)] == m) ++maxed;
    }
    bool simplex_corner = (sum == 0) || (maxed == 1 && sum == m);
    if (!simplex_corner) continue;
    bool axes_corner = true;
    for (std::size_t a = 0; a < shape.axis_orders.size(); ++a) {
      int v = idx[std::size_t(s) + a];
      if (v != 0 && v != shape.axis_orders[a]) {
        axes_corner = false;
        break;
      }
    }
    if (!axes_corner) continue;
    if (last_axis_at_end && !shape.axis_orders.empty()) {
      if (idx.back() != shape.axis_orders.back()) continue;
    }
    out.push_back(i);
  }
  return out;
}

bool domain_contains(int s, std::span<const Rational> xi) {
  Rational sum = 0;
  for (int k = 0; k < int(xi.size()); ++k) {
    if (xi[std::size_t(k)] < 0) return false;
    if (k < s) {
      sum += xi[std::size_t(k)];
    } else if (xi[std::size_t(k)] > 1) {
      return false;
    }
  }
  return sum <= 1;
}

}  // namespace stepcert
