// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/subdivision.hpp"

namespace stepcert {

std::vector<Rational> AffineMap::apply(std::span<const Rational> xi) const {
  if (int(xi.size()) != A.cols) {
    throw DimensionMismatch("AffineMap::apply: point dimension mismatch");
  }
  std::vector<Rational> out(b);
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      out[std::size_t(i)] += A.at(i, k) * xi[std::size_t(k)];
    }
  }
  return out;
}

AffineMap AffineMap::compose(const AffineMap& other) const {
  AffineMap r;
  r.A = rat_matmul(A, other.A);
  r.b = apply(other.b);
  return r;
}

AffineMap AffineMap::identity(int dim) {
  AffineMap m;
  m.A = RationalMatrix::identity(dim);
  m.b.assign(std::size_t(dim), Rational(0));
  return m;
}

Rational affine_det(const AffineMap& map) {
  RationalMatrix w = map.A;
  if (w.rows != w.cols) {
    throw DimensionMismatch("affine_det: linear part is not square");
  }
  const int n = w.rows;
  Rational det = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int row = col; row < n; ++row) {
      if (w.at(row, col) != 0) {
        pivot = row;
        break;
      }
    }
    if (pivot < 0) return Rational(0);
    if (pivot != col) {
      for (int j = col; j < n; ++j) swap(w.at(pivot, j), w.at(col, j));
      det = -det;
    }
    det *= w.at(col, col);
    Rational inv_pivot = 1 / w.at(col, col);
    for (int row = col + 1; row < n; ++row) {
      if (w.at(row, col) == 0) continue;
      Rational f = w.at(row, col) * inv_pivot;
      for (int j = col; j < n; ++j) w.at(row, j) -= f * w.at(col, j);
    }
  }
  return det;
}

namespace {

// Builds one map row set from integer coefficients: output coordinate i is
// (c[i][0] + sum_k c[i][k+1] * xi_k) / 2.
AffineMap map_from_half_coeffs(const std::vector<std::vector<int>>& c) {
  const int dim = int(c.size());
  AffineMap m;
  m.A = RationalMatrix(dim, dim);
  m.b.assign(std::size_t(dim), Rational(0));
  for (int i = 0; i < dim; ++i) {
    m.b[std::size_t(i)] = Rational(c[std::size_t(i)][0], 2);
    m.b[std::size_t(i)].canonicalize();
    for (int k = 0; k < dim; ++k) {
      m.A.at(i, k) = Rational(c[std::size_t(i)][std::size_t(k) + 1], 2);
      m.A.at(i, k).canonicalize();
    }
  }
  return m;
}

std::vector<AffineMap> triangle_maps() {
  return {
      map_from_half_coeffs({{0, 1, 0}, {0, 0, 1}}),    // corner at origin
      map_from_half_coeffs({{1, 1, 0}, {0, 0, 1}}),    // corner at (1,0)
      map_from_half_coeffs({{0, 1, 0}, {1, 0, 1}}),    // corner at (0,1)
      map_from_half_coeffs({{1, -1, 0}, {1, 0, -1}}),  // central, reflected
  };
}

std::vector<AffineMap> quadrilateral_maps() {
  std::vector<AffineMap> maps;
  for (int b2 = 0; b2 <= 1; ++b2) {
    for (int b1 = 0; b1 <= 1; ++b1) {
      maps.push_back(map_from_half_coeffs({{b1, 1, 0}, {b2, 0, 1}}));
    }
  }
  return maps;
}

std::vector<AffineMap> tetrahedron_maps() {
  std::vector<AffineMap> maps;
  // Four half-scale copies at the corners.
  maps.push_back(
      map_from_half_coeffs({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}));
  maps.push_back(
      map_from_half_coeffs({{1, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}));
  maps.push_back(
      map_from_half_coeffs({{0, 1, 0, 0}, {1, 0, 1, 0}, {0, 0, 0, 1}}));
  maps.push_back(
      map_from_half_coeffs({{0, 1, 0, 0}, {0, 0, 1, 0}, {1, 0, 0, 1}}));
  // Four tets tiling the central octahedron, split around the diagonal
  // (1/2,0,0)-(0,1/2,1/2).
  maps.push_back(
      map_from_half_coeffs({{1, 0, -1, -1}, {0, 0, 1, 0}, {0, 1, 1, 1}}));
  maps.push_back(
      map_from_half_coeffs({{1, 0, -1, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}}));
  maps.push_back(
      map_from_half_coeffs({{0, 1, 1, 0}, {1, -1, 0, 0}, {0, 0, 0, 1}}));
  maps.push_back(
      map_from_half_coeffs({{0, 1, 0, 0}, {0, 0, 1, 1}, {1, -1, -1, 0}}));
  return maps;
}

// base x segment: children of the 2D base combined with bisection of the
// third coordinate, lower half first.
std::vector<AffineMap> extruded_maps(const std::vector<AffineMap>& base) {
  std::vector<AffineMap> maps;
  for (int half = 0; half <= 1; ++half) {
    for (const AffineMap& m2 : base) {
      AffineMap m;
      m.A = RationalMatrix(3, 3);
      m.b.assign(3, Rational(0));
      for (int i = 0; i < 2; ++i) {
        m.b[std::size_t(i)] = m2.b[std::size_t(i)];
        for (int k = 0; k < 2; ++k) m.A.at(i, k) = m2.A.at(i, k);
      }
      m.A.at(2, 2) = Rational(1, 2);
      m.b[2] = Rational(half, 2);
      m.b[2].canonicalize();
      maps.push_back(std::move(m));
    }
  }
  return maps;
}

}  // namespace

const std::vector<AffineMap>& subdivision_maps(ElementClass c) {
  static const std::vector<AffineMap> tri = triangle_maps();
  static const std::vector<AffineMap> quad = quadrilateral_maps();
  static const std::vector<AffineMap> tet = tetrahedron_maps();
  static const std::vector<AffineMap> prism = extruded_maps(triangle_maps());
  static const std::vector<AffineMap> hexa =
      extruded_maps(quadrilateral_maps());
  switch (c) {
    case ElementClass::Triangle:
      return tri;
    case ElementClass::Quadrilateral:
      return quad;
    case ElementClass::Tetrahedron:
      return tet;
    case ElementClass::Prism:
      return prism;
    case ElementClass::Hexahedron:
      return hexa;
  }
  throw Error("subdivision_maps: unreachable");
}

std::array<AffineMap, 2> time_subdivision_maps(int dim) {
  std::array<AffineMap, 2> maps = {AffineMap::identity(dim),
                                   AffineMap::identity(dim)};
  for (int h = 0; h <= 1; ++h) {
    maps[std::size_t(h)].A.at(dim - 1, dim - 1) = Rational(1, 2);
    maps[std::size_t(h)].b[std::size_t(dim - 1)] = Rational(h, 2);
    maps[std::size_t(h)].b[std::size_t(dim - 1)].canonicalize();
  }
  return maps;
}

const std::vector<AffineMap>& dynamic_subdivision_maps(ElementClass c) {
  auto build = [](ElementClass cls) {
    const auto& spatial = subdivision_maps(cls);
    const int n = spatial_dim(cls);
    std::vector<AffineMap> maps;
    maps.reserve(spatial.size() * 2);
    for (int half = 0; half <= 1; ++half) {
      for (const AffineMap& sp : spatial) {
        AffineMap m;
        m.A = RationalMatrix(n + 1, n + 1);
        m.b.assign(std::size_t(n) + 1, Rational(0));
        for (int i = 0; i < n; ++i) {
          m.b[std::size_t(i)] = sp.b[std::size_t(i)];
          for (int k = 0; k < n; ++k) m.A.at(i, k) = sp.A.at(i, k);
        }
        m.A.at(n, n) = Rational(1, 2);
        m.b[std::size_t(n)] = Rational(half, 2);
        m.b[std::size_t(n)].canonicalize();
        maps.push_back(std::move(m));
      }
    }
    return maps;
  };
  static const std::vector<AffineMap> tri = build(ElementClass::Triangle);
  static const std::vector<AffineMap> quad =
      build(ElementClass::Quadrilateral);
  static const std::vector<AffineMap> tet = build(ElementClass::Tetrahedron);
  static const std::vector<AffineMap> prism = build(ElementClass::Prism);
  static const std::vector<AffineMap> hexa = build(ElementClass::Hexahedron);
  switch (c) {
    case ElementClass::Triangle:
      return tri;
    case ElementClass::Quadrilateral:
      return quad;
    case ElementClass::Tetrahedron:
      return tet;
    case ElementClass::Prism:
      return prism;
    case ElementClass::Hexahedron:
      return hexa;
  }
  throw Error("dynamic_subdivision_maps: unreachable");
}

}  // namespace stepcert
