// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/element_map.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "stepcert/basis.hpp"
#include "stepcert/errors.hpp"

namespace stepcert {

namespace {

// Interpolated control points at one time value, flattened as
// [point * dim + coordinate]. The time weights are derived from the exact
// rational t so that representable times (such as the 0, 1/2, 1 time
// nodes of a quadratic time axis) contribute no rounding at all.
std::vector<Interval> controls_at_time(const ElementSpec& spec,
                                       const Rational& t, int dim) {
  std::vector<Interval> out(spec.start.size() * std::size_t(dim));
  if (sgn(t) == 0 || !spec.dynamic()) {
    for (std::size_t i = 0; i < spec.start.size(); ++i)
      for (int d = 0; d < dim; ++d)
        out[i * std::size_t(dim) + d] = iv_from_exact(spec.start[i][d]);
    return out;
  }
  const Interval ti = rat_to_interval(t);
  const Interval oi = rat_to_interval(Rational(1) - t);
  for (std::size_t i = 0; i < spec.start.size(); ++i) {
    for (int d = 0; d < dim; ++d) {
      const Interval x0 = iv_from_exact(spec.start[i][d]);
      const Interval x1 = iv_from_exact(spec.end[i][d]);
      out[i * std::size_t(dim) + d] = iv_add(iv_mul(oi, x0), iv_mul(ti, x1));
    }
  }
  return out;
}

// det of the dim x dim interval matrix m (row major), expanded along the
// first row in a fixed order so repeated runs are bit-identical.
Interval det_interval(std::span<const Interval> m, int dim) {
  if (dim == 2) return iv_sub(iv_mul(m[0], m[3]), iv_mul(m[1], m[2]));
  const Interval c0 = iv_sub(iv_mul(m[4], m[8]), iv_mul(m[5], m[7]));
  const Interval c1 = iv_sub(iv_mul(m[3], m[8]), iv_mul(m[5], m[6]));
  const Interval c2 = iv_sub(iv_mul(m[3], m[7]), iv_mul(m[4], m[6]));
  return iv_add(iv_sub(iv_mul(m[0], c0), iv_mul(m[1], c1)), iv_mul(m[2], c2));
}

Rational det_rational(std::span<const Rational> m, int dim) {
  if (dim == 2) return m[0] * m[3] - m[1] * m[2];
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

// Jacobian matrix J[r][c] = sum_i controls[i][r] * d(L_i)/d(xi_c) at one
// grid node, followed by its determinant.
Interval node_jacobian(std::span<const Interval> controls,
                       std::span<const Interval> grads, int dim) {
  std::array<Interval, 9> m;
  m.fill(Interval{0.0, 0.0});
  const std::size_t count = grads.size() / std::size_t(dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (int r = 0; r < dim; ++r) {
      const Interval x = controls[i * std::size_t(dim) + r];
      for (int c = 0; c < dim; ++c) {
        Interval& cell = m[std::size_t(r * dim + c)];
        cell = iv_add(cell, iv_mul(x, grads[i * std::size_t(dim) + c]));
      }
    }
  }
  return det_interval(std::span<const Interval>(m.data(), std::size_t(dim * dim)),
                      dim);
}

GradientTable build_gradient_table(ElementClass cls, int order) {
  GradientTable tab;
  tab.cls = cls;
  tab.order = order;
  tab.spatial_shape = determinant_orders(cls, order, false);
  const BlockOrders geo = geometry_orders(cls, order);
  const std::vector<MultiIndex> basis_indices = enumerate_grid(geo);
  const std::vector<MultiIndex> node_indices = enumerate_grid(tab.spatial_shape);
  const int dim = spatial_dim(cls);
  tab.geometry_count = basis_indices.size();
  tab.nodes.reserve(node_indices.size());
  tab.grads_exact.reserve(node_indices.size());
  tab.grads.reserve(node_indices.size());
  for (const MultiIndex& idx : node_indices) {
    std::vector<Rational> node = grid_point(tab.spatial_shape, idx);
    std::vector<Rational> exact(tab.geometry_count * std::size_t(dim));
    std::vector<Interval> rounded(exact.size());
    for (std::size_t i = 0; i < basis_indices.size(); ++i) {
      const std::vector<Rational> grad =
          lagrange_grad_eval(geo, basis_indices[i], node);
      for (int d = 0; d < dim; ++d) {
        exact[i * std::size_t(dim) + d] = grad[std::size_t(d)];
        rounded[i * std::size_t(dim) + d] = rat_to_interval(grad[std::size_t(d)]);
      }
    }
    tab.nodes.push_back(std::move(node));
    tab.grads_exact.push_back(std::move(exact));
    tab.grads.push_back(std::move(rounded));
  }
  return tab;
}

}  // namespace

void validate_spec(const ElementSpec& spec) {
  const BlockOrders geo = geometry_orders(spec.cls, spec.order);
  const std::size_t expect = grid_size(geo);
  if (spec.start.size() != expect)
    throw DimensionMismatch("element spec: expected " + std::to_string(expect) +
                            " start control points, got " +
                            std::to_string(spec.start.size()));
  if (!spec.end.empty() && spec.end.size() != expect)
    throw DimensionMismatch("element spec: expected " + std::to_string(expect) +
                            " end control points, got " +
                            std::to_string(spec.end.size()));
  const int dim = spatial_dim(spec.cls);
  for (const auto* list : {&spec.start, &spec.end}) {
    for (const auto& point : *list)
      for (int d = 0; d < dim; ++d)
        if (!std::isfinite(point[std::size_t(d)]))
          throw NonFiniteInput("element spec: control point coordinate is not "
                               "a finite machine real");
  }
}

const GradientTable& gradient_table(ElementClass cls, int order) {
  static std::mutex guard;
  static std::map<std::pair<ElementClass, int>,
                  std::unique_ptr<const GradientTable>>
      tables;
  const std::pair<ElementClass, int> key{cls, order};
  std::lock_guard<std::mutex> lock(guard);
  auto it = tables.find(key);
  if (it == tables.end()) {
    it = tables
             .emplace(key, std::make_unique<const GradientTable>(
                               build_gradient_table(cls, order)))
             .first;
  }
  return *it->second;
}

CoefficientVector lagrange_coeffs_dynamic(const ElementSpec& spec) {
  validate_spec(spec);
  if (!spec.dynamic())
    throw DimensionMismatch(
        "dynamic coefficients need end-of-step control points");
  check_rounding_environment();
  const GradientTable& tab = gradient_table(spec.cls, spec.order);
  const int dim = spatial_dim(spec.cls);
  CoefficientVector out;
  out.shape = determinant_orders(spec.cls, spec.order, true);
  out.values.resize(tab.nodes.size() * std::size_t(dim + 1));
  std::size_t pos = 0;
  for (int k = 0; k <= dim; ++k) {
    Rational node_time(k, dim);
    node_time.canonicalize();
    const std::vector<Interval> controls =
        controls_at_time(spec, node_time, dim);
    for (std::size_t g = 0; g < tab.nodes.size(); ++g)
      out.values[pos++] = node_jacobian(controls, tab.grads[g], dim);
  }
  return out;
}

CoefficientVector lagrange_coeffs_static(const ElementSpec& spec,
                                         const Rational& t) {
  validate_spec(spec);
  if (sgn(t) != 0 && !spec.dynamic())
    throw DimensionMismatch(
        "static coefficients away from t = 0 need end-of-step control points");
  check_rounding_environment();
  const GradientTable& tab = gradient_table(spec.cls, spec.order);
  const int dim = spatial_dim(spec.cls);
  CoefficientVector out;
  out.shape = tab.spatial_shape;
  out.values.resize(tab.nodes.size());
  const std::vector<Interval> controls = controls_at_time(spec, t, dim);
  for (std::size_t g = 0; g < tab.nodes.size(); ++g)
    out.values[g] = node_jacobian(controls, tab.grads[g], dim);
  return out;
}

void to_bezier(CoefficientVector& coeffs, const TransformSet& transforms) {
  if (!(coeffs.shape == transforms.shape))
    throw DimensionMismatch(
        "to_bezier: coefficient grid does not match the transform set");
  std::vector<Interval> scratch;
  apply_factors(transforms.from_lagrange, coeffs.shape, coeffs.values, scratch);
}

Rational jacobian_exact(const ElementSpec& spec, std::span<const Rational> xi,
                        const Rational& t) {
  validate_spec(spec);
  const int dim = spatial_dim(spec.cls);
  if (xi.size() != std::size_t(dim))
    throw DimensionMismatch("jacobian_exact: reference point has " +
                            std::to_string(xi.size()) + " coordinates, need " +
                            std::to_string(dim));
  if (sgn(t) != 0 && !spec.dynamic())
    throw DimensionMismatch(
        "jacobian_exact away from t = 0 needs end-of-step control points");
  const BlockOrders geo = geometry_orders(spec.cls, spec.order);
  const std::vector<MultiIndex> basis_indices = enumerate_grid(geo);
  const Rational omt = Rational(1) - t;
  std::vector<Rational> m(std::size_t(dim * dim), Rational(0));
  for (std::size_t i = 0; i < basis_indices.size(); ++i) {
    const std::vector<Rational> grad =
        lagrange_grad_eval(geo, basis_indices[i], xi);
    for (int r = 0; r < dim; ++r) {
      Rational x = rational_from_double(spec.start[i][std::size_t(r)]);
      if (spec.dynamic() && sgn(t) != 0) {
        x = omt * x + t * rational_from_double(spec.end[i][std::size_t(r)]);
      }
      for (int c = 0; c < dim; ++c)
        m[std::size_t(r * dim + c)] += x * grad[std::size_t(c)];
    }
  }
  return det_rational(m, dim);
}

}  // namespace stepcert
