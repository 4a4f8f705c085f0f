// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/baselines.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "stepcert/basis.hpp"
#include "stepcert/checker.hpp"
#include "stepcert/element.hpp"
#include "stepcert/errors.hpp"
#include "stepcert/quadrature.hpp"

namespace stepcert {

namespace {

// One factored operator with every matrix entry rounded to double. The
// rounding is the whole point of this module, so the conversion happens
// once here instead of reusing the interval mirrors.
struct DoubleFactors {
  std::vector<std::vector<double>> mats;  // row-major, per block
  std::vector<int> sizes;                 // block sizes, fastest first
  std::vector<bool> identity;
};

DoubleFactors round_factors(const FactorSet& op, const BlockOrders& shape) {
  DoubleFactors out;
  out.sizes = block_sizes(shape);
  out.identity = op.identity;
  out.mats.resize(op.rat.size());
  for (std::size_t b = 0; b < op.rat.size(); ++b) {
    const RationalMatrix& m = op.rat[b];
    out.mats[b].resize(std::size_t(m.rows) * std::size_t(m.cols));
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c)
        out.mats[b][std::size_t(r) * std::size_t(m.cols) + std::size_t(c)] =
            m.at(r, c).get_d();
  }
  return out;
}

// Same stride walk as the interval version in the transforms module, with
// double accumulation.
void apply_double(const DoubleFactors& op, std::vector<double>& coeffs,
                  std::vector<double>& scratch) {
  std::size_t stride = 1;
  const std::size_t n = coeffs.size();
  for (std::size_t b = 0; b < op.sizes.size(); ++b) {
    const std::size_t nb = std::size_t(op.sizes[b]);
    if (op.identity[b]) {
      stride *= nb;
      continue;
    }
    const std::vector<double>& m = op.mats[b];
    if (scratch.size() < nb) scratch.resize(nb);
    const std::size_t span = nb * stride;
    for (std::size_t outer = 0; outer < n; outer += span) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        for (std::size_t k = 0; k < nb; ++k)
          scratch[k] = coeffs[base + k * stride];
        for (std::size_t i = 0; i < nb; ++i) {
          double acc = 0.0;
          for (std::size_t k = 0; k < nb; ++k)
            acc += m[i * nb + k] * scratch[k];
          coeffs[base + i * stride] = acc;
        }
      }
    }
    stride *= nb;
  }
}

// Everything the double-precision refinement needs for one (class, order),
// derived once from the exact tables and kept for the process lifetime.
struct RefineOps {
  BlockOrders shape;                        // static determinant grid
  std::vector<std::size_t> corners;         // corner ranks in that grid
  DoubleFactors from_lagrange;
  std::vector<DoubleFactors> child;
  std::vector<std::vector<double>> grads;   // [node][i * dim + d]
  int dim = 0;
  std::size_t geometry_count = 0;
};

const RefineOps& refine_ops(ElementClass cls, int order) {
  static std::mutex mu;
  static std::map<std::pair<ElementClass, int>,
                  std::unique_ptr<const RefineOps>>
      table;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = table[{cls, order}];
  if (!slot) {
    auto ops = std::make_unique<RefineOps>();
    const std::shared_ptr<const TransformSet> ts =
        default_matrix_cache().get(cls, order, false);
    const GradientTable& grad = gradient_table(cls, order);
    ops->shape = ts->shape;
    ops->corners = corner_indices(ts->shape, false);
    ops->from_lagrange = round_factors(ts->from_lagrange, ts->shape);
    ops->child.reserve(ts->child.size());
    for (const FactorSet& c : ts->child)
      ops->child.push_back(round_factors(c, ts->shape));
    ops->dim = spatial_dim(cls);
    ops->geometry_count = grad.geometry_count;
    ops->grads.resize(grad.grads_exact.size());
    for (std::size_t g = 0; g < grad.grads_exact.size(); ++g) {
      ops->grads[g].resize(grad.grads_exact[g].size());
      for (std::size_t k = 0; k < grad.grads_exact[g].size(); ++k)
        ops->grads[g][k] = grad.grads_exact[g][k].get_d();
    }
    slot = std::move(ops);
  }
  return *slot;
}

// Control point of `spec` at time `t`, both in doubles.
inline double control_at(const ElementSpec& spec, std::size_t i, int d,
                         double t) {
  const double s = spec.start[i][std::size_t(d)];
  if (spec.end.empty()) return s;
  return s + t * (spec.end[i][std::size_t(d)] - s);
}

// det of the Jacobian assembled from double gradients and double controls.
double det_double(const ElementSpec& spec, std::span<const double> grads,
                  int dim, std::size_t geometry_count, double t) {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  for (std::size_t i = 0; i < geometry_count; ++i)
    for (int d = 0; d < dim; ++d) {
      const double c = control_at(spec, i, d, t);
      for (int e = 0; e < dim; ++e)
        m[d][e] += c * grads[i * std::size_t(dim) + std::size_t(e)];
    }
  if (dim == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Weighted points of the class base rule with gradients of the geometry
// basis at each, all pre-rounded to double.
struct SampleOps {
  std::vector<std::vector<double>> grads;  // [point][i * dim + d]
  int dim = 0;
  std::size_t geometry_count = 0;
};

const SampleOps& sample_ops(ElementClass cls, int order) {
  static std::mutex mu;
  static std::map<std::pair<ElementClass, int>,
                  std::unique_ptr<const SampleOps>>
      table;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = table[{cls, order}];
  if (!slot) {
    auto ops = std::make_unique<SampleOps>();
    ops->dim = spatial_dim(cls);
    const BlockOrders geom = geometry_orders(cls, order);
    ops->geometry_count = grid_size(geom);
    const std::vector<MultiIndex> nodes = enumerate_grid(geom);
    const QuadratureRule rule = base_rule(cls, 1);
    ops->grads.resize(rule.points.size());
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      ops->grads[q].resize(ops->geometry_count * std::size_t(ops->dim));
      for (std::size_t i = 0; i < ops->geometry_count; ++i) {
        const std::vector<Rational> g =
            lagrange_grad_eval(geom, nodes[i], rule.points[q]);
        for (int d = 0; d < ops->dim; ++d)
          ops->grads[q][i * std::size_t(ops->dim) + std::size_t(d)] =
              g[std::size_t(d)].get_d();
      }
    }
    slot = std::move(ops);
  }
  return *slot;
}

void require_time(const ElementSpec& spec, double t) {
  if (!spec.dynamic() && t != 0.0)
    throw DimensionMismatch(
        "baseline check at t != 0 needs end-of-step control points");
}

}  // namespace

const char* baseline_verdict_name(BaselineVerdict v) {
  switch (v) {
    case BaselineVerdict::Valid: return "valid";
    case BaselineVerdict::Invalid: return "invalid";
    default: return "undecided";
  }
}

BaselineVerdict quadrature_point_check(const ElementSpec& spec, double t) {
  validate_spec(spec);
  require_time(spec, t);
  const SampleOps& ops = sample_ops(spec.cls, spec.order);
  for (const std::vector<double>& g : ops.grads) {
    if (det_double(spec, g, ops.dim, ops.geometry_count, t) <= 0.0)
      return BaselineVerdict::Invalid;
  }
  return BaselineVerdict::Valid;
}

BaselineVerdict fp_bezier_check(const ElementSpec& spec, double t,
                                int max_depth) {
  validate_spec(spec);
  require_time(spec, t);
  if (max_depth < 0)
    throw BadAccuracy("fp_bezier_check: refinement depth must be >= 0");
  const RefineOps& ops = refine_ops(spec.cls, spec.order);

  std::vector<double> root(ops.grads.size());
  for (std::size_t g = 0; g < ops.grads.size(); ++g)
    root[g] = det_double(spec, ops.grads[g], ops.dim, ops.geometry_count, t);
  std::vector<double> scratch;
  apply_double(ops.from_lagrange, root, scratch);

  struct Piece {
    std::vector<double> coeffs;
    int depth;
  };
  std::vector<Piece> stack;
  stack.push_back(Piece{std::move(root), 0});
  bool undecided = false;
  while (!stack.empty()) {
    Piece piece = std::move(stack.back());
    stack.pop_back();
    double corner_min = piece.coeffs[ops.corners.front()];
    for (std::size_t rank : ops.corners)
      corner_min = std::min(corner_min, piece.coeffs[rank]);
    if (corner_min <= 0.0) return BaselineVerdict::Invalid;
    const double all_min =
        *std::min_element(piece.coeffs.begin(), piece.coeffs.end());
    if (all_min > 0.0) continue;  // this piece looks valid; discard
    if (piece.depth >= max_depth) {
      undecided = true;
      continue;
    }
    for (const DoubleFactors& child : ops.child) {
      Piece next{piece.coeffs, piece.depth + 1};
      apply_double(child, next.coeffs, scratch);
      stack.push_back(std::move(next));
    }
  }
  return undecided ? BaselineVerdict::Undecided : BaselineVerdict::Valid;
}

}  // namespace stepcert
