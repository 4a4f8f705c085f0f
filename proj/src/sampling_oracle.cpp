// This file is part of stepcert, a conservative validity checker for
// deforming finite elements. Distributed under the MIT license.

#include "stepcert/sampling_oracle.hpp"

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "stepcert/basis.hpp"
#include "stepcert/errors.hpp"

namespace stepcert {

namespace {

Rational make_fraction(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Interval det_iv(std::span<const Interval> m, int dim) {
  if (dim == 2) return iv_sub(iv_mul(m[0], m[3]), iv_mul(m[1], m[2]));
  const Interval c0 = iv_sub(iv_mul(m[4], m[8]), iv_mul(m[5], m[7]));
  const Interval c1 = iv_sub(iv_mul(m[3], m[8]), iv_mul(m[5], m[6]));
  const Interval c2 = iv_sub(iv_mul(m[3], m[7]), iv_mul(m[4], m[6]));
  return iv_add(iv_sub(iv_mul(m[0], c0), iv_mul(m[1], c1)), iv_mul(m[2], c2));
}

// Exact basis gradients at every lattice point, shared across the many
// geometries swept at the same (class, order, resolution).
struct LatticeTable {
  std::vector<std::vector<Rational>> points;
  std::vector<Interval> grads;  // [point][basis][direction], flattened
  std::size_t basis_count = 0;
};

const LatticeTable& lattice_table(ElementClass cls, int order,
                                  int resolution) {
  using Key = std::tuple<ElementClass, int, int>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<const LatticeTable>> tables;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = tables[Key(cls, order, resolution)];
  if (!slot) {
    auto table = std::make_unique<LatticeTable>();
    table->points = spatial_lattice(cls, resolution);
    const BlockOrders shape = geometry_orders(cls, order);
    const std::vector<MultiIndex> basis = enumerate_grid(shape);
    table->basis_count = basis.size();
    const int dim = spatial_dim(cls);
    table->grads.reserve(table->points.size() * basis.size() *
                         std::size_t(dim));
    for (const std::vector<Rational>& point : table->points) {
      for (const MultiIndex& index : basis) {
        const std::vector<Rational> grad =
            lagrange_grad_eval(shape, index, point);
        for (int d = 0; d < dim; ++d)
          table->grads.push_back(rat_to_interval(grad[std::size_t(d)]));
      }
    }
    slot = std::move(table);
  }
  return *slot;
}

}  // namespace

std::vector<std::vector<Rational>> spatial_lattice(ElementClass cls,
                                                   int resolution) {
  if (resolution < 1)
    throw BadAccuracy("lattice resolution must be at least 1");
  const int dim = spatial_dim(cls);
  const int s = simplex_block(cls);
  std::vector<std::vector<Rational>> points;
  std::vector<int> m(std::size_t(dim), 0);
  while (true) {
    int simplex_total = 0;
    for (int i = 0; i < s; ++i) simplex_total += m[std::size_t(i)];
    if (simplex_total <= resolution) {
      std::vector<Rational> point;
      point.reserve(std::size_t(dim));
      for (int d = 0; d < dim; ++d)
        point.push_back(make_fraction(m[std::size_t(d)], resolution));
      points.push_back(std::move(point));
    }
    int d = 0;
    for (; d < dim; ++d) {
      if (m[std::size_t(d)] < resolution) {
        ++m[std::size_t(d)];
        break;
      }
      m[std::size_t(d)] = 0;
    }
    if (d == dim) break;
  }
  return points;
}

std::optional<SampleHit> falsify_by_sampling(const ElementSpec& spec,
                                             int spatial_resolution,
                                             int time_samples) {
  validate_spec(spec);
  if (spatial_resolution < 1)
    throw BadAccuracy("spatial resolution must be at least 1");
  if (time_samples < 2)
    throw BadAccuracy("need at least two time samples");
  check_rounding_environment();

  const int dim = spatial_dim(spec.cls);
  const bool dynamic = spec.dynamic();
  const LatticeTable& table =
      lattice_table(spec.cls, spec.order, spatial_resolution);
  const std::size_t point_count = table.points.size();
  const std::size_t basis = table.basis_count;

  // Enclose the coefficients of each point's determinant polynomial in t.
  // The Jacobian matrix is M0 + t M1 with M0, M1 constant per point, so the
  // determinant has degree dim; its coefficients follow exactly from the
  // determinants of a few integer combinations of M0 and M1.
  const int deg = dynamic ? dim : 0;
  std::vector<Interval> coeff(point_count * std::size_t(deg + 1));
  std::array<Interval, 9> m0, m1, mix;
  const Interval half = iv_from_exact(0.5);
  const Interval third = rat_to_interval(make_fraction(1, 3));
  for (std::size_t p = 0; p < point_count; ++p) {
    m0.fill(Interval{0.0, 0.0});
    m1.fill(Interval{0.0, 0.0});
    const Interval* grads = table.grads.data() + p * basis * std::size_t(dim);
    for (std::size_t i = 0; i < basis; ++i) {
      for (int r = 0; r < dim; ++r) {
        const Interval s0 = iv_from_exact(spec.start[i][std::size_t(r)]);
        for (int c = 0; c < dim; ++c) {
          const Interval g = grads[i * std::size_t(dim) + std::size_t(c)];
          m0[std::size_t(r * dim + c)] =
              iv_add(m0[std::size_t(r * dim + c)], iv_mul(s0, g));
          if (dynamic) {
            const Interval v =
                iv_sub(iv_from_exact(spec.end[i][std::size_t(r)]), s0);
            m1[std::size_t(r * dim + c)] =
                iv_add(m1[std::size_t(r * dim + c)], iv_mul(v, g));
          }
        }
      }
    }
    Interval* c = coeff.data() + p * std::size_t(deg + 1);
    const std::span<const Interval> v0(m0.data(), std::size_t(dim * dim));
    c[0] = det_iv(v0, dim);
    if (!dynamic) continue;
    if (dim == 2) {
      for (int e = 0; e < 4; ++e)
        mix[std::size_t(e)] = iv_add(m0[std::size_t(e)], m1[std::size_t(e)]);
      const std::span<const Interval> v1(m1.data(), 4);
      const std::span<const Interval> vm(mix.data(), 4);
      c[2] = det_iv(v1, 2);
      c[1] = iv_sub(iv_sub(det_iv(vm, 2), c[0]), c[2]);
    } else {
      // Interpolate det(M0 + t M1) from t = 1, -1, 2.
      for (int e = 0; e < 9; ++e)
        mix[std::size_t(e)] = iv_add(m0[std::size_t(e)], m1[std::size_t(e)]);
      const Interval d1 = det_iv(std::span<const Interval>(mix.data(), 9), 3);
      for (int e = 0; e < 9; ++e)
        mix[std::size_t(e)] = iv_sub(m0[std::size_t(e)], m1[std::size_t(e)]);
      const Interval dm1 = det_iv(std::span<const Interval>(mix.data(), 9), 3);
      for (int e = 0; e < 9; ++e)
        mix[std::size_t(e)] = iv_add(
            m0[std::size_t(e)],
            iv_add(m1[std::size_t(e)], m1[std::size_t(e)]));
      const Interval d2 = det_iv(std::span<const Interval>(mix.data(), 9), 3);
      c[2] = iv_sub(iv_mul(iv_add(d1, dm1), half), c[0]);
      const Interval odd = iv_mul(iv_sub(d1, dm1), half);  // c1 + c3
      const Interval c4 = iv_add(c[2], c[2]);
      const Interval quad =
          iv_mul(iv_sub(d2, iv_add(c[0], iv_add(c4, c4))), half);  // c1 + 4 c3
      c[3] = iv_mul(iv_sub(quad, odd), third);
      c[1] = iv_sub(odd, c[3]);
    }
  }

  const int last = dynamic ? time_samples : 0;
  for (int j = 0; j <= last; ++j) {
    Rational time(j, time_samples);
    time.canonicalize();
    const Interval t = rat_to_interval(time);
    for (std::size_t p = 0; p < point_count; ++p) {
      const Interval* c = coeff.data() + p * std::size_t(deg + 1);
      Interval value = c[std::size_t(deg)];
      for (int e = deg - 1; e >= 0; --e)
        value = iv_add(iv_mul(value, t), c[std::size_t(e)]);
      if (value.lo > 0.0) continue;
      const Rational exact = jacobian_exact(spec, table.points[p], time);
      if (sgn(exact) <= 0) return SampleHit{table.points[p], time, exact};
    }
  }
  return std::nullopt;
}

namespace {

struct Quadratic {
  Rational c0, c1, c2;
};

// Exact signed-area polynomial of the moving triangle, from its values at
// t = 0, 1/2, 1.
Quadratic area_polynomial(const ElementSpec& spec) {
  const auto corner = [&spec](std::size_t i,
                              const Rational& t) -> std::array<Rational, 2> {
    std::array<Rational, 2> p;
    for (std::size_t d = 0; d < 2; ++d) {
      p[d] = rational_from_double(spec.start[i][d]);
      if (spec.dynamic())
        p[d] += t * (rational_from_double(spec.end[i][d]) - p[d]);
    }
    return p;
  };
  // The explicit return type forces the gmpxx expression template to
  // materialize before the locals it references go out of scope.
  const auto area = [&corner](const Rational& t) -> Rational {
    const std::array<Rational, 2> a = corner(0, t);
    const std::array<Rational, 2> b = corner(1, t);
    const std::array<Rational, 2> c = corner(2, t);
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  };
  Quadratic q;
  q.c0 = area(Rational(0));
  const Rational j_half = area(make_fraction(1, 2));
  const Rational j_one = area(Rational(1));
  q.c2 = 2 * (j_one - 2 * j_half + q.c0);
  q.c1 = j_one - q.c0 - q.c2;
  return q;
}

bool in_unit_range(const Rational& root) {
  return sgn(root) > 0 && root <= 1;
}

std::optional<TimeEnclosure> point_enclosure_if_in_range(const Rational& r) {
  if (in_unit_range(r)) return TimeEnclosure{r, r};
  return std::nullopt;
}

}  // namespace

std::optional<TimeEnclosure> linear_triangle_t_star(const ElementSpec& spec,
                                                    const Rational& width) {
  if (spec.cls != ElementClass::Triangle || spec.order != 1)
    throw NotLinearTriangle(
        "closed-form time roots are defined for linear triangles only");
  validate_spec(spec);
  if (sgn(width) <= 0) throw BadAccuracy("enclosure width must be positive");

  const Quadratic q = area_polynomial(spec);

  if (sgn(q.c2) == 0) {
    if (sgn(q.c1) == 0) {
      // Constant area: degenerate at every time, or at none.
      if (sgn(q.c0) == 0) return TimeEnclosure{Rational(0), Rational(0)};
      return std::nullopt;
    }
    return point_enclosure_if_in_range(-q.c0 / q.c1);
  }

  // A rational root at an endpoint makes the cofactor root rational too:
  // the roots multiply to c0/c2 and sum to -c1/c2.
  if (sgn(q.c0) == 0) return point_enclosure_if_in_range(-q.c1 / q.c2);
  if (sgn(q.c0 + q.c1 + q.c2) == 0) {
    const Rational other = q.c0 / q.c2;
    if (sgn(other) > 0 && other < 1) return TimeEnclosure{other, other};
    return TimeEnclosure{Rational(1), Rational(1)};
  }

  const Rational disc = q.c1 * q.c1 - 4 * q.c2 * q.c0;
  if (sgn(disc) < 0) return std::nullopt;
  if (sgn(disc) == 0)
    return point_enclosure_if_in_range(-q.c1 / (2 * q.c2));

  // Two distinct roots, neither exactly 0 or 1. Bracket sqrt(disc) between
  // consecutive integers after scaling by a power of four, tightening until
  // both roots either leave (0, 1] or land in it with the requested width.
  const mpz_class scaled_num = disc.get_num() * disc.get_den();
  const Rational twice_lead = 2 * q.c2;
  for (unsigned long bits = 16; bits <= 8192; bits *= 2) {
    mpz_class shifted = scaled_num << (2 * bits);
    const mpz_class floor_root = sqrt(shifted);
    mpz_class denom = disc.get_den() << bits;
    Rational root_lo(floor_root, denom);
    root_lo.canonicalize();
    if (floor_root * floor_root == shifted) {
      // Perfect square: both roots are rational.
      const Rational root_minus = (-q.c1 - root_lo) / twice_lead;
      const Rational root_plus = (-q.c1 + root_lo) / twice_lead;
      const Rational& first = sgn(q.c2) > 0 ? root_minus : root_plus;
      const Rational& second = sgn(q.c2) > 0 ? root_plus : root_minus;
      if (auto hit = point_enclosure_if_in_range(first)) return hit;
      return point_enclosure_if_in_range(second);
    }
    Rational root_hi(floor_root + 1, denom);
    root_hi.canonicalize();

    const Rational minus_lo = (-q.c1 - root_hi) / twice_lead;
    const Rational minus_hi = (-q.c1 - root_lo) / twice_lead;
    const Rational plus_lo = (-q.c1 + root_lo) / twice_lead;
    const Rational plus_hi = (-q.c1 + root_hi) / twice_lead;
    TimeEnclosure minus{minus_lo, minus_hi};
    TimeEnclosure plus{plus_lo, plus_hi};
    if (sgn(q.c2) < 0) {
      std::swap(minus.lo, minus.hi);
      std::swap(plus.lo, plus.hi);
      std::swap(minus, plus);
    }

    bool undecided = false;
    for (const TimeEnclosure& candidate : {minus, plus}) {
      if (sgn(candidate.hi) <= 0 || candidate.lo > 1) continue;
      if (sgn(candidate.lo) > 0 && candidate.hi <= 1) {
        if (candidate.hi - candidate.lo <= width) return candidate;
        undecided = true;
        break;
      }
      undecided = true;  // straddles an endpoint; tighten further
      break;
    }
    if (!undecided) return std::nullopt;
  }
  throw BadAccuracy("could not isolate the root to the requested width");
}

}  // namespace stepcert
