#pragma once

// Symbolic sets (disjoint unions of primitives), their analytic volume and
// perimeter, and rasterization onto periodic grids.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "diffperim/error.hpp"
#include "diffperim/grid_field.hpp"

namespace diffperim {

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// {x : normal . x <= offset}
struct HalfSpace {
  std::vector<double> normal;
  double offset = 0.0;
};

/// Geodesic ball of radius `radius` in the n-dimensional model space of
/// constant curvature `curvature` (a spherical cap when it is positive).
struct Cap {
  double radius = 0.0;
  double curvature = 1.0;
};

struct IntervalUnion {
  std::vector<std::pair<double, double>> intervals;
};

using Primitive = std::variant<Ball, Box, HalfSpace, Cap, IntervalUnion>;

/// Disjoint union of primitives in dimension n.
struct SetSpec {
  int dimension = 2;
  std::vector<Primitive> primitives;
  double margin = 0.0;
  std::string name;
};

struct ReferenceGeometry {
  double volume = 0.0;
  double perimeter = 0.0;
  bool exact = true;
};

enum class RasterMode { Sharp, Coverage };

/// |S^{n-1}|, the area of the unit sphere in R^n.
inline double unit_sphere_area(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default:
      return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
  }
}

/// omega_n, the volume of the unit ball in R^n.
inline double unit_ball_volume(int n) { return unit_sphere_area(n) / n; }

/// s_K(r) of the constant-curvature model.
inline double model_sk(double K, double r) {
  if (K > 0.0) return std::sin(std::sqrt(K) * r) / std::sqrt(K);
  if (K < 0.0) return std::sinh(std::sqrt(-K) * r) / std::sqrt(-K);
  return r;
}

/// Volume of the geodesic ball of radius r: |S^{n-1}| int_0^r s_K(s)^{n-1} ds.
inline double model_ball_volume(int n, double K, double r) {
  const double area = unit_sphere_area(n);
  if (n == 1) return area * r;
  if (K == 0.0) return area * std::pow(r, n) / n;
  const double rk = std::sqrt(std::abs(K));
  const double x = rk * r;
  if (n == 2) return area * (K > 0.0 ? 1.0 - std::cos(x) : std::cosh(x) - 1.0) / std::abs(K);
  if (n == 3) {
    const double core = K > 0.0 ? x - std::sin(x) * std::cos(x) : std::sinh(x) * std::cosh(x) - x;
    return area * core / (2.0 * std::abs(K) * rk);
  }
  // Simpson on a fine grid for higher dimensions.
  const int panels = 4096;
  const double h = r / panels;
  double s = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::pow(model_sk(K, i * h), n - 1);
  }
  return area * s * h / 3.0;
}

namespace geometry_detail {

inline void check_dim(const std::vector<double>& v, int n, const char* what) {
  if (static_cast<int>(v.size()) != n)
    throw Error(ErrorKind::InvalidArgument, "set_geometry",
                std::string(what) + " has " + std::to_string(v.size()) + " coordinates, expected " +
                    std::to_string(n));
}

// Distance between a point and an axis-aligned box (0 inside).
inline double point_box_distance(const std::vector<double>& p, const Box& b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::max({b.lo[i] - p[i], 0.0, p[i] - b.hi[i]});
    d2 += d * d;
  }
  return std::sqrt(d2);
}

inline double box_box_distance(const Box& a, const Box& b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.lo.size(); ++i) {
    const double d = std::max({b.lo[i] - a.hi[i], 0.0, a.lo[i] - b.hi[i]});
    d2 += d * d;
  }
  return std::sqrt(d2);
}

inline Box bounding_box(const Primitive& p, int n) {
  if (auto* ball = std::get_if<Ball>(&p)) {
    Box b{ball->center, ball->center};
    for (int i = 0; i < n; ++i) {
      b.lo[i] -= ball->radius;
      b.hi[i] += ball->radius;
    }
    return b;
  }
  if (auto* box = std::get_if<Box>(&p)) return *box;
  if (auto* iu = std::get_if<IntervalUnion>(&p)) {
    Box b{{iu->intervals.front().first}, {iu->intervals.front().second}};
    for (auto& [lo, hi] : iu->intervals) {
      b.lo[0] = std::min(b.lo[0], lo);
      b.hi[0] = std::max(b.hi[0], hi);
    }
    return b;
  }
  throw Error(ErrorKind::SetOutsideBox, "set_geometry", "primitive has no bounded Euclidean extent");
}

// Signed separation between two bounded primitives (negative means overlap).
inline double separation(const Primitive& a, const Primitive& b) {
  auto* ba = std::get_if<Ball>(&a);
  auto* bb = std::get_if<Ball>(&b);
  if (ba && bb) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < ba->center.size(); ++i) {
      const double d = ba->center[i] - bb->center[i];
      d2 += d * d;
    }
    return std::sqrt(d2) - ba->radius - bb->radius;
  }
  if (ba && std::holds_alternative<Box>(b)) return point_box_distance(ba->center, std::get<Box>(b)) - ba->radius;
  if (bb && std::holds_alternative<Box>(a)) return point_box_distance(bb->center, std::get<Box>(a)) - bb->radius;
  if (std::holds_alternative<IntervalUnion>(a) || std::holds_alternative<IntervalUnion>(b)) {
    std::vector<std::pair<double, double>> all;
    for (const Primitive* p : {&a, &b}) {
      if (auto* iu = std::get_if<IntervalUnion>(p)) {
        all.insert(all.end(), iu->intervals.begin(), iu->intervals.end());
      } else {
        auto bx = bounding_box(*p, 1);
        all.emplace_back(bx.lo[0], bx.hi[0]);
      }
    }
    std::sort(all.begin(), all.end());
    double gap = INFINITY;
    for (std::size_t i = 1; i < all.size(); ++i) gap = std::min(gap, all[i].first - all[i - 1].second);
    return gap;
  }
  if (std::holds_alternative<Box>(a) && std::holds_alternative<Box>(b))
    return box_box_distance(std::get<Box>(a), std::get<Box>(b));
  return INFINITY;
}

inline bool is_whole_domain(const Primitive& p, const std::array<double, 3>& box, int n) {
  auto* b = std::get_if<Box>(&p);
  if (!b) return false;
  for (int i = 0; i < n; ++i)
    if (b->lo[i] > 0.0 || b->hi[i] < box[i]) return false;
  return true;
}

}  // namespace geometry_detail

/// Checks coordinate counts, positivity and pairwise disjointness (with the
/// declared margin). Throws InvalidArgument on violation.
inline void validate(const SetSpec& set) {
  using namespace geometry_detail;
  const int n = set.dimension;
  if (n < 1 || n > 3) throw Error(ErrorKind::InvalidArgument, "set_geometry", "dimension must be 1, 2 or 3");
  for (const auto& p : set.primitives) {
    if (auto* b = std::get_if<Ball>(&p)) {
      check_dim(b->center, n, "ball center");
      if (!(b->radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "set_geometry", "ball radius must be positive");
    } else if (auto* bx = std::get_if<Box>(&p)) {
      check_dim(bx->lo, n, "box corner");
      check_dim(bx->hi, n, "box corner");
      for (int i = 0; i < n; ++i)
        if (!(bx->hi[i] > bx->lo[i]))
          throw Error(ErrorKind::InvalidArgument, "set_geometry", "box corners must satisfy lo < hi");
    } else if (auto* hs = std::get_if<HalfSpace>(&p)) {
      check_dim(hs->normal, n, "half-space normal");
    } else if (auto* cap = std::get_if<Cap>(&p)) {
      if (!(cap->radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "set_geometry", "cap needs a positive radius");
      if (cap->curvature > 0.0 && cap->radius >= std::numbers::pi / std::sqrt(cap->curvature))
        throw Error(ErrorKind::InvalidArgument, "set_geometry", "cap radius exceeds the sphere diameter");
    } else if (auto* iu = std::get_if<IntervalUnion>(&p)) {
      if (n != 1) throw Error(ErrorKind::InvalidArgument, "set_geometry", "intervals require dimension 1");
      for (auto& [lo, hi] : iu->intervals)
        if (!(hi > lo)) throw Error(ErrorKind::InvalidArgument, "set_geometry", "interval must satisfy a < b");
    }
  }
  for (std::size_t i = 0; i < set.primitives.size(); ++i)
    for (std::size_t j = i + 1; j < set.primitives.size(); ++j) {
      const double gap = separation(set.primitives[i], set.primitives[j]);
      if (gap < set.margin || gap <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "set_geometry",
                    "primitives " + std::to_string(i) + " and " + std::to_string(j) +
                        " are not disjoint with the declared margin");
    }
}

/// Analytic volume and perimeter. Disjoint unions add both quantities.
inline ReferenceGeometry reference_geometry(const SetSpec& set) {
  ReferenceGeometry g;
  const int n = set.dimension;
  for (const auto& p : set.primitives) {
    if (auto* b = std::get_if<Ball>(&p)) {
      g.volume += unit_ball_volume(n) * std::pow(b->radius, n);
      g.perimeter += unit_sphere_area(n) * std::pow(b->radius, n - 1);
    } else if (auto* bx = std::get_if<Box>(&p)) {
      double vol = 1.0;
      for (int i = 0; i < n; ++i) vol *= bx->hi[i] - bx->lo[i];
      double per = 0.0;
      for (int i = 0; i < n; ++i) per += 2.0 * vol / (bx->hi[i] - bx->lo[i]);
      g.volume += vol;
      g.perimeter += per;
    } else if (auto* cap = std::get_if<Cap>(&p)) {
      g.volume += model_ball_volume(n, cap->curvature, cap->radius);
      g.perimeter += unit_sphere_area(n) * std::pow(model_sk(cap->curvature, cap->radius), n - 1);
    } else if (auto* iu = std::get_if<IntervalUnion>(&p)) {
      for (auto& [lo, hi] : iu->intervals) {
        g.volume += hi - lo;
        g.perimeter += 2.0;
      }
    } else {
      throw Error(ErrorKind::NoClosedForm, "set_geometry", "half-spaces have infinite volume");
    }
  }
  return g;
}

/// Smallest distance from the set to the boundary of [0, box).
inline double clearance(const SetSpec& set, const std::array<double, 3>& box) {
  double c = INFINITY;
  for (const auto& p : set.primitives) {
    if (geometry_detail::is_whole_domain(p, box, set.dimension)) continue;
    const Box b = geometry_detail::bounding_box(p, set.dimension);
    for (int i = 0; i < set.dimension; ++i) c = std::min({c, b.lo[i], box[i] - b.hi[i]});
  }
  return c;
}

namespace geometry_detail {

inline double overlap_1d(double lo, double hi, double a, double b) {
  return std::max(0.0, std::min(hi, b) - std::max(lo, a));
}

// Coverage fraction of cell [lo, lo + h) for a ball, by 16^n midpoint
// supersampling when the cell straddles the sphere.
inline double ball_cell_fraction(const Ball& ball, int n, const double* lo, const double* h, RasterMode mode) {
  double near2 = 0.0, far2 = 0.0, ctr2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = ball.center[i];
    const double a = lo[i] - c, b = lo[i] + h[i] - c;
    const double nearest = (a > 0.0) ? a : (b < 0.0 ? -b : 0.0);
    const double farthest = std::max(std::abs(a), std::abs(b));
    const double mid = lo[i] + 0.5 * h[i] - c;
    near2 += nearest * nearest;
    far2 += farthest * farthest;
    ctr2 += mid * mid;
  }
  const double r2 = ball.radius * ball.radius;
  if (mode == RasterMode::Sharp) return ctr2 <= r2 ? 1.0 : 0.0;
  if (far2 <= r2) return 1.0;
  if (near2 >= r2) return 0.0;
  constexpr int kSub = 16;
  int inside = 0, total = 0;
  std::array<double, 3> x{};
  const int count1 = kSub, count2 = n >= 2 ? kSub : 1, count3 = n >= 3 ? kSub : 1;
  for (int a = 0; a < count1; ++a)
    for (int b = 0; b < count2; ++b)
      for (int c = 0; c < count3; ++c) {
        const int idx[3] = {a, b, c};
        double d2 = 0.0;
        for (int i = 0; i < n; ++i) {
          x[i] = lo[i] + (idx[i] + 0.5) * h[i] / kSub - ball.center[i];
          d2 += x[i] * x[i];
        }
        inside += d2 <= r2;
        ++total;
      }
  return static_cast<double>(inside) / total;
}

}  // namespace geometry_detail

/// Rasterizes a set onto a periodic grid. Sharp mode uses cell-center
/// membership; coverage mode stores the covered fraction of every cell
/// (exact for boxes and intervals, 16^n supersampling for balls).
inline GridField rasterize(const SetSpec& set, std::array<int, 3> shape, std::array<double, 3> box,
                           RasterMode mode = RasterMode::Coverage) {
  using namespace geometry_detail;
  validate(set);
  const int n = set.dimension;
  GridField field(n, shape, box, 0.0);
  for (int i = 0; i < n; ++i)
    if (field.shape[i] < 64)
      throw Error(ErrorKind::ResolutionTooCoarse, "set_geometry", "grid needs at least 64 cells per axis");
  const double h = field.max_spacing();
  const double clear = clearance(set, field.box);
  if (clear < 4.0 * h)
    throw Error(ErrorKind::SetOutsideBox, "set_geometry",
                "set must keep a clearance of 4 cells from the box boundary (has " + std::to_string(clear) + ")");

  std::array<double, 3> spacing{field.spacing(0), field.spacing(1), field.spacing(2)};
  for (const auto& p : set.primitives) {
    if (is_whole_domain(p, field.box, n)) {
      std::fill(field.values.begin(), field.values.end(), 1.0);
      continue;
    }
    if (std::holds_alternative<Cap>(p))
      throw Error(ErrorKind::InvalidArgument, "set_geometry", "caps live on model spheres, not on Euclidean grids");
    const Box bb = bounding_box(p, n);
    for (int i = 0; i < n; ++i)
      if (bb.hi[i] - bb.lo[i] < 4.0 * spacing[i])
        throw Error(ErrorKind::ResolutionTooCoarse, "set_geometry", "fewer than 4 cells across a primitive");
    if (auto* iu = std::get_if<IntervalUnion>(&p))
      for (auto& [a, b] : iu->intervals)
        if (b - a < 4.0 * spacing[0])
          throw Error(ErrorKind::ResolutionTooCoarse, "set_geometry", "fewer than 4 cells across an interval");

    std::array<int, 3> first{0, 0, 0}, last{0, 0, 0};
    for (int i = 0; i < n; ++i) {
      first[i] = std::max(0, static_cast<int>(std::floor(bb.lo[i] / spacing[i])) - 1);
      last[i] = std::min(field.shape[i] - 1, static_cast<int>(std::floor(bb.hi[i] / spacing[i])) + 1);
    }
    for (int a = first[0]; a <= last[0]; ++a)
      for (int b = first[1]; b <= last[1]; ++b)
        for (int c = first[2]; c <= last[2]; ++c) {
          const int idx[3] = {a, b, c};
          double lo[3];
          for (int i = 0; i < 3; ++i) lo[i] = idx[i] * spacing[i];
          double frac = 0.0;
          if (auto* ball = std::get_if<Ball>(&p)) {
            frac = ball_cell_fraction(*ball, n, lo, spacing.data(), mode);
          } else if (auto* bx = std::get_if<Box>(&p)) {
            frac = 1.0;
            for (int i = 0; i < n; ++i) {
              if (mode == RasterMode::Sharp) {
                const double x = lo[i] + 0.5 * spacing[i];
                frac *= (x >= bx->lo[i] && x < bx->hi[i]) ? 1.0 : 0.0;
              } else {
                frac *= overlap_1d(lo[i], lo[i] + spacing[i], bx->lo[i], bx->hi[i]) / spacing[i];
              }
            }
          } else if (auto* iu = std::get_if<IntervalUnion>(&p)) {
            for (auto& [ia, ib] : iu->intervals) {
              if (mode == RasterMode::Sharp) {
                const double x = lo[0] + 0.5 * spacing[0];
                frac += (x >= ia && x < ib) ? 1.0 : 0.0;
              } else {
                frac += overlap_1d(lo[0], lo[0] + spacing[0], ia, ib) / spacing[0];
              }
            }
          } else {
            throw Error(ErrorKind::SetOutsideBox, "set_geometry", "half-spaces are unbounded");
          }
          if (frac > 0.0) {
            double& v = field.values[field.index(a, b, c)];
            v = std::min(1.0, v + frac);
          }
        }
  }
  field.sampling = Sampling::CellAverage;
  return field;
}

/// Volume-matched Euclidean ball centered in the box.
inline SetSpec volume_matched_ball(const SetSpec& set, const std::array<double, 3>& box) {
  const auto ref = reference_geometry(set);
  const int n = set.dimension;
  SetSpec ball;
  ball.dimension = n;
  ball.name = "ball";
  Ball b;
  for (int i = 0; i < n; ++i) b.center.push_back(0.5 * box[i]);
  b.radius = std::pow(ref.volume / unit_ball_volume(n), 1.0 / n);
  ball.primitives.push_back(b);
  return ball;
}

}  // namespace diffperim
