#pragma once

// The Euclidean heat channel on periodic grids: heat flow, the conditional
// entropy H_E(t), the Fisher dissipation rate, the L1 jump and the mutual
// information, plus whole entropy curves.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "diffperim/error.hpp"
#include "diffperim/grid_field.hpp"
#include "diffperim/profile1d.hpp"
#include "diffperim/set_geometry.hpp"
#include "diffperim/space.hpp"
#include "diffperim/spectral.hpp"

namespace diffperim {

inline constexpr double kFisherClamp = 1e-12;

/// P_t applied to a field; t = 0 is the identity.
inline GridField heat_apply(const GridField& field, double t) {
  if (t < 0.0) throw Error(ErrorKind::NegativeTime, "euclidean_flow", "heat_apply needs t >= 0");
  if (t == 0.0) return field;
  return HeatChannel(field).field_at(t);
}

/// sum_cells h(p) * cell volume.
inline double entropy_functional(const GridField& field) {
  double sum = 0.0;
  for (double p : field.values) sum += binary_entropy(p);
  return sum * field.cell_volume();
}

/// sum_cells |grad p|^2 / (p~ (1 - p~)) * cell volume with p~ = clamp(p, eps, 1 - eps).
inline double fisher_information(const GridField& field, const std::vector<std::vector<double>>& gradient,
                                 double eps = kFisherClamp) {
  if (!(eps > 0.0 && eps < 1e-6))
    throw Error(ErrorKind::InvalidArgument, "euclidean_flow", "Fisher clamp must lie in (0, 1e-6)");
  double sum = 0.0;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    double g2 = 0.0;
    for (const auto& g : gradient) g2 += g[i] * g[i];
    if (g2 == 0.0) continue;
    const double p = std::clamp(field.values[i], eps, 1.0 - eps);
    sum += g2 / (p * (1.0 - p));
  }
  return sum * field.cell_volume();
}

/// Fisher rate of a field, differentiating it spectrally as given.
inline double fisher_information(const GridField& field, double eps = kFisherClamp) {
  GridField as_points = field;
  as_points.sampling = Sampling::Point;
  HeatChannel channel(as_points);
  return fisher_information(field, channel.gradient_at(0.0), eps);
}

/// sum_cells |p_t - p_0| * cell volume.
inline double l1_jump(const GridField& field0, const GridField& fieldt) {
  if (!field0.same_grid(fieldt)) throw Error(ErrorKind::GridMismatch, "euclidean_flow", "fields live on different grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < field0.values.size(); ++i) sum += std::abs(fieldt.values[i] - field0.values[i]);
  return sum * field0.cell_volume();
}

struct EntropySample {
  double t = 0.0;
  double entropy = 0.0;
  double fisher = 0.0;
  double l1_jump = 0.0;
  double mutual_info = 0.0;
};

/// I(L; Y_t) = H(L) - H(L | Y_t), with H(L) = h(v) times the domain volume.
inline double mutual_information(const EntropySample& sample, double v, double domain_volume = 1.0) {
  if (!(v > 0.0 && v < 1.0)) throw Error(ErrorKind::InvalidArgument, "euclidean_flow", "volume fraction must lie in (0,1)");
  return binary_entropy(v) * domain_volume - sample.entropy;
}

/// Times at which the layer sqrt(2t) is resolved by 4 cells and stays 6
/// layer widths away from the nearest periodic image.
struct TimeBounds {
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool empty() const { return !(t_lo <= t_hi); }
  bool contains(double t) const { return t >= t_lo * (1.0 - 1e-12) && t <= t_hi * (1.0 + 1e-12); }
};

inline constexpr double kLayerCells = 4.0;
inline constexpr double kImageWidths = 6.0;

inline TimeBounds resolved_time_bounds(double spacing, double clearance) {
  const double lo = kLayerCells * spacing;
  const double hi = clearance / kImageWidths;
  return {0.5 * lo * lo, std::isfinite(hi) ? 0.5 * hi * hi : std::numeric_limits<double>::infinity()};
}

struct CurveOptions {
  RasterMode mode = RasterMode::Coverage;
  double fisher_eps = kFisherClamp;
  bool enforce_window = true;
};

struct EntropyCurve {
  SpaceSpec space;
  SetSpec set;
  std::vector<EntropySample> samples;
  double volume_fraction = 0.0;
  double domain_volume = 1.0;
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> box{1.0, 1.0, 1.0};
  RasterMode mode = RasterMode::Coverage;
  double spacing = 0.0;
  double clearance = 0.0;
  double max_clamp = 0.0;
};

inline void check_times(const std::vector<double>& ts, const char* module) {
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < 0.0) throw Error(ErrorKind::NegativeTime, module, "sample times must be nonnegative");
    if (i > 0 && !(ts[i] > ts[i - 1]))
      throw Error(ErrorKind::InvalidArgument, module, "sample times must be strictly increasing");
  }
}

/// Samples every functional of the heat channel of one set.
inline EntropySample sample_channel(const HeatChannel& channel, double t, double v, double eps, double* clamp = nullptr) {
  EntropySample s;
  s.t = t;
  const GridField& field0 = channel.initial();
  if (t == 0.0) {
    // p_0 is the indicator itself.
    s.entropy = 0.0;
    s.fisher = std::numeric_limits<double>::infinity();
    s.l1_jump = 0.0;
  } else {
    GridField field = channel.field_at(t);
    if (clamp) *clamp = std::max(*clamp, field.clamp_excess);
    s.entropy = entropy_functional(field);
    s.fisher = fisher_information(field, channel.gradient_at(t), eps);
    s.l1_jump = l1_jump(field0, field);
  }
  s.mutual_info = mutual_information(s, v, field0.domain_volume());
  return s;
}

inline EntropyCurve entropy_curve(const SetSpec& set, std::array<int, 3> shape, std::array<double, 3> box,
                                  const std::vector<double>& t_list, const CurveOptions& opt = {}) {
  check_times(t_list, "euclidean_flow");
  EntropyCurve curve;
  curve.space = SpaceSpec::euclidean(set.dimension);
  curve.set = set;
  curve.mode = opt.mode;
  GridField field0 = rasterize(set, shape, box, opt.mode);
  curve.shape = field0.shape;
  curve.box = field0.box;
  curve.spacing = field0.max_spacing();
  curve.clearance = clearance(set, field0.box);
  curve.domain_volume = field0.domain_volume();
  curve.volume_fraction = field0.mean();
  if (!(curve.volume_fraction > 0.0 && curve.volume_fraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "euclidean_flow", "set must have volume fraction in (0,1)");
  if (opt.enforce_window) {
    const auto bounds = resolved_time_bounds(curve.spacing, curve.clearance);
    for (double t : t_list)
      if (t > 0.0 && !bounds.contains(t))
        throw Error(ErrorKind::UnresolvedTime, "euclidean_flow",
                    "t = " + std::to_string(t) + " outside resolved window [" + std::to_string(bounds.t_lo) + ", " +
                        std::to_string(bounds.t_hi) + "]");
  }
  HeatChannel channel(std::move(field0));
  for (double t : t_list)
    curve.samples.push_back(sample_channel(channel, t, curve.volume_fraction, opt.fisher_eps, &curve.max_clamp));
  return curve;
}

struct DissipationPoint {
  double t = 0.0;
  double dH_dt = 0.0;   // centered difference (H(t+d) - H(t-d)) / (2d), d = t * rel_step
  double fisher = 0.0;  // I_t
  double relative_residual = 0.0;
};

/// Checks dH/dt = +I_t by centered differences along one channel.
inline std::vector<DissipationPoint> dissipation_check(const HeatChannel& channel, const std::vector<double>& t_list,
                                                       double rel_step = 1.0 / 20.0, double eps = kFisherClamp) {
  std::vector<DissipationPoint> out;
  for (double t : t_list) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "euclidean_flow", "dissipation check needs t > 0");
    const double d = t * rel_step;
    DissipationPoint p;
    p.t = t;
    p.dH_dt = (entropy_functional(channel.field_at(t + d)) - entropy_functional(channel.field_at(t - d))) / (2.0 * d);
    GridField f = channel.field_at(t);
    p.fisher = fisher_information(f, channel.gradient_at(t), eps);
    p.relative_residual = std::abs(p.dH_dt - p.fisher) / p.fisher;
    out.push_back(p);
  }
  return out;
}

}  // namespace diffperim
