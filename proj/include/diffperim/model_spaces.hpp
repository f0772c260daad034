#pragma once

// Constant-curvature model computations: geodesic-ball volumes and
// isoperimetric profiles, radial heat flow of caps and bands, the model
// entropy H_mod(v, t; K, n), and Ornstein-Uhlenbeck closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "diffperim/diffusion1d.hpp"
#include "diffperim/error.hpp"
#include "diffperim/euclidean_flow.hpp"
#include "diffperim/profile1d.hpp"
#include "diffperim/quadrature.hpp"
#include "diffperim/set_geometry.hpp"
#include "diffperim/space.hpp"

namespace diffperim {

inline double model_volume(const SpaceSpec& space, double r) { return model_ball_volume(space.n, space.K, r); }

/// Total measure of a compact model (sphere); infinite otherwise.
inline double model_total_volume(const SpaceSpec& space) {
  if (space.kind == SpaceKind::Sphere) return model_volume(space, std::numbers::pi / std::sqrt(space.K));
  if (space.kind == SpaceKind::Gaussian) return 1.0;
  return std::numeric_limits<double>::infinity();
}

/// Geodesic radius of the cap of volume v. For the sphere and Gaussian space
/// v is a fraction of the total measure; for Euclidean and hyperbolic models
/// it is an absolute volume. In Gaussian space the "radius" is the threshold
/// a of the half-space {x_1 <= a}.
inline double cap_radius_for_volume(const SpaceSpec& space, double v) {
  space.validate();
  if (space.kind == SpaceKind::Gaussian) return gaussian_quantile(v);
  if (space.kind == SpaceKind::Sphere) {
    if (!(v > 0.0 && v < 1.0)) throw Error(ErrorKind::InvalidArgument, "model_spaces", "volume fraction must lie in (0,1)");
  } else if (!(v > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "model_spaces", "volume must be positive");
  }
  if (space.kind == SpaceKind::Euclidean) return std::pow(v / unit_ball_volume(space.n), 1.0 / space.n);
  const double target = space.kind == SpaceKind::Sphere ? v * model_total_volume(space) : v;
  double lo = 0.0;
  double hi = space.kind == SpaceKind::Sphere ? std::numbers::pi / std::sqrt(space.K) : 1.0;
  if (space.kind != SpaceKind::Sphere)
    while (model_volume(space, hi) < target) {
      hi *= 2.0;
      if (hi > 1e3) throw Error(ErrorKind::NonConvergence, "model_spaces", "cap radius bracket overflow");
    }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (model_volume(space, mid) < target ? lo : hi) = mid;
    if (hi - lo <= 1e-13 * hi) return 0.5 * (lo + hi);
  }
  throw Error(ErrorKind::NonConvergence, "model_spaces", "cap radius bisection did not converge");
}

/// Boundary measure of the volume-v cap (Euclidean: n omega_n^{1/n} v^{(n-1)/n};
/// Gaussian: phi(Phi^{-1}(v))).
inline double isoperimetric_profile(const SpaceSpec& space, double v) {
  space.validate();
  if (space.kind == SpaceKind::Gaussian) return gaussian_pdf(gaussian_quantile(v));
  if (space.kind == SpaceKind::Euclidean)
    return space.n * std::pow(unit_ball_volume(space.n), 1.0 / space.n) * std::pow(v, (space.n - 1.0) / space.n);
  const double r = cap_radius_for_volume(space, v);
  return unit_sphere_area(space.n) * std::pow(space.s(r), space.n - 1);
}

/// Uniform radial mesh over [0, r_max] carrying the weight s_K(r)^{n-1}.
struct RadialMesh {
  SpaceSpec space;
  double r_max = 0.0;
  int m = 0;
  double spacing() const { return r_max / m; }
};

inline constexpr int kMinRadialCells = 4096;

/// Mesh with at least `min_cells` cells and spacing <= sqrt(2 t_min)/4.
/// Sphere: r_max = pi/sqrt(K). Euclidean/hyperbolic: r_max = r_v +
/// max(8 sqrt(2 t_max), 2), with r_v placed on a cell face.
inline RadialMesh make_radial_mesh(const SpaceSpec& space, double r_v, double t_min, double t_max,
                                   int min_cells = kMinRadialCells) {
  space.validate();
  if (space.kind == SpaceKind::Gaussian)
    throw Error(ErrorKind::NotApplicable, "model_spaces", "Gaussian space uses the closed-form semigroup");
  const double layer_h = t_min > 0.0 ? std::sqrt(2.0 * t_min) / 4.0 : std::numeric_limits<double>::infinity();
  RadialMesh mesh{space, 0.0, 0};
  if (space.kind == SpaceKind::Sphere) {
    mesh.r_max = std::numbers::pi / std::sqrt(space.K);
    mesh.m = std::max(min_cells, static_cast<int>(std::ceil(mesh.r_max / layer_h)));
    mesh.m += mesh.m % 2;
    return mesh;
  }
  const double reach = r_v + std::max(8.0 * std::sqrt(2.0 * t_max), 2.0);
  const double h0 = std::min(reach / min_cells, layer_h);
  const double faces_to_cap = std::max(1.0, std::ceil(r_v / h0));
  const double h = r_v / faces_to_cap;
  mesh.m = static_cast<int>(std::ceil(reach / h - 1e-9));
  mesh.r_max = mesh.m * h;
  return mesh;
}

inline WeightedDiffusion1D radial_solver(const RadialMesh& mesh) {
  const SpaceSpec space = mesh.space;
  return WeightedDiffusion1D(0.0, mesh.r_max, mesh.m,
                             [space](double r) { return std::pow(space.s(r), space.n - 1); });
}

/// Radial heat flow dp/dt = p'' + (n-1)(s_K'/s_K) p' on the mesh with zero
/// flux at both ends.
inline std::vector<double> radial_semigroup(const RadialMesh& mesh, const std::vector<double>& p0, double t,
                                            double tol = 1e-8) {
  for (double v : p0)
    if (v < 0.0 || v > 1.0) throw Error(ErrorKind::InvalidArgument, "model_spaces", "initial field must lie in [0,1]");
  WeightedDiffusion1D::Options opt;
  opt.tol = tol;
  return radial_solver(mesh).advance(p0, t, opt);
}

/// A union of radial shells [r_lo, r_hi] (a cap is [0, r_v], a band [r1, r2]).
using RadialRegion = std::vector<std::pair<double, double>>;

struct RadialCurve {
  RadialMesh mesh;
  RadialRegion region;
  double volume = 0.0;        // ambient measure of the region
  double total_volume = 0.0;  // ambient measure of the mesh domain
  std::vector<EntropySample> samples;
};

/// Entropy samples of the radial heat channel started from a region.
inline RadialCurve radial_entropy_curve(const RadialMesh& mesh, const RadialRegion& region,
                                        const std::vector<double>& t_list, double tol = 1e-8) {
  check_times(t_list, "model_spaces");
  const auto solver = radial_solver(mesh);
  const SpaceSpec space = mesh.space;
  auto weight = [space](double r) { return std::pow(space.s(r), space.n - 1); };
  std::vector<double> p0(mesh.m, 0.0);
  for (auto [a, b] : region) {
    auto cov = solver.coverage(a, b, weight);
    for (int i = 0; i < mesh.m; ++i) p0[i] = std::min(1.0, p0[i] + cov[i]);
  }
  const double angular = unit_sphere_area(space.n);
  RadialCurve out;
  out.mesh = mesh;
  out.region = region;
  out.total_volume = angular * solver.total_mass();
  out.volume = angular * solver.weighted_sum(p0);
  const double fraction = out.volume / out.total_volume;
  WeightedDiffusion1D::Options opt;
  opt.tol = tol;
  const double h = solver.spacing();
  for (double t : t_list) {
    EntropySample s;
    s.t = t;
    if (t == 0.0) {
      s.fisher = std::numeric_limits<double>::infinity();
    } else {
      auto p = solver.advance(p0, t, opt);
      double ent = 0.0, l1 = 0.0, fisher = 0.0;
      const auto& mass = solver.cell_mass();
      for (int i = 0; i < mesh.m; ++i) {
        ent += binary_entropy(std::clamp(p[i], 0.0, 1.0)) * mass[i];
        l1 += std::abs(p[i] - p0[i]) * mass[i];
      }
      // Face-centered gradient weighted by the face measure.
      for (int f = 1; f < mesh.m; ++f) {
        const double g = (p[f] - p[f - 1]) / h;
        const double pf = std::clamp(0.5 * (p[f] + p[f - 1]), kFisherClamp, 1.0 - kFisherClamp);
        fisher += g * g / (pf * (1.0 - pf)) * weight(f * h) * h;
      }
      s.entropy = angular * ent;
      s.l1_jump = angular * l1;
      s.fisher = angular * fisher;
    }
    s.mutual_info = binary_entropy(fraction) * out.total_volume - s.entropy;
    out.samples.push_back(s);
  }
  return out;
}

/// Ornstein-Uhlenbeck entropy of the half-space {x_1 <= a}:
/// int h(Phi((a - e^{-t} x)/sqrt(1 - e^{-2t}))) phi(x) dx.
inline double gaussian_halfspace_entropy(double a, double t, double tol = 1e-10) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "model_spaces", "Gaussian entropy needs t > 0");
  // In the ambient variable x the layer variable is u = x / w + centre with
  // p = Phi(-u); the layer lives on |u| <= cutoff and the weight phi(x) on |x| <= 40.
  const double sigma = std::sqrt(-std::expm1(-2.0 * t));
  const double w = sigma * std::exp(t);
  const double centre = -a / sigma;
  auto integrand = [&](double x) { return binary_entropy(gaussian_sf(x / w + centre)) * gaussian_pdf(x); };
  const double cutoff = profile_detail::truncation_for(tol);
  const double lo = std::max(-40.0, w * (-cutoff - centre));
  const double hi = std::min(40.0, w * (cutoff - centre));
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts = {lo, hi};
  for (double c : {0.0, -w * centre})
    if (c > lo && c < hi) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += quad::adaptive(integrand, cuts[i], cuts[i + 1], tol / 3.0).value;
  return total;
}

/// Closed-form OU evolution of 1_{x_1 <= a} evaluated at x.
inline double gaussian_halfspace_profile(double x, double a, double t) {
  return gaussian_cdf((a - std::exp(-t) * x) / std::sqrt(-std::expm1(-2.0 * t)));
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Mehler-formula average E[1{e^{-t} x + sqrt(1-e^{-2t}) Y <= a}], Y ~ N(0,1).
inline MonteCarloEstimate mehler_monte_carlo(double x, double a, double t, std::int64_t samples,
                                             std::uint64_t seed = 20240611) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double decay = std::exp(-t);
  const double sigma = std::sqrt(-std::expm1(-2.0 * t));
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < samples; ++i) hits += (decay * x + sigma * normal(rng) <= a);
  const double p = static_cast<double>(hits) / samples;
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / samples) / samples)};
}

struct ModelEntropyTable {
  SpaceSpec space;
  double v = 0.0;
  double r_v = 0.0;
  double r_max = 0.0;
  int m = 0;
  std::vector<EntropySample> samples;
};

/// H_mod(v, t; K, n) over a time list: the entropy of the volume-v cap.
inline ModelEntropyTable model_entropy_table(const SpaceSpec& space, double v, const std::vector<double>& t_list,
                                             int min_cells = kMinRadialCells, double tol = 1e-8) {
  check_times(t_list, "model_spaces");
  ModelEntropyTable table;
  table.space = space;
  table.v = v;
  table.r_v = cap_radius_for_volume(space, v);
  if (space.kind == SpaceKind::Gaussian) {
    for (double t : t_list) {
      EntropySample s;
      s.t = t;
      s.entropy = t > 0.0 ? gaussian_halfspace_entropy(table.r_v, t) : 0.0;
      s.fisher = std::numeric_limits<double>::quiet_NaN();
      s.l1_jump = std::numeric_limits<double>::quiet_NaN();
      s.mutual_info = binary_entropy(v) - s.entropy;
      table.samples.push_back(s);
    }
    return table;
  }
  double t_min = 0.0, t_max = 0.0;
  for (double t : t_list)
    if (t > 0.0) {
      t_min = t_min == 0.0 ? t : std::min(t_min, t);
      t_max = std::max(t_max, t);
    }
  const RadialMesh mesh = make_radial_mesh(space, table.r_v, t_min, t_max, min_cells);
  table.r_max = mesh.r_max;
  table.m = mesh.m;
  table.samples = radial_entropy_curve(mesh, {{0.0, table.r_v}}, t_list, tol).samples;
  return table;
}

inline double model_entropy(const SpaceSpec& space, double v, double t, int min_cells = kMinRadialCells) {
  return model_entropy_table(space, v, {t}, min_cells).samples.front().entropy;
}

}  // namespace diffperim
