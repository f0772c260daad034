#pragma once

// From entropy curves to geometry: fit windows, weighted fits of
// H(t) = a sqrt(t) + b t^{3/2}, perimeter recovery, curvature checks and
// set-versus-ball comparisons.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "diffperim/error.hpp"
#include "diffperim/euclidean_flow.hpp"
#include "diffperim/model_spaces.hpp"
#include "diffperim/profile1d.hpp"
#include "diffperim/set_geometry.hpp"
#include "diffperim/space.hpp"

namespace diffperim {

inline constexpr int kMinFitSamples = 8;
inline constexpr double kMaxConditionNumber = 1e8;

struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
  double resolution_margin = 0.0;  // sqrt(2 t_min) / spacing
  double image_margin = 0.0;       // clearance / sqrt(2 t_max)
  bool contains(double t) const { return t >= t_min * (1.0 - 1e-12) && t <= t_max * (1.0 + 1e-12); }
};

/// Largest run of candidate times with sqrt(2 t) >= 4 spacing and
/// clearance >= 6 sqrt(2 t), holding at least `min_samples` of them.
inline FitWindow window_select(double spacing, double clearance, const std::vector<double>& candidates,
                               int min_samples = kMinFitSamples) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "estimator", "no candidate times");
  const auto bounds = resolved_time_bounds(spacing, clearance);
  std::vector<double> inside;
  for (double t : candidates)
    if (t > 0.0 && bounds.contains(t)) inside.push_back(t);
  if (static_cast<int>(inside.size()) < min_samples) {
    std::string why = bounds.empty() ? "grid too coarse for the set clearance" : "too few candidate times resolved";
    throw Error(ErrorKind::NoResolvedWindow, "estimator",
                why + " (" + std::to_string(inside.size()) + " of " + std::to_string(min_samples) +
                    " needed; resolved range [" + std::to_string(bounds.t_lo) + ", " + std::to_string(bounds.t_hi) +
                    "])");
  }
  const auto [lo, hi] = std::minmax_element(inside.begin(), inside.end());
  FitWindow w;
  w.t_min = *lo;
  w.t_max = *hi;
  w.resolution_margin = std::sqrt(2.0 * w.t_min) / spacing;
  w.image_margin = clearance / std::sqrt(2.0 * w.t_max);
  return w;
}

/// Log-spaced times filling the resolved window of a grid.
inline std::vector<double> resolved_log_times(double spacing, double clearance, int count) {
  const auto b = resolved_time_bounds(spacing, clearance);
  if (b.empty() || !std::isfinite(b.t_hi))
    throw Error(ErrorKind::NoResolvedWindow, "estimator", "no finite resolved window");
  std::vector<double> ts(count);
  for (int i = 0; i < count; ++i)
    ts[i] = b.t_lo * std::pow(b.t_hi / b.t_lo, count > 1 ? static_cast<double>(i) / (count - 1) : 0.0);
  ts.front() = b.t_lo;
  ts.back() = b.t_hi;
  return ts;
}

struct FitReport {
  double a = 0.0;
  double b = 0.0;
  double per_est = 0.0;
  double curvature_est = std::numeric_limits<double>::quiet_NaN();
  double residual_rms = 0.0;  // unweighted rms of H - fit over the window
  double pure_limit_est = 0.0;  // H(t_min) / (C sqrt(t_min))
  double condition = 0.0;     // of the column-equilibrated normal matrix
  FitWindow window;
  int samples_used = 0;
};

namespace estimator_detail {

/// Weighted least squares y ~ c0 f0(t) + c1 f1(t); returns {c0, c1, cond}.
template <class F0, class F1>
std::array<double, 3> fit2(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& w,
                           F0 f0, F1 f1) {
  double n00 = 0, n01 = 0, n11 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double a = f0(t[i]), b = f1(t[i]);
    n00 += w[i] * a * a;
    n01 += w[i] * a * b;
    n11 += w[i] * b * b;
    r0 += w[i] * a * y[i];
    r1 += w[i] * b * y[i];
  }
  if (!(n00 > 0.0 && n11 > 0.0)) return {0.0, 0.0, std::numeric_limits<double>::infinity()};
  const double s0 = 1.0 / std::sqrt(n00), s1 = 1.0 / std::sqrt(n11);
  const double rho = n01 * s0 * s1;  // equilibrated matrix [[1, rho], [rho, 1]]
  const double cond = std::abs(rho) >= 1.0 ? std::numeric_limits<double>::infinity()
                                           : (1.0 + std::abs(rho)) / (1.0 - std::abs(rho));
  const double det = 1.0 - rho * rho;
  const double g0 = r0 * s0, g1 = r1 * s1;
  return {s0 * (g0 - rho * g1) / det, s1 * (g1 - rho * g0) / det, cond};
}

}  // namespace estimator_detail

/// Weighted (1/t) least squares of H against {sqrt(t), t^{3/2}} over the window.
inline FitReport fit_entropy_expansion(const std::vector<EntropySample>& samples, const FitWindow& window,
                                       double c_universal = kUniversalC) {
  std::vector<double> t, y, w;
  for (const auto& s : samples)
    if (s.t > 0.0 && window.contains(s.t)) {
      t.push_back(s.t);
      y.push_back(s.entropy);
      w.push_back(1.0 / s.t);
    }
  if (static_cast<int>(t.size()) < kMinFitSamples)
    throw Error(ErrorKind::NoResolvedWindow, "estimator",
                "fit needs at least 8 samples in the window, found " + std::to_string(t.size()));
  auto [a, b, cond] = estimator_detail::fit2(
      t, y, w, [](double s) { return std::sqrt(s); }, [](double s) { return s * std::sqrt(s); });
  if (!(cond <= kMaxConditionNumber))
    throw Error(ErrorKind::IllConditioned, "estimator", "normal matrix condition number " + std::to_string(cond));
  FitReport r;
  r.a = a;
  r.b = b;
  r.condition = cond;
  r.window = window;
  r.samples_used = static_cast<int>(t.size());
  r.per_est = std::max(0.0, a / c_universal);
  if (r.per_est > 0.0) r.curvature_est = -b / (c_universal * r.per_est);
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = y[i] - a * std::sqrt(t[i]) - b * t[i] * std::sqrt(t[i]);
    ss += e * e;
  }
  r.residual_rms = std::sqrt(ss / t.size());
  const auto first = std::min_element(t.begin(), t.end()) - t.begin();
  r.pure_limit_est = y[first] / (c_universal * std::sqrt(t[first]));
  return r;
}

/// Fit window of a Euclidean curve from its own grid spacing and clearance.
inline FitWindow curve_window(const EntropyCurve& curve) {
  std::vector<double> ts;
  for (const auto& s : curve.samples) ts.push_back(s.t);
  return window_select(curve.spacing, curve.clearance, ts);
}

inline FitReport fit_entropy_expansion(const EntropyCurve& curve) {
  return fit_entropy_expansion(curve.samples, curve_window(curve));
}

struct PerimeterReport {
  FitReport fit;
  double per_est = 0.0;
  double pure_limit_est = 0.0;
};

inline PerimeterReport perimeter_estimate(const EntropyCurve& curve, const ProfileConstants& constants) {
  PerimeterReport r;
  r.fit = fit_entropy_expansion(curve.samples, curve_window(curve), constants.c_universal);
  r.per_est = r.fit.per_est;
  r.pure_limit_est = r.fit.pure_limit_est;
  return r;
}

/// Slope of the L1 jump against sqrt(t): weighted (1/t) fit of
/// l1 = alpha + beta sqrt(t). The intercept absorbs the O(h) offset left by
/// cells cut by the boundary.
struct L1Fit {
  double intercept = 0.0;
  double slope = 0.0;
  double condition = 0.0;
  int samples_used = 0;
};

inline L1Fit l1_slope_fit(const std::vector<EntropySample>& samples, const FitWindow& window) {
  std::vector<double> t, y, w;
  for (const auto& s : samples)
    if (s.t > 0.0 && window.contains(s.t)) {
      t.push_back(s.t);
      y.push_back(s.l1_jump);
      w.push_back(1.0 / s.t);
    }
  if (t.size() < 2) throw Error(ErrorKind::NoResolvedWindow, "estimator", "L1 fit needs samples in the window");
  auto [c0, c1, cond] = estimator_detail::fit2(
      t, y, w, [](double) { return 1.0; }, [](double s) { return std::sqrt(s); });
  if (!(cond <= kMaxConditionNumber))
    throw Error(ErrorKind::IllConditioned, "estimator", "L1 normal matrix condition number " + std::to_string(cond));
  return {c0, c1, cond, static_cast<int>(t.size())};
}

struct CurvatureCheck {
  bool equality_case = false;
  double predicted_b = 0.0;      // -C K Per
  double relative_error = 0.0;   // |b - predicted_b| / (C |K| Per), equality case only
  double slack = 0.0;            // allowed excess in the inequality form
  bool inequality_holds = false;  // b <= predicted_b + slack
};

/// Compares the fitted t^{3/2} coefficient with -C K Per. Equality cases
/// (totally geodesic boundary with Ric(n,n) = K) report a relative error;
/// all cases report the inequality b <= -C K Per + 5%.
inline CurvatureCheck curvature_coefficient_check(const FitReport& report, const SpaceSpec& space, double reference_per,
                                                  bool equality_case, double c_universal = kUniversalC,
                                                  double slack_fraction = 0.05) {
  space.validate();
  if (!(reference_per > 0.0)) throw Error(ErrorKind::InvalidArgument, "estimator", "reference perimeter must be positive");
  const double K = space.kind == SpaceKind::Gaussian ? 1.0 : space.K;
  if (space.kind == SpaceKind::Euclidean || K == 0.0)
    throw Error(ErrorKind::NotApplicable, "estimator",
                "K = 0: the t^{3/2} term carries only mean curvature; see mean_curvature_prediction");
  CurvatureCheck c;
  c.equality_case = equality_case;
  c.predicted_b = -c_universal * K * reference_per;
  c.slack = slack_fraction * c_universal * std::abs(K) * reference_per;
  if (equality_case) c.relative_error = std::abs(report.b - c.predicted_b) / (c_universal * std::abs(K) * reference_per);
  c.inequality_holds = report.b <= c.predicted_b + c.slack;
  return c;
}

/// -C * integral over the boundary of (H^2/2 + Ric(n,n)), for boundaries with
/// constant mean curvature H and Ric(n,n) = ric.
inline double mean_curvature_prediction(double boundary_measure, double mean_curvature, double ric,
                                        double c_universal = kUniversalC) {
  return -c_universal * boundary_measure * (0.5 * mean_curvature * mean_curvature + ric);
}

struct DominanceSample {
  double t = 0.0;
  double entropy_set = 0.0;
  double entropy_ball = 0.0;
  double difference = 0.0;
};

struct DominanceReport {
  std::string set_name;
  double volume = 0.0;
  double per_set = std::numeric_limits<double>::quiet_NaN();  // analytic when known
  double per_ball = 0.0;
  std::vector<DominanceSample> samples;
  double min_difference = 0.0;
  double edge_t = 0.0;
  double edge_gap = 0.0;      // (H_E - H_B) / (C sqrt(t)) at the smallest windowed t
  double fit_gap = 0.0;       // per_est(set) - per_est(ball)
  double analytic_gap = std::numeric_limits<double>::quiet_NaN();
  bool dominated = false;     // min_difference >= -1e-8
};

inline DominanceReport compare_to_ball(const SetSpec& set, std::array<int, 3> shape, std::array<double, 3> box,
                                       const std::vector<double>& t_list, const CurveOptions& opt = {}) {
  const SetSpec ball = volume_matched_ball(set, box);
  const auto curve_set = entropy_curve(set, shape, box, t_list, opt);
  const auto curve_ball = entropy_curve(ball, shape, box, t_list, opt);
  DominanceReport r;
  r.set_name = set.name;
  const auto ref_ball = reference_geometry(ball);
  r.volume = ref_ball.volume;
  r.per_ball = ref_ball.perimeter;
  try {
    const auto ref = reference_geometry(set);
    if (ref.exact) {
      r.per_set = ref.perimeter;
      r.analytic_gap = r.per_set - r.per_ball;
    }
  } catch (const Error&) {
  }
  r.min_difference = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve_set.samples.size(); ++i) {
    DominanceSample s;
    s.t = curve_set.samples[i].t;
    s.entropy_set = curve_set.samples[i].entropy;
    s.entropy_ball = curve_ball.samples[i].entropy;
    s.difference = s.entropy_set - s.entropy_ball;
    if (s.t > 0.0) r.min_difference = std::min(r.min_difference, s.difference);
    r.samples.push_back(s);
  }
  r.dominated = r.min_difference >= -1e-8;
  // Window of the tighter of the two curves.
  std::vector<double> ts;
  for (const auto& s : curve_set.samples) ts.push_back(s.t);
  const FitWindow w = window_select(curve_set.spacing, std::min(curve_set.clearance, curve_ball.clearance), ts);
  for (const auto& s : r.samples)
    if (w.contains(s.t) && (r.edge_t == 0.0 || s.t < r.edge_t)) {
      r.edge_t = s.t;
      r.edge_gap = s.difference / (kUniversalC * std::sqrt(s.t));
    }
  const auto fs = fit_entropy_expansion(curve_set.samples, w);
  const auto fb = fit_entropy_expansion(curve_ball.samples, w);
  r.fit_gap = fs.per_est - fb.per_est;
  return r;
}

/// Window for a radial model curve: the layer must be resolved by the mesh
/// and stay 6 widths from r = 0 and from the far end of the mesh.
inline FitWindow radial_window(const RadialMesh& mesh, double r_v, const std::vector<double>& candidates) {
  const double clear = std::min(r_v, mesh.r_max - r_v);
  return window_select(mesh.spacing(), clear, candidates);
}

}  // namespace diffperim
