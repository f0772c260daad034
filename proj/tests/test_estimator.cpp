#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "diffperim/estimator.hpp"

using namespace diffperim;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<EntropySample> synthetic(const std::vector<double>& ts, double a, double b) {
  std::vector<EntropySample> out;
  for (double t : ts) {
    EntropySample s;
    s.t = t;
    s.entropy = a * std::sqrt(t) + b * t * std::sqrt(t);
    s.l1_jump = 0.01 + 2.0 * std::sqrt(t);
    out.push_back(s);
  }
  return out;
}

std::vector<double> log_times(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return t;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;  // sentinel: nothing thrown
}

}  // namespace

TEST(Fit, RecoversSyntheticCoefficients) {
  const auto ts = log_times(1e-5, 1e-3, 12);
  const FitWindow w{ts.front(), ts.back(), 0, 0};
  const auto r = fit_entropy_expansion(synthetic(ts, 3.0, -5.0), w);
  EXPECT_NEAR(r.a, 3.0, 1e-10);
  EXPECT_NEAR(r.b, -5.0, 1e-10);
  EXPECT_NEAR(r.per_est, 3.0 / kUniversalC, 1e-10);
  EXPECT_LT(r.residual_rms, 1e-14);
  EXPECT_EQ(r.samples_used, 12);
  EXPECT_LT(r.condition, 1e3);
}

TEST(Fit, NegativeLeadingCoefficientClampsPerimeter) {
  const auto ts = log_times(1e-5, 1e-3, 10);
  const auto r = fit_entropy_expansion(synthetic(ts, -1.0, 0.0), {ts.front(), ts.back(), 0, 0});
  EXPECT_EQ(r.per_est, 0.0);
}

TEST(Fit, TooFewSamplesAndIllConditioning) {
  const auto few = log_times(1e-5, 1e-3, 7);
  EXPECT_EQ(kind_of([&] { fit_entropy_expansion(synthetic(few, 1, 0), {few.front(), few.back(), 0, 0}); }),
            ErrorKind::NoResolvedWindow);
  std::vector<double> clustered;
  for (int i = 0; i < 10; ++i) clustered.push_back(1e-4 * (1.0 + 1e-9 * i));
  EXPECT_EQ(kind_of([&] {
              fit_entropy_expansion(synthetic(clustered, 1, 0), {clustered.front(), clustered.back(), 0, 0});
            }),
            ErrorKind::IllConditioned);
}

TEST(Fit, L1SlopeWithOffset) {
  const auto ts = log_times(1e-5, 1e-3, 12);
  const auto f = l1_slope_fit(synthetic(ts, 1, 0), {ts.front(), ts.back(), 0, 0});
  EXPECT_NEAR(f.intercept, 0.01, 1e-12);
  EXPECT_NEAR(f.slope, 2.0, 1e-10);
}

TEST(Window, DiscAt1024) {
  const double h = 1.0 / 1024, clear = 0.3;
  const auto ts = resolved_log_times(h, clear, 12);
  EXPECT_NEAR(ts.front(), 8.0 * h * h, 1e-18);
  EXPECT_NEAR(ts.back(), clear * clear / 72.0, 1e-15);
  const auto w = window_select(h, clear, ts);
  EXPECT_GE(std::sqrt(2 * w.t_min), 4 * h * (1 - 1e-12));
  EXPECT_GE(clear, 6 * std::sqrt(2 * w.t_max) * (1 - 1e-12));
  EXPECT_NEAR(w.resolution_margin, 4.0, 1e-9);
  EXPECT_NEAR(w.image_margin, 6.0, 1e-9);
}

TEST(Window, CoarseGridAndSingleTime) {
  EXPECT_EQ(kind_of([] { window_select(1.0 / 64, 0.05, log_times(1e-5, 1e-2, 20)); }), ErrorKind::NoResolvedWindow);
  EXPECT_EQ(kind_of([] { window_select(1.0 / 1024, 0.3, {1e-4}); }), ErrorKind::NoResolvedWindow);
  EXPECT_EQ(kind_of([] { window_select(1.0 / 1024, 0.3, {}); }), ErrorKind::InvalidArgument);
}

TEST(Perimeter, DiscSquareAndTwoDiscs) {
  const auto constants = profile_constants();
  struct Case {
    SetSpec set;
    double per;
    double tol;
  };
  const double side = std::sqrt(pi) * 0.2;
  const double r2 = 0.2 / std::sqrt(2.0);
  const std::vector<Case> cases = {
      {{2, {Ball{{0.5, 0.5}, 0.2}}, 0.0, "disc"}, 2 * pi * 0.2, 0.01},
      {{2, {Box{{0.5 - side / 2, 0.5 - side / 2}, {0.5 + side / 2, 0.5 + side / 2}}}, 0.0, "square"}, 4 * side, 0.015},
      {{2, {Ball{{0.3, 0.3}, r2}, Ball{{0.7, 0.7}, r2}}, 0.0, "two_discs"}, 4 * pi * r2, 0.015},
  };
  for (const auto& c : cases) {
    const double clear = clearance(c.set, {1, 1, 1});
    const auto ts = resolved_log_times(1.0 / 1024, clear, 12);
    const auto curve = entropy_curve(c.set, {1024, 1024, 1}, {1, 1, 1}, ts);
    const auto r = perimeter_estimate(curve, constants);
    EXPECT_NEAR(r.per_est / c.per, 1.0, c.tol) << c.set.name;
    EXPECT_NEAR(r.pure_limit_est / r.per_est, 1.0, 0.02) << c.set.name;
    EXPECT_GT(r.per_est, 2 * pi * 0.2 * 0.999) << c.set.name;
  }
}

TEST(Curvature, SyntheticEqualityAndNotApplicable) {
  FitReport r;
  const double per = 2 * pi;
  r.b = -kUniversalC * per;
  const auto c = curvature_coefficient_check(r, SpaceSpec::sphere(2), per, true);
  EXPECT_NEAR(c.relative_error, 0.0, 1e-15);
  EXPECT_TRUE(c.inequality_holds);
  r.b = -0.5 * kUniversalC * per;
  EXPECT_FALSE(curvature_coefficient_check(r, SpaceSpec::sphere(2), per, false).inequality_holds);
  EXPECT_EQ(kind_of([&] { curvature_coefficient_check(r, SpaceSpec::euclidean(2), per, false); }),
            ErrorKind::NotApplicable);
  EXPECT_NEAR(mean_curvature_prediction(2.0, 1.0, 0.0), -kUniversalC, 1e-15);
}

TEST(Dominance, SquareAboveBall) {
  const double side = std::sqrt(pi) * 0.2;
  SetSpec sq{2, {Box{{0.5 - side / 2, 0.5 - side / 2}, {0.5 + side / 2, 0.5 + side / 2}}}, 0.0, "square"};
  const auto ball = volume_matched_ball(sq, {1, 1, 1});
  const double clear = std::min(clearance(sq, {1, 1, 1}), clearance(ball, {1, 1, 1}));
  const auto ts = resolved_log_times(1.0 / 1024, clear, 10);
  const auto r = compare_to_ball(sq, {1024, 1024, 1}, {1, 1, 1}, ts);
  EXPECT_TRUE(r.dominated);
  EXPECT_GT(r.min_difference, 0.0);
  EXPECT_NEAR(r.edge_gap / r.analytic_gap, 1.0, 0.05);
  EXPECT_GT(r.fit_gap, 0.0);
}

TEST(RadialWindow, UsesBothEnds) {
  const auto mesh = make_radial_mesh(SpaceSpec::sphere(2), 2.5, 1e-4, 1e-2);
  const auto w = radial_window(mesh, 2.5, log_times(1e-5, 1e-2, 40));
  EXPECT_LE(6 * std::sqrt(2 * w.t_max), pi - 2.5 + 1e-12);
}
