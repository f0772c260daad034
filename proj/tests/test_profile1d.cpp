#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "diffperim/profile1d.hpp"
#include "diffperim/quadrature.hpp"

using namespace diffperim;

namespace {

// Composite Simpson on [a, b] with n (even) panels; independent of quad::.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

TEST(GaussianCdf, CenterAndReflection) {
  EXPECT_EQ(gaussian_cdf(0.0), 0.5);
  for (double u : {0.3, 1.7, 4.0}) EXPECT_NEAR(gaussian_cdf(u), 1.0 - gaussian_cdf(-u), 2e-16);
}

TEST(GaussianCdf, ReflectionOverRandomArguments) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-8.0, 8.0);
  for (int i = 0; i < 1000; ++i) {
    const double u = U(rng);
    EXPECT_NEAR(gaussian_cdf(u) + gaussian_cdf(-u), 1.0, 4.5e-16);
  }
}

TEST(GaussianCdf, OneSigmaAgainstSimpsonOfDensity) {
  const double oracle = 0.5 + simpson(pdf, 0.0, 1.0, 2000);
  EXPECT_NEAR(gaussian_cdf(1.0), oracle, 1e-13);
  EXPECT_NEAR(gaussian_cdf(1.0), 0.841345, 1e-6);
}

TEST(GaussianCdf, Monotone) {
  double prev = 0.0;
  for (double u = -40.0; u <= 40.0; u += 0.01) {
    const double p = gaussian_cdf(u);
    EXPECT_GE(p, prev);
    prev = p;
  }
  EXPECT_EQ(gaussian_cdf(-40.0), 0.0);
  EXPECT_EQ(gaussian_cdf(40.0), 1.0);
}

TEST(GaussianCdf, DeepTailRelativeAccuracy) {
  // Mills ratio asymptotics: sf(u) ~ phi(u)/u (1 - 1/u^2 + 3/u^4 - 15/u^6).
  const double u = 30.0;
  const double series = pdf(u) / u * (1.0 - 1.0 / (u * u) + 3.0 / std::pow(u, 4) - 15.0 / std::pow(u, 6));
  EXPECT_NEAR(gaussian_sf(u) / series, 1.0, 1e-8);
}

TEST(GaussianQuantile, InvertsCdf) {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) EXPECT_NEAR(gaussian_cdf(gaussian_quantile(p)), p, 1e-14 + 1e-12 * p);
}

TEST(BinaryEntropy, EndpointsAndMaximum) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_EQ(binary_entropy(1e-301), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), std::log(2.0), 1e-16);
  for (double p = 0.001; p < 1.0; p += 0.001) EXPECT_LE(binary_entropy(p), std::log(2.0));
}

TEST(BinaryEntropy, ValueAtOneSigma) {
  // Long-double evaluation as the extended-precision oracle.
  const long double p = 0.841345L;
  const long double h = -p * std::log(p) - (1.0L - p) * std::log(1.0L - p);
  EXPECT_NEAR(binary_entropy(0.841345), static_cast<double>(h), 1e-15);
  EXPECT_NEAR(binary_entropy(0.841345), 0.4374328173011876, 1e-15);
}

TEST(BinaryEntropy, Symmetry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = U(rng);
    EXPECT_NEAR(binary_entropy(p), binary_entropy(1.0 - p), 1e-15);
  }
}

TEST(HalfspaceProfile, Values) {
  for (double t : {1e-6, 1e-2, 3.0}) EXPECT_EQ(halfspace_profile(0.0, t), 0.5);
  const double t = 0.01;
  EXPECT_NEAR(halfspace_profile(std::sqrt(2.0 * t), t), gaussian_cdf(1.0), 1e-16);
  EXPECT_NEAR(halfspace_profile(0.1, 1e-8), 1.0, 1e-15);
  EXPECT_NEAR(halfspace_profile(-0.1, 1e-8), 0.0, 1e-15);
  EXPECT_THROW(halfspace_profile(0.1, 0.0), Error);
}

TEST(HalfspaceProfile, L1JumpIsTwoOverRootPiTimesRootT) {
  for (double t : {1e-4, 1e-2, 1.0}) {
    const double w = std::sqrt(2.0 * t);
    // |p - 1_{s>0}| = Phi(-|s|/w) on both sides.
    const double one_side =
        quad::adaptive([&](double s) { return gaussian_cdf(-s / w); }, 0.0, 40.0 * w, 1e-14).value;
    EXPECT_NEAR(2.0 * one_side, 2.0 / std::sqrt(std::numbers::pi) * std::sqrt(t), 1e-8);
  }
}

TEST(ProfileConstants, ExactValues) {
  const auto c = profile_constants(1e-10);
  EXPECT_NEAR(c.l1_constant, 2.0 / std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_NEAR(c.tail_integral, 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-10);
  EXPECT_NEAR(c.c_universal, std::sqrt(2.0) * c.entropy_integral, 1e-15);
  EXPECT_GT(c.c_universal, 2.55);
  EXPECT_LT(c.c_universal, 2.56);
  EXPECT_LE(c.max_error_estimate, 1e-10);
}

TEST(ProfileConstants, TwoQuadraturesOfC) {
  const auto c = profile_constants(1e-10);
  EXPECT_NEAR(universal_constant_romberg(1e-10), c.c_universal, 1e-8);
  EXPECT_NEAR(c.c_universal, kUniversalC, 1e-11);
}

TEST(ProfileConstants, FisherIntegralEqualsEntropyIntegral) {
  const auto c = profile_constants(1e-10);
  EXPECT_NEAR(c.fisher_integral, c.entropy_integral, 1e-8);
}

TEST(Quadrature, KnownIntegrals) {
  EXPECT_NEAR(quad::adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13).value, 2.0, 1e-13);
  EXPECT_NEAR(quad::romberg([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12).value, std::exp(1.0) - 1.0, 1e-12);
  EXPECT_THROW(quad::adaptive([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)) * std::sin(1.0 / (x - 0.3)); },
                              0.0, 1.0, 1e-15, 50),
               Error);
}
