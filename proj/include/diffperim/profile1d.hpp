#pragma once

// Scalar boundary-layer mathematics: Gaussian CDF/pdf, binary entropy and the
// integrals of the universal half-space profile Phi(s / sqrt(2t)).

#include <cmath>
#include <numbers>

#include "diffperim/error.hpp"
#include "diffperim/quadrature.hpp"

namespace diffperim {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;  // 1/sqrt(2 pi)

inline double gaussian_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

/// Phi(u). Evaluated through erfc so that both tails keep full relative
/// accuracy; Phi(u) + Phi(-u) = 1 up to rounding.
inline double gaussian_cdf(double u) { return 0.5 * std::erfc(-u / kSqrt2); }

/// 1 - Phi(u) without cancellation.
inline double gaussian_sf(double u) { return 0.5 * std::erfc(u / kSqrt2); }

/// Phi^{-1}(p) for p in (0, 1); bisection bracket followed by Newton polish.
inline double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::InvalidArgument, "profile1d", "quantile argument must lie in (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gaussian_cdf(mid) < p ? lo : hi) = mid;
  }
  double u = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double pdf = gaussian_pdf(u);
    if (pdf <= 0.0) break;
    const double step = p < 0.5 ? (gaussian_cdf(u) - p) / pdf : ((1.0 - p) - gaussian_sf(u)) / -pdf;
    if (!std::isfinite(step)) break;
    u -= step;
  }
  return u;
}

/// Binary entropy in nats, extended continuously by h(0) = h(1) = 0.
inline double binary_entropy(double p) {
  if (p <= 1e-300 || p >= 1.0) return 0.0;
  const double q = 1.0 - p;
  if (q <= 1e-300) return 0.0;
  // The smaller argument drives the log1p branch so h(p) and h(1-p) agree.
  const double small = p <= 0.5 ? p : q;
  return -small * std::log(small) - (1.0 - small) * std::log1p(-small);
}

/// Exact full-line solution P_t 1_{(0, inf)} at signed distance s.
inline double halfspace_profile(double s, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "profile1d", "halfspace_profile needs t > 0");
  return gaussian_cdf(s / std::sqrt(2.0 * t));
}

struct ProfileConstants {
  double c_universal = 0.0;       // sqrt(2) * int h(Phi(u)) du
  double entropy_integral = 0.0;  // int h(Phi(u)) du
  double fisher_integral = 0.0;   // int phi^2 / (Phi (1 - Phi)) du
  double l1_constant = 0.0;       // 2 / sqrt(pi)
  double tail_integral = 0.0;     // int_0^inf Phi(-u) du
  double truncation = 0.0;        // |u| cutoff used by the quadratures
  double max_error_estimate = 0.0;
};

namespace profile_detail {

// Every profile integrand is bounded by (1 + |u|) phi(u) in the tails, whose
// integral beyond U is sf(U) + pdf(U).
inline double truncation_for(double tol) {
  double cutoff = 4.0;
  while (2.0 * (gaussian_sf(cutoff) + gaussian_pdf(cutoff)) > 0.1 * tol && cutoff < 40.0) cutoff += 0.25;
  return cutoff;
}

inline double entropy_integrand(double u) { return binary_entropy(gaussian_sf(std::abs(u))); }

inline double fisher_integrand(double u) {
  const double q = gaussian_sf(std::abs(u));
  if (q <= 0.0) return 0.0;
  const double pdf = gaussian_pdf(u);
  return pdf * pdf / (q * (1.0 - q));
}

}  // namespace profile_detail

/// Adaptive Gauss-Kronrod evaluation of the profile constants, each with
/// estimated absolute error at most tol on a certified truncated range.
inline ProfileConstants profile_constants(double tol = 1e-10) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "profile1d", "tol must be positive");
  using namespace profile_detail;
  const double cutoff = truncation_for(tol);
  // The integrands are even; integrate the half line and double.
  const double half_tol = 0.25 * tol;
  auto ent = quad::adaptive(entropy_integrand, 0.0, cutoff, half_tol);
  auto fis = quad::adaptive(fisher_integrand, 0.0, cutoff, half_tol);
  auto tail = quad::adaptive([](double u) { return gaussian_sf(u); }, 0.0, cutoff, half_tol);

  ProfileConstants c;
  c.entropy_integral = 2.0 * ent.value;
  c.fisher_integral = 2.0 * fis.value;
  c.c_universal = kSqrt2 * c.entropy_integral;
  c.tail_integral = tail.value;
  // int |Phi(u) - 1_{u>0}| du = 2 int_0^inf Phi(-u) du; the L1 jump rescales u = s / sqrt(2t).
  c.l1_constant = 2.0 * kSqrt2 * tail.value;
  c.truncation = cutoff;
  c.max_error_estimate = 2.0 * std::max({ent.abs_error, fis.abs_error, tail.abs_error});
  return c;
}

/// The same entropy integral by Richardson-extrapolated trapezoid sums; a
/// second route for C that shares no code with the Kronrod path.
inline double universal_constant_romberg(double tol = 1e-10) {
  const double cutoff = profile_detail::truncation_for(tol);
  auto r = quad::romberg(profile_detail::entropy_integrand, 0.0, cutoff, 0.25 * tol);
  return kSqrt2 * 2.0 * r.value;
}

/// Converged reference value of C used across the project.
inline constexpr double kUniversalC = 2.554627701496984;

}  // namespace diffperim
