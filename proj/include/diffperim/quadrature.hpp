#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "diffperim/error.hpp"

namespace diffperim::quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

namespace detail {

// 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double gauss = fc * kWg[3];
  double kronrod = fc * kWgk[7];
  double abs_k = std::abs(kronrod);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    kronrod += kWgk[j] * (f1[j] + f2[j]);
    abs_k += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  asc *= std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  const double resabs = abs_k * std::abs(half);
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50) err = std::max(eps50 * resabs, err);
  return {a, b, kronrod * half, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f on [a, b].
/// Bisects the segment with the largest error estimate until the summed
/// estimate is at most abs_tol.
template <class F>
Result adaptive(F&& f, double a, double b, double abs_tol, int max_segments = 20000) {
  if (!(abs_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "quadrature", "tolerance must be positive");
  std::priority_queue<detail::Segment> heap;
  auto first = detail::kronrod15(f, a, b);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  int segments = 1;
  while (error > abs_tol) {
    if (segments >= max_segments)
      throw Error(ErrorKind::NonConvergence, "quadrature",
                  "adaptive Gauss-Kronrod could not certify tolerance " + std::to_string(abs_tol));
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::kronrod15(f, worst.a, mid);
    auto right = detail::kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // Re-sum to shed the drift accumulated by the running updates.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, 15 * (2 * segments - 1)};
}

/// Romberg integration: composite trapezoid rules on 2^k panels combined by
/// repeated Richardson extrapolation. Independent of the Kronrod path above.
template <class F>
Result romberg(F&& f, double a, double b, double abs_tol, int max_levels = 22) {
  if (!(abs_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "quadrature", "tolerance must be positive");
  std::vector<double> prev, cur;
  double h = b - a;
  double trap = 0.5 * h * (f(a) + f(b));
  prev.push_back(trap);
  long panels = 1;
  int evals = 2;
  for (int level = 1; level < max_levels; ++level) {
    h *= 0.5;
    double mid_sum = 0.0;
    for (long i = 0; i < panels; ++i) mid_sum += f(a + (2 * i + 1) * h);
    evals += static_cast<int>(panels);
    panels *= 2;
    trap = 0.5 * trap + h * mid_sum;
    cur.assign(1, trap);
    double factor = 1.0;
    for (int j = 1; j <= level; ++j) {
      factor *= 4.0;
      cur.push_back(cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (factor - 1.0));
    }
    const double err = std::abs(cur.back() - prev.back());
    if (level >= 4 && err <= abs_tol) return {cur.back(), err, evals};
    prev.swap(cur);
  }
  throw Error(ErrorKind::NonConvergence, "quadrature", "Romberg extrapolation did not converge");
}

}  // namespace diffperim::quad
