#pragma once

// Conservative finite-volume diffusion on a weighted interval,
//   w(x) dp/dt = d/dx ( w(x) dp/dx ),   zero flux at both ends,
// which covers radial heat flow on constant-curvature models (w = s_K^{n-1})
// and weighted needles (w = rho). Time stepping is TR-BDF2: a trapezoidal
// (Crank-Nicolson) stage followed by BDF2, on a time grid graded towards
// t = 0, with the step count fixed by step doubling.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "diffperim/error.hpp"

namespace diffperim {

class WeightedDiffusion1D {
 public:
  /// `weight` must be positive on (lo, hi); cell masses are integrated with
  /// 5-point Gauss-Legendre per cell.
  WeightedDiffusion1D(double lo, double hi, int cells, const std::function<double(double)>& weight,
                      const char* module = "model_spaces")
      : lo_(lo), hi_(hi), m_(cells), module_(module) {
    if (!(hi > lo) || cells < 2) throw Error(ErrorKind::InvalidArgument, module_, "invalid diffusion mesh");
    h_ = (hi - lo) / cells;
    static constexpr double gx[5] = {-0.906179845938663992797627, -0.538469310105683091036314, 0.0,
                                     0.538469310105683091036314, 0.906179845938663992797627};
    static constexpr double gw[5] = {0.236926885056189087514264, 0.478628670499366468041292,
                                     0.568888888888888888888889, 0.478628670499366468041292,
                                     0.236926885056189087514264};
    mass_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const double c = lo + (i + 0.5) * h_;
      double s = 0.0;
      for (int q = 0; q < 5; ++q) s += gw[q] * weight(c + 0.5 * h_ * gx[q]);
      mass_[i] = 0.5 * h_ * s;
      if (!(mass_[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, module_, "weight must be positive inside the mesh");
    }
    // Interior face conductances w(face) / h; the end faces carry no flux.
    cond_.assign(m_ + 1, 0.0);
    for (int f = 1; f < m_; ++f) cond_[f] = std::max(0.0, weight(lo + f * h_)) / h_;
  }

  int cells() const { return m_; }
  double spacing() const { return h_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double center(int i) const { return lo_ + (i + 0.5) * h_; }
  const std::vector<double>& cell_mass() const { return mass_; }
  double total_mass() const {
    double s = 0.0;
    for (double v : mass_) s += v;
    return s;
  }

  /// Weighted fraction of each cell lying in [a, b].
  std::vector<double> coverage(double a, double b, const std::function<double(double)>& weight) const {
    std::vector<double> p(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double x0 = lo_ + i * h_, x1 = x0 + h_;
      const double s0 = std::max(x0, a), s1 = std::min(x1, b);
      if (s1 <= s0) continue;
      if (s0 == x0 && s1 == x1) {
        p[i] = 1.0;
        continue;
      }
      // Partial cell: 5-point Gauss-Legendre on the covered piece.
      static constexpr double gx[5] = {-0.906179845938663992797627, -0.538469310105683091036314, 0.0,
                                       0.538469310105683091036314, 0.906179845938663992797627};
      static constexpr double gw[5] = {0.236926885056189087514264, 0.478628670499366468041292,
                                       0.568888888888888888888889, 0.478628670499366468041292,
                                       0.236926885056189087514264};
      double s = 0.0;
      for (int q = 0; q < 5; ++q) s += gw[q] * weight(0.5 * (s0 + s1) + 0.5 * (s1 - s0) * gx[q]);
      p[i] = std::clamp(0.5 * (s1 - s0) * s / mass_[i], 0.0, 1.0);
    }
    return p;
  }

  double weighted_sum(const std::vector<double>& p) const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += mass_[i] * p[i];
    return s;
  }

  struct Options {
    double tol = 1e-8;       // bound on the step-doubling error estimate (max norm)
    int initial_steps = 16;
    int max_steps = 1 << 18;
    double grading = 2.0;    // t_k = t (k/N)^grading
  };

  /// Advances each initial field to time t with one shared time grid, so
  /// results are linear in the initial data.
  std::vector<std::vector<double>> advance_many(const std::vector<std::vector<double>>& initial, double t,
                                                const Options& opt) const {
    if (t < 0.0) throw Error(ErrorKind::NegativeTime, module_, "diffusion time must be nonnegative");
    for (const auto& p : initial)
      if (static_cast<int>(p.size()) != m_) throw Error(ErrorKind::GridMismatch, module_, "field size differs from mesh");
    if (t == 0.0) return initial;
    int steps = opt.initial_steps;
    auto coarse = march(initial, t, steps, opt.grading);
    while (true) {
      auto fine = march(initial, t, 2 * steps, opt.grading);
      double diff = 0.0;
      for (std::size_t j = 0; j < fine.size(); ++j)
        for (int i = 0; i < m_; ++i) diff = std::max(diff, std::abs(fine[j][i] - coarse[j][i]));
      // Second order: the fine solution's error is about a third of the difference.
      if (diff / 3.0 <= opt.tol) {
        last_steps_ = 2 * steps;
        check_range(fine);
        return fine;
      }
      steps *= 2;
      if (2 * steps > opt.max_steps)
        throw Error(ErrorKind::StabilityFailure, module_,
                    "time stepping did not reach tolerance within " + std::to_string(opt.max_steps) + " steps");
      coarse = std::move(fine);
    }
  }

  std::vector<double> advance(const std::vector<double>& initial, double t, const Options& opt) const {
    return advance_many({initial}, t, opt).front();
  }

  /// Step count used by the most recent advance.
  int last_steps() const { return last_steps_; }

 private:
  void check_range(const std::vector<std::vector<double>>& fields) const {
    for (const auto& p : fields)
      for (double v : p)
        if (!std::isfinite(v) || v < -1e-6 || v > 1.0 + 1e-6)
          throw Error(ErrorKind::StabilityFailure, module_,
                      "solution left [0,1] by more than 1e-6 (value " + std::to_string(v) + ")");
  }

  // LU factors of M - c L, L being the symmetric flux matrix.
  struct Factor {
    std::vector<double> lower, upper, inv_denom;
  };

  Factor factor(double c) const {
    Factor f;
    f.lower.resize(m_);
    f.upper.resize(m_);
    f.inv_denom.resize(m_);
    // Row i: -c k_i x_{i-1} + (M_i + c(k_i + k_{i+1})) x_i - c k_{i+1} x_{i+1}.
    double prev_upper = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double lower = -c * cond_[i];
      const double upper = -c * cond_[i + 1];
      const double denom = mass_[i] + c * (cond_[i] + cond_[i + 1]) - lower * prev_upper;
      f.lower[i] = lower;
      f.inv_denom[i] = 1.0 / denom;
      f.upper[i] = upper * f.inv_denom[i];
      prev_upper = f.upper[i];
    }
    return f;
  }

  // Solves in place for nf interleaved fields (x[i * nf + j]).
  void solve(const Factor& f, std::vector<double>& x, int nf) const {
    for (int j = 0; j < nf; ++j) x[j] *= f.inv_denom[0];
    for (int i = 1; i < m_; ++i) {
      const double lo = f.lower[i], inv = f.inv_denom[i];
      double* row = &x[static_cast<std::size_t>(i) * nf];
      const double* prev = row - nf;
      for (int j = 0; j < nf; ++j) row[j] = (row[j] - lo * prev[j]) * inv;
    }
    for (int i = m_ - 2; i >= 0; --i) {
      const double up = f.upper[i];
      double* row = &x[static_cast<std::size_t>(i) * nf];
      const double* next = row + nf;
      for (int j = 0; j < nf; ++j) row[j] -= up * next[j];
    }
  }

  // Flux divergence (L u)_i = F_{i+1} - F_i with F_f = k_f (u_f - u_{f-1});
  // each face flux is computed once, so the sum over cells telescopes.
  void divergence(const std::vector<double>& u, std::vector<double>& d, int nf) const {
    d.assign(u.size(), 0.0);
    for (int f = 1; f < m_; ++f) {
      const double k = cond_[f];
      const double* left = &u[static_cast<std::size_t>(f - 1) * nf];
      const double* right = left + nf;
      double* dl = &d[static_cast<std::size_t>(f - 1) * nf];
      double* dr = dl + nf;
      for (int j = 0; j < nf; ++j) {
        const double flux = k * (right[j] - left[j]);
        dl[j] += flux;
        dr[j] -= flux;
      }
    }
  }

  std::vector<std::vector<double>> march(const std::vector<std::vector<double>>& fields, double t, int steps,
                                         double grading) const {
    const double gamma = 2.0 - std::sqrt(2.0);
    const double w1 = 1.0 / (gamma * (2.0 - gamma));
    const double w0 = (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));
    const double cb = (1.0 - gamma) / (2.0 - gamma);
    const int nf = static_cast<int>(fields.size());
    std::vector<double> p(static_cast<std::size_t>(m_) * nf), stage, lp, ly, rhs;
    std::vector<double> base(p.size());
    for (int j = 0; j < nf; ++j)
      for (int i = 0; i < m_; ++i) p[static_cast<std::size_t>(i) * nf + j] = fields[j][i];
    const bool uniform = grading == 1.0;
    Factor trap, bdf;
    if (uniform) {
      trap = factor(0.5 * gamma * t / steps);
      bdf = factor(cb * t / steps);
    }
    double t_prev = 0.0;
    for (int k = 1; k <= steps; ++k) {
      const double t_next = t * std::pow(static_cast<double>(k) / steps, grading);
      const double dt = t_next - t_prev;
      t_prev = t_next;
      if (!uniform) {
        trap = factor(0.5 * gamma * dt);
        bdf = factor(cb * dt);
      }
      // Trapezoidal stage to t_n + gamma dt: M y = M p + c L (p + y).
      const double ct = 0.5 * gamma * dt, cbdf = cb * dt;
      divergence(p, lp, nf);
      stage.resize(p.size());
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < nf; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * nf + j;
          stage[idx] = mass_[i] * p[idx] + ct * lp[idx];
        }
      solve(trap, stage, nf);
      // Rebuild y from the stage equation in flux form so that the weighted
      // mass is conserved to rounding, independent of the solve.
      divergence(stage, ly, nf);
      for (int i = 0; i < m_; ++i) {
        const double s = ct / mass_[i];
        for (int j = 0; j < nf; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * nf + j;
          stage[idx] = p[idx] + s * (lp[idx] + ly[idx]);
        }
      }
      // BDF2 stage to t_n + dt: M z = M (w1 y - w0 p) + c L z.
      for (std::size_t idx = 0; idx < p.size(); ++idx) base[idx] = w1 * stage[idx] - w0 * p[idx];
      rhs.resize(p.size());
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < nf; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * nf + j;
          rhs[idx] = mass_[i] * base[idx];
        }
      solve(bdf, rhs, nf);
      divergence(rhs, ly, nf);
      for (int i = 0; i < m_; ++i) {
        const double s = cbdf / mass_[i];
        for (int j = 0; j < nf; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * nf + j;
          p[idx] = base[idx] + s * ly[idx];
        }
      }
    }
    std::vector<std::vector<double>> out(nf, std::vector<double>(m_));
    for (int j = 0; j < nf; ++j)
      for (int i = 0; i < m_; ++i) out[j][i] = p[static_cast<std::size_t>(i) * nf + j];
    return out;
  }

  double lo_, hi_, h_;
  int m_;
  const char* module_;
  std::vector<double> mass_, cond_;
  mutable int last_steps_ = 0;
};

}  // namespace diffperim
