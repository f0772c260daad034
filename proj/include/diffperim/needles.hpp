#pragma once

// One-dimensional localization laboratory: weighted heat flow on synthetic
// needles (intervals with density rho = e^{-V}), the entropy of sets on a
// needle, exhaustive searches for entropy-minimizing sets, and Jensen
// aggregation of one-dimensional model entropies.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "diffperim/diffusion1d.hpp"
#include "diffperim/error.hpp"
#include "diffperim/profile1d.hpp"
#include "diffperim/space.hpp"

namespace diffperim {

/// rho proportional to e^{-V} on (lo, hi) with V'' >= K.
struct NeedleDensity {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  double K = 0.0;
  std::function<double(double)> potential;         // V
  std::function<double(double)> potential_second;  // V'', empty -> finite differences

  static NeedleDensity uniform(double a, double b) {
    return {"uniform", a, b, 0.0, [](double) { return 0.0; }, [](double) { return 0.0; }};
  }
  /// V = K s^2 / 2 truncated to |s| <= 8/sqrt(K).
  static NeedleDensity gaussian(double K) {
    if (!(K > 0.0)) throw Error(ErrorKind::InvalidArgument, "needles", "gaussian density needs K > 0");
    const double half = 8.0 / std::sqrt(K);
    return {"gaussian", -half, half, K, [K](double s) { return 0.5 * K * s * s; }, [K](double) { return K; }};
  }
  /// rho = cos(s)^{n-1} on (-pi/2, pi/2): the needle of the round n-sphere, K = n - 1.
  static NeedleDensity cosine_power(int n) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "needles", "cosine density needs n >= 2");
    const double k = n - 1.0;
    return {"cos^" + std::to_string(n - 1), -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, k,
            [k](double s) { return -k * std::log(std::max(std::cos(s), 1e-300)); },
            [k](double s) {
              const double c = std::cos(s);
              return k / (c * c);
            }};
  }
  /// V = |s|^3 / 3 on (-4, 4), K = 0.
  static NeedleDensity cubic() {
    return {"cubic", -4.0, 4.0, 0.0, [](double s) { return std::abs(s * s * s) / 3.0; },
            [](double s) { return 2.0 * std::abs(s); }};
  }
  /// Piecewise-linear rho through (s_i, rho_i) nodes; K = min discrete V''.
  static NeedleDensity tabulated(std::vector<double> s, std::vector<double> rho, std::string name = "custom") {
    if (s.size() < 3 || s.size() != rho.size())
      throw Error(ErrorKind::InvalidArgument, "needles", "tabulated density needs >= 3 matching nodes");
    for (std::size_t i = 1; i < s.size(); ++i)
      if (!(s[i] > s[i - 1])) throw Error(ErrorKind::InvalidArgument, "needles", "density nodes must increase");
    for (double r : rho)
      if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "needles", "tabulated density must be positive");
    auto xs = std::make_shared<std::vector<double>>(std::move(s));
    auto ys = std::make_shared<std::vector<double>>(std::move(rho));
    auto v = [xs, ys](double x) {
      auto it = std::upper_bound(xs->begin(), xs->end(), x);
      std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - xs->begin()), 1, xs->size() - 1);
      const double w = ((*xs)[j] - x) / ((*xs)[j] - (*xs)[j - 1]);
      return -std::log(w * (*ys)[j - 1] + (1.0 - w) * (*ys)[j]);
    };
    double k = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < xs->size(); ++i) {
      const double hl = (*xs)[i] - (*xs)[i - 1], hr = (*xs)[i + 1] - (*xs)[i];
      const double vl = -std::log((*ys)[i - 1]), vc = -std::log((*ys)[i]), vr = -std::log((*ys)[i + 1]);
      k = std::min(k, 2.0 * ((vr - vc) / hr - (vc - vl) / hl) / (hl + hr));
    }
    return {std::move(name), xs->front(), xs->back(), k, v, {}};
  }
  /// Node file: one "s rho" pair per line, '#' comments.
  static NeedleDensity from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "needles", "cannot open density node file '" + path + "'");
    std::vector<double> s, rho;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      double a, b;
      if (!(ls >> a)) continue;
      if (!(ls >> b))
        throw Error(ErrorKind::ParseError, "needles", path + ": line " + std::to_string(line_no) + ": expected 's rho'");
      s.push_back(a);
      rho.push_back(b);
    }
    return tabulated(std::move(s), std::move(rho), "custom");
  }
};

/// Disjoint sorted intervals on a needle with their mu-measure.
struct NeedleSet {
  std::vector<std::pair<double, double>> intervals;
  double measure = 0.0;
};

inline constexpr int kMinNeedleCells = 4096;

/// A needle density discretized on a uniform finite-volume mesh.
class Needle {
 public:
  explicit Needle(NeedleDensity density, int cells = kMinNeedleCells, double tol = 1e-8)
      : density_(std::move(density)),
        solver_(density_.lo, density_.hi, cells,
                [this](double s) { return std::exp(-density_.potential(s)); }, "needles") {
    if (cells < kMinNeedleCells)
      throw Error(ErrorKind::InvalidArgument, "needles", "needle meshes need at least 4096 cells");
    options_.tol = tol;
    options_.grading = 1.0;
    normalizer_ = solver_.total_mass();
    rebuild_cumulative();
  }

  const NeedleDensity& density() const { return density_; }
  const WeightedDiffusion1D& solver() const { return solver_; }

  /// Probability mass of each cell (sums to 1).
  double cell_probability(int i) const { return solver_.cell_mass()[i] / normalizer_; }

  /// Smallest V'' - K over the mesh nodes (should be >= -1e-9).
  double curvature_slack() const {
    double slack = std::numeric_limits<double>::infinity();
    const double h = solver_.spacing();
    for (int i = 1; i + 1 < solver_.cells(); ++i) {
      const double s = solver_.center(i);
      double second;
      if (density_.potential_second) {
        second = density_.potential_second(s);
      } else {
        second = (density_.potential(s + h) - 2.0 * density_.potential(s) + density_.potential(s - h)) / (h * h);
      }
      slack = std::min(slack, second - density_.K);
    }
    return slack;
  }

  std::vector<double> indicator(const NeedleSet& set) const {
    std::vector<double> p(solver_.cells(), 0.0);
    for (auto [a, b] : set.intervals) {
      auto cov = solver_.coverage(a, b, weight());
      for (int i = 0; i < solver_.cells(); ++i) p[i] = std::min(1.0, p[i] + cov[i]);
    }
    return p;
  }

  double measure(const std::vector<std::pair<double, double>>& intervals) const {
    double m = 0.0;
    for (auto [a, b] : intervals) m += cumulative(b) - cumulative(a);
    return m;
  }

  /// mu((lo, s)) on the discretized density.
  double cumulative(double s) const {
    if (s <= density_.lo) return 0.0;
    if (s >= density_.hi) return 1.0;
    const double h = solver_.spacing();
    const int i = std::min(solver_.cells() - 1, static_cast<int>((s - density_.lo) / h));
    const double cell_lo = density_.lo + i * h;
    double partial = 0.0;
    if (s > cell_lo) partial = solver_.coverage(cell_lo, s, weight())[i] * cell_probability(i);
    return cumulative_[i] + partial;
  }

  /// Position s with mu((lo, s)) = q.
  double quantile(double q) const {
    if (q <= 0.0) return density_.lo;
    if (q >= 1.0) return density_.hi;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), q);
    const int i = std::max(0, static_cast<int>(it - cumulative_.begin()) - 1);
    const double h = solver_.spacing();
    double lo = density_.lo + i * h, hi = lo + h;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      (cumulative(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  NeedleSet make_set(std::vector<std::pair<double, double>> intervals) const {
    std::sort(intervals.begin(), intervals.end());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (!(intervals[i].second > intervals[i].first))
        throw Error(ErrorKind::InvalidArgument, "needles", "needle intervals need lo < hi");
      if (intervals[i].first < density_.lo || intervals[i].second > density_.hi)
        throw Error(ErrorKind::InvalidArgument, "needles", "needle interval leaves the support");
      if (i > 0 && intervals[i].first < intervals[i - 1].second)
        throw Error(ErrorKind::InvalidArgument, "needles", "needle intervals overlap");
    }
    NeedleSet set{std::move(intervals), 0.0};
    set.measure = measure(set.intervals);
    return set;
  }

  /// Weighted heat flow p'' - V' p' with zero flux at the ends.
  std::vector<double> semigroup(const std::vector<double>& p0, double t) const {
    for (double v : p0)
      if (v < 0.0 || v > 1.0) throw Error(ErrorKind::InvalidArgument, "needles", "initial field must lie in [0,1]");
    return solver_.advance(p0, t, options_);
  }

  std::vector<std::vector<double>> semigroup_many(const std::vector<std::vector<double>>& p0, double t) const {
    return solver_.advance_many(p0, t, options_);
  }

  /// int h(p) d mu.
  double entropy_of(const std::vector<double>& p) const {
    double s = 0.0;
    for (int i = 0; i < solver_.cells(); ++i) {
      const double v = p[i];
      if (v <= 0.0 || v >= 1.0) continue;
      s += binary_entropy(v) * solver_.cell_mass()[i];
    }
    return s / normalizer_;
  }

  double entropy(const NeedleSet& set, double t) const {
    const auto p0 = indicator(set);
    if (t == 0.0) return 0.0;
    return entropy_of(semigroup(p0, t));
  }

  /// int p d mu.
  double mass(const std::vector<double>& p) const { return solver_.weighted_sum(p) / normalizer_; }

 private:
  std::function<double(double)> weight() const {
    return [this](double s) { return std::exp(-density_.potential(s)); };
  }

  void rebuild_cumulative() {
    cumulative_.assign(solver_.cells() + 1, 0.0);
    for (int i = 0; i < solver_.cells(); ++i) cumulative_[i + 1] = cumulative_[i] + cell_probability(i);
  }

  NeedleDensity density_;
  WeightedDiffusion1D solver_;
  WeightedDiffusion1D::Options options_;
  double normalizer_ = 1.0;
  std::vector<double> cumulative_;
};

inline std::vector<double> needle_semigroup(const Needle& needle, const std::vector<double>& p0, double t) {
  return needle.semigroup(p0, t);
}

inline double needle_entropy(const Needle& needle, const NeedleSet& set, double t) { return needle.entropy(set, t); }

/// A candidate set given by its intervals in quantile coordinates q = mu((lo, s)).
struct QuantileCandidate {
  std::vector<std::pair<double, double>> intervals;
};

/// Every union of at most two intervals with measure v whose free endpoints
/// lie on a lattice of `lattice` quantile cells, including intervals anchored
/// at either end of the needle.
inline std::vector<QuantileCandidate> lattice_family(double v, int lattice = 60) {
  if (!(v > 0.0 && v < 1.0)) throw Error(ErrorKind::InvalidArgument, "needles", "volume fraction must lie in (0,1)");
  if (lattice < 2 || lattice > 64) throw Error(ErrorKind::InvalidArgument, "needles", "lattice must have 2..64 cells");
  const double step = 1.0 / lattice;
  const double eps = 1e-12;
  std::vector<QuantileCandidate> family;
  auto q = [&](int j) { return j * step; };
  for (int j = 0; j <= lattice; ++j)
    if (q(j) + v <= 1.0 + eps) family.push_back({{{q(j), std::min(1.0, q(j) + v)}}});
  if (std::abs(std::round((1.0 - v) / step) * step - (1.0 - v)) > eps) family.push_back({{{1.0 - v, 1.0}}});
  for (int a = 0; a <= lattice; ++a)
    for (int b = a + 1; b <= lattice && q(b) - q(a) < v - eps; ++b) {
      const double rest = v - (q(b) - q(a));
      // Second interval starting on the lattice.
      for (int c = b + 1; c <= lattice && q(c) + rest <= 1.0 + eps; ++c)
        family.push_back({{{q(a), q(b)}, {q(c), std::min(1.0, q(c) + rest)}}});
      // Second interval ending on the lattice (covers right-anchored pieces).
      for (int d = b + 1; d <= lattice; ++d) {
        const double start = q(d) - rest;
        if (start <= q(b) + eps) continue;
        if (std::abs(std::round(start / step) * step - start) < eps) continue;  // already listed
        family.push_back({{{q(a), q(b)}, {start, q(d)}}});
      }
    }
  return family;
}

struct MinimizerReport {
  std::vector<NeedleSet> argmin;  // every candidate within 1e-9 of the minimum
  double min_entropy = 0.0;
  double best_interval_entropy = std::numeric_limits<double>::infinity();
  double best_non_interval_entropy = std::numeric_limits<double>::infinity();
  /// best non-interval entropy minus best interval entropy (0 when one side is absent).
  double margin = 0.0;
  bool violation = false;
  std::size_t candidates = 0;
  bool argmin_is_interval = true;
};

inline constexpr double kTieTolerance = 1e-9;

/// Flows P_t 1_(lo, x(q)) at one time t, keyed by the quantile q. Candidate
/// sets are evaluated by superposition, so every search at this t shares them.
class NeedleFlowBank {
 public:
  NeedleFlowBank(const Needle& needle, double t) : needle_(needle), t_(t) {
    if (t < 0.0) throw Error(ErrorKind::NegativeTime, "needles", "diffusion time must be nonnegative");
  }

  const Needle& needle() const { return needle_; }
  double time() const { return t_; }

  void ensure(const std::vector<QuantileCandidate>& family) {
    std::vector<double> missing;
    for (const auto& c : family)
      for (auto [a, b] : c.intervals)
        for (double q : {a, b})
          if (!flows_.count(q) && std::find(missing.begin(), missing.end(), q) == missing.end()) missing.push_back(q);
    if (missing.empty()) return;
    std::vector<std::vector<double>> initial;
    for (double q : missing) {
      const double x = needle_.quantile(q);
      std::vector<double> p0(needle_.solver().cells(), 0.0);
      if (x > needle_.density().lo) p0 = needle_.indicator(NeedleSet{{{needle_.density().lo, x}}, q});
      initial.push_back(std::move(p0));
    }
    auto out = t_ == 0.0 ? initial : needle_.semigroup_many(initial, t_);
    for (std::size_t k = 0; k < missing.size(); ++k) flows_.emplace(missing[k], std::move(out[k]));
  }

  std::vector<double> evaluate(const std::vector<QuantileCandidate>& family) {
    ensure(family);
    std::vector<double> out;
    out.reserve(family.size());
    std::vector<double> p(needle_.solver().cells());
    for (const auto& c : family) {
      std::fill(p.begin(), p.end(), 0.0);
      for (auto [a, b] : c.intervals) {
        const auto& up = flows_.at(b);
        const auto& down = flows_.at(a);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += up[i] - down[i];
      }
      for (double& x : p) x = std::clamp(x, 0.0, 1.0);
      out.push_back(needle_.entropy_of(p));
    }
    return out;
  }

  std::size_t size() const { return flows_.size(); }

 private:
  const Needle& needle_;
  double t_;
  std::map<double, std::vector<double>> flows_;
};

inline std::vector<double> evaluate_family(const Needle& needle, const std::vector<QuantileCandidate>& family,
                                           double t) {
  NeedleFlowBank bank(needle, t);
  return bank.evaluate(family);
}

namespace needle_detail {

inline MinimizerReport summarize(const Needle& needle, const std::vector<QuantileCandidate>& family,
                                 const std::vector<double>& values, double tolerance) {
  MinimizerReport rep;
  rep.candidates = family.size();
  rep.min_entropy = *std::min_element(values.begin(), values.end());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const bool single = family[i].intervals.size() == 1;
    double& best = single ? rep.best_interval_entropy : rep.best_non_interval_entropy;
    best = std::min(best, values[i]);
    if (values[i] <= rep.min_entropy + kTieTolerance) {
      std::vector<std::pair<double, double>> iv;
      for (auto [a, b] : family[i].intervals) iv.emplace_back(needle.quantile(a), needle.quantile(b));
      const bool seen = std::any_of(rep.argmin.begin(), rep.argmin.end(), [&](const NeedleSet& other) {
        if (other.intervals.size() != iv.size()) return false;
        for (std::size_t k = 0; k < iv.size(); ++k)
          if (std::abs(other.intervals[k].first - iv[k].first) > 1e-12 ||
              std::abs(other.intervals[k].second - iv[k].second) > 1e-12)
            return false;
        return true;
      });
      if (seen) continue;
      NeedleSet set{std::move(iv), 0.0};
      set.measure = needle.measure(set.intervals);
      rep.argmin.push_back(std::move(set));
      if (!single) rep.argmin_is_interval = false;
    }
  }
  if (std::isfinite(rep.best_interval_entropy) && std::isfinite(rep.best_non_interval_entropy))
    rep.margin = rep.best_non_interval_entropy - rep.best_interval_entropy;
  rep.violation = rep.margin < -tolerance;
  return rep;
}

}  // namespace needle_detail

/// Exhaustive search of `family`; flags a violation when a set of two or more
/// intervals beats every single interval by more than `tolerance`.
inline MinimizerReport interval_minimizer_search(const Needle& needle, double t,
                                                 const std::vector<QuantileCandidate>& family,
                                                 double tolerance = 1e-7) {
  if (family.empty()) throw Error(ErrorKind::InvalidArgument, "needles", "empty candidate family");
  NeedleFlowBank bank(needle, t);
  return needle_detail::summarize(needle, family, bank.evaluate(family), tolerance);
}

/// Lattice search followed by a 256-position refinement of single intervals
/// within one lattice cell of the coarse winner.
inline MinimizerReport interval_minimizer_search(NeedleFlowBank& bank, double v, int lattice = 60,
                                                 double tolerance = 1e-7) {
  const Needle& needle = bank.needle();
  auto family = lattice_family(v, lattice);
  auto values = bank.evaluate(family);
  double best = std::numeric_limits<double>::infinity();
  double start = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i)
    if (family[i].intervals.size() == 1 && values[i] < best) {
      best = values[i];
      start = family[i].intervals[0].first;
    }
  const double reach = 1.0 / lattice + 1e-12;
  std::vector<QuantileCandidate> refined;
  for (int k = 0; k <= 256; ++k) {
    const double q = k / 256.0;
    if (std::abs(q - start) <= reach && q + v <= 1.0 + 1e-12) refined.push_back({{{q, std::min(1.0, q + v)}}});
  }
  if (!refined.empty()) {
    const auto fine = bank.evaluate(refined);
    family.insert(family.end(), refined.begin(), refined.end());
    values.insert(values.end(), fine.begin(), fine.end());
  }
  return needle_detail::summarize(needle, family, values, tolerance);
}

inline MinimizerReport interval_minimizer_search(const Needle& needle, double v, double t, int lattice = 60,
                                                 double tolerance = 1e-7) {
  NeedleFlowBank bank(needle, t);
  return interval_minimizer_search(bank, v, lattice, tolerance);
}

/// The one-dimensional model density of a space: the radial weight
/// s_K(r)^{n-1} on (0, pi/sqrt(K)) for spheres, on (0, 1) for Euclidean and
/// hyperbolic models, and e^{-s^2/2} for Gaussian space.
inline NeedleDensity model_density(const SpaceSpec& space) {
  space.validate();
  if (space.kind == SpaceKind::Gaussian) return NeedleDensity::gaussian(1.0);
  if (space.n == 1)
    return NeedleDensity::uniform(0.0, space.kind == SpaceKind::Sphere ? std::numbers::pi / std::sqrt(space.K) : 1.0);
  const double hi = space.kind == SpaceKind::Sphere ? std::numbers::pi / std::sqrt(space.K) : 1.0;
  const int k = space.n - 1;
  const SpaceSpec sp = space;
  NeedleDensity d;
  d.name = std::string("model-") + to_string(space.kind);
  d.lo = 0.0;
  d.hi = hi;
  d.K = space.kind == SpaceKind::Euclidean ? 0.0 : space.K;
  d.potential = [sp, k](double r) { return -k * std::log(std::max(sp.s(r), 1e-300)); };
  return d;
}

struct JensenReport {
  double mean_of_entropies = 0.0;  // sum_a w_a H1D(v_a)
  double entropy_of_mean = 0.0;    // H1D(sum_a w_a v_a)
  double gap = 0.0;                // mean_of_entropies - entropy_of_mean
  int sign = 0;                    // sign of gap beyond 1e-10
  double mean_volume = 0.0;
};

/// One-dimensional model entropy: the initial segment of measure v.
inline double model_entropy_1d(const Needle& model, double v, double t) {
  return model.entropy(model.make_set({{model.density().lo, model.quantile(v)}}), t);
}

inline JensenReport jensen_aggregate(const std::vector<std::pair<double, double>>& fibers, const SpaceSpec& space,
                                     double t, int cells = kMinNeedleCells) {
  if (fibers.empty()) throw Error(ErrorKind::InvalidArgument, "needles", "no fibers");
  double wsum = 0.0;
  for (auto [v, w] : fibers) {
    if (!(v > 0.0 && v < 1.0)) throw Error(ErrorKind::InvalidArgument, "needles", "fiber volumes must lie in (0,1)");
    if (w < 0.0) throw Error(ErrorKind::InvalidArgument, "needles", "fiber weights must be nonnegative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) throw Error(ErrorKind::InvalidArgument, "needles", "fiber weights must sum to 1");
  Needle model(model_density(space), cells);
  JensenReport rep;
  std::map<double, double> cache;
  auto h1d = [&](double v) {
    auto it = cache.find(v);
    if (it != cache.end()) return it->second;
    return cache[v] = model_entropy_1d(model, v, t);
  };
  for (auto [v, w] : fibers) {
    rep.mean_of_entropies += w * h1d(v);
    rep.mean_volume += w * v;
  }
  rep.entropy_of_mean = h1d(rep.mean_volume);
  rep.gap = rep.mean_of_entropies - rep.entropy_of_mean;
  rep.sign = rep.gap > 1e-10 ? 1 : (rep.gap < -1e-10 ? -1 : 0);
  return rep;
}

}  // namespace diffperim
