// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <unistd.h>
#include <vector>

#include "diffperim/diffperim.hpp"

using namespace diffperim;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string g(double x) { return fmt("%.4g", x); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Curves collected along the run for the monotonicity criterion.
struct CurveRecord {
  std::string name;
  std::vector<EntropySample> samples;
  bool has_mutual_info = true;
};
std::vector<CurveRecord> g_curves;

void record(const std::string& name, const std::vector<EntropySample>& s, bool mi = true) {
  g_curves.push_back({name, s, mi});
}

const std::array<double, 3> kUnitBox{1.0, 1.0, 1.0};

SetSpec disc() { return {2, {Ball{{0.5, 0.5}, 0.2}}, 0.0, "disc"}; }
SetSpec scene_set(const std::string& rel) { return load_scene(std::string(DIFFPERIM_SCENES) + "/" + rel).set; }

EntropyCurve windowed_curve(const SetSpec& set, int grid, int count = 12) {
  const double h = 1.0 / grid;
  const auto ts = resolved_log_times(h, clearance(set, kUnitBox), count);
  return entropy_curve(set, {grid, grid, 1}, kUnitBox, ts);
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = profile_constants(1e-10);
  const double romberg = universal_constant_romberg(1e-10);
  const double dt = seconds_since(t0);
  o.require(std::abs(c.l1_constant - 2.0 / std::sqrt(pi)) <= 1e-12, "l1 err " + g(c.l1_constant - 2.0 / std::sqrt(pi)));
  o.require(std::abs(c.tail_integral - 1.0 / std::sqrt(2 * pi)) <= 1e-10,
            "tail err " + g(c.tail_integral - 1.0 / std::sqrt(2 * pi)));
  o.require(std::abs(c.c_universal - romberg) <= 1e-8, "C kronrod-romberg " + g(c.c_universal - romberg));
  o.require(std::abs(c.fisher_integral - c.entropy_integral) <= 1e-8,
            "fisher-entropy " + g(c.fisher_integral - c.entropy_integral));
  o.require(dt < 1.0, "runtime " + fmt("%.3f s", dt));
  o.detail += "; C = " + fmt("%.15f", c.c_universal);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const int n = 1 << 14;
  SetSpec half{1, {IntervalUnion{{{0.25, 0.75}}}}, 0.0, "half"};
  HeatChannel ch(rasterize(half, {n, 1, 1}, {1, 1, 1}));
  double worst = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const double t = 1e-6 * std::pow(100.0, k / 8.0);
    const auto f = ch.field_at(t);
    const double w = std::sqrt(2.0 * t);
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) / n;
      double exact = 0.0;
      for (int m = -1; m <= 1; ++m) exact += gaussian_cdf((x - 0.25 + m) / w) - gaussian_cdf((x - 0.75 + m) / w);
      worst = std::max(worst, std::abs(f.values[i] - exact));
    }
  }
  o.require(worst <= 1e-6, "max-norm " + g(worst) + " over 9 t in [1e-6, 1e-4]");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto curve = windowed_curve(disc(), 1024);
  record("disc 1024 (L1)", curve.samples);
  const auto fit = l1_slope_fit(curve.samples, curve_window(curve));
  const double expected = 2.0 / std::sqrt(pi) * 2 * pi * 0.2;
  const double rel = fit.slope / expected - 1.0;
  o.require(std::abs(rel) <= 0.01, "slope " + g(fit.slope) + " vs " + g(expected) + " rel " + g(rel));
  o.detail += "; intercept " + g(fit.intercept);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto constants = profile_constants();
  const double per_disc = 2 * pi * 0.2;
  double prev_err = std::numeric_limits<double>::infinity();
  bool monotone = true;
  std::string seq;
  for (int grid : {256, 512, 1024}) {
    const auto curve = windowed_curve(disc(), grid);
    record("disc " + std::to_string(grid), curve.samples);
    const auto r = perimeter_estimate(curve, constants);
    const double err = std::abs(r.per_est / per_disc - 1.0);
    seq += (seq.empty() ? "" : " > ") + g(err);
    monotone = monotone && err < prev_err;
    prev_err = err;
    if (grid == 1024) o.require(err <= 0.01, "disc rel " + g(err));
  }
  o.require(monotone, "disc error " + seq);
  for (auto [file, name] : {std::pair{"square.scene", "square"}, std::pair{"two_discs.scene", "two-disc"}}) {
    const SetSpec set = scene_set(file);
    const auto curve = windowed_curve(set, 1024);
    record(name, curve.samples);
    const double per = reference_geometry(set).perimeter;
    const double err = std::abs(perimeter_estimate(curve, constants).per_est / per - 1.0);
    o.require(err <= 0.015, std::string(name) + " rel " + g(err));
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (auto [set, name] : {std::pair{disc(), "disc"}, std::pair{scene_set("square.scene"), "square"}}) {
    const double h = 1.0 / 1024;
    const auto ts = resolved_log_times(h, clearance(set, kUnitBox), 12);
    HeatChannel ch(rasterize(set, {1024, 1024, 1}, kUnitBox));
    double worst = 0.0;
    for (const auto& p : dissipation_check(ch, ts)) worst = std::max(worst, p.relative_residual);
    o.require(worst <= 1e-3, std::string(name) + " max residual " + g(worst));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  int dominated = 0, within = 0, total = 0;
  double worst_gap = 0.0;
  std::string worst_name;
  for (const auto& entry : fs::directory_iterator(std::string(DIFFPERIM_SCENES) + "/catalog")) {
    if (entry.path().extension() != ".scene") continue;
    const SetSpec set = load_scene(entry.path().string()).set;
    const SetSpec ball = volume_matched_ball(set, kUnitBox);
    const double clear = std::min(clearance(set, kUnitBox), clearance(ball, kUnitBox));
    const auto ts = resolved_log_times(1.0 / 1024, clear, 12);
    const auto r = compare_to_ball(set, {1024, 1024, 1}, kUnitBox, ts);
    std::vector<EntropySample> se, sb;
    for (const auto& s : r.samples) {
      se.push_back({s.t, s.entropy_set});
      sb.push_back({s.t, s.entropy_ball});
    }
    record(set.name, se, false);
    record(set.name + " ball", sb, false);
    ++total;
    dominated += r.dominated;
    const double rel = r.edge_gap / r.analytic_gap - 1.0;
    within += std::abs(rel) <= 0.05;
    if (std::abs(rel) >= std::abs(worst_gap)) {
      worst_gap = rel;
      worst_name = set.name;
    }
  }
  o.require(total == 10, std::to_string(total) + " catalog sets");
  o.require(dominated == total, std::to_string(dominated) + " dominated");
  o.require(within == total, std::to_string(within) + " gaps within 5% (worst " + worst_name + " " + g(worst_gap) + ")");
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto sp = SpaceSpec::sphere(2, 1.0);
  const auto ts = parse_time_spec("log:1e-4:4e-3:12");
  auto fit_cap = [&](double v) {
    const auto table = model_entropy_table(sp, v, ts, kMinRadialCells);
    record("sphere cap v=" + g(v), table.samples);
    const RadialMesh mesh{sp, table.r_max, table.m};
    return std::pair{fit_entropy_expansion(table.samples, radial_window(mesh, table.r_v, ts)), table.m};
  };
  const auto [eq, cells] = fit_cap(0.5);
  o.require(cells >= 4096, std::to_string(cells) + " radial cells");
  o.require(std::abs(eq.per_est / (2 * pi) - 1.0) <= 0.01, "equator per rel " + g(eq.per_est / (2 * pi) - 1.0));
  o.require(std::abs(eq.curvature_est - 1.0) <= 0.05, "equator curvature_est " + g(eq.curvature_est));
  for (double v : {0.1, 0.25, 0.4}) {
    const auto [fit, m] = fit_cap(v);
    const auto check = curvature_coefficient_check(fit, sp, fit.per_est, false);
    o.require(check.inequality_holds, "cap v=" + g(v) + " b " + g(fit.b) + " vs bound " + g(check.predicted_b + check.slack));
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const double limit = 1.0 / std::sqrt(2 * pi);
  std::string seq;
  double last = 0.0;
  for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
    last = gaussian_halfspace_entropy(0.0, t) / (kUniversalC * std::sqrt(t)) / limit - 1.0;
    seq += (seq.empty() ? "" : ", ") + g(last);
  }
  o.require(std::abs(last) <= 0.005, "ratio-1 at t=1e-2..1e-5: " + seq);
  for (auto [x, a, t] : {std::tuple{0.3, 0.0, 0.1}, std::tuple{-0.5, 0.2, 0.5}, std::tuple{0.8, 0.5, 0.05}}) {
    const auto mc = mehler_monte_carlo(x, a, t, 10'000'000);
    const double z = (mc.mean - gaussian_halfspace_profile(x, a, t)) / mc.standard_error;
    o.require(std::abs(z) <= 3.0, "MC z " + fmt("%.2f", z));
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  const auto sp = SpaceSpec::hyperbolic(2, -1.0);
  const double vol = model_volume(sp, 1.0);
  const auto ts = parse_time_spec("log:1e-4:4e-3:12");
  const auto table = model_entropy_table(sp, vol, ts);
  record("hyperbolic disc", table.samples);
  const RadialMesh mesh{sp, table.r_max, table.m};
  const auto fit = fit_entropy_expansion(table.samples, radial_window(mesh, table.r_v, ts));
  const double expected = kUniversalC * 2 * pi * std::sinh(1.0);
  const double rel = fit.a / expected - 1.0;
  o.require(std::abs(table.r_v - 1.0) < 1e-10, "r_v " + fmt("%.12f", table.r_v));
  o.require(std::abs(rel) <= 0.015, "a rel " + g(rel));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int cli(const std::string& args) {
  const std::string cmd = std::string(DIFFPERIM_CLI) + " " + args + " > /dev/null";
  return std::system(cmd.c_str()) >> 8;
}

Outcome criterion11(const fs::path& work) {
  Outcome o;
  const fs::path dir = work / "needles";
  o.require(cli("needles --output_dir " + dir.string()) == 0, "needles command");
  const auto j = json::parse(slurp(dir / "needles.json"));
  double min_margin = std::numeric_limits<double>::infinity();
  int interval_wins = 0;
  for (const auto& r : j["minimizers"]) {
    min_margin = std::min(min_margin, r["margin"].get<double>());
    interval_wins += r["argmin_is_interval"].get<bool>();
  }
  const auto searches = j["minimizers"].size();
  o.require(searches == 36, std::to_string(searches) + " searches");
  o.require(j["violations"].get<int>() == 0, std::to_string(j["violations"].get<int>()) + " violations");
  o.require(min_margin > -1e-7, "min margin " + g(min_margin));
  o.detail += "; interval argmin in " + std::to_string(interval_wins) + "/" + std::to_string(searches);
  int neg = 0, zero = 0, pos = 0;
  for (const auto& r : j["jensen"]) {
    const int s = r["sign"].get<int>();
    (s < 0 ? neg : (s > 0 ? pos : zero))++;
  }
  o.require(j["jensen"].size() == 12, "jensen cases " + std::to_string(j["jensen"].size()));
  o.detail += "; jensen signs +" + std::to_string(pos) + " 0:" + std::to_string(zero) + " -" + std::to_string(neg);
  if (neg > 0) o.detail += " (negative gaps recorded as a finding)";
  return o;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

Outcome criterion12(const fs::path& work) {
  Outcome o;
  const std::string scenes = DIFFPERIM_SCENES;
  const std::vector<std::string> runs = {
      "constants",
      "curve --scene " + scenes + "/disc.scene --grid 256",
      "perimeter --scene " + scenes + "/disc.scene --grid 512",
      "dissipation --scene " + scenes + "/square.scene --grid 256",
      "compare --scene " + scenes + "/square.scene --grid 256",
      "model --space sphere --K 1 --v 0.3 --count 8",
      "expansion --space sphere --K 1 --v 0.5 --count 8",
      "needles --scene " + scenes + "/needles.scene --t 0.01 --v 0.3 --lattice 12",
  };
  int files = 0, equal = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path a = work / ("det_a" + std::to_string(i)), b = work / ("det_b" + std::to_string(i));
    const bool ok = cli(runs[i] + " --output_dir " + a.string()) == 0 && cli(runs[i] + " --output_dir " + b.string()) == 0;
    o.require(ok, runs[i].substr(0, runs[i].find(' ')) + " ran");
    if (!ok) continue;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      const auto other = b / e.path().filename();
      equal += fs::exists(other) && fnv1a(slurp(e.path())) == fnv1a(slurp(other)) && slurp(e.path()) == slurp(other);
    }
  }
  o.require(files > 0 && equal == files, std::to_string(equal) + "/" + std::to_string(files) + " files hash-equal");
  return o;
}

Outcome criterion6() {
  Outcome o;
  int checked = 0;
  double worst = 0.0;
  std::string worst_name = "none";
  for (const auto& c : g_curves) {
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
      const double dh = c.samples[i - 1].entropy - c.samples[i].entropy;
      double excess = dh;
      if (c.has_mutual_info) excess = std::max(excess, c.samples[i].mutual_info - c.samples[i - 1].mutual_info);
      if (excess > worst) {
        worst = excess;
        worst_name = c.name;
      }
    }
    ++checked;
  }
  o.require(checked > 0 && worst <= 1e-9,
            std::to_string(checked) + " curves, worst increase " + g(worst) + " (" + worst_name + ")");
  return o;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / ("diffperim_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);
  // Criterion 6 runs last so that it sees every curve computed by the others.
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1},   {2, criterion2},  {3, criterion3},  {4, criterion4},
      {5, criterion5},   {7, criterion7},  {8, criterion8},  {9, criterion9},
      {10, criterion10}, {11, [&] { return criterion11(work); }},
      {12, [&] { return criterion12(work); }}, {6, criterion6},
  };
  std::map<int, std::string> lines;
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failed += !o.pass;
    char head[64];
    std::snprintf(head, sizeof head, "criterion %2d: %s (%.1f s) ", id, o.pass ? "PASS" : "FAIL", seconds_since(t0));
    lines[id] = head + o.detail;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
  }
  std::printf("\n");
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
