// diffperim: batch front end. One subcommand per run; data files go to
// output_dir and are byte-identical for identical inputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "diffperim/diffperim.hpp"

namespace fs = std::filesystem;
using namespace diffperim;

namespace {

// Holds <output_dir>/.diffperim.lock for the lifetime of a command.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cli", "cannot create output_dir '" + dir + "': " + ec.message());
    lock_ = dir_ / ".diffperim.lock";
    FILE* f = std::fopen(lock_.c_str(), "wx");
    if (!f) throw Error(ErrorKind::IoError, "cli", "output_dir '" + dir + "' is locked by another run (" + lock_.string() + ")");
    std::fclose(f);
  }
  ~OutputDir() {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cli", "cannot write " + (dir_ / name).string());
    out << content;
    if (!out) throw Error(ErrorKind::IoError, "cli", "write failed for " + (dir_ / name).string());
  }
  void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
  fs::path lock_;
};

struct Context {
  RunConfig cfg;
  std::string command;
};

Scene require_scene(const RunConfig& cfg) {
  const std::string& path = cfg.get("scene");
  if (path.empty()) throw Error(ErrorKind::InvalidArgument, "cli", "this command needs --scene");
  return load_scene(path);
}

struct GridSetup {
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> box{1.0, 1.0, 1.0};
  RasterMode mode = RasterMode::Coverage;
};

GridSetup grid_setup(const RunConfig& cfg, const Scene& scene) {
  GridSetup g;
  const int cells = cfg.integer("grid");
  for (int i = 0; i < scene.set.dimension; ++i) g.shape[i] = cells;
  if (scene.domain) g.box = *scene.domain;
  const std::string& r = cfg.get("raster");
  if (r == "coverage") g.mode = RasterMode::Coverage;
  else if (r == "sharp") g.mode = RasterMode::Sharp;
  else throw Error(ErrorKind::ParseError, "cli", "raster must be coverage or sharp");
  return g;
}

double grid_spacing(const GridSetup& g, int n) {
  double h = 0.0;
  for (int i = 0; i < n; ++i) h = std::max(h, g.box[i] / g.shape[i]);
  return h;
}

std::vector<double> euclidean_times(const RunConfig& cfg, const Scene& scene, const GridSetup& g) {
  if (cfg.get("t") != "auto") return parse_time_spec(cfg.get("t"));
  return resolved_log_times(grid_spacing(g, scene.set.dimension), clearance(scene.set, g.box), cfg.integer("count"));
}

std::vector<double> reals_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(RunConfig::parse_real(RunConfig::trim(part), what));
  if (out.empty()) throw Error(ErrorKind::ParseError, "cli", what + ": empty list");
  return out;
}

SpaceSpec space_from(const RunConfig& cfg) {
  SpaceSpec s{parse_space_kind(cfg.get("space")), cfg.integer("dim"), cfg.real("K")};
  if (s.kind == SpaceKind::Sphere && s.K == 0.0) s.K = 1.0;
  if (s.kind == SpaceKind::Hyperbolic && s.K == 0.0) s.K = -1.0;
  s.validate();
  return s;
}

std::string csv(const std::vector<EntropySample>& samples) {
  std::ostringstream out;
  write_samples_csv(out, samples);
  return out.str();
}

void print_summary(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------- commands

void cmd_constants(const Context& c, const OutputDir& out) {
  const double tol = c.cfg.real("tol");
  const auto pc = profile_constants(tol);
  json j = document("constants");
  j["tol"] = tol;
  j["constants"] = to_json(pc);
  j["c_universal_romberg"] = real(universal_constant_romberg(tol));
  out.write_json("constants.json", j);
  print_summary(j);
}

void cmd_curve(const Context& c, const OutputDir& out) {
  const Scene scene = require_scene(c.cfg);
  const GridSetup g = grid_setup(c.cfg, scene);
  CurveOptions opt;
  opt.mode = g.mode;
  opt.fisher_eps = c.cfg.real("fisher_eps");
  const auto curve = entropy_curve(scene.set, g.shape, g.box, euclidean_times(c.cfg, scene, g), opt);
  out.write("curve.csv", csv(curve.samples));
  out.write_json("curve.json", to_json(curve));
  print_summary(to_json(curve));
}

void cmd_perimeter(const Context& c, const OutputDir& out) {
  const Scene scene = require_scene(c.cfg);
  const GridSetup g = grid_setup(c.cfg, scene);
  CurveOptions opt;
  opt.mode = g.mode;
  opt.fisher_eps = c.cfg.real("fisher_eps");
  const auto curve = entropy_curve(scene.set, g.shape, g.box, euclidean_times(c.cfg, scene, g), opt);
  const auto rep = perimeter_estimate(curve, profile_constants(c.cfg.real("tol")));
  const auto l1 = l1_slope_fit(curve.samples, rep.fit.window);
  double per_true = std::numeric_limits<double>::quiet_NaN();
  try {
    const auto ref = reference_geometry(scene.set);
    if (ref.exact) per_true = ref.perimeter;
  } catch (const Error&) {
  }
  json j = document("perimeter");
  j["set"] = to_json(scene.set);
  j["grid"] = {{"shape", g.shape}, {"box", g.box}};
  j["volume_fraction"] = real(curve.volume_fraction);
  j["per_true"] = real(per_true);
  j["per_est"] = real(rep.per_est);
  j["pure_limit_est"] = real(rep.pure_limit_est);
  j["rel_err"] = real((rep.per_est - per_true) / per_true);
  j["fit"] = to_json(rep.fit);
  j["l1_fit"] = to_json(l1);
  j["l1_slope_over_perimeter"] = real(l1.slope / per_true);
  out.write_json("perimeter.json", j);
  out.write("curve.csv", csv(curve.samples));
  out.write("perimeter.txt",
            aligned_table({"name", "v", "per_true", "per_est", "rel_err", "curvature_est"},
                          {{scene.set.name, fixed(curve.volume_fraction), fixed(per_true, 8), fixed(rep.per_est, 8),
                            fixed((rep.per_est - per_true) / per_true, 4), fixed(rep.fit.curvature_est, 4)}}));
  print_summary(j);
}

void cmd_dissipation(const Context& c, const OutputDir& out) {
  const Scene scene = require_scene(c.cfg);
  const GridSetup g = grid_setup(c.cfg, scene);
  const auto ts = euclidean_times(c.cfg, scene, g);
  const double h = grid_spacing(g, scene.set.dimension);
  const auto bounds = resolved_time_bounds(h, clearance(scene.set, g.box));
  for (double t : ts)
    if (!bounds.contains(t))
      throw Error(ErrorKind::UnresolvedTime, "euclidean_flow", "t = " + format_real(t) + " outside the resolved window");
  HeatChannel channel(rasterize(scene.set, g.shape, g.box, g.mode));
  const auto pts = dissipation_check(channel, ts, 1.0 / 20.0, c.cfg.real("fisher_eps"));
  std::ostringstream s;
  s << "t,dH_dt,fisher,relative_residual\n";
  json rows = json::array();
  double worst = 0.0;
  for (const auto& p : pts) {
    s << format_real(p.t) << ',' << format_real(p.dH_dt) << ',' << format_real(p.fisher) << ','
      << format_real(p.relative_residual) << '\n';
    rows.push_back(to_json(p));
    worst = std::max(worst, p.relative_residual);
  }
  json j = document("dissipation");
  j["set"] = to_json(scene.set);
  j["max_relative_residual"] = real(worst);
  j["points"] = rows;
  out.write("dissipation.csv", s.str());
  out.write_json("dissipation.json", j);
  print_summary(j);
}

void cmd_compare(const Context& c, const OutputDir& out) {
  const Scene scene = require_scene(c.cfg);
  const GridSetup g = grid_setup(c.cfg, scene);
  CurveOptions opt;
  opt.mode = g.mode;
  opt.fisher_eps = c.cfg.real("fisher_eps");
  // The volume-matched ball has the larger clearance only when the set is
  // spread out, so the window follows the tighter of the two.
  auto ts = euclidean_times(c.cfg, scene, g);
  if (c.cfg.get("t") == "auto") {
    const SetSpec ball = volume_matched_ball(scene.set, g.box);
    const double clear = std::min(clearance(scene.set, g.box), clearance(ball, g.box));
    ts = resolved_log_times(grid_spacing(g, scene.set.dimension), clear, c.cfg.integer("count"));
  }
  const auto rep = compare_to_ball(scene.set, g.shape, g.box, ts, opt);
  std::ostringstream s;
  s << "t,entropy_set,entropy_ball,difference\n";
  for (const auto& p : rep.samples)
    s << format_real(p.t) << ',' << format_real(p.entropy_set) << ',' << format_real(p.entropy_ball) << ','
      << format_real(p.difference) << '\n';
  out.write("compare.csv", s.str());
  out.write_json("compare.json", to_json(rep));
  print_summary(to_json(rep));
}

std::vector<double> model_times(const RunConfig& cfg, const SpaceSpec& space) {
  if (cfg.get("t") != "auto") return parse_time_spec(cfg.get("t"));
  return parse_time_spec("log:1e-4:" + std::string(space.kind == SpaceKind::Gaussian ? "1e-2" : "4e-3") + ":" +
                         cfg.get("count"));
}

void cmd_model(const Context& c, const OutputDir& out) {
  const SpaceSpec space = space_from(c.cfg);
  const double v = c.cfg.real("v");
  const auto ts = model_times(c.cfg, space);
  const auto table = model_entropy_table(space, v, ts, c.cfg.integer("cells"), c.cfg.real("solver_tol"));
  json j = to_json(table);
  j["isoperimetric_profile"] = real(isoperimetric_profile(space, v));
  out.write("model.csv", csv(table.samples));
  out.write_json("model.json", j);
  print_summary(j);
}

// Mean curvature of the boundary of a geodesic ball of radius r.
double cap_mean_curvature(const SpaceSpec& s, double r) {
  if (s.K > 0.0) return (s.n - 1) * std::sqrt(s.K) / std::tan(std::sqrt(s.K) * r);
  if (s.K < 0.0) return (s.n - 1) * std::sqrt(-s.K) / std::tanh(std::sqrt(-s.K) * r);
  return (s.n - 1) / r;
}

void cmd_expansion(const Context& c, const OutputDir& out) {
  const SpaceSpec space = space_from(c.cfg);
  if (space.kind == SpaceKind::Gaussian)
    throw Error(ErrorKind::NotApplicable, "estimator", "expansion runs on radial models; use `model` for Gaussian space");
  const double v = c.cfg.real("v");
  const auto ts = model_times(c.cfg, space);
  const auto table = model_entropy_table(space, v, ts, c.cfg.integer("cells"), c.cfg.real("solver_tol"));
  const RadialMesh mesh{space, table.r_max, table.m};
  const auto window = radial_window(mesh, table.r_v, ts);
  const auto fit = fit_entropy_expansion(table.samples, window);
  const double per = isoperimetric_profile(space, v);
  const double hmean = cap_mean_curvature(space, table.r_v);
  json j = document("expansion");
  j["space"] = to_json(space);
  j["v"] = real(v);
  j["r_v"] = real(table.r_v);
  j["per_true"] = real(per);
  j["fit"] = to_json(fit);
  j["per_rel_err"] = real((fit.per_est - per) / per);
  j["mean_curvature"] = real(hmean);
  j["local_expansion_b"] = real(mean_curvature_prediction(per, hmean, (space.n - 1) * space.K));
  const bool equality = space.kind == SpaceKind::Sphere && std::abs(hmean) < 1e-12;
  try {
    j["curvature_check"] = to_json(curvature_coefficient_check(fit, space, per, equality));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotApplicable) throw;
    j["curvature_check"] = {{"not_applicable", e.detail()}};
  }
  out.write("expansion.csv", csv(table.samples));
  out.write_json("expansion.json", j);
  print_summary(j);
}

std::vector<NeedleDensity> needle_catalog(const Scene* scene, const std::string& scene_path) {
  if (!scene || scene->densities.empty())
    return {NeedleDensity::uniform(0.0, 1.0), NeedleDensity::gaussian(1.0), NeedleDensity::cosine_power(3),
            NeedleDensity::cubic()};
  std::vector<NeedleDensity> out;
  for (const auto& d : scene->densities) {
    if (d.kind == "uniform") out.push_back(NeedleDensity::uniform(d.params[0], d.params[1]));
    else if (d.kind == "gaussian") out.push_back(NeedleDensity::gaussian(d.params[0]));
    else {
      fs::path p(d.path);
      if (p.is_relative()) p = fs::path(scene_path).parent_path() / p;
      out.push_back(NeedleDensity::from_file(p.string()));
    }
  }
  return out;
}

void cmd_needles(const Context& c, const OutputDir& out) {
  std::optional<Scene> scene;
  if (!c.cfg.get("scene").empty()) scene = load_scene(c.cfg.get("scene"));
  const auto densities = needle_catalog(scene ? &*scene : nullptr, c.cfg.get("scene"));
  const auto ts = c.cfg.get("t") == "auto" ? std::vector<double>{1e-3, 1e-2, 1e-1} : parse_time_spec(c.cfg.get("t"));
  const auto vs = c.cfg.get("v") == "0.5" ? std::vector<double>{0.1, 0.3, 0.5} : reals_list(c.cfg.get("v"), "v");
  const int lattice = c.cfg.integer("lattice");
  json j = document("needles");
  json rows = json::array();
  int violations = 0;
  for (const auto& d : densities) {
    Needle needle(d, c.cfg.integer("cells"), c.cfg.real("needle_tol"));
    const double slack = needle.curvature_slack();
    if (slack < -1e-9)
      throw Error(ErrorKind::InvalidArgument, "needles",
                  "density " + d.name + " violates V'' >= K by " + format_real(-slack));
    for (double t : ts) {
      NeedleFlowBank bank(needle, t);
      for (double v : vs) {
        const auto rep = interval_minimizer_search(bank, v, lattice);
        violations += rep.violation;
        json r = to_json(rep);
        r["density"] = d.name;
        r["K"] = real(d.K);
        r["t"] = real(t);
        r["v"] = real(v);
        rows.push_back(r);
      }
    }
  }
  j["minimizers"] = rows;
  j["violations"] = violations;
  // Jensen matrix: four model densities by three fiber configurations.
  const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> fibers = {
      {"0.2/0.8 equal", {{0.2, 0.5}, {0.8, 0.5}}},
      {"0.1/0.5 equal", {{0.1, 0.5}, {0.5, 0.5}}},
      {"0.3/0.6/0.9 (0.5,0.3,0.2)", {{0.3, 0.5}, {0.6, 0.3}, {0.9, 0.2}}},
  };
  const std::vector<SpaceSpec> spaces = {SpaceSpec::euclidean(2), SpaceSpec::sphere(2, 1.0),
                                         SpaceSpec::hyperbolic(2, -1.0), SpaceSpec::gaussian(1)};
  const double tj = 0.01;
  json jensen = json::array();
  for (const auto& s : spaces)
    for (const auto& [label, f] : fibers) {
      json r = to_json(jensen_aggregate(f, s, tj, c.cfg.integer("cells")));
      r["space"] = to_json(s);
      r["fibers"] = label;
      r["t"] = tj;
      jensen.push_back(r);
    }
  j["jensen"] = jensen;
  out.write_json("needles.json", j);
  std::cout << "needles: " << rows.size() << " searches, " << violations << " violations; jensen cases: "
            << jensen.size() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffperim: perimeter from entropy dissipation under heat flow"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  std::map<std::string, std::string> flags;
  std::string config_path;
  bool print_config = false;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  for (const auto& k : config_keys())
    app.add_option("--" + std::string(k.name), flags[k.name], std::string(k.help) + " (default: " +
                                                                  (std::string(k.default_value).empty() ? "none" : k.default_value) + ")");
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"constants", "universal constant and profile integrals"},
      {"curve", "entropy curve of a scene on a periodic grid"},
      {"perimeter", "perimeter estimate from the entropy curve"},
      {"dissipation", "dH/dt against the Fisher information"},
      {"compare", "entropy of a set against the volume-matched ball"},
      {"model", "model-space entropy table"},
      {"needles", "interval-minimizer searches and Jensen gaps"},
      {"expansion", "t^{3/2} coefficient against -C K Per"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json(Error(ErrorKind::ParseError, "cli", e.what())).dump(2) << "\n";
    return 2;
  }

  try {
    if (!config_path.empty()) ctx.cfg.load_file(config_path);
    for (const auto& k : config_keys())
      if (app.count("--" + std::string(k.name))) ctx.cfg.set(k.name, flags[k.name]);
    ctx.command = app.get_subcommands().front()->get_name();
    if (print_config) {
      std::cout << "# command: " << ctx.command << "\n" << ctx.cfg.dump();
      return 0;
    }
    OutputDir out(ctx.cfg.get("output_dir"));
    if (ctx.command == "constants") cmd_constants(ctx, out);
    else if (ctx.command == "curve") cmd_curve(ctx, out);
    else if (ctx.command == "perimeter") cmd_perimeter(ctx, out);
    else if (ctx.command == "dissipation") cmd_dissipation(ctx, out);
    else if (ctx.command == "compare") cmd_compare(ctx, out);
    else if (ctx.command == "model") cmd_model(ctx, out);
    else if (ctx.command == "needles") cmd_needles(ctx, out);
    else if (ctx.command == "expansion") cmd_expansion(ctx, out);
  } catch (const Error& e) {
    std::cerr << error_json(e).dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json(Error(ErrorKind::IoError, "cli", e.what())).dump(2) << "\n";
    return 1;
  }
  return 0;
}
