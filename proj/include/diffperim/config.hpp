#pragma once

// Run configuration: a flat set of documented keys with defaults, read from
// key=value files ('#' comments) and overridden by command-line flags.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "diffperim/error.hpp"

namespace diffperim {

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"scene", "", "scene file describing the set (and needle densities)"},
      {"space", "euclidean", "euclidean | sphere | hyperbolic | gaussian"},
      {"dim", "2", "dimension of the model space"},
      {"K", "0", "curvature of the model space (sign must match the space)"},
      {"grid", "1024", "grid cells per axis (Euclidean commands)"},
      {"raster", "coverage", "coverage | sharp rasterization of the initial set"},
      {"t", "auto", "times: auto, log:lo:hi:count, or a comma list"},
      {"count", "12", "number of times used by t=auto"},
      {"v", "0.5", "volume fraction (model, expansion, needles)"},
      {"cells", "4096", "radial or needle mesh cells (minimum 4096)"},
      {"tol", "1e-10", "quadrature tolerance for the profile constants"},
      {"solver_tol", "1e-8", "time-stepping tolerance of the 1D solvers"},
      {"needle_tol", "1e-7", "time-stepping tolerance of needle searches"},
      {"lattice", "60", "quantile lattice cells for the needle search (<= 64)"},
      {"fisher_eps", "1e-12", "clamp of p(1-p) in the Fisher integrand"},
      {"output_dir", "out", "directory receiving data files"},
  };
  return keys;
}

class RunConfig {
 public:
  RunConfig() {
    for (const auto& k : config_keys()) values_[k.name] = k.default_value;
  }

  static bool known(const std::string& key) {
    for (const auto& k : config_keys())
      if (key == k.name) return true;
    return false;
  }

  void set(const std::string& key, const std::string& value, const std::string& where = "flag") {
    if (!known(key)) throw Error(ErrorKind::ParseError, "cli", where + ": unknown key '" + key + "'");
    values_[key] = value;
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::InvalidArgument, "cli", "unknown key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const { return parse_real(get(key), key); }

  int integer(const std::string& key) const {
    const std::string& s = get(key);
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw Error(ErrorKind::ParseError, "cli", "key '" + key + "': expected an integer, got '" + s + "'");
    return v;
  }

  /// key=value lines; '#' starts a comment.
  void load(std::istream& in, const std::string& source) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      const std::string where = source + ":" + std::to_string(line_no);
      if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "cli", where + ": expected key=value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cli", "cannot open config file '" + path + "'");
    load(in, path);
  }

  /// The fully resolved configuration in the file format.
  std::string dump() const {
    std::ostringstream out;
    for (const auto& k : config_keys()) out << "# " << k.help << '\n' << k.name << " = " << get(k.name) << '\n';
    return out.str();
  }

  static double parse_real(const std::string& s, const std::string& what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      throw Error(ErrorKind::ParseError, "cli", what + ": expected a number, got '" + s + "'");
    return v;
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Parses "log:lo:hi:count" or "t1,t2,...": positive, strictly increasing.
inline std::vector<double> parse_time_spec(const std::string& spec) {
  std::vector<double> ts;
  if (spec.rfind("log:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(4));
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw Error(ErrorKind::ParseError, "cli", "time spec must be log:lo:hi:count");
    const double lo = RunConfig::parse_real(parts[0], "t"), hi = RunConfig::parse_real(parts[1], "t");
    const double cnt = RunConfig::parse_real(parts[2], "t");
    const int count = static_cast<int>(cnt);
    if (count != cnt || count < 1) throw Error(ErrorKind::ParseError, "cli", "log time spec needs an integer count >= 1");
    if (!(lo > 0.0 && hi >= lo)) throw Error(ErrorKind::ParseError, "cli", "log time spec needs 0 < lo <= hi");
    if (count > 1 && hi == lo) throw Error(ErrorKind::ParseError, "cli", "log time spec with count > 1 needs lo < hi");
    for (int i = 0; i < count; ++i) ts.push_back(count == 1 ? lo : lo * std::pow(hi / lo, double(i) / (count - 1)));
    ts.back() = hi;
  } else {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) ts.push_back(RunConfig::parse_real(RunConfig::trim(part), "t"));
  }
  if (ts.empty()) throw Error(ErrorKind::ParseError, "cli", "empty time spec");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0)) throw Error(ErrorKind::ParseError, "cli", "times must be positive");
    if (i > 0 && !(ts[i] > ts[i - 1])) throw Error(ErrorKind::ParseError, "cli", "times must be strictly increasing");
  }
  return ts;
}

}  // namespace diffperim
