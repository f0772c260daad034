#pragma once

// Line-oriented scene files:
//   ball cx cy r          box x0 y0 x1 y1        interval a b
//   cap r [K]             halfspace nx ny offset
//   density uniform a b | density gaussian K | density custom <node-file>
//   dim n   name <word>   margin m   domain Lx [Ly [Lz]]
// '#' starts a comment. Reals use '.' as the decimal separator.

#include <array>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diffperim/error.hpp"
#include "diffperim/set_geometry.hpp"

namespace diffperim {

struct DensityDecl {
  std::string kind;  // uniform | gaussian | custom
  std::vector<double> params;
  std::string path;
  int line = 0;
};

struct Scene {
  SetSpec set;
  std::optional<std::array<double, 3>> domain;
  std::vector<DensityDecl> densities;
};

namespace scene_detail {

inline double parse_real(const std::string& token, int line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorKind::ParseError, "set_geometry",
                "line " + std::to_string(line) + ": invalid number '" + token + "'");
  return value;
}

inline std::vector<double> parse_reals(const std::vector<std::string>& tokens, std::size_t from, int line) {
  std::vector<double> out;
  for (std::size_t i = from; i < tokens.size(); ++i) out.push_back(parse_real(tokens[i], line));
  return out;
}

}  // namespace scene_detail

inline Scene parse_scene(std::istream& in) {
  using scene_detail::parse_reals;
  Scene scene;
  std::optional<int> dim;
  IntervalUnion intervals;
  auto fail = [](int line, const std::string& msg) {
    return Error(ErrorKind::ParseError, "set_geometry", "line " + std::to_string(line) + ": " + msg);
  };
  auto set_dim = [&](int d, int line) {
    if (dim && *dim != d)
      throw fail(line, "dimension " + std::to_string(d) + " conflicts with earlier dimension " + std::to_string(*dim));
    if (d < 1 || d > 3) throw fail(line, "dimension must be 1, 2 or 3");
    dim = d;
  };

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string w; ls >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    if (kw == "ball") {
      auto v = parse_reals(tok, 1, line_no);
      if (v.size() < 2 || v.size() > 4) throw fail(line_no, "ball expects center coordinates and a radius");
      set_dim(static_cast<int>(v.size()) - 1, line_no);
      scene.set.primitives.push_back(Ball{{v.begin(), v.end() - 1}, v.back()});
    } else if (kw == "box") {
      auto v = parse_reals(tok, 1, line_no);
      if (v.empty() || v.size() % 2 != 0 || v.size() > 6) throw fail(line_no, "box expects 2n corner coordinates");
      const auto d = static_cast<long>(v.size() / 2);
      set_dim(static_cast<int>(d), line_no);
      scene.set.primitives.push_back(Box{{v.begin(), v.begin() + d}, {v.begin() + d, v.end()}});
    } else if (kw == "interval") {
      auto v = parse_reals(tok, 1, line_no);
      if (v.size() != 2) throw fail(line_no, "interval expects two endpoints");
      set_dim(1, line_no);
      intervals.intervals.emplace_back(v[0], v[1]);
    } else if (kw == "cap") {
      auto v = parse_reals(tok, 1, line_no);
      if (v.empty() || v.size() > 2) throw fail(line_no, "cap expects a radius and optional curvature");
      scene.set.primitives.push_back(Cap{v[0], v.size() == 2 ? v[1] : 1.0});
    } else if (kw == "halfspace") {
      auto v = parse_reals(tok, 1, line_no);
      if (v.size() < 2 || v.size() > 4) throw fail(line_no, "halfspace expects a normal and an offset");
      set_dim(static_cast<int>(v.size()) - 1, line_no);
      scene.set.primitives.push_back(HalfSpace{{v.begin(), v.end() - 1}, v.back()});
    } else if (kw == "density") {
      if (tok.size() < 2) throw fail(line_no, "density expects a kind");
      DensityDecl d;
      d.kind = tok[1];
      d.line = line_no;
      if (d.kind == "custom") {
        if (tok.size() != 3) throw fail(line_no, "density custom expects a node file");
        d.path = tok[2];
      } else if (d.kind == "uniform") {
        d.params = parse_reals(tok, 2, line_no);
        if (d.params.size() != 2) throw fail(line_no, "density uniform expects a b");
      } else if (d.kind == "gaussian") {
        d.params = parse_reals(tok, 2, line_no);
        if (d.params.size() != 1) throw fail(line_no, "density gaussian expects K");
      } else {
        throw fail(line_no, "unknown density kind '" + d.kind + "'");
      }
      scene.densities.push_back(std::move(d));
    } else if (kw == "dim") {
      if (tok.size() != 2) throw fail(line_no, "dim expects one integer");
      set_dim(static_cast<int>(scene_detail::parse_real(tok[1], line_no)), line_no);
    } else if (kw == "name") {
      if (tok.size() != 2) throw fail(line_no, "name expects one word");
      scene.set.name = tok[1];
    } else if (kw == "margin") {
      auto v = parse_reals(tok, 1, line_no);
      if (v.size() != 1) throw fail(line_no, "margin expects one number");
      scene.set.margin = v[0];
    } else if (kw == "domain") {
      auto v = parse_reals(tok, 1, line_no);
      if (v.empty() || v.size() > 3) throw fail(line_no, "domain expects 1-3 lengths");
      std::array<double, 3> b{1.0, 1.0, 1.0};
      for (std::size_t i = 0; i < v.size(); ++i) b[i] = v[i];
      scene.domain = b;
    } else {
      throw fail(line_no, "unknown keyword '" + kw + "'");
    }
  }
  if (!intervals.intervals.empty()) scene.set.primitives.push_back(std::move(intervals));
  scene.set.dimension = dim.value_or(2);
  return scene;
}

inline Scene parse_scene_string(const std::string& text) {
  std::istringstream in(text);
  return parse_scene(in);
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "set_geometry", "cannot open scene file '" + path + "'");
  auto scene = parse_scene(in);
  if (scene.set.name.empty()) {
    auto slash = path.find_last_of('/');
    auto base = path.substr(slash == std::string::npos ? 0 : slash + 1);
    scene.set.name = base.substr(0, base.find('.'));
  }
  return scene;
}

}  // namespace diffperim
