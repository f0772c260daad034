#pragma once

// Serialization: CSV tables with 17 significant digits, JSON documents
// carrying a schema version, and aligned plain-text tables.

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffperim/error.hpp"
#include "diffperim/estimator.hpp"
#include "diffperim/euclidean_flow.hpp"
#include "diffperim/model_spaces.hpp"
#include "diffperim/needles.hpp"
#include "diffperim/profile1d.hpp"
#include "diffperim/set_geometry.hpp"
#include "diffperim/space.hpp"

namespace diffperim {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "diffperim-report/1";

inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no inf/nan; those become the strings "inf", "-inf", "nan".
inline json real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

inline constexpr const char* kCurveHeader = "t,entropy,fisher,l1_jump,mutual_info";

inline void write_samples_csv(std::ostream& out, const std::vector<EntropySample>& samples) {
  out << kCurveHeader << '\n';
  for (const auto& s : samples)
    out << format_real(s.t) << ',' << format_real(s.entropy) << ',' << format_real(s.fisher) << ','
        << format_real(s.l1_jump) << ',' << format_real(s.mutual_info) << '\n';
}

inline json document(const std::string& kind) {
  json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

inline json to_json(const ProfileConstants& c) {
  json j;
  j["c_universal"] = real(c.c_universal);
  j["entropy_integral"] = real(c.entropy_integral);
  j["fisher_integral"] = real(c.fisher_integral);
  j["l1_constant"] = real(c.l1_constant);
  j["tail_integral"] = real(c.tail_integral);
  j["truncation"] = real(c.truncation);
  j["max_error_estimate"] = real(c.max_error_estimate);
  return j;
}

inline json to_json(const SpaceSpec& s) {
  return json{{"kind", to_string(s.kind)}, {"n", s.n}, {"K", real(s.K)}};
}

inline json to_json(const SetSpec& set) {
  json prims = json::array();
  for (const auto& p : set.primitives) {
    json q;
    if (auto b = std::get_if<Ball>(&p)) {
      q = {{"type", "ball"}, {"center", b->center}, {"radius", b->radius}};
    } else if (auto x = std::get_if<Box>(&p)) {
      q = {{"type", "box"}, {"lo", x->lo}, {"hi", x->hi}};
    } else if (auto h = std::get_if<HalfSpace>(&p)) {
      q = {{"type", "halfspace"}, {"normal", h->normal}, {"offset", h->offset}};
    } else if (auto c = std::get_if<Cap>(&p)) {
      q = {{"type", "cap"}, {"radius", c->radius}, {"curvature", c->curvature}};
    } else if (auto iu = std::get_if<IntervalUnion>(&p)) {
      json iv = json::array();
      for (auto [a, b] : iu->intervals) iv.push_back({a, b});
      q = {{"type", "intervals"}, {"intervals", iv}};
    }
    prims.push_back(q);
  }
  json j{{"name", set.name}, {"dimension", set.dimension}, {"margin", set.margin}, {"primitives", prims}};
  try {
    const auto ref = reference_geometry(set);
    j["reference"] = {{"volume", real(ref.volume)}, {"perimeter", real(ref.perimeter)}, {"exact", ref.exact}};
  } catch (const Error&) {
    j["reference"] = nullptr;
  }
  return j;
}

inline json to_json(const EntropyCurve& c) {
  json j = document("entropy_curve");
  j["space"] = to_json(c.space);
  j["set"] = to_json(c.set);
  j["grid"] = {{"shape", c.shape}, {"box", c.box}, {"spacing", real(c.spacing)},
               {"sampling", c.mode == RasterMode::Coverage ? "coverage" : "sharp"}};
  j["volume_fraction"] = real(c.volume_fraction);
  j["domain_volume"] = real(c.domain_volume);
  j["clearance"] = real(c.clearance);
  j["diagnostics"] = {{"max_clamp_excess", real(c.max_clamp)}};
  j["samples"] = c.samples.size();
  return j;
}

inline json to_json(const FitWindow& w) {
  return json{{"t_min", real(w.t_min)},
              {"t_max", real(w.t_max)},
              {"resolution_margin", real(w.resolution_margin)},
              {"image_margin", real(w.image_margin)}};
}

inline json to_json(const FitReport& r) {
  return json{{"a", real(r.a)},
              {"b", real(r.b)},
              {"per_est", real(r.per_est)},
              {"curvature_est", real(r.curvature_est)},
              {"pure_limit_est", real(r.pure_limit_est)},
              {"residual_rms", real(r.residual_rms)},
              {"condition", real(r.condition)},
              {"samples_used", r.samples_used},
              {"window", to_json(r.window)}};
}

inline json to_json(const L1Fit& f) {
  return json{{"intercept", real(f.intercept)},
              {"slope", real(f.slope)},
              {"condition", real(f.condition)},
              {"samples_used", f.samples_used}};
}

inline json to_json(const CurvatureCheck& c) {
  return json{{"equality_case", c.equality_case},
              {"predicted_b", real(c.predicted_b)},
              {"relative_error", c.equality_case ? real(c.relative_error) : json(nullptr)},
              {"slack", real(c.slack)},
              {"inequality_holds", c.inequality_holds}};
}

inline json to_json(const DominanceReport& r) {
  json j = document("dominance");
  j["set"] = r.set_name;
  j["volume"] = real(r.volume);
  j["per_set"] = real(r.per_set);
  j["per_ball"] = real(r.per_ball);
  j["analytic_gap"] = real(r.analytic_gap);
  j["min_difference"] = real(r.min_difference);
  j["dominated"] = r.dominated;
  j["edge_t"] = real(r.edge_t);
  j["edge_gap"] = real(r.edge_gap);
  j["fit_gap"] = real(r.fit_gap);
  json rows = json::array();
  for (const auto& s : r.samples)
    rows.push_back({{"t", real(s.t)}, {"entropy_set", real(s.entropy_set)}, {"entropy_ball", real(s.entropy_ball)},
                    {"difference", real(s.difference)}});
  j["samples"] = rows;
  return j;
}

inline json to_json(const DissipationPoint& p) {
  return json{{"t", real(p.t)}, {"dH_dt", real(p.dH_dt)}, {"fisher", real(p.fisher)},
              {"relative_residual", real(p.relative_residual)}};
}

inline json to_json(const ModelEntropyTable& t) {
  json j = document("model_entropy");
  j["space"] = to_json(t.space);
  j["space"]["r_max"] = real(t.r_max);
  j["space"]["m"] = t.m;
  j["v"] = real(t.v);
  j["r_v"] = real(t.r_v);
  j["samples"] = t.samples.size();
  return j;
}

inline json to_json(const NeedleSet& s) {
  json iv = json::array();
  for (auto [a, b] : s.intervals) iv.push_back({real(a), real(b)});
  return json{{"intervals", iv}, {"measure", real(s.measure)}};
}

inline json to_json(const MinimizerReport& r) {
  json arg = json::array();
  for (const auto& s : r.argmin) arg.push_back(to_json(s));
  return json{{"min_entropy", real(r.min_entropy)},
              {"best_interval_entropy", real(r.best_interval_entropy)},
              {"best_non_interval_entropy", real(r.best_non_interval_entropy)},
              {"margin", real(r.margin)},
              {"violation", r.violation},
              {"argmin_is_interval", r.argmin_is_interval},
              {"candidates", r.candidates},
              {"argmin", arg}};
}

inline json to_json(const JensenReport& r) {
  return json{{"mean_of_entropies", real(r.mean_of_entropies)},
              {"entropy_of_mean", real(r.entropy_of_mean)},
              {"gap", real(r.gap)},
              {"sign", r.sign},
              {"mean_volume", real(r.mean_volume)}};
}

inline json error_json(const Error& e) {
  json j = document("error");
  j["error"] = {{"module", e.module()}, {"kind", to_string(e.kind())}, {"detail", e.detail()}};
  return j;
}

/// Plain-text table with right-aligned columns.
inline std::string aligned_table(const std::vector<std::string>& header,
                                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      if (c) out << "  ";
      out << std::setw(static_cast<int>(width[c])) << (c < r.size() ? r[c] : "");
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

inline std::string fixed(double x, int digits = 6) {
  if (!std::isfinite(x)) return format_real(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace diffperim
