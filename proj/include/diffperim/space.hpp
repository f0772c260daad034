#pragma once

#include <cmath>
#include <string>

#include "diffperim/error.hpp"

namespace diffperim {

enum class SpaceKind { Euclidean, Sphere, Hyperbolic, Gaussian };

inline const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Sphere: return "sphere";
    case SpaceKind::Hyperbolic: return "hyperbolic";
    case SpaceKind::Gaussian: return "gaussian";
  }
  return "unknown";
}

inline SpaceKind parse_space_kind(const std::string& s) {
  if (s == "euclidean") return SpaceKind::Euclidean;
  if (s == "sphere") return SpaceKind::Sphere;
  if (s == "hyperbolic") return SpaceKind::Hyperbolic;
  if (s == "gaussian") return SpaceKind::Gaussian;
  throw Error(ErrorKind::InvalidArgument, "model_spaces", "unknown space kind '" + s + "'");
}

/// Geometry selector. Sphere needs K > 0, Hyperbolic K < 0, the others K = 0.
struct SpaceSpec {
  SpaceKind kind = SpaceKind::Euclidean;
  int n = 2;
  double K = 0.0;

  static SpaceSpec euclidean(int n) { return {SpaceKind::Euclidean, n, 0.0}; }
  static SpaceSpec sphere(int n, double K = 1.0) { return {SpaceKind::Sphere, n, K}; }
  static SpaceSpec hyperbolic(int n, double K = -1.0) { return {SpaceKind::Hyperbolic, n, K}; }
  static SpaceSpec gaussian(int n) { return {SpaceKind::Gaussian, n, 0.0}; }

  void validate() const {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "model_spaces", "dimension must be >= 1");
    const bool ok = (kind == SpaceKind::Sphere && K > 0.0) || (kind == SpaceKind::Hyperbolic && K < 0.0) ||
                    ((kind == SpaceKind::Euclidean || kind == SpaceKind::Gaussian) && K == 0.0);
    if (!ok) throw Error(ErrorKind::InvalidArgument, "model_spaces", "curvature sign does not match the space kind");
  }

  /// s_K(r): sin(sqrt(K) r)/sqrt(K), r, or sinh(sqrt(-K) r)/sqrt(-K).
  double s(double r) const {
    if (K > 0.0) {
      const double rk = std::sqrt(K);
      return std::sin(rk * r) / rk;
    }
    if (K < 0.0) {
      const double rk = std::sqrt(-K);
      return std::sinh(rk * r) / rk;
    }
    return r;
  }
};

}  // namespace diffperim
