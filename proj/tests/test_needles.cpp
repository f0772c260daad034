#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "diffperim/needles.hpp"

using namespace diffperim;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<NeedleDensity> catalog() {
  return {NeedleDensity::uniform(0.0, 1.0), NeedleDensity::gaussian(1.0), NeedleDensity::cosine_power(3),
          NeedleDensity::cubic()};
}

// Cell average of the Neumann cosine series for 1_[0, a] on (0, 1).
double series_cell_average(double a, double x, double h, double t) {
  double p = a;
  for (int k = 1; k < 4000; ++k) {
    const double w = k * pi;
    const double decay = std::exp(-w * w * t);
    if (decay < 1e-18) break;
    const double sinc = std::sin(0.5 * w * h) / (0.5 * w * h);
    p += 2.0 * std::sin(w * a) / w * std::cos(w * x) * sinc * decay;
  }
  return p;
}

}  // namespace

TEST(NeedleDensity, NormalizationAndCurvature) {
  for (const auto& d : catalog()) {
    Needle n(d);
    double total = 0.0;
    for (int i = 0; i < n.solver().cells(); ++i) total += n.cell_probability(i);
    EXPECT_NEAR(total, 1.0, 1e-12) << d.name;
    EXPECT_GE(n.curvature_slack(), -1e-9) << d.name;
  }
}

TEST(NeedleDensity, Validation) {
  EXPECT_THROW(NeedleDensity::gaussian(0.0), Error);
  EXPECT_THROW(NeedleDensity::cosine_power(1), Error);
  EXPECT_THROW(NeedleDensity::tabulated({0, 1}, {1, 1}), Error);
  EXPECT_THROW(NeedleDensity::tabulated({0, 1, 0.5}, {1, 1, 1}), Error);
  EXPECT_THROW(NeedleDensity::tabulated({0, 0.5, 1}, {1, 0, 1}), Error);
  EXPECT_THROW(Needle(NeedleDensity::uniform(0, 1), 1024), Error);
  Needle n(NeedleDensity::uniform(0, 1));
  EXPECT_THROW(n.make_set({{0.5, 0.4}}), Error);
  EXPECT_THROW(n.make_set({{-0.1, 0.4}}), Error);
  EXPECT_THROW(n.make_set({{0.1, 0.4}, {0.3, 0.6}}), Error);
}

TEST(NeedleDensity, TabulatedCurvatureFromNodes) {
  // rho = exp(-s^2) sampled on a uniform grid: discrete V'' is exactly 2.
  std::vector<double> s, rho;
  for (int i = 0; i <= 40; ++i) {
    s.push_back(-2.0 + 0.1 * i);
    rho.push_back(std::exp(-s.back() * s.back()));
  }
  const auto d = NeedleDensity::tabulated(s, rho);
  EXPECT_NEAR(d.K, 2.0, 1e-9);
  EXPECT_DOUBLE_EQ(d.lo, -2.0);
  EXPECT_DOUBLE_EQ(d.hi, 2.0);
}

TEST(NeedleDensity, NodeFile) {
  const std::string path = ::testing::TempDir() + "needle_nodes.txt";
  {
    std::ofstream out(path);
    out << "# s rho\n0 1\n0.5 2  # peak\n\n1 1\n";
  }
  const auto d = NeedleDensity::from_file(path);
  EXPECT_DOUBLE_EQ(d.hi, 1.0);
  EXPECT_NEAR(d.K, 8.0 * std::log(2.0), 1e-12);
  {
    std::ofstream out(path);
    out << "0 1\n0.5\n";
  }
  try {
    NeedleDensity::from_file(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::remove(path.c_str());
  EXPECT_THROW(NeedleDensity::from_file(path), Error);
}

TEST(NeedleSemigroup, UniformMatchesCosineSeries) {
  const int m = 8192;
  Needle n(NeedleDensity::uniform(0.0, 1.0), m, 1e-10);
  const double a = 0.3;
  const auto p0 = n.indicator(n.make_set({{0.0, a}}));
  const double h = 1.0 / m;
  for (double t : {0.05, 0.1}) {
    const auto p = needle_semigroup(n, p0, t);
    double err = 0.0;
    for (int i = 0; i < m; ++i) err = std::max(err, std::abs(p[i] - series_cell_average(a, (i + 0.5) * h, h, t)));
    EXPECT_LE(err, 1e-8) << "t=" << t;
  }
}

TEST(NeedleSemigroup, MassRangeAndEquilibrium) {
  for (const auto& d : catalog()) {
    Needle n(d);
    const auto set = n.make_set({{n.quantile(0.2), n.quantile(0.5)}});
    const auto p0 = n.indicator(set);
    const double m0 = n.mass(p0);
    EXPECT_NEAR(m0, 0.3, 1e-9) << d.name;
    for (double t : {1e-3, 1e-1}) {
      const auto p = needle_semigroup(n, p0, t);
      EXPECT_NEAR(n.mass(p) / m0, 1.0, 1e-10) << d.name << " t=" << t;
      for (double x : p) {
        EXPECT_GE(x, -1e-12);
        EXPECT_LE(x, 1.0 + 1e-12);
      }
    }
    EXPECT_EQ(needle_semigroup(n, p0, 0.0), p0);
  }
  Needle u(NeedleDensity::uniform(0.0, 1.0));
  const auto late = needle_semigroup(u, u.indicator(u.make_set({{0.0, 0.4}})), 5.0);
  for (double x : late) EXPECT_NEAR(x, 0.4, 1e-8);
}

TEST(NeedleEntropy, LimitsAndComplementSymmetry) {
  for (const auto& d : catalog()) {
    Needle n(d);
    const double a = n.quantile(0.25), b = n.quantile(0.6);
    const auto set = n.make_set({{a, b}});
    const auto complement = n.make_set({{d.lo, a}, {b, d.hi}});
    EXPECT_EQ(needle_entropy(n, set, 0.0), 0.0);
    for (double t : {1e-3, 1e-2})
      EXPECT_NEAR(needle_entropy(n, set, t), needle_entropy(n, complement, t), 1e-8) << d.name;
  }
  Needle u(NeedleDensity::uniform(0.0, 1.0));
  EXPECT_NEAR(needle_entropy(u, u.make_set({{0.2, 0.5}}), 10.0), binary_entropy(0.3), 1e-8);
}

TEST(NeedleEntropy, CentredIntervalBeatsSplitPair) {
  Needle u(NeedleDensity::uniform(0.0, 1.0));
  const double t = 0.01;
  const double whole = needle_entropy(u, u.make_set({{0.25, 0.75}}), t);
  const double split = needle_entropy(u, u.make_set({{0.1, 0.35}, {0.6, 0.85}}), t);
  EXPECT_LT(whole, split);
}

TEST(LatticeFamily, Structure) {
  const auto fam = lattice_family(0.3, 10);
  int singles = 0;
  for (const auto& c : fam) {
    double total = 0.0;
    for (auto [a, b] : c.intervals) {
      EXPECT_LT(a, b);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(b, 1.0 + 1e-12);
      total += b - a;
    }
    EXPECT_NEAR(total, 0.3, 1e-12);
    if (c.intervals.size() == 1) ++singles;
  }
  EXPECT_EQ(singles, 8);  // starts 0.0 .. 0.7
  EXPECT_THROW(lattice_family(1.0), Error);
  EXPECT_THROW(lattice_family(0.5, 1), Error);
}

TEST(IntervalSearch, SingleCandidateHasZeroMargin) {
  Needle u(NeedleDensity::uniform(0.0, 1.0));
  const auto rep = interval_minimizer_search(u, 0.01, {QuantileCandidate{{{0.2, 0.5}}}});
  EXPECT_EQ(rep.margin, 0.0);
  EXPECT_FALSE(rep.violation);
  EXPECT_TRUE(rep.argmin_is_interval);
  EXPECT_EQ(rep.candidates, 1u);
  EXPECT_THROW(interval_minimizer_search(u, 0.01, std::vector<QuantileCandidate>{}), Error);
}

TEST(IntervalSearch, SingleIntervalWinsOnSmallLattice) {
  for (const auto& d : {NeedleDensity::uniform(0.0, 1.0), NeedleDensity::gaussian(1.0)}) {
    Needle n(d);
    const auto rep = interval_minimizer_search(n, 0.3, 1e-2, 12);
    EXPECT_FALSE(rep.violation) << d.name;
    EXPECT_TRUE(rep.argmin_is_interval) << d.name;
    EXPECT_GT(rep.margin, 0.0) << d.name;
    EXPECT_LE(rep.min_entropy, rep.best_non_interval_entropy);
  }
}

TEST(IntervalSearch, UniformWinnerIsAnchoredWithMirrorTie) {
  Needle u(NeedleDensity::uniform(0.0, 1.0));
  const auto rep = interval_minimizer_search(u, 0.3, 1e-2, 10);
  ASSERT_EQ(rep.argmin.size(), 2u);
  EXPECT_NEAR(rep.argmin[0].intervals[0].first, 0.0, 1e-12);
  EXPECT_NEAR(rep.argmin[1].intervals[0].second, 1.0, 1e-12);
}

TEST(Jensen, DegenerateCasesVanish) {
  const auto sp = SpaceSpec::sphere(2);
  const auto equal = jensen_aggregate({{0.3, 0.5}, {0.3, 0.5}}, sp, 0.01);
  EXPECT_NEAR(equal.gap, 0.0, 1e-14);
  EXPECT_EQ(equal.sign, 0);
  const auto single = jensen_aggregate({{0.4, 1.0}}, SpaceSpec::gaussian(1), 0.01);
  EXPECT_NEAR(single.gap, 0.0, 1e-14);
  EXPECT_THROW(jensen_aggregate({{0.3, 0.5}, {0.4, 0.4}}, sp, 0.01), Error);
  EXPECT_THROW(jensen_aggregate({{1.0, 1.0}}, sp, 0.01), Error);
  EXPECT_THROW(jensen_aggregate({}, sp, 0.01), Error);
}

TEST(Jensen, ReportsFiniteGap) {
  const auto rep = jensen_aggregate({{0.2, 0.5}, {0.8, 0.5}}, SpaceSpec::euclidean(2), 0.01);
  EXPECT_TRUE(std::isfinite(rep.gap));
  EXPECT_NEAR(rep.mean_volume, 0.5, 1e-15);
  EXPECT_NEAR(rep.gap, rep.mean_of_entropies - rep.entropy_of_mean, 1e-15);
}

TEST(ModelDensity, Shapes) {
  const auto s = model_density(SpaceSpec::sphere(2));
  EXPECT_NEAR(s.hi, pi, 1e-15);
  EXPECT_DOUBLE_EQ(s.K, 1.0);
  EXPECT_NEAR(s.potential(pi / 2), 0.0, 1e-15);
  const auto g = model_density(SpaceSpec::gaussian(1));
  EXPECT_DOUBLE_EQ(g.K, 1.0);
  const auto line = model_density(SpaceSpec::euclidean(1));
  EXPECT_EQ(line.name, "uniform");
}
