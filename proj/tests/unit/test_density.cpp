#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "treecon/density.hpp"
#include "treecon/error.hpp"

using namespace treecon;

namespace {

std::vector<double> normal_draws(std::size_t n, unsigned seed, double mean = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<double> two_clusters(double eps) {
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) {
    v.push_back(-10.0 + eps * (i - 10) / 10.0);
    v.push_back(10.0 + eps * (i - 10) / 10.0);
  }
  return v;
}

IntervalSet pipeline(const std::vector<double>& s, double rel_floor = 0.05) {
  const auto c = kde_estimate(s, bandwidth_silverman(s), 256);
  return partition_intervals(s, c, detect_modes(c, rel_floor), 0);
}

}  // namespace

TEST(Silverman, StandardNormalSample) {
  const double h = bandwidth_silverman(normal_draws(100, 1));
  EXPECT_GT(h, 0.1);
  EXPECT_LT(h, 0.6);
}

TEST(Silverman, MatchesTheClosedForm) {
  const std::vector<double> s{1, 2, 3, 4, 10};
  // sd = sqrt(12.5) (sample), IQR with linear interpolation = 4 - 2 = 2
  const double sd = std::sqrt(12.5);
  const double expected = 0.9 * std::min(sd, 2.0 / 1.34) * std::pow(5.0, -0.2);
  EXPECT_NEAR(bandwidth_silverman(s), expected, 1e-12);
}

TEST(Silverman, ConstantSamplesUseTheFallback) {
  const std::vector<double> s(10, 3.5);
  EXPECT_DOUBLE_EQ(bandwidth_silverman(s), 1e-3);
}

TEST(Silverman, ScalesWithTheData) {
  auto s = normal_draws(60, 2);
  const double h = bandwidth_silverman(s);
  for (auto& x : s) x *= 2.0;
  EXPECT_NEAR(bandwidth_silverman(s), 2.0 * h, 1e-12);
}

TEST(Silverman, NeedsTwoSamples) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(bandwidth_silverman(one), DomainError);
  EXPECT_THROW(bandwidth_silverman(std::span<const double>{}), DomainError);
}

TEST(Kde, SingleKernelPeak) {
  const std::vector<double> s{0.0};
  const auto c = kde_estimate(s, 1.0, 256);
  const auto it = std::max_element(c.density.begin(), c.density.end());
  const std::size_t i = static_cast<std::size_t>(it - c.density.begin());
  EXPECT_LE(std::abs(c.grid[i]), c.spacing());
  EXPECT_NEAR(*it, 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-3);
  EXPECT_DOUBLE_EQ(c.grid.front(), -3.0);
  EXPECT_DOUBLE_EQ(c.grid.back(), 3.0);
}

TEST(Kde, GridIsUniformAndDensityNonNegative) {
  const auto s = normal_draws(50, 3);
  const auto c = kde_estimate(s, 0.3, 64);
  ASSERT_EQ(c.size(), 64u);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c.grid[i] - c.grid[i - 1], c.spacing(), 1e-12);
  for (double d : c.density) EXPECT_GE(d, 0.0);
}

TEST(Kde, IntegratesToOne) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto s = normal_draws(10 + 20 * seed, seed, seed * 1.5, 0.1 + seed);
    for (std::size_t g : {16u, 64u, 256u}) {
      const auto c = kde_estimate(s, bandwidth_silverman(s), g);
      EXPECT_NEAR(integrate_trapezoid(c), 1.0, 0.02) << "seed " << seed << " grid " << g;
    }
  }
}

TEST(Kde, TranslationMovesGridAndPeak) {
  const auto s = normal_draws(80, 4);
  auto shifted = s;
  for (auto& x : shifted) x += 5.0;
  const auto a = kde_estimate(s, 0.4, 256);
  const auto b = kde_estimate(shifted, 0.4, 256);
  EXPECT_NEAR(b.grid.front() - a.grid.front(), 5.0, 1e-9);
  const auto pa = detect_modes(a, 0.05), pb = detect_modes(b, 0.05);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(b.grid[pb[i]] - a.grid[pa[i]], 5.0, b.spacing());
}

TEST(Kde, RejectsBadArguments) {
  const std::vector<double> s{0.0, 1.0};
  EXPECT_THROW(kde_estimate(s, 0.0), DomainError);
  EXPECT_THROW(kde_estimate(s, -1.0), DomainError);
  EXPECT_THROW(kde_estimate(s, 1.0, 15), DomainError);
  EXPECT_THROW(kde_estimate(std::span<const double>{}, 1.0), DomainError);
}

TEST(Modes, UnimodalCurveHasOnePeak) {
  const auto c = kde_estimate(normal_draws(400, 5), 0.5, 256);
  const auto m = detect_modes(c, 0.05);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0], static_cast<std::size_t>(std::max_element(c.density.begin(), c.density.end()) - c.density.begin()));
}

TEST(Modes, SeparatedSamplesGiveTwoPeaks) {
  const std::vector<double> s{-10.0, 10.0};
  EXPECT_EQ(detect_modes(kde_estimate(s, 0.5, 256), 0.05).size(), 2u);
}

TEST(Modes, FloorDropsMinorBump) {
  std::vector<double> s(99, -10.0);
  s.push_back(10.0);
  const auto c = kde_estimate(s, 0.5, 256);
  EXPECT_EQ(detect_modes(c, 0.05).size(), 1u);
  // Direct scan of strict interior maxima finds both.
  std::size_t maxima = 0;
  for (std::size_t i = 1; i + 1 < c.size(); ++i)
    if (c.density[i] > c.density[i - 1] && c.density[i] > c.density[i + 1]) ++maxima;
  EXPECT_EQ(maxima, 2u);
  EXPECT_EQ(detect_modes(c, 0.005).size(), 2u);
}

TEST(Modes, InvariantUnderScaling) {
  auto c = kde_estimate(two_clusters(0.5), 0.5, 256);
  const auto before = detect_modes(c, 0.05);
  for (auto& d : c.density) d *= 37.0;
  EXPECT_EQ(detect_modes(c, 0.05), before);
}

TEST(Modes, EndpointCountsWhenAboveItsNeighbour) {
  DensityCurve c;
  for (int i = 0; i < 16; ++i) {
    c.grid.push_back(i);
    c.density.push_back(16.0 - i);
  }
  c.bandwidth = 1.0;
  EXPECT_EQ(detect_modes(c, 0.05), (std::vector<std::size_t>{0}));
}

TEST(Modes, ShallowValleysMerge) {
  DensityCurve c;
  c.bandwidth = 1.0;
  const std::vector<double> d{0, 1, 5, 10, 9, 8, 9, 10, 5, 1, 0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    c.grid.push_back(static_cast<double>(i));
    c.density.push_back(d[i]);
  }
  const auto m = detect_modes(c, 0.05);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(merge_shallow_modes(c, m, 0.5).size(), 1u);
  EXPECT_EQ(merge_shallow_modes(c, m, 0.9).size(), 2u);
}

TEST(Partition, OneModeCoversAllSamples) {
  const auto s = normal_draws(100, 6);
  const auto c = kde_estimate(s, 0.5, 256);
  const std::vector<std::size_t> one{128};
  const auto iv = partition_intervals(s, c, one, 3);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_EQ(iv.dim, 3u);
  EXPECT_EQ(iv.intervals[0].lo, *std::min_element(s.begin(), s.end()));
  EXPECT_EQ(iv.intervals[0].hi, *std::max_element(s.begin(), s.end()));
  EXPECT_EQ(iv.total_count(), s.size());
}

TEST(Partition, BracketsEachCluster) {
  const auto s = two_clusters(0.2);
  const auto iv = pipeline(s);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_DOUBLE_EQ(iv.intervals[0].lo, -10.2);
  EXPECT_DOUBLE_EQ(iv.intervals[0].hi, -10.0 + 0.2 * 9 / 10.0);
  EXPECT_DOUBLE_EQ(iv.intervals[1].lo, 9.8);
  EXPECT_DOUBLE_EQ(iv.intervals[1].hi, 10.0 + 0.2 * 9 / 10.0);
  EXPECT_EQ(iv.intervals[0].count, 20u);
}

TEST(Partition, IdenticalSamplesGiveZeroWidthInterval) {
  const std::vector<double> s(12, 0.42);
  const auto iv = pipeline(s);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_EQ(iv.intervals[0].lo, 0.42);
  EXPECT_EQ(iv.intervals[0].hi, 0.42);
}

TEST(Partition, EverySampleLandsInExactlyOneInterval) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    auto s = normal_draws(150, seed);
    const auto more = normal_draws(50, seed + 100, 4.0, 0.3);
    s.insert(s.end(), more.begin(), more.end());
    const auto iv = pipeline(s);
    EXPECT_EQ(iv.total_count(), s.size());
    for (std::size_t n = 0; n + 1 < iv.size(); ++n) EXPECT_LT(iv.intervals[n].hi, iv.intervals[n + 1].lo);
    for (double x : s) {
      std::size_t hits = 0;
      for (const auto& in : iv.intervals) hits += (x >= in.lo && x <= in.hi) ? 1 : 0;
      EXPECT_EQ(hits, 1u);
      EXPECT_LT(iv.locate(x), iv.size());
    }
  }
}

TEST(Partition, RejectsEmptyInput) {
  const auto c = kde_estimate(std::vector<double>{0.0, 1.0}, 0.5, 32);
  const std::vector<std::size_t> m{10};
  EXPECT_THROW(partition_intervals(std::span<const double>{}, c, m, 0), DomainError);
  EXPECT_THROW(partition_intervals(std::vector<double>{0.0}, c, std::span<const std::size_t>{}, 0), DomainError);
}

TEST(Impurity, FullParentIntervalScoresOne) {
  const IntervalSet iv{0, {{0.0, 1.0, 100}}};
  EXPECT_DOUBLE_EQ(impurity(iv, 0.0, 1.0), 1.0);
}

TEST(Impurity, TwoTightIntervals) {
  // each interval: t = 0.5, o = 0.2, so 2 * 2 * (0.5 * 0.2 / 0.7) = 4/7
  const IntervalSet iv{0, {{0.1, 0.3, 50}, {0.7, 0.9, 50}}};
  EXPECT_NEAR(impurity(iv, 0.0, 1.0), 4.0 / 7.0, 1e-12);
}

TEST(Impurity, ZeroWidthParentIsDomainError) {
  const IntervalSet iv{0, {{0.5, 0.5, 3}}};
  EXPECT_THROW(impurity(iv, 0.5, 0.5), DomainError);
}

TEST(Impurity, StaysInUnitRange) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t trial = 0; trial < 500; ++trial) {
    std::vector<double> cuts(4);
    for (auto& c : cuts) c = u(rng);
    std::sort(cuts.begin(), cuts.end());
    const IntervalSet iv{0, {{cuts[0], cuts[1], 1 + trial % 7}, {cuts[2], cuts[3], 1 + trial % 5}}};
    const double v = impurity(iv, 0.0, 1.0);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
}

TEST(LevelCuts, FindsADensityStep) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> dense(0.0, 0.5), sparse(0.5, 1.0);
  std::vector<double> s;
  for (int i = 0; i < 800; ++i) s.push_back(dense(rng));
  for (int i = 0; i < 200; ++i) s.push_back(sparse(rng));
  std::sort(s.begin(), s.end());
  const double h = bandwidth_silverman(s);
  const IntervalSet one{0, {{s.front(), s.back(), s.size()}}};
  const auto cut = refine_level_cuts(one, s, h, s.front(), s.back(), 0.05);
  ASSERT_EQ(cut.size(), 2u);
  EXPECT_EQ(cut.intervals[0].hi, cut.intervals[1].lo);
  EXPECT_NEAR(cut.intervals[0].hi, 0.5 + 0.25 * h, 0.03);
  EXPECT_EQ(cut.total_count(), s.size());
  EXPECT_LT(impurity(cut, s.front(), s.back()), impurity(one, s.front(), s.back()));
}

TEST(LevelCuts, LeavesUniformDataAlone) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(1000);
  for (auto& x : s) x = u(rng);
  std::sort(s.begin(), s.end());
  const IntervalSet one{0, {{s.front(), s.back(), s.size()}}};
  EXPECT_EQ(refine_level_cuts(one, s, bandwidth_silverman(s), s.front(), s.back(), 0.05).size(), 1u);
}

TEST(NarrowGaps, CloseAtTheMidpoint) {
  const IntervalSet iv{0, {{0.0, 1.0, 5}, {1.1, 2.0, 5}, {3.0, 4.0, 5}}};
  const auto out = close_narrow_gaps(iv, 0.5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_DOUBLE_EQ(out.intervals[0].hi, 1.05);
  EXPECT_DOUBLE_EQ(out.intervals[1].lo, 1.05);
  EXPECT_DOUBLE_EQ(out.intervals[1].hi, 2.0);
  EXPECT_DOUBLE_EQ(out.intervals[2].lo, 3.0);
}
