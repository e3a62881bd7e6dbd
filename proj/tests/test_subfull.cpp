#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "cumdiff/subfull.hpp"

using namespace cumdiff;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(MidpointBins, Examples) {
  EXPECT_EQ(midpoint_bins(std::vector<double>{1, 3, 7}).edges,
            (std::vector<double>{-kInf, 2, 5, kInf}));
  EXPECT_EQ(midpoint_bins(std::vector<double>{4}).edges, (std::vector<double>{-kInf, kInf}));
  EXPECT_EQ(midpoint_bins(std::vector<double>{0, 1}).edges,
            (std::vector<double>{-kInf, 0.5, kInf}));
  EXPECT_THROW(midpoint_bins(std::vector<double>{}), DataError);
}

TEST(MidpointBins, HalfOpenOnTheRight) {
  const auto b = midpoint_bins(std::vector<double>{1, 3, 7});
  EXPECT_EQ(b.bin_of(-100), 0u);
  EXPECT_EQ(b.bin_of(2), 0u);
  EXPECT_EQ(b.bin_of(2.0000001), 1u);
  EXPECT_EQ(b.bin_of(5), 1u);
  EXPECT_EQ(b.bin_of(1e9), 2u);
}

TEST(AnalyzeSubfull, HandExample) {
  const Dataset<Observation> full({{1, 1, 1}, {2, 0, 1}, {3, 1, 1}}, {1, 0, 1});
  const auto sel = SubpopulationSelector::with_label(full, 1);
  const auto res = analyze_subfull(full, sel);
  EXPECT_EQ(res.aggregate.mean_q, (std::vector<double>{0.5, 1}));
  EXPECT_EQ(res.aggregate.mean_r, (std::vector<double>{1, 1}));
  EXPECT_EQ(res.aggregate.weight, (std::vector<double>{1, 1}));
  const auto a = res.graph.abscissae();
  const auto c = res.graph.ordinates();
  EXPECT_DOUBLE_EQ(a[1], 0.5);
  EXPECT_DOUBLE_EQ(a[2], 1.0);
  EXPECT_DOUBLE_EQ(c[1], 0.25);
  EXPECT_DOUBLE_EQ(c[2], 0.25);
  EXPECT_DOUBLE_EQ(res.stats.kuiper, 0.25);
  EXPECT_DOUBLE_EQ(res.stats.ks, 0.25);
  EXPECT_DOUBLE_EQ(res.stats.ate, 0.25);
  EXPECT_DOUBLE_EQ(res.stats.sigma, 0.25);
  EXPECT_EQ(res.n0, 2u);
  EXPECT_EQ(res.n, 2u);
  EXPECT_EQ(res.min_bin_count, 1u);
}

TEST(AnalyzeSubfull, SelfComparisonIsFlat) {
  const Dataset<Observation> full(
      {{1, 1, 1}, {1, 0, 2}, {2, 0, 1}, {3, 1, 3}, {3, 1, 1}, {4, 0, 0.5}});
  const auto res = analyze_subfull(full, SubpopulationSelector::everything(full));
  EXPECT_EQ(res.aggregate.mean_r, res.aggregate.mean_q);
  for (double v : res.graph.ordinates()) EXPECT_EQ(v, 0.0);
}

TEST(AnalyzeSubfull, SigmaModelMismatch) {
  const Dataset<Observation> full({{1, 2.5, 1}, {2, 0, 1}}, {1, 0});
  const auto sel = SubpopulationSelector::with_label(full, 1);
  try {
    analyze_subfull(full, sel, SubfullSigma::bernoulli);
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma model mismatch"), std::string::npos);
  }
  const auto res = analyze_subfull(full, sel, SubfullSigma::none);
  EXPECT_EQ(res.stats.sigma, 0.0);
  EXPECT_FALSE(res.stats.kuiper_over_sigma);
}

TEST(AnalyzeSubfull, EmptySubpopulation) {
  const Dataset<Observation> full({{1, 1, 1}, {2, 0, 1}}, {0, 0});
  EXPECT_THROW(analyze_subfull(full, SubpopulationSelector::with_label(full, 1)), DataError);
}
