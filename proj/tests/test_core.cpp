#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "cumdiff/core.hpp"
#include "cumdiff/random.hpp"
#include "cumdiff/summation.hpp"

using namespace cumdiff;

namespace {

void expect_span_eq(std::span<const double> got, const std::vector<double>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(got[i], want[i]) << "at " << i;
}

CumulativeGraph graph_of(std::vector<double> c) {
  std::vector<double> a(c.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = static_cast<double>(j) / (a.size() - 1);
  return CumulativeGraph(a, c);
}

}  // namespace

TEST(Accumulate, TwoSteps) {
  const auto g = accumulate(std::vector{1.0, -1.0}, std::vector{1.0, 1.0});
  expect_span_eq(g.abscissae(), {0, 0.5, 1});
  expect_span_eq(g.ordinates(), {0, 0.5, 0});
  EXPECT_EQ(g.length(), 2u);
  EXPECT_EQ(g.sigma(), 0.0);
}

TEST(Accumulate, ZeroDifferences) {
  const auto g = accumulate(std::vector{0.0, 0.0, 0.0}, std::vector{1.0, 2.0, 3.0});
  expect_span_eq(g.abscissae(), {0, 1.0 / 6, 0.5, 1});
  expect_span_eq(g.ordinates(), {0, 0, 0, 0});
}

TEST(Accumulate, SingleTerm) {
  const auto g = accumulate(std::vector{-0.5}, std::vector{3.0});
  expect_span_eq(g.abscissae(), {0, 1});
  expect_span_eq(g.ordinates(), {0, -0.5});
}

TEST(Accumulate, Errors) {
  EXPECT_THROW(accumulate(std::vector<double>{}, std::vector<double>{}), DataError);
  EXPECT_THROW(accumulate(std::vector{1.0}, std::vector{0.0}), DataError);
  EXPECT_THROW(accumulate(std::vector{1.0}, std::vector{-1.0}), DataError);
  EXPECT_THROW(accumulate(std::vector{1.0, 2.0}, std::vector{1.0}), std::invalid_argument);
  try {
    accumulate(std::vector<double>{}, std::vector<double>{});
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "empty graph");
  }
  try {
    accumulate(std::vector{1.0}, std::vector{0.0});
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "invalid weight total");
  }
}

TEST(Accumulate, LastAbscissaIsExactlyOne) {
  std::vector<double> d(1000, 0.1), t(1000);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.1 + 1e-3 * static_cast<double>(i % 7);
  const auto g = accumulate(d, t);
  EXPECT_EQ(g.abscissae().back(), 1.0);
}

TEST(Statistics, Kuiper) {
  EXPECT_DOUBLE_EQ(kuiper_stat(graph_of({0, 0.1, -0.2, 0.05})), 0.3);
  EXPECT_EQ(kuiper_stat(graph_of({0, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(kuiper_stat(graph_of({0, 0.5, 0})), 0.5);
}

TEST(Statistics, KolmogorovSmirnov) {
  EXPECT_DOUBLE_EQ(ks_stat(graph_of({0, 0.1, -0.2, 0.05})), 0.2);
  EXPECT_EQ(ks_stat(graph_of({0, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(ks_stat(graph_of({0, -0.5})), 0.5);
}

TEST(Statistics, Secant) {
  const auto g = accumulate(std::vector{1.0, -1.0}, std::vector{1.0, 1.0});
  EXPECT_DOUBLE_EQ(secant_slope(g, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(secant_slope(g, 0, 2), 0.0);
  EXPECT_THROW(secant_slope(g, 1, 1), std::invalid_argument);
  EXPECT_THROW(secant_slope(g, 0, 3), std::invalid_argument);
  EXPECT_THROW(secant_slope(g, 2, 1), std::invalid_argument);
}

TEST(Graph, Validation) {
  EXPECT_THROW(CumulativeGraph({0.0}, {0.0}), DataError);
  EXPECT_THROW(CumulativeGraph({0.1, 1.0}, {0.0, 0.0}), DataError);
  EXPECT_THROW(CumulativeGraph({0.0, 0.5, 0.5, 1.0}, {0, 0, 0, 0}), DataError);
  EXPECT_THROW(CumulativeGraph({0.0, 1.0}, {0.0, NAN}), DataError);
  EXPECT_THROW(CumulativeGraph({0.0, 1.0}, {0.0, 1.0}, -1.0), DataError);
  EXPECT_EQ(CumulativeGraph({0.0, 1.0}, {0.0, 1.0}).with_sigma(2.0).sigma(), 2.0);
}

TEST(CompensatedSum, RecoversLostLowOrderBits) {
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(v), 2.0);
  CompensatedSum s;
  for (int i = 0; i < 10; ++i) s += 0.1;
  EXPECT_EQ(s.value(), 1.0);
}

TEST(Dataset, SortsStablyAndCountsDistinctScores) {
  const Dataset<Observation> d({{2, 1, 2}, {1, 1, 1}, {1, 0, 1}}, {1, 0, 1});
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.distinct_count(), 2u);
  EXPECT_EQ(d.multiplicity(0), 2u);
  EXPECT_EQ(d.multiplicity(1), 1u);
  EXPECT_EQ(d.observations()[0].response, 1.0);  // input order kept among ties
  EXPECT_EQ(d.observations()[1].response, 0.0);
  EXPECT_EQ(d.labels()[0], 0);
  EXPECT_EQ(d.labels()[2], 1);
  EXPECT_EQ(d.at({1, 0}).weight, 2.0);
  EXPECT_EQ(d.pair_of(1), (IndexPair{0, 1}));
  EXPECT_EQ(d.flat_index({1, 0}), 2u);
  EXPECT_THROW(d.flat_index({0, 2}), std::out_of_range);
}

TEST(Dataset, RejectsBadObservations) {
  EXPECT_THROW(Dataset<Observation>({{1, 1, 0}}), DataError);
  EXPECT_THROW(Dataset<Observation>({{1, 1, -2}}), DataError);
  EXPECT_THROW(Dataset<Observation>({{NAN, 1, 1}}), DataError);
  EXPECT_THROW(Dataset<Observation>({{1, INFINITY, 1}}), DataError);
  EXPECT_THROW(Dataset<PairedObservation>({{1, 1, NAN, 1}}), DataError);
  EXPECT_THROW(Dataset<Observation>({{1, 1, 1}}, {0, 1}), DataError);
}

TEST(Selector, ValidatesAndSelects) {
  const Dataset<Observation> d({{1, 1, 1}, {1, 0, 1}, {2, 1, 2}}, {1, 0, 1});
  const auto sel = SubpopulationSelector::with_label(d, 1);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel.pairs()[0], (IndexPair{0, 0}));
  EXPECT_EQ(sel.pairs()[1], (IndexPair{1, 0}));
  EXPECT_EQ(SubpopulationSelector::everything(d).size(), 3u);
  EXPECT_THROW(SubpopulationSelector(d, {{1, 0}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(SubpopulationSelector(d, {{0, 0}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(SubpopulationSelector(d, {{3, 0}}), std::out_of_range);
}

TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::block({0, 0, 0, 0}, {0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                              {0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterStream, UniformsAreOpenAndStreamsDiffer) {
  const CounterStream a(1, 0), b(1, 1), c(2, 0);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    for (double u : a.uniforms(i)) {
      EXPECT_GT(u, 0.0);
      EXPECT_LT(u, 1.0);
    }
  }
  EXPECT_NE(a.uniforms(0)[0], b.uniforms(0)[0]);
  EXPECT_NE(a.uniforms(0)[0], c.uniforms(0)[0]);
  EXPECT_EQ(a.uniforms(5), CounterStream(1, 0).uniforms(5));
}

TEST(CounterStream, NormalMoments) {
  const CounterStream s(42, 3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n / 2; ++i) {
    for (double z : s.normals(i)) {
      sum += z;
      sq += z * z;
    }
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.015);
}
