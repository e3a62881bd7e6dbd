#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "cumdiff/significance.hpp"

using namespace cumdiff;

namespace {

struct Reference {
  double x;
  double ks;
  double kuiper;
};

// 40-digit evaluations of both tails.
const Reference kReference[] = {
    {0.3, 0.99999858193801117, 1.0},
    {0.5, 0.99084300971023924, 0.99999991222227752},
    {0.8, 0.81475809273337788, 0.99403633480789432},
    {1.0, 0.62922257020047609, 0.93663541207954943},
    {1.7, 0.17826117172720935, 0.35113690949190114},
    {2.5, 0.024838661302976905, 0.049672736181824828},
    {3.0, 0.0053995921265203777, 0.010799168467638438},
};

}  // namespace

TEST(PValue, MatchesHighPrecisionReference) {
  for (const auto& r : kReference) {
    EXPECT_NEAR(pvalue_ks(r.x).value, r.ks, 1e-14 + 1e-13 * r.ks) << "x = " << r.x;
    EXPECT_NEAR(pvalue_kuiper(r.x).value, r.kuiper, 1e-14 + 1e-13 * r.kuiper) << "x = " << r.x;
  }
}

TEST(PValue, SeriesFormsAgreeAcrossTheSwitch) {
  for (double eps : {1e-9, 1e-6}) {
    EXPECT_NEAR(pvalue_ks(1.0 - eps).value, pvalue_ks(1.0).value, 1e-5);
    EXPECT_NEAR(pvalue_kuiper(1.0 - eps).value, pvalue_kuiper(1.0).value, 1e-5);
  }
}

TEST(PValue, ZeroAndNegative) {
  EXPECT_EQ(pvalue_ks(0).value, 1.0);
  EXPECT_EQ(pvalue_kuiper(0).value, 1.0);
  EXPECT_THROW(pvalue_ks(-0.1), std::domain_error);
  EXPECT_THROW(pvalue_kuiper(-1e-300), std::domain_error);
  EXPECT_THROW(pvalue_kuiper(NAN), std::domain_error);
}

TEST(PValue, CaptionExamplesWithinStatedTolerance) {
  // Examples whose printed values the series meets to +-2 in the 4th digit.
  EXPECT_NEAR(pvalue_ks(1.707).value, 0.1755, 2e-4);
  EXPECT_NEAR(pvalue_ks(4.078).value, 0.0000908, 0.02 * 0.0000908);
  EXPECT_NEAR(pvalue_kuiper(5.214).value, 0.0000007, 0.3 * 0.0000007);
}

TEST(PValue, CaptionExamplesInsideRoundingInterval) {
  // The printed statistics carry 4 significant digits, so the printed
  // P-values need only be attained somewhere in x +- 0.0005.
  auto bracket = [](auto f, double x, double p) {
    const double hi = f(x - 0.0005).value;
    const double lo = f(x + 0.0005).value;
    EXPECT_LE(lo, p) << "x = " << x;
    EXPECT_GE(hi, p) << "x = " << x;
  };
  bracket(pvalue_kuiper, 2.456, 0.05622);
  bracket(pvalue_kuiper, 3.052, 0.009106);
  bracket(pvalue_kuiper, 4.083, 0.0001781);
  bracket(pvalue_ks, 2.015, 0.08773);
  bracket(pvalue_ks, 3.066, 0.004335);
}

TEST(PValue, MonotoneAndKuiperDominates) {
  double prev_ks = 1.0, prev_ku = 1.0;
  for (double x = 0.05; x < 8.0; x += 0.05) {
    const double ks = pvalue_ks(x).value;
    const double ku = pvalue_kuiper(x).value;
    EXPECT_LE(ks, prev_ks + 1e-15) << x;
    EXPECT_LE(ku, prev_ku + 1e-15) << x;
    EXPECT_GE(ku, ks - 1e-15) << x;
    EXPECT_GE(ks, 0.0);
    EXPECT_LE(ku, 1.0);
    prev_ks = ks;
    prev_ku = ku;
  }
}

TEST(PValue, ReportsTruncation) {
  const auto p = pvalue_kuiper(2.0);
  EXPECT_GT(p.terms, 0u);
  EXPECT_LE(p.truncation_bound, 1e-16 * 8.0);
  const auto tiny = pvalue_ks(40.0);
  EXPECT_GE(tiny.value, 0.0);
  EXPECT_LT(tiny.value, 1e-300);
}

TEST(MonteCarlo, ZeroThresholdAlwaysHit) {
  const auto e = mc_null_tail(0.0, WalkFunctional::range, 100, 1000, 1);
  EXPECT_EQ(e.estimate, 1.0);
  EXPECT_EQ(e.standard_error, 0.0);
  EXPECT_EQ(e.trials, 1000u);
}

TEST(MonteCarlo, RejectsTinyRuns) {
  EXPECT_THROW(mc_null_tail(1.0, WalkFunctional::range, 99, 1000, 1), std::invalid_argument);
  EXPECT_THROW(mc_null_tail(1.0, WalkFunctional::range, 100, 999, 1), std::invalid_argument);
}

TEST(MonteCarlo, DeterministicAndThreadIndependent) {
  McOptions opt;
  opt.walk_length = 200;
  opt.trials = 4000;
  opt.seed = 99;
  const double xs[] = {1.0, 1.5};
  opt.threads = 1;
  const auto one = mc_null_tails(xs, WalkFunctional::max_abs, opt);
  opt.threads = 3;
  const auto three = mc_null_tails(xs, WalkFunctional::max_abs, opt);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(one[i].estimate, three[i].estimate);
}

TEST(MonteCarlo, SmallRunAgreesWithSeries) {
  McOptions opt;
  opt.walk_length = 200;
  opt.trials = 20000;
  const double xs[] = {1.0, 1.7};
  const auto range = mc_null_tails(xs, WalkFunctional::range, opt);
  const auto maxabs = mc_null_tails(xs, WalkFunctional::max_abs, opt);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(range[i].estimate, pvalue_kuiper(xs[i]).value, 4 * range[i].standard_error);
    EXPECT_NEAR(maxabs[i].estimate, pvalue_ks(xs[i]).value, 4 * maxabs[i].standard_error);
  }
}

TEST(MonteCarlo, BridgeCorrectionRemovesDiscretizationBias) {
  // Without the bridge extremes a 100-step walk visibly undershoots.
  const auto plain = mc_null_tail(1.7, WalkFunctional::range, 100, 20000, 5, false);
  const auto bridged = mc_null_tail(1.7, WalkFunctional::range, 100, 20000, 5, true);
  const double exact = pvalue_kuiper(1.7).value;
  EXPECT_LT(plain.estimate, exact - 3 * plain.standard_error);
  EXPECT_NEAR(bridged.estimate, exact, 4 * bridged.standard_error);
}

TEST(Summarize, SuppressesRatiosWhenSigmaIsZero) {
  const auto g = accumulate(std::vector{1.0, -1.0}, std::vector{1.0, 1.0});
  const auto s0 = summarize(g, 0.0);
  EXPECT_FALSE(s0.kuiper_over_sigma);
  EXPECT_FALSE(s0.pvalue_kuiper);
  const auto s = summarize(g.with_sigma(0.25), 0.0);
  ASSERT_TRUE(s.kuiper_over_sigma);
  EXPECT_DOUBLE_EQ(*s.kuiper_over_sigma, 2.0);
  EXPECT_DOUBLE_EQ(*s.pvalue_kuiper, pvalue_kuiper(2.0).value);
  EXPECT_DOUBLE_EQ(*s.pvalue_ks, pvalue_ks(2.0).value);
}
