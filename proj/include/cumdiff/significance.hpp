#ifndef CUMDIFF_SIGNIFICANCE_HPP_
#define CUMDIFF_SIGNIFICANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cumdiff/core.hpp"
#include "cumdiff/random.hpp"

namespace cumdiff {

struct TailProbability {
  double value = 1.0;
  // Number of series terms summed.
  std::size_t terms = 0;
  // Magnitude of the first omitted term.
  double truncation_bound = 0.0;
};

namespace detail {

inline constexpr double kRelativeCutoff = 1e-16;
inline constexpr std::size_t kMaxTerms = 10000;

inline double normal_upper_tail(double t) {
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

// Sums term(0), term(1), ... until a term is negligible next to the first.
template <class Term>
TailProbability sum_series(Term term, double offset, double sign) {
  TailProbability out;
  double leading = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < kMaxTerms; ++k) {
    const double t = term(k);
    if (k == 0) leading = std::fabs(t);
    if (k > 0 && std::fabs(t) <= kRelativeCutoff * leading) {
      out.truncation_bound = std::fabs(t);
      break;
    }
    total += t;
    out.terms = k + 1;
  }
  out.value = std::clamp(offset + sign * total, 0.0, 1.0);
  return out;
}

inline void check_threshold(double x) {
  if (!(x >= 0.0)) throw std::domain_error("threshold must be nonnegative");
}

}  // namespace detail

/// P(max_{0<=t<=1} |W(t)| >= x) for standard Brownian motion W.
///
/// For x >= 1 the reflection-principle series
///   4 sum_{k>=0} (-1)^k Q((2k+1) x),   Q = standard normal upper tail,
/// is summed directly; below 1 the complementary theta-function series
///   1 - (4/pi) sum_{k>=0} (-1)^k / (2k+1) exp(-(2k+1)^2 pi^2 / (8 x^2))
/// converges faster.
inline TailProbability pvalue_ks(double x) {
  detail::check_threshold(x);
  if (x == 0.0) return {1.0, 0, 0.0};
  if (x >= 1.0) {
    return detail::sum_series(
        [x](std::size_t k) {
          const double odd = 2.0 * static_cast<double>(k) + 1.0;
          const double sign = (k % 2 == 0) ? 1.0 : -1.0;
          return 4.0 * sign * detail::normal_upper_tail(odd * x);
        },
        0.0, 1.0);
  }
  const double scale = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
  return detail::sum_series(
      [scale](std::size_t k) {
        const double odd = 2.0 * static_cast<double>(k) + 1.0;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        return 4.0 / std::numbers::pi * sign / odd * std::exp(-odd * odd * scale);
      },
      1.0, -1.0);
}

/// P(max W - min W >= x) over t in [0, 1] for standard Brownian motion W
/// (Feller's distribution of the range).
///
/// For x >= 1:  8 sum_{k>=1} (-1)^(k-1) k Q(k x).
/// For x < 1 the Poisson-summed form of the same distribution,
///   1 - 8 sum_{j>=0} exp(-c_j / x^2) (1/x^2 + 1/(2 c_j)),  c_j = pi^2 (2j+1)^2 / 2,
/// avoids the cancellation the first series suffers there.
inline TailProbability pvalue_kuiper(double x) {
  detail::check_threshold(x);
  if (x == 0.0) return {1.0, 0, 0.0};
  if (x >= 1.0) {
    return detail::sum_series(
        [x](std::size_t k) {
          const double n = static_cast<double>(k + 1);
          const double sign = (k % 2 == 0) ? 1.0 : -1.0;
          return 8.0 * sign * n * detail::normal_upper_tail(n * x);
        },
        0.0, 1.0);
  }
  const double inv_x2 = 1.0 / (x * x);
  return detail::sum_series(
      [inv_x2](std::size_t j) {
        const double odd = 2.0 * static_cast<double>(j) + 1.0;
        const double c = std::numbers::pi * std::numbers::pi * odd * odd / 2.0;
        return 8.0 * std::exp(-c * inv_x2) * (inv_x2 + 0.5 / c);
      },
      1.0, -1.0);
}

enum class WalkFunctional { range, max_abs };

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

struct McOptions {
  std::size_t walk_length = 1000;
  std::size_t trials = 1000000;
  std::uint64_t seed = 20220101;
  // Sample the extremes of the Brownian bridge between consecutive walk
  // points, so the statistic is that of the continuous path rather than of
  // its discretization (which runs low by about 0.58 / sqrt(walk_length) at
  // each extreme).
  bool bridge_extrema = true;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

namespace detail {

struct WalkExtremes {
  double max = 0.0;
  double min = 0.0;
};

inline WalkExtremes simulate_walk(const McOptions& opt, std::uint64_t trial,
                                  std::vector<double>& path) {
  const std::size_t n = opt.walk_length;
  const CounterStream stream(opt.seed, trial);
  const double step_sd = 1.0 / std::sqrt(static_cast<double>(n));
  path.resize(n + 1);
  path[0] = 0.0;
  WalkExtremes ex;
  for (std::size_t k = 0; k < n; k += 2) {
    const auto z = stream.normals(k / 2);
    path[k + 1] = path[k] + step_sd * z[0];
    if (k + 2 <= n) path[k + 2] = path[k + 1] + step_sd * z[1];
  }
  for (double v : path) {
    ex.max = std::max(ex.max, v);
    ex.min = std::min(ex.min, v);
  }
  if (!opt.bridge_extrema) return ex;

  // The bridge over a step of variance h exceeds its higher endpoint by t
  // with probability exp(-2 t (t + |b - a|) / h), so steps ending more than
  // 8 sqrt(h) below the running extreme are skipped: the chance that one
  // matters is below exp(-128).
  const double h = 1.0 / static_cast<double>(n);
  const double reach = 8.0 * std::sqrt(h);
  const std::uint64_t base = (n + 1) / 2;
  const double discrete_max = ex.max;
  const double discrete_min = ex.min;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = path[k];
    const double b = path[k + 1];
    const bool near_max = std::max(a, b) > discrete_max - reach;
    const bool near_min = std::min(a, b) < discrete_min + reach;
    if (!near_max && !near_min) continue;
    const auto u = stream.uniforms(base + k);
    const double d2 = (b - a) * (b - a);
    if (near_max) {
      ex.max = std::max(ex.max, 0.5 * (a + b + std::sqrt(d2 - 2.0 * h * std::log(u[0]))));
    }
    if (near_min) {
      ex.min = std::min(ex.min, 0.5 * (a + b - std::sqrt(d2 - 2.0 * h * std::log(u[1]))));
    }
  }
  return ex;
}

}  // namespace detail

/// Monte Carlo estimates of P(functional >= x) for each threshold in `xs`,
/// from one shared set of simulated unit-variance Gaussian walks. Trials are
/// split across threads by index; each trial owns the Philox substream with
/// its index, so results do not depend on the thread count.
inline std::vector<McEstimate> mc_null_tails(std::span<const double> xs,
                                             WalkFunctional functional,
                                             const McOptions& opt) {
  if (opt.walk_length < 100) throw std::invalid_argument("walk length must be >= 100");
  if (opt.trials < 1000) throw std::invalid_argument("trials must be >= 1000");
  for (double x : xs) detail::check_threshold(x);

  unsigned threads = opt.threads ? opt.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, 64));
  std::vector<std::vector<std::size_t>> hits(threads, std::vector<std::size_t>(xs.size(), 0));

  auto work = [&](unsigned worker) {
    std::vector<double> path;
    const std::size_t begin = opt.trials * worker / threads;
    const std::size_t end = opt.trials * (worker + 1) / threads;
    for (std::size_t t = begin; t < end; ++t) {
      const auto ex = detail::simulate_walk(opt, t, path);
      const double stat = functional == WalkFunctional::range
                              ? ex.max - ex.min
                              : std::max(ex.max, -ex.min);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (stat >= xs[i]) ++hits[worker][i];
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  std::vector<McEstimate> out(xs.size());
  const auto n = static_cast<double>(opt.trials);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t count = 0;
    for (const auto& h : hits) count += h[i];
    const double p = static_cast<double>(count) / n;
    out[i] = {p, std::sqrt(p * (1.0 - p) / n), opt.trials};
  }
  return out;
}

inline McEstimate mc_null_tail(double x, WalkFunctional functional,
                               std::size_t walk_length, std::size_t trials,
                               std::uint64_t seed, bool bridge_extrema = true) {
  McOptions opt;
  opt.walk_length = walk_length;
  opt.trials = trials;
  opt.seed = seed;
  opt.bridge_extrema = bridge_extrema;
  const double xs[] = {x};
  return mc_null_tails(xs, functional, opt).front();
}

/// Kuiper, KS, the given ATE, and their sigma-normalized versions with
/// asymptotic P-values. Ratios and P-values stay empty when sigma is zero.
inline SummaryStats summarize(const CumulativeGraph& graph, double ate) {
  SummaryStats s;
  s.kuiper = kuiper_stat(graph);
  s.ks = ks_stat(graph);
  s.ate = ate;
  s.sigma = graph.sigma();
  if (s.sigma > 0.0) {
    s.kuiper_over_sigma = s.kuiper / s.sigma;
    s.ks_over_sigma = s.ks / s.sigma;
    s.ate_over_sigma = s.ate / s.sigma;
    s.pvalue_kuiper = pvalue_kuiper(*s.kuiper_over_sigma).value;
    s.pvalue_ks = pvalue_ks(*s.ks_over_sigma).value;
  }
  return s;
}

}  // namespace cumdiff

#endif  // CUMDIFF_SIGNIFICANCE_HPP_
