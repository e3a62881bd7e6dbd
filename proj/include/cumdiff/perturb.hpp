#ifndef CUMDIFF_PERTURB_HPP_
#define CUMDIFF_PERTURB_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cumdiff/core.hpp"
#include "cumdiff/random.hpp"

namespace cumdiff {

inline constexpr std::uint64_t kDefaultSeed = 543216789;

struct PerturbPolicy {
  std::uint64_t seed = kDefaultSeed;
  // Half-width of the uniform noise; empty selects it from the data.
  std::optional<double> epsilon;
};

// A quarter of the smallest gap between distinct scores, so distinct values
// can never trade places; with a single distinct value, max(1, |S|) * 1e-6.
template <class Obs>
double auto_epsilon(const Dataset<Obs>& data) {
  const auto s = data.distinct_scores();
  if (s.empty()) throw DataError("empty dataset");
  if (s.size() == 1) return std::max(1.0, std::fabs(s[0])) * 1e-6;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < s.size(); ++j) gap = std::min(gap, s[j] - s[j - 1]);
  return gap / 4.0;
}

template <class Obs>
double perturbation_epsilon(const Dataset<Obs>& data, const PerturbPolicy& policy) {
  if (policy.epsilon) {
    if (!(*policy.epsilon > 0.0) || !std::isfinite(*policy.epsilon)) {
      throw std::invalid_argument("epsilon must be positive");
    }
    return *policy.epsilon;
  }
  return auto_epsilon(data);
}

/// Adds i.i.d. uniform(-eps, eps) noise to every score so that all scores
/// become distinct. Observation i (in score order) draws from Philox
/// substream 16 * replicate + attempt at counter i; a draw that leaves ties
/// is retried on the next attempt, up to 8 retries, after which remaining
/// ties are split by nudging to the next representable double.
template <class Obs>
Dataset<Obs> perturb_scores(const Dataset<Obs>& data, const PerturbPolicy& policy,
                            std::uint64_t replicate = 0) {
  if (data.empty()) throw DataError("empty dataset");
  const double eps = perturbation_epsilon(data, policy);
  const auto obs = data.observations();
  std::vector<Obs> out(obs.begin(), obs.end());
  std::vector<double> sorted(out.size());

  bool unique = false;
  for (std::uint64_t attempt = 0; attempt <= 8 && !unique; ++attempt) {
    const CounterStream stream(policy.seed, replicate * 16 + attempt);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double u = stream.uniforms(i)[0];
      out[i].score = obs[i].score + eps * (2.0 * u - 1.0);
      sorted[i] = out[i].score;
    }
    std::sort(sorted.begin(), sorted.end());
    unique = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  }
  if (!unique) {
    std::vector<std::size_t> order(out.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out[a].score < out[b].score; });
    for (std::size_t k = 1; k < order.size(); ++k) {
      double& cur = out[order[k]].score;
      const double prev = out[order[k - 1]].score;
      if (!(cur > prev)) cur = std::nextafter(prev, std::numeric_limits<double>::infinity());
    }
  }
  std::vector<int> labels(data.labels().begin(), data.labels().end());
  return Dataset<Obs>(std::move(out), std::move(labels));
}

}  // namespace cumdiff

#endif  // CUMDIFF_PERTURB_HPP_
