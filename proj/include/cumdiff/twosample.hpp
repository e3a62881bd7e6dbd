#ifndef CUMDIFF_TWOSAMPLE_HPP_
#define CUMDIFF_TWOSAMPLE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "cumdiff/core.hpp"
#include "cumdiff/perturb.hpp"
#include "cumdiff/significance.hpp"
#include "cumdiff/summation.hpp"

namespace cumdiff {

// A maximal run of consecutive (in score order) observations sharing a label.
struct ScoreGroup {
  int label = 0;  // after the swap, if any; the first group always has label 0
  std::vector<std::size_t> members;  // positions in Dataset::observations()
  double mean_score = 0.0;
  double mean_response = 0.0;
  double weight = 0.0;
};

struct GroupSequence {
  std::vector<ScoreGroup> groups;
  // True when the smallest score belonged to subpopulation 1 and the labels
  // were exchanged so that the sequence starts with label 0.
  bool swapped_labels = false;

  std::size_t size() const { return groups.size(); }
  // Groups per subpopulation (rounded up), n in the usual notation.
  std::size_t n() const { return (groups.size() + 1) / 2; }
};

// Centered differences over the interior groups. Every D_j is oriented as
// (subpopulation 0) - (subpopulation 1) in the caller's original labels.
struct CenteredDiffs {
  std::vector<double> diffs;
  std::vector<double> totals;

  std::size_t size() const { return diffs.size(); }
};

namespace detail {

inline void check_two_labels(const Dataset<Observation>& data) {
  if (!data.has_labels()) throw DataError("two-sample analysis needs group labels");
  std::array<std::size_t, 2> count{0, 0};
  for (int l : data.labels()) {
    if (l != 0 && l != 1) throw DataError("group labels must be 0 or 1");
    ++count[static_cast<std::size_t>(l)];
  }
  if (count[0] == 0 || count[1] == 0) throw DataError("empty subpopulation");
}

}  // namespace detail

/// Partitions the score-sorted observations into maximal same-label runs.
/// All scores must be distinct (perturb them first).
inline GroupSequence interleave_groups(const Dataset<Observation>& data) {
  detail::check_two_labels(data);
  if (data.distinct_count() != data.size()) {
    throw DataError("scores must be unique; perturb them first");
  }
  const auto obs = data.observations();
  const auto labels = data.labels();
  GroupSequence seq;
  seq.swapped_labels = labels[0] == 1;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const int label = seq.swapped_labels ? 1 - labels[i] : labels[i];
    if (seq.groups.empty() || seq.groups.back().label != label) {
      seq.groups.push_back({label, {}, 0.0, 0.0, 0.0});
    }
    seq.groups.back().members.push_back(i);
  }
  for (auto& g : seq.groups) {
    CompensatedSum w, sw, rw;
    for (std::size_t i : g.members) {
      w += obs[i].weight;
      sw += obs[i].score * obs[i].weight;
      rw += obs[i].response * obs[i].weight;
    }
    g.weight = w.value();
    g.mean_score = sw.value() / g.weight;
    g.mean_response = rw.value() / g.weight;
  }
  return seq;
}

/// For each interior group, its mean response against the average of its
/// two neighbors' (the mean of the forward and backward differences), with
/// weight total T = W_center + (W_prev + W_next) / 2.
inline CenteredDiffs centered_differences(const GroupSequence& seq) {
  if (seq.size() < 3) throw DataError("no interior groups");
  CenteredDiffs out;
  out.diffs.reserve(seq.size() - 2);
  out.totals.reserve(seq.size() - 2);
  for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
    const auto& prev = seq.groups[i - 1];
    const auto& center = seq.groups[i];
    const auto& next = seq.groups[i + 1];
    const double neighbors = 0.5 * (prev.mean_response + next.mean_response);
    double d = center.label == 1 ? neighbors - center.mean_response
                                 : center.mean_response - neighbors;
    if (seq.swapped_labels) d = -d;
    out.diffs.push_back(d);
    out.totals.push_back(center.weight + 0.5 * (prev.weight + next.weight));
  }
  return out;
}

/// sigma^2 = sum_{j=1}^{M+1} (D_{j-1} - D_j)^2 (T_{j-1} + T_j)^2 / (4 (sum T)^2)
/// with D_0 = D_{M+1} = T_0 = T_{M+1} = 0. Differencing neighbors cancels any
/// linear trend in the D's; the constant absorbs both the double counting of
/// weights and the correlation between adjacent centered differences.
inline double sigma_empirical(const CenteredDiffs& cd) {
  const std::size_t m = cd.size();
  if (m == 0) throw DataError("no interior groups");
  auto d = [&](std::size_t j) { return (j == 0 || j > m) ? 0.0 : cd.diffs[j - 1]; };
  auto t = [&](std::size_t j) { return (j == 0 || j > m) ? 0.0 : cd.totals[j - 1]; };
  CompensatedSum num, total;
  for (std::size_t j = 1; j <= m + 1; ++j) {
    const double dd = d(j - 1) - d(j);
    const double tt = t(j - 1) + t(j);
    num += dd * dd * tt * tt;
  }
  for (double x : cd.totals) total += x;
  return std::sqrt(num.value()) / (2.0 * total.value());
}

/// Nearest-neighbor weighted ATE. Each observation is compared with the
/// other subpopulation's response at the greatest smaller score and at the
/// least larger score (whichever exist), the comparisons averaged, and the
/// results weighted with each subpopulation's weights scaled to total 1/2.
inline double ate_nearest(const Dataset<Observation>& data) {
  detail::check_two_labels(data);
  const auto obs = data.observations();
  const auto labels = data.labels();

  // Per label: distinct scores and the weighted mean response at each.
  struct Track {
    std::vector<double> scores;
    std::vector<double> responses;
    CompensatedSum total_weight;
  };
  std::array<Track, 2> track;
  {
    std::array<CompensatedSum, 2> rw, w;
    std::array<bool, 2> open{false, false};
    auto flush = [&](std::size_t l) {
      if (open[l]) track[l].responses.push_back(rw[l].value() / w[l].value());
      rw[l] = CompensatedSum();
      w[l] = CompensatedSum();
      open[l] = false;
    };
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto l = static_cast<std::size_t>(labels[i]);
      if (!open[l] || track[l].scores.back() != obs[i].score) {
        flush(l);
        track[l].scores.push_back(obs[i].score);
        open[l] = true;
      }
      rw[l] += obs[i].response * obs[i].weight;
      w[l] += obs[i].weight;
      track[l].total_weight += obs[i].weight;
    }
    flush(0);
    flush(1);
  }

  CompensatedSum ate;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto self = static_cast<std::size_t>(labels[i]);
    const auto& other = track[1 - self];
    const double s = obs[i].score;
    const auto lo = std::lower_bound(other.scores.begin(), other.scores.end(), s);
    const auto hi = std::upper_bound(other.scores.begin(), other.scores.end(), s);
    double sum = 0.0;
    int count = 0;
    if (lo != other.scores.begin()) {
      sum += obs[i].response - other.responses[static_cast<std::size_t>(lo - other.scores.begin()) - 1];
      ++count;
    }
    if (hi != other.scores.end()) {
      sum += obs[i].response - other.responses[static_cast<std::size_t>(hi - other.scores.begin())];
      ++count;
    }
    const double oriented = (self == 0 ? 1.0 : -1.0) * sum / count;
    const double w = obs[i].weight / (2.0 * track[self].total_weight.value());
    ate += w * oriented;
  }
  return ate.value();
}

struct ReplicatedAte {
  double mean = 0.0;
  std::vector<double> values;  // one per replicate, in replicate order
};

/// Mean of ate_nearest over independent perturbations. Replicate r uses
/// perturbation substreams 16 r .. 16 r + 8 under policy.seed, so replicate 0
/// reproduces the perturbation of analyze_two_sample.
inline ReplicatedAte ate_replicated(const Dataset<Observation>& data,
                                    const PerturbPolicy& policy,
                                    std::size_t replicates = 25, unsigned threads = 0) {
  if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
  ReplicatedAte out;
  out.values.assign(replicates, 0.0);
  threads = threads ? threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replicates)));
  auto work = [&](unsigned worker) {
    for (std::size_t r = worker; r < replicates; r += threads) {
      out.values[r] = ate_nearest(perturb_scores(data, policy, r));
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  CompensatedSum sum;
  for (double v : out.values) sum += v;
  out.mean = sum.value() / static_cast<double>(replicates);
  return out;
}

struct TwoSampleResult {
  CumulativeGraph graph;
  // stats.ate is the terminal ordinate of the graph.
  SummaryStats stats;
  double ate_terminal = 0.0;
  double ate_nearest = 0.0;
  std::optional<double> ate_nearest_over_sigma;
  std::size_t n0 = 0;      // observations in subpopulation 0
  std::size_t n1 = 0;      // observations in subpopulation 1
  std::size_t n = 0;       // groups per subpopulation
  std::size_t groups = 0;  // G
  bool swapped_labels = false;
  double epsilon = 0.0;    // perturbation half-width actually used
};

/// perturb -> interleave -> centered differences -> cumulative graph, with
/// the empirical sigma. Everything is reported in the input's labels.
inline TwoSampleResult analyze_two_sample(const Dataset<Observation>& data,
                                          const PerturbPolicy& policy) {
  detail::check_two_labels(data);
  const double eps = perturbation_epsilon(data, policy);
  PerturbPolicy fixed = policy;
  fixed.epsilon = eps;
  const auto unique = perturb_scores(data, fixed, 0);
  const auto seq = interleave_groups(unique);
  const auto cd = centered_differences(seq);
  auto graph = accumulate(cd.diffs, cd.totals).with_sigma(sigma_empirical(cd));
  auto stats = summarize(graph, graph.terminal());
  const double nearest = ate_nearest(unique);
  std::optional<double> nearest_over_sigma;
  if (stats.sigma > 0.0) nearest_over_sigma = nearest / stats.sigma;
  std::size_t n1 = 0;
  for (int l : data.labels()) n1 += l == 1 ? 1 : 0;
  const double terminal = stats.ate;
  return TwoSampleResult{.graph = std::move(graph),
                         .stats = std::move(stats),
                         .ate_terminal = terminal,
                         .ate_nearest = nearest,
                         .ate_nearest_over_sigma = nearest_over_sigma,
                         .n0 = data.size() - n1,
                         .n1 = n1,
                         .n = seq.n(),
                         .groups = seq.size(),
                         .swapped_labels = seq.swapped_labels,
                         .epsilon = eps};
}

}  // namespace cumdiff

#endif  // CUMDIFF_TWOSAMPLE_HPP_
