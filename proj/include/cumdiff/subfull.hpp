#ifndef CUMDIFF_SUBFULL_HPP_
#define CUMDIFF_SUBFULL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "cumdiff/core.hpp"
#include "cumdiff/significance.hpp"
#include "cumdiff/summation.hpp"

namespace cumdiff {

// Edges -inf = B_0 < B_1 < ... < B_{n-1} < B_n = +inf, with B_j the midpoint
// of the j-th and (j+1)-th distinct subpopulation scores. Bin j is the
// half-open interval (B_{j-1}, B_j].
struct MidpointBins {
  std::vector<double> edges;

  std::size_t count() const { return edges.size() - 1; }

  // 0-based bin holding `score`.
  std::size_t bin_of(double score) const {
    const auto interior = std::span<const double>(edges).subspan(1, edges.size() - 2);
    return static_cast<std::size_t>(
        std::lower_bound(interior.begin(), interior.end(), score) - interior.begin());
  }
};

inline MidpointBins midpoint_bins(std::span<const double> distinct_scores) {
  if (distinct_scores.empty()) throw DataError("empty subpopulation");
  MidpointBins bins;
  bins.edges.reserve(distinct_scores.size() + 1);
  bins.edges.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j + 1 < distinct_scores.size(); ++j) {
    if (!(distinct_scores[j] < distinct_scores[j + 1])) {
      throw std::invalid_argument("scores must be distinct and increasing");
    }
    bins.edges.push_back(distinct_scores[j] + 0.5 * (distinct_scores[j + 1] - distinct_scores[j]));
  }
  bins.edges.push_back(std::numeric_limits<double>::infinity());
  return bins;
}

struct SubFullAggregate {
  std::vector<double> scores;       // distinct subpopulation scores
  std::vector<double> mean_r;       // subpopulation mean response at each score
  std::vector<double> mean_q;       // full-population mean response in the bin
  std::vector<double> weight;       // subpopulation weight at each score
  std::vector<double> weight_sq;    // subpopulation sum of squared weights
  std::vector<std::size_t> bin_count;  // full-population observations per bin
};

enum class SubfullSigma { bernoulli, none };

struct SubfullResult {
  CumulativeGraph graph;
  SummaryStats stats;
  SubFullAggregate aggregate;
  std::size_t n0 = 0;  // subpopulation size
  std::size_t n = 0;   // distinct subpopulation scores
  // Fewest full-population observations in any bin; the Bernoulli sigma
  // presumes this is not small.
  std::size_t min_bin_count = 0;
};

inline SubFullAggregate aggregate_subfull(const Dataset<Observation>& full,
                                          const SubpopulationSelector& sel) {
  if (sel.empty()) throw DataError("empty subpopulation");
  const auto obs = full.observations();

  SubFullAggregate agg;
  std::vector<CompensatedSum> rw, w, w2;
  std::size_t last_score_index = static_cast<std::size_t>(-1);
  for (const auto& p : sel.pairs()) {
    const auto& o = full.at(p);
    if (p.score_index != last_score_index) {
      agg.scores.push_back(o.score);
      rw.emplace_back();
      w.emplace_back();
      w2.emplace_back();
      last_score_index = p.score_index;
    }
    rw.back() += o.response * o.weight;
    w.back() += o.weight;
    w2.back() += o.weight * o.weight;
  }
  const std::size_t n = agg.scores.size();
  agg.mean_r.resize(n);
  agg.weight.resize(n);
  agg.weight_sq.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    agg.weight[j] = w[j].value();
    agg.weight_sq[j] = w2[j].value();
    agg.mean_r[j] = rw[j].value() / agg.weight[j];
  }

  const auto bins = midpoint_bins(agg.scores);
  std::vector<CompensatedSum> qw(n), qt(n);
  agg.bin_count.assign(n, 0);
  for (const auto& o : obs) {
    const std::size_t j = bins.bin_of(o.score);
    qw[j] += o.response * o.weight;
    qt[j] += o.weight;
    ++agg.bin_count[j];
  }
  agg.mean_q.resize(n);
  for (std::size_t j = 0; j < n; ++j) agg.mean_q[j] = qw[j].value() / qt[j].value();
  return agg;
}

/// Cumulative differences between a subpopulation and the full population,
/// one step per distinct subpopulation score. Each step compares the
/// subpopulation's mean response at that score with the full population's
/// mean over the midpoint bin around it.
inline SubfullResult analyze_subfull(const Dataset<Observation>& full,
                                     const SubpopulationSelector& sel,
                                     SubfullSigma sigma_model = SubfullSigma::bernoulli) {
  if (sigma_model == SubfullSigma::bernoulli) {
    for (const auto& o : full.observations()) {
      if (o.response < 0.0 || o.response > 1.0) {
        throw DataError("sigma model mismatch: Bernoulli sigma needs responses in [0, 1]");
      }
    }
  }
  auto agg = aggregate_subfull(full, sel);
  const std::size_t n = agg.scores.size();
  std::vector<double> diffs(n);
  CompensatedSum total, var;
  for (std::size_t j = 0; j < n; ++j) {
    diffs[j] = agg.mean_r[j] - agg.mean_q[j];
    total += agg.weight[j];
    var += agg.mean_q[j] * (1.0 - agg.mean_q[j]) * agg.weight_sq[j];
  }
  double sigma = 0.0;
  if (sigma_model == SubfullSigma::bernoulli) {
    sigma = std::sqrt(std::max(0.0, var.value())) / total.value();
  }
  auto graph = accumulate(diffs, agg.weight).with_sigma(sigma);
  auto stats = summarize(graph, graph.terminal());
  const std::size_t min_count = *std::min_element(agg.bin_count.begin(), agg.bin_count.end());
  return {std::move(graph), std::move(stats), std::move(agg), sel.size(), n, min_count};
}

}  // namespace cumdiff

#endif  // CUMDIFF_SUBFULL_HPP_
