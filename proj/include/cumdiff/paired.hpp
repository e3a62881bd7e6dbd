#ifndef CUMDIFF_PAIRED_HPP_
#define CUMDIFF_PAIRED_HPP_

#include <cmath>
#include <utility>
#include <vector>

#include "cumdiff/core.hpp"
#include "cumdiff/significance.hpp"
#include "cumdiff/summation.hpp"

namespace cumdiff {

// Per distinct score: weighted means of both responses and the weight total.
struct PairedAggregate {
  std::vector<double> scores;
  std::vector<double> mean_r;
  std::vector<double> mean_q;
  std::vector<double> weight;
};

inline PairedAggregate aggregate_by_score(const Dataset<PairedObservation>& data) {
  if (data.empty()) throw DataError("empty dataset");
  PairedAggregate agg;
  const std::size_t l = data.distinct_count();
  agg.scores.assign(data.distinct_scores().begin(), data.distinct_scores().end());
  agg.mean_r.resize(l);
  agg.mean_q.resize(l);
  agg.weight.resize(l);
  for (std::size_t j = 0; j < l; ++j) {
    CompensatedSum w, rw, qw;
    for (const auto& o : data.at_score(j)) {
      w += o.weight;
      rw += o.response_r * o.weight;
      qw += o.response_q * o.weight;
    }
    agg.weight[j] = w.value();
    agg.mean_r[j] = rw.value() / agg.weight[j];
    agg.mean_q[j] = qw.value() / agg.weight[j];
  }
  return agg;
}

struct PairedResult {
  CumulativeGraph graph;
  SummaryStats stats;
  PairedAggregate aggregate;
};

/// Cumulative differences of R against Q at shared scores. The ATE is the
/// terminal ordinate; sigma^2 = sum (R_j - Q_j)^2 W_j^2 / (sum W_j)^2 over
/// the per-score aggregates.
inline PairedResult analyze_paired(const Dataset<PairedObservation>& data) {
  auto agg = aggregate_by_score(data);
  const std::size_t l = agg.scores.size();
  std::vector<double> diffs(l);
  CompensatedSum total, var;
  for (std::size_t j = 0; j < l; ++j) {
    diffs[j] = agg.mean_r[j] - agg.mean_q[j];
    total += agg.weight[j];
    var += diffs[j] * diffs[j] * agg.weight[j] * agg.weight[j];
  }
  const double sigma = std::sqrt(var.value()) / total.value();
  auto graph = accumulate(diffs, agg.weight).with_sigma(sigma);
  auto stats = summarize(graph, graph.terminal());
  return {std::move(graph), std::move(stats), std::move(agg)};
}

}  // namespace cumdiff

#endif  // CUMDIFF_PAIRED_HPP_
