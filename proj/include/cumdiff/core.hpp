#ifndef CUMDIFF_CORE_HPP_
#define CUMDIFF_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cumdiff/error.hpp"
#include "cumdiff/summation.hpp"

namespace cumdiff {

struct Observation {
  double score = 0.0;
  double response = 0.0;
  double weight = 1.0;
};

// Two responses observed at the same score, e.g. two survey questions
// answered by one participant.
struct PairedObservation {
  double score = 0.0;
  double response_r = 0.0;
  double response_q = 0.0;
  double weight = 1.0;
};

namespace detail {

inline void check_observation(const Observation& o, std::size_t i) {
  if (!std::isfinite(o.score) || !std::isfinite(o.response)) {
    throw DataError("observation " + std::to_string(i) +
                    ": score and response must be finite");
  }
  if (!(o.weight > 0.0) || !std::isfinite(o.weight)) {
    throw DataError("observation " + std::to_string(i) +
                    ": weight must be positive and finite");
  }
}

inline void check_observation(const PairedObservation& o, std::size_t i) {
  if (!std::isfinite(o.score) || !std::isfinite(o.response_r) ||
      !std::isfinite(o.response_q)) {
    throw DataError("observation " + std::to_string(i) +
                    ": score and responses must be finite");
  }
  if (!(o.weight > 0.0) || !std::isfinite(o.weight)) {
    throw DataError("observation " + std::to_string(i) +
                    ": weight must be positive and finite");
  }
}

}  // namespace detail

// Address of one observation: (distinct-score index, index among the
// observations sharing that score). Both are 0-based.
struct IndexPair {
  std::size_t score_index = 0;
  std::size_t within = 0;

  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

/// Observations sorted by score, with the distinct-score bookkeeping
/// (distinct scores S_1 < ... < S_l and their multiplicities m_j).
///
/// Sorting is stable, so observations sharing a score keep their input
/// order. Optional integer labels (group membership) travel with their
/// observations through the sort.
template <class Obs>
class Dataset {
 public:
  using observation_type = Obs;

  Dataset() = default;

  explicit Dataset(std::vector<Obs> observations, std::vector<int> labels = {}) {
    if (!labels.empty() && labels.size() != observations.size()) {
      throw DataError("label count does not match observation count");
    }
    for (std::size_t i = 0; i < observations.size(); ++i) {
      detail::check_observation(observations[i], i);
    }
    std::vector<std::size_t> order(observations.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return observations[a].score < observations[b].score;
    });
    obs_.reserve(order.size());
    for (std::size_t i : order) obs_.push_back(observations[i]);
    if (!labels.empty()) {
      labels_.reserve(order.size());
      for (std::size_t i : order) labels_.push_back(labels[i]);
    }
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      if (i == 0 || obs_[i].score != obs_[i - 1].score) {
        distinct_.push_back(obs_[i].score);
        offsets_.push_back(i);
      }
    }
    offsets_.push_back(obs_.size());
  }

  std::span<const Obs> observations() const { return obs_; }
  std::span<const int> labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  bool empty() const { return obs_.empty(); }
  // m, the total number of observations.
  std::size_t size() const { return obs_.size(); }
  // l, the number of distinct scores.
  std::size_t distinct_count() const { return distinct_.size(); }
  std::span<const double> distinct_scores() const { return distinct_; }

  std::size_t multiplicity(std::size_t j) const {
    return offsets_.at(j + 1) - offsets_.at(j);
  }
  // Position in observations() of the first observation at distinct score j.
  std::size_t offset(std::size_t j) const { return offsets_.at(j); }

  std::span<const Obs> at_score(std::size_t j) const {
    return std::span<const Obs>(obs_).subspan(offsets_.at(j), multiplicity(j));
  }

  std::size_t flat_index(IndexPair p) const {
    if (p.score_index >= distinct_.size() || p.within >= multiplicity(p.score_index)) {
      throw std::out_of_range("index pair does not address an observation");
    }
    return offsets_[p.score_index] + p.within;
  }

  const Obs& at(IndexPair p) const { return obs_[flat_index(p)]; }

  IndexPair pair_of(std::size_t flat) const {
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
    const auto j = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    return {j, flat - offsets_[j]};
  }

 private:
  std::vector<Obs> obs_;
  std::vector<int> labels_;
  std::vector<double> distinct_;
  std::vector<std::size_t> offsets_;
};

/// A subpopulation given as lexicographically increasing index pairs.
class SubpopulationSelector {
 public:
  SubpopulationSelector() = default;

  template <class Obs>
  SubpopulationSelector(const Dataset<Obs>& data, std::vector<IndexPair> pairs)
      : pairs_(std::move(pairs)) {
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      (void)data.flat_index(pairs_[i]);
      if (i > 0 && !(pairs_[i - 1] < pairs_[i])) {
        throw std::invalid_argument("index pairs must be strictly increasing");
      }
    }
  }

  // Every observation whose flat position satisfies `keep`.
  template <class Obs, class Pred>
  static SubpopulationSelector where(const Dataset<Obs>& data, Pred keep) {
    std::vector<IndexPair> pairs;
    for (std::size_t j = 0; j < data.distinct_count(); ++j) {
      for (std::size_t k = 0; k < data.multiplicity(j); ++k) {
        if (keep(data.offset(j) + k)) pairs.push_back({j, k});
      }
    }
    return SubpopulationSelector(data, std::move(pairs));
  }

  template <class Obs>
  static SubpopulationSelector with_label(const Dataset<Obs>& data, int label) {
    if (!data.has_labels()) throw DataError("dataset carries no labels");
    const auto labels = data.labels();
    return where(data, [&](std::size_t i) { return labels[i] == label; });
  }

  template <class Obs>
  static SubpopulationSelector everything(const Dataset<Obs>& data) {
    return where(data, [](std::size_t) { return true; });
  }

  std::span<const IndexPair> pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

 private:
  std::vector<IndexPair> pairs_;
};

/// Normalized cumulative weights A_0..A_L against cumulative differences
/// C_0..C_L, plus the standard deviation used for the 4-sigma triangle.
class CumulativeGraph {
 public:
  CumulativeGraph(std::vector<double> abscissae, std::vector<double> ordinates,
                  double sigma = 0.0)
      : a_(std::move(abscissae)), c_(std::move(ordinates)), sigma_(sigma) {
    if (a_.size() != c_.size() || a_.size() < 2) throw DataError("empty graph");
    if (a_.front() != 0.0 || c_.front() != 0.0) {
      throw DataError("graph must start at the origin");
    }
    if (a_.back() != 1.0) throw DataError("graph abscissae must end at 1");
    for (std::size_t j = 0; j < a_.size(); ++j) {
      if (!std::isfinite(a_[j]) || !std::isfinite(c_[j])) {
        throw DataError("graph values must be finite");
      }
      if (j > 0 && !(a_[j] > a_[j - 1])) {
        throw DataError("graph abscissae must be strictly increasing");
      }
    }
    if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
      throw DataError("sigma must be nonnegative and finite");
    }
  }

  std::span<const double> abscissae() const { return a_; }
  std::span<const double> ordinates() const { return c_; }
  // L, the number of steps (one less than the number of points).
  std::size_t length() const { return a_.size() - 1; }
  double sigma() const { return sigma_; }
  double terminal() const { return c_.back(); }

  CumulativeGraph with_sigma(double sigma) const {
    return CumulativeGraph(a_, c_, sigma);
  }

 private:
  std::vector<double> a_;
  std::vector<double> c_;
  double sigma_;
};

struct SummaryStats {
  double kuiper = 0.0;
  double ks = 0.0;
  double ate = 0.0;
  double sigma = 0.0;
  // Absent whenever sigma is zero.
  std::optional<double> kuiper_over_sigma;
  std::optional<double> ks_over_sigma;
  std::optional<double> ate_over_sigma;
  std::optional<double> pvalue_kuiper;
  std::optional<double> pvalue_ks;
};

/// Builds the cumulative graph from per-step differences D and positive
/// weight totals T, in the order given (callers sort by score):
///   A_j = (T_1 + ... + T_j) / (T_1 + ... + T_L)
///   C_j = (D_1 T_1 + ... + D_j T_j) / (T_1 + ... + T_L)
/// The returned graph carries sigma = 0.
inline CumulativeGraph accumulate(std::span<const double> diffs,
                                  std::span<const double> totals) {
  if (diffs.empty()) throw DataError("empty graph");
  if (diffs.size() != totals.size()) {
    throw std::invalid_argument("differences and totals differ in length");
  }
  const std::size_t n = diffs.size();
  std::vector<double> weight_prefix(n + 1, 0.0);
  std::vector<double> diff_prefix(n + 1, 0.0);
  CompensatedSum tw;
  CompensatedSum dw;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(totals[k] > 0.0) || !std::isfinite(totals[k])) {
      throw DataError("invalid weight total");
    }
    if (!std::isfinite(diffs[k])) throw DataError("differences must be finite");
    tw += totals[k];
    dw += diffs[k] * totals[k];
    weight_prefix[k + 1] = tw.value();
    diff_prefix[k + 1] = dw.value();
  }
  const double total = weight_prefix[n];
  std::vector<double> a(n + 1);
  std::vector<double> c(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    a[j] = weight_prefix[j] / total;
    c[j] = diff_prefix[j] / total;
  }
  return CumulativeGraph(std::move(a), std::move(c));
}

// Range of the ordinates, C_0 = 0 included.
inline double kuiper_stat(const CumulativeGraph& graph) {
  const auto c = graph.ordinates();
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  return *hi - *lo;
}

// Largest absolute ordinate over j = 1..L.
inline double ks_stat(const CumulativeGraph& graph) {
  if (graph.length() == 0) throw DataError("empty graph");
  double best = 0.0;
  for (double v : graph.ordinates().subspan(1)) best = std::max(best, std::fabs(v));
  return best;
}

// Slope of the chord between points j0 < j1. For j1 = j0 + 1 this is the
// step's difference D_{j1}.
inline double secant_slope(const CumulativeGraph& graph, std::size_t j0,
                           std::size_t j1) {
  if (!(j0 < j1) || j1 > graph.length()) {
    throw std::invalid_argument("invalid secant indices");
  }
  const auto a = graph.abscissae();
  const auto c = graph.ordinates();
  return (c[j1] - c[j0]) / (a[j1] - a[j0]);
}

}  // namespace cumdiff

#endif  // CUMDIFF_CORE_HPP_
