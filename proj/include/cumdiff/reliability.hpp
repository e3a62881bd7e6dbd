#ifndef CUMDIFF_RELIABILITY_HPP_
#define CUMDIFF_RELIABILITY_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cumdiff/core.hpp"
#include "cumdiff/summation.hpp"

namespace cumdiff {

enum class BinPolicy { equal_width, equal_ratio };

inline const char* to_string(BinPolicy p) {
  return p == BinPolicy::equal_width ? "equal-width" : "equal-ratio";
}

// B_0 = -inf < B_1 < ... < B_{p-1} < B_p = +inf; bin q is (B_{q-1}, B_q].
struct BinEdges {
  std::vector<double> edges;
  BinPolicy policy = BinPolicy::equal_width;

  std::size_t count() const { return edges.size() - 1; }

  std::size_t bin_of(double score) const {
    const auto interior = std::span<const double>(edges).subspan(1, edges.size() - 2);
    return static_cast<std::size_t>(
        std::lower_bound(interior.begin(), interior.end(), score) - interior.begin());
  }
};

namespace detail {

inline BinEdges open_edges(BinPolicy policy) {
  return {{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
          policy};
}

inline void check_bin_request(std::span<const Observation> obs, std::size_t p) {
  if (p == 0) throw std::invalid_argument("bin count must be >= 1");
  if (obs.empty()) throw DataError("empty dataset");
}

}  // namespace detail

// Interior edges equally spaced between the smallest and largest score.
inline BinEdges bins_equal_width(std::span<const Observation> obs, std::size_t p) {
  detail::check_bin_request(obs, p);
  auto [lo, hi] = std::minmax_element(obs.begin(), obs.end(),
                                      [](const auto& a, const auto& b) { return a.score < b.score; });
  const double min = lo->score;
  const double max = hi->score;
  BinEdges out = detail::open_edges(BinPolicy::equal_width);
  if (p == 1) return out;
  if (!(max > min)) throw DataError("degenerate score range");
  out.edges.pop_back();
  for (std::size_t q = 1; q < p; ++q) {
    out.edges.push_back(min + (max - min) * static_cast<double>(q) / static_cast<double>(p));
  }
  out.edges.push_back(std::numeric_limits<double>::infinity());
  return out;
}

/// Bins meant to carry similar error bars, i.e. similar
/// sum(w^2) / (sum w)^2. Scanning distinct scores left to right, bin q is
/// closed at the first score where the running sum of squared weights
/// reaches q/p of the total, or earlier if only as many distinct scores
/// remain as bins still to fill. Edges sit midway between the last score of
/// one bin and the first of the next. With equal weights every bin gets the
/// same number of observations (up to rounding).
inline BinEdges bins_equal_weight_ratio(std::span<const Observation> obs, std::size_t p) {
  detail::check_bin_request(obs, p);
  std::vector<Observation> sorted(obs.begin(), obs.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.score < b.score; });
  std::vector<double> scores;
  std::vector<double> sq;
  for (const auto& o : sorted) {
    if (scores.empty() || scores.back() != o.score) {
      scores.push_back(o.score);
      sq.push_back(0.0);
    }
    sq.back() += o.weight * o.weight;
  }
  if (p > scores.size()) throw DataError("too many bins");
  const double total = compensated_sum(sq);

  BinEdges out = detail::open_edges(BinPolicy::equal_ratio);
  out.edges.pop_back();
  CompensatedSum running;
  std::size_t closed = 0;
  for (std::size_t j = 0; j + 1 < scores.size() && closed + 1 < p; ++j) {
    running += sq[j];
    const std::size_t bins_left = p - (closed + 1);
    const std::size_t scores_left = scores.size() - (j + 1);
    const double target = total * static_cast<double>(closed + 1) / static_cast<double>(p);
    if (running.value() >= target || scores_left == bins_left) {
      out.edges.push_back(scores[j] + 0.5 * (scores[j + 1] - scores[j]));
      ++closed;
    }
  }
  out.edges.push_back(std::numeric_limits<double>::infinity());
  return out;
}

struct DiagramPoint {
  std::size_t bin = 0;
  double mean_score = 0.0;
  double mean_response = 0.0;
  double weight = 0.0;
  std::size_t count = 0;
};

struct DiagramSeries {
  std::vector<DiagramPoint> points;     // nonempty bins in increasing order
  std::vector<std::size_t> empty_bins;  // bins with no observations
  BinEdges edges;
};

// Weighted mean score and response per bin.
inline DiagramSeries diagram_points(std::span<const Observation> obs, const BinEdges& edges) {
  const std::size_t p = edges.count();
  std::vector<CompensatedSum> w(p), sw(p), rw(p);
  std::vector<std::size_t> count(p, 0);
  for (const auto& o : obs) {
    const std::size_t q = edges.bin_of(o.score);
    w[q] += o.weight;
    sw[q] += o.score * o.weight;
    rw[q] += o.response * o.weight;
    ++count[q];
  }
  DiagramSeries out;
  out.edges = edges;
  for (std::size_t q = 0; q < p; ++q) {
    if (count[q] == 0) {
      out.empty_bins.push_back(q);
      continue;
    }
    const double wq = w[q].value();
    out.points.push_back({q, sw[q].value() / wq, rw[q].value() / wq, wq, count[q]});
  }
  return out;
}

inline DiagramSeries diagram_points(const Dataset<Observation>& data,
                                    const SubpopulationSelector* selector,
                                    const BinEdges& edges) {
  if (!selector) return diagram_points(data.observations(), edges);
  std::vector<Observation> sub;
  sub.reserve(selector->size());
  for (const auto& p : selector->pairs()) sub.push_back(data.at(p));
  return diagram_points(sub, edges);
}

inline BinEdges make_bins(std::span<const Observation> obs, std::size_t p, BinPolicy policy) {
  return policy == BinPolicy::equal_width ? bins_equal_width(obs, p)
                                          : bins_equal_weight_ratio(obs, p);
}

inline std::string diagram_title(BinPolicy policy) {
  return policy == BinPolicy::equal_width
             ? "reliability diagram"
             : "reliability diagram (‖W‖₂ / ‖W‖₁ is similar for every bin)";
}

// Black series for the population of interest, gray for its comparison.
struct ReliabilityDiagram {
  DiagramSeries black;
  DiagramSeries gray;
  std::string title;
};

/// Diagram for two explicit populations. The gray population gets its own
/// bins unless `share_bins` is set, in which case both use the black bins.
inline ReliabilityDiagram reliability_diagram(std::span<const Observation> black,
                                              std::span<const Observation> gray,
                                              std::size_t p, BinPolicy policy,
                                              bool share_bins = false) {
  ReliabilityDiagram d;
  const auto black_edges = make_bins(black, p, policy);
  d.black = diagram_points(black, black_edges);
  d.gray = diagram_points(gray, share_bins ? black_edges : make_bins(gray, p, policy));
  d.title = diagram_title(policy);
  return d;
}

// Splits a labeled dataset into its two subpopulations.
inline std::array<std::vector<Observation>, 2> split_by_label(const Dataset<Observation>& data) {
  if (!data.has_labels()) throw DataError("dataset carries no labels");
  std::array<std::vector<Observation>, 2> out;
  const auto obs = data.observations();
  const auto labels = data.labels();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("group labels must be 0 or 1");
    out[static_cast<std::size_t>(labels[i])].push_back(obs[i]);
  }
  return out;
}

// R (black) against Q (gray) at the same scores; both use the same bins.
inline ReliabilityDiagram reliability_paired(const Dataset<PairedObservation>& data,
                                             std::size_t p, BinPolicy policy) {
  std::vector<Observation> r, q;
  for (const auto& o : data.observations()) {
    r.push_back({o.score, o.response_r, o.weight});
    q.push_back({o.score, o.response_q, o.weight});
  }
  return reliability_diagram(r, q, p, policy, true);
}

}  // namespace cumdiff

#endif  // CUMDIFF_RELIABILITY_HPP_
