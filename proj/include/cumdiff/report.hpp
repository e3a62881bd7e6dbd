#ifndef CUMDIFF_REPORT_HPP_
#define CUMDIFF_REPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cumdiff/core.hpp"
#include "cumdiff/error.hpp"
#include "cumdiff/reliability.hpp"

namespace cumdiff {

inline constexpr int kReportSchemaVersion = 1;

/// Everything a figure caption needs, plus provenance.
struct AnalysisReport {
  std::string mode;  // paired | subpop | two-sample
  std::size_t m = 0;
  std::size_t l = 0;  // distinct scores before any perturbation
  std::optional<std::size_t> n;
  std::optional<std::size_t> n0;
  std::optional<std::size_t> n1;
  std::size_t dropped_rows = 0;
  SummaryStats stats;
  std::string sigma_model;
  // Two-sample only.
  std::optional<double> ate_nearest;
  std::optional<double> ate_replicated;
  std::optional<std::size_t> replicates;
  std::optional<bool> swapped_labels;
  // Subpopulation-vs-full only.
  std::optional<std::size_t> min_bin_count;
  // Perturbation provenance (two-sample only).
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rng;
  std::optional<double> epsilon;
  std::string input_digest;
};

// FNV-1a over the file bytes, as "fnv1a64:<16 hex digits>".
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char hex[32];
  std::snprintf(hex, sizeof hex, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return hex;
}

namespace detail {

template <class T>
void put_optional(nlohmann::ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const SummaryStats& s) {
  nlohmann::ordered_json j;
  j["kuiper"] = s.kuiper;
  j["ks"] = s.ks;
  j["ate"] = s.ate;
  j["sigma"] = s.sigma;
  detail::put_optional(j, "kuiper_over_sigma", s.kuiper_over_sigma);
  detail::put_optional(j, "ks_over_sigma", s.ks_over_sigma);
  detail::put_optional(j, "ate_over_sigma", s.ate_over_sigma);
  detail::put_optional(j, "pvalue_kuiper", s.pvalue_kuiper);
  detail::put_optional(j, "pvalue_ks", s.pvalue_ks);
  return j;
}

/// Report schema, version 1. Keys appear in this order; optional keys are
/// omitted when they do not apply.
///   schema_version, mode,
///   counts {m, l, n?, n0?, n1?, dropped_rows},
///   stats {kuiper, ks, ate, sigma, kuiper_over_sigma?, ks_over_sigma?,
///          ate_over_sigma?, pvalue_kuiper?, pvalue_ks?},
///   sigma_model,
///   two_sample? {ate_nearest, ate_nearest_over_sigma?, ate_replicated?,
///                ate_replicated_over_sigma?, replicates?, swapped_labels},
///   diagnostics? {min_bin_count},
///   perturbation? {seed, rng, epsilon},
///   input_digest
inline nlohmann::ordered_json to_json(const AnalysisReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["mode"] = r.mode;
  nlohmann::ordered_json counts;
  counts["m"] = r.m;
  counts["l"] = r.l;
  detail::put_optional(counts, "n", r.n);
  detail::put_optional(counts, "n0", r.n0);
  detail::put_optional(counts, "n1", r.n1);
  counts["dropped_rows"] = r.dropped_rows;
  j["counts"] = counts;
  j["stats"] = to_json(r.stats);
  j["sigma_model"] = r.sigma_model;
  if (r.ate_nearest) {
    nlohmann::ordered_json t;
    t["ate_nearest"] = *r.ate_nearest;
    if (r.stats.sigma > 0.0) t["ate_nearest_over_sigma"] = *r.ate_nearest / r.stats.sigma;
    if (r.ate_replicated) {
      t["ate_replicated"] = *r.ate_replicated;
      if (r.stats.sigma > 0.0) t["ate_replicated_over_sigma"] = *r.ate_replicated / r.stats.sigma;
    }
    detail::put_optional(t, "replicates", r.replicates);
    detail::put_optional(t, "swapped_labels", r.swapped_labels);
    j["two_sample"] = t;
  }
  if (r.min_bin_count) j["diagnostics"] = {{"min_bin_count", *r.min_bin_count}};
  if (r.seed) {
    nlohmann::ordered_json p;
    p["seed"] = *r.seed;
    p["rng"] = r.rng.value_or("");
    detail::put_optional(p, "epsilon", r.epsilon);
    j["perturbation"] = p;
  }
  j["input_digest"] = r.input_digest;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline void emit_json(const AnalysisReport& r, const std::string& path) {
  write_text(path, to_json(r).dump(2) + "\n");
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// "abscissa,ordinate" then (A_j, C_j) with 17 significant digits.
inline std::string plot_data_csv(const CumulativeGraph& g) {
  std::string out = "abscissa,ordinate\n";
  const auto a = g.abscissae();
  const auto c = g.ordinates();
  for (std::size_t j = 0; j < a.size(); ++j) {
    out += format_g17(a[j]);
    out += ',';
    out += format_g17(c[j]);
    out += '\n';
  }
  return out;
}

inline void emit_plot_data(const CumulativeGraph& g, const std::string& path) {
  write_text(path, plot_data_csv(g));
}

namespace detail {

inline std::string sig4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string with_commas(std::size_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string pvalue_text(const std::optional<double>& p) {
  if (!p) return "";
  if (*p < 1e-16) return "; the asymptotic P-value is less than 1e-16";
  return "; the asymptotic P-value = " + sig4(*p);
}

}  // namespace detail

// Caption lines in the usual figure style.
inline std::vector<std::string> caption_lines(const AnalysisReport& r) {
  using detail::sig4;
  using detail::with_commas;
  std::vector<std::string> lines;
  const char* distinct = r.mode == "two-sample" ? " distinct scores prior to randomization)"
                                                : " distinct scores)";
  lines.push_back("m = " + with_commas(r.m) + " (with " +
                  (r.mode == "two-sample" ? "" : "ℓ = ") + with_commas(r.l) + distinct);
  if (r.n0) lines.push_back("n₀ = " + with_commas(*r.n0));
  if (r.n1) lines.push_back("n₁ = " + with_commas(*r.n1));
  if (r.n) lines.push_back("n = " + with_commas(*r.n));
  const auto& s = r.stats;
  auto ratio = [&](double v, const std::optional<double>& over) {
    return over ? sig4(v) + " / σ = " + sig4(*over) : sig4(v);
  };
  lines.push_back("Kuiper's statistic = " + ratio(s.kuiper, s.kuiper_over_sigma) +
                  detail::pvalue_text(s.pvalue_kuiper));
  lines.push_back("Kolmogorov-Smirnov's = " + ratio(s.ks, s.ks_over_sigma) +
                  detail::pvalue_text(s.pvalue_ks));
  if (r.ate_nearest) {
    auto over = [&](double v) {
      return s.sigma > 0.0 ? std::optional<double>(v / s.sigma) : std::nullopt;
    };
    std::string line = "ATE = " + ratio(*r.ate_nearest, over(*r.ate_nearest));
    if (r.ate_replicated) {
      line += " (or " + ratio(*r.ate_replicated, over(*r.ate_replicated)) + " averaged over " +
              std::to_string(r.replicates.value_or(0)) + " random perturbations)";
    }
    lines.push_back(line);
    lines.push_back("terminal ATE = " + ratio(s.ate, s.ate_over_sigma));
  } else {
    lines.push_back("ATE = " + ratio(s.ate, s.ate_over_sigma));
  }
  return lines;
}

/// Standalone SVG of the cumulative graph: the polyline through (A_j, C_j),
/// labeled axes, a triangle at the origin spanning -2 sigma to +2 sigma, and
/// the caption lines below the plot.
inline std::string svg_document(const CumulativeGraph& g, const std::vector<std::string>& caption) {
  constexpr double kWidth = 640, kPlotLeft = 80, kPlotRight = 600, kPlotTop = 30,
                   kPlotBottom = 400, kLine = 18;
  const auto a = g.abscissae();
  const auto c = g.ordinates();
  const double two_sigma = 2.0 * g.sigma();
  double lo = std::min(*std::min_element(c.begin(), c.end()), -two_sigma);
  double hi = std::max(*std::max_element(c.begin(), c.end()), two_sigma);
  if (!(hi > lo)) {
    lo = -1.0;
    hi = 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](double x) { return kPlotLeft + x * (kPlotRight - kPlotLeft); };
  auto py = [&](double y) { return kPlotBottom - (y - lo) / (hi - lo) * (kPlotBottom - kPlotTop); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  const double height = kPlotBottom + 60 + kLine * static_cast<double>(caption.size());

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
    << height << "\" viewBox=\"0 0 " << kWidth << ' ' << height << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
    << "<rect x=\"" << kPlotLeft << "\" y=\"" << kPlotTop << "\" width=\""
    << kPlotRight - kPlotLeft << "\" height=\"" << kPlotBottom - kPlotTop << "\"/>\n";
  if (lo < 0.0 && hi > 0.0) {
    s << "<line x1=\"" << kPlotLeft << "\" y1=\"" << num(py(0)) << "\" x2=\"" << kPlotRight
      << "\" y2=\"" << num(py(0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  }
  s << "</g>\n"
    << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double x = t / 4.0;
    s << "<text x=\"" << num(px(x)) << "\" y=\"" << kPlotBottom + 16
      << "\" text-anchor=\"middle\">" << num(x).substr(0, 4) << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double y = lo + (hi - lo) * t / 4.0;
    s << "<text x=\"" << kPlotLeft - 6 << "\" y=\"" << num(py(y) + 4)
      << "\" text-anchor=\"end\">" << detail::sig4(y) << "</text>\n";
  }
  s << "<text class=\"xlabel\" x=\"" << (kPlotLeft + kPlotRight) / 2 << "\" y=\""
    << kPlotBottom + 36 << "\" text-anchor=\"middle\">cumulative weight</text>\n"
    << "<text class=\"ylabel\" x=\"18\" y=\"" << (kPlotTop + kPlotBottom) / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (kPlotTop + kPlotBottom) / 2
    << ")\">cumulative difference</text>\n"
    << "</g>\n";
  if (g.sigma() > 0.0) {
    const double tip = 0.04 * (kPlotRight - kPlotLeft);
    s << "<polygon class=\"sigma-triangle\" data-lower=\"" << format_g17(-two_sigma)
      << "\" data-upper=\"" << format_g17(two_sigma) << "\" points=\"" << num(px(0)) << ','
      << num(py(two_sigma)) << ' ' << num(px(0)) << ',' << num(py(-two_sigma)) << ' '
      << num(px(0) + tip) << ',' << num(py(0)) << "\" fill=\"none\" stroke=\"black\"/>\n";
  }
  s << "<polyline class=\"cumulative\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" "
       "points=\"";
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (j) s << ' ';
    s << num(px(a[j])) << ',' << num(py(c[j]));
  }
  s << "\"/>\n<g class=\"caption\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < caption.size(); ++i) {
    s << "<text x=\"" << kPlotLeft << "\" y=\"" << kPlotBottom + 60 + kLine * static_cast<double>(i)
      << "\">" << detail::xml_escape(caption[i]) << "</text>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

inline void emit_svg(const CumulativeGraph& g, const AnalysisReport& r, const std::string& path) {
  write_text(path, svg_document(g, caption_lines(r)));
}

// Points of both series, for plotting elsewhere.
inline nlohmann::ordered_json to_json(const ReliabilityDiagram& d) {
  auto series = [](const DiagramSeries& s) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (std::size_t i = 1; i + 1 < s.edges.edges.size(); ++i) edges.push_back(s.edges.edges[i]);
    j["interior_edges"] = edges;
    j["policy"] = to_string(s.edges.policy);
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& p : s.points) {
      pts.push_back({{"bin", p.bin},
                     {"mean_score", p.mean_score},
                     {"mean_response", p.mean_response},
                     {"weight", p.weight},
                     {"count", p.count}});
    }
    j["points"] = pts;
    j["empty_bins"] = s.empty_bins;
    return j;
  };
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["mode"] = "reliability";
  j["title"] = d.title;
  j["black"] = series(d.black);
  j["gray"] = series(d.gray);
  return j;
}

// Scatter-with-lines of both series: black first, gray second.
inline std::string svg_document(const ReliabilityDiagram& d) {
  constexpr double kWidth = 640, kLeft = 80, kRight = 600, kTop = 40, kBottom = 400;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto* s : {&d.black, &d.gray}) {
    for (const auto& p : s->points) {
      xlo = std::min(xlo, p.mean_score);
      xhi = std::max(xhi, p.mean_score);
      ylo = std::min(ylo, p.mean_response);
      yhi = std::max(yhi, p.mean_response);
    }
  }
  if (!(xhi > xlo)) { xlo -= 1; xhi += 1; }
  if (!(yhi > ylo)) { ylo -= 1; yhi += 1; }
  auto px = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * (kRight - kLeft); };
  auto py = [&](double y) { return kBottom - (y - ylo) / (yhi - ylo) * (kBottom - kTop); };
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"460\" viewBox=\"0 0 " << kWidth << " 460\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kRight - kLeft
    << "\" height=\"" << kBottom - kTop << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<g font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\">"
    << detail::xml_escape(d.title) << "</text>\n"
    << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 36
    << "\" text-anchor=\"middle\">score</text>\n"
    << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2 << "\" text-anchor=\"middle\" "
    << "transform=\"rotate(-90 18 " << (kTop + kBottom) / 2 << ")\">response</text>\n"
    << "<text x=\"" << kLeft << "\" y=\"" << kBottom + 16 << "\">" << detail::sig4(xlo)
    << "</text>\n<text x=\"" << kRight << "\" y=\"" << kBottom + 16
    << "\" text-anchor=\"end\">" << detail::sig4(xhi) << "</text>\n"
    << "<text x=\"" << kLeft - 6 << "\" y=\"" << kBottom << "\" text-anchor=\"end\">"
    << detail::sig4(ylo) << "</text>\n<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 8
    << "\" text-anchor=\"end\">" << detail::sig4(yhi) << "</text>\n</g>\n";
  for (const auto& [series, color] : {std::pair{&d.gray, "gray"}, std::pair{&d.black, "black"}}) {
    s << "<g class=\"series-" << color << "\" stroke=\"" << color << "\" fill=\"" << color
      << "\">\n<polyline fill=\"none\" points=\"";
    for (std::size_t i = 0; i < series->points.size(); ++i) {
      if (i) s << ' ';
      s << px(series->points[i].mean_score) << ',' << py(series->points[i].mean_response);
    }
    s << "\"/>\n";
    for (const auto& p : series->points) {
      s << "<circle cx=\"" << px(p.mean_score) << "\" cy=\"" << py(p.mean_response)
        << "\" r=\"2.5\"/>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace cumdiff

#endif  // CUMDIFF_REPORT_HPP_
