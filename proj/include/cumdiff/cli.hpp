#ifndef CUMDIFF_CLI_HPP_
#define CUMDIFF_CLI_HPP_

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cumdiff/brfss.hpp"
#include "cumdiff/ingest.hpp"
#include "cumdiff/paired.hpp"
#include "cumdiff/perturb.hpp"
#include "cumdiff/random.hpp"
#include "cumdiff/reliability.hpp"
#include "cumdiff/report.hpp"
#include "cumdiff/significance.hpp"
#include "cumdiff/subfull.hpp"
#include "cumdiff/twosample.hpp"

namespace cumdiff {

namespace detail {

struct CliOptions {
  std::string input;
  std::string layout;
  std::string decode;
  std::string score_col;
  std::string response_col;
  std::string response2_col;
  std::string weight_col;
  std::string group_col;
  std::string subpop_filter;
  std::uint64_t seed = kDefaultSeed;
  double epsilon = 0.0;
  std::size_t replicates = 25;
  std::size_t bins = 10;
  std::string bin_policy = "equal-ratio";
  bool share_bins = false;
  std::string sigma_model;
  std::string out_json;
  std::string out_plot;
  std::string out_svg;
  unsigned threads = 0;
  // pvalue
  std::string kind = "kuiper";
  double x = 0.0;
  // prep-brfss
  std::string variables;
  std::string out_dir = ".";
};

inline void add_input_flags(CLI::App* sub, CliOptions& o, bool response2, bool group) {
  sub->add_option("--input", o.input, "Input data file (CSV with header, or fixed-width)")
      ->required();
  sub->add_option("--layout", o.layout, "JSON fixed-width layout; reads --input as fixed-width");
  sub->add_option("--decode", o.decode, "JSON decode rules for CSV columns (layout grammar)");
  sub->add_option("--score-col", o.score_col, "Score (covariate) column")->required();
  sub->add_option("--response-col", o.response_col, "Response column")->required();
  sub->add_option("--weight-col", o.weight_col, "Sampling-weight column")->required();
  if (response2) sub->add_option("--response2-col", o.response2_col, "Second response column");
  if (group) {
    sub->add_option("--group-col", o.group_col, "Group label column (values 0/1)");
    sub->add_option("--subpop-filter", o.subpop_filter,
                    "Subpopulation as <column>=<value>");
  }
}

inline void add_output_flags(CLI::App* sub, CliOptions& o) {
  sub->add_option("--out-json", o.out_json, "Write the JSON report here");
  sub->add_option("--out-plot", o.out_plot, "Write the graph as abscissa,ordinate CSV here");
  sub->add_option("--out-svg", o.out_svg, "Write an SVG plot here");
}

inline ColumnMapping make_mapping(const CliOptions& o) {
  ColumnMapping m;
  m.score_column = o.score_col;
  m.response_column = o.response_col;
  m.weight_column = o.weight_col;
  if (!o.response2_col.empty()) m.second_response_column = o.response2_col;
  if (!o.subpop_filter.empty()) {
    const auto eq = o.subpop_filter.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--subpop-filter must look like <column>=<value>");
    }
    m.group_column = o.subpop_filter.substr(0, eq);
    m.group_match = o.subpop_filter.substr(eq + 1);
  } else if (!o.group_col.empty()) {
    m.group_column = o.group_col;
  }
  if (!o.decode.empty()) apply_rules(m, load_layout(o.decode));
  return m;
}

template <class Obs>
LoadResult<Obs> load(const CliOptions& o, const ColumnMapping& m) {
  if (!o.layout.empty()) return read_fixed_width<Obs>(o.input, load_layout(o.layout), m);
  return read_csv<Obs>(o.input, m);
}

inline void write_outputs(const CliOptions& o, const CumulativeGraph& g,
                          const AnalysisReport& r, std::ostream& out) {
  for (const auto& line : caption_lines(r)) out << line << '\n';
  if (!o.out_json.empty()) emit_json(r, o.out_json);
  if (!o.out_plot.empty()) emit_plot_data(g, o.out_plot);
  if (!o.out_svg.empty()) emit_svg(g, r, o.out_svg);
}

inline int run_paired(const CliOptions& o, std::ostream& out) {
  if (o.response2_col.empty()) throw CLI::RequiredError("--response2-col");
  if (!o.sigma_model.empty() && o.sigma_model != "paired") {
    throw ConfigError("paired mode supports only --sigma-model paired");
  }
  const auto loaded = load<PairedObservation>(o, make_mapping(o));
  const auto res = analyze_paired(loaded.data);
  AnalysisReport r;
  r.mode = "paired";
  r.m = loaded.data.size();
  r.l = loaded.data.distinct_count();
  r.n = r.l;
  r.dropped_rows = loaded.dropped;
  r.stats = res.stats;
  r.sigma_model = "paired";
  r.input_digest = file_digest(o.input);
  write_outputs(o, res.graph, r, out);
  return 0;
}

inline int run_subpop(const CliOptions& o, std::ostream& out) {
  if (o.group_col.empty() && o.subpop_filter.empty()) {
    throw CLI::RequiredError("--subpop-filter or --group-col");
  }
  SubfullSigma model = SubfullSigma::bernoulli;
  if (o.sigma_model == "none") {
    model = SubfullSigma::none;
  } else if (!o.sigma_model.empty() && o.sigma_model != "bernoulli") {
    throw ConfigError("subpop mode supports --sigma-model bernoulli or none");
  }
  const auto loaded = load<Observation>(o, make_mapping(o));
  const auto sel = SubpopulationSelector::with_label(loaded.data, 1);
  const auto res = analyze_subfull(loaded.data, sel, model);
  AnalysisReport r;
  r.mode = "subpop";
  r.m = loaded.data.size();
  r.l = loaded.data.distinct_count();
  r.n = res.n;
  r.n0 = res.n0;
  r.dropped_rows = loaded.dropped;
  r.stats = res.stats;
  r.sigma_model = model == SubfullSigma::bernoulli ? "bernoulli" : "none";
  r.min_bin_count = res.min_bin_count;
  r.input_digest = file_digest(o.input);
  write_outputs(o, res.graph, r, out);
  return 0;
}

inline PerturbPolicy policy_of(const CliOptions& o) {
  PerturbPolicy p;
  p.seed = o.seed;
  if (o.epsilon > 0.0) p.epsilon = o.epsilon;
  return p;
}

inline int run_two_sample(const CliOptions& o, std::ostream& out) {
  if (o.group_col.empty() && o.subpop_filter.empty()) throw CLI::RequiredError("--group-col");
  if (!o.sigma_model.empty() && o.sigma_model != "empirical") {
    throw ConfigError("two-sample mode supports only --sigma-model empirical");
  }
  const auto loaded = load<Observation>(o, make_mapping(o));
  const auto policy = policy_of(o);
  const auto res = analyze_two_sample(loaded.data, policy);
  AnalysisReport r;
  r.mode = "two-sample";
  r.m = loaded.data.size();
  r.l = loaded.data.distinct_count();
  r.n = res.n;
  r.n0 = res.n0;
  r.n1 = res.n1;
  r.dropped_rows = loaded.dropped;
  r.stats = res.stats;
  r.sigma_model = "empirical";
  r.ate_nearest = res.ate_nearest;
  if (o.replicates > 0) {
    PerturbPolicy fixed = policy;
    fixed.epsilon = res.epsilon;
    r.ate_replicated = ate_replicated(loaded.data, fixed, o.replicates, o.threads).mean;
    r.replicates = o.replicates;
  }
  r.swapped_labels = res.swapped_labels;
  r.seed = o.seed;
  r.rng = Philox4x32::algorithm;
  r.epsilon = res.epsilon;
  r.input_digest = file_digest(o.input);
  write_outputs(o, res.graph, r, out);
  return 0;
}

inline int run_reliability(const CliOptions& o, std::ostream& out) {
  BinPolicy policy;
  if (o.bin_policy == "equal-width") {
    policy = BinPolicy::equal_width;
  } else if (o.bin_policy == "equal-ratio") {
    policy = BinPolicy::equal_ratio;
  } else {
    throw CLI::ValidationError("--bin-policy", "must be equal-width or equal-ratio");
  }
  ReliabilityDiagram d;
  if (!o.response2_col.empty()) {
    const auto loaded = load<PairedObservation>(o, make_mapping(o));
    d = reliability_paired(loaded.data, o.bins, policy);
  } else if (!o.subpop_filter.empty()) {
    const auto loaded = load<Observation>(o, make_mapping(o));
    const auto parts = split_by_label(loaded.data);
    const auto full = loaded.data.observations();
    d = reliability_diagram(parts[1], full, o.bins, policy, o.share_bins);
  } else if (!o.group_col.empty()) {
    const auto loaded = load<Observation>(o, make_mapping(o));
    const auto parts = split_by_label(loaded.data);
    if (parts[0].empty() || parts[1].empty()) throw DataError("empty subpopulation");
    d = reliability_diagram(parts[0], parts[1], o.bins, policy, o.share_bins);
  } else {
    throw CLI::RequiredError("--response2-col, --group-col or --subpop-filter");
  }
  out << d.title << '\n';
  for (const auto* s : {&d.black, &d.gray}) {
    out << (s == &d.black ? "black" : "gray") << ":";
    for (const auto& p : s->points) {
      out << " (" << detail::sig4(p.mean_score) << ", " << detail::sig4(p.mean_response) << ")";
    }
    out << '\n';
  }
  if (!o.out_json.empty()) write_text(o.out_json, to_json(d).dump(2) + "\n");
  if (!o.out_svg.empty()) write_text(o.out_svg, svg_document(d));
  return 0;
}

inline int run_pvalue(const CliOptions& o, std::ostream& out) {
  TailProbability p;
  if (o.kind == "kuiper") {
    p = pvalue_kuiper(o.x);
  } else if (o.kind == "ks") {
    p = pvalue_ks(o.x);
  } else {
    throw CLI::ValidationError("--kind", "must be kuiper or ks");
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", p.value);
  out << buf << '\n';
  return 0;
}

inline int run_prep_brfss(const CliOptions& o, std::ostream& out, std::ostream& err) {
  const auto res = brfss_prepare(o.input, o.variables, o.out_dir);
  for (const auto& w : res.warnings) err << "WARNING: " << w << '\n';
  out << "rows: " << res.total_rows << ", with BMI: " << res.bmi_rows << '\n';
  for (const auto& f : res.files) out << f.string() << '\n';
  return 0;
}

}  // namespace detail

/// Entry point of the command-line tool. Returns 0 on success, 1 on data,
/// configuration or I/O errors, 2 on usage errors.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  detail::CliOptions o;
  CLI::App app{"Cumulative-difference comparisons of weighted subpopulations"};
  app.require_subcommand(1);

  auto* paired = app.add_subcommand("paired", "Two responses observed at the same scores");
  detail::add_input_flags(paired, o, true, false);
  paired->add_option("--sigma-model", o.sigma_model, "paired");
  detail::add_output_flags(paired, o);

  auto* subpop = app.add_subcommand("subpop", "A subpopulation against the full population");
  detail::add_input_flags(subpop, o, false, true);
  subpop->add_option("--sigma-model", o.sigma_model, "bernoulli (default) or none");
  detail::add_output_flags(subpop, o);

  auto* two = app.add_subcommand("two-sample", "Two subpopulations with disjoint scores");
  detail::add_input_flags(two, o, false, true);
  two->add_option("--seed", o.seed, "Perturbation seed")->capture_default_str();
  two->add_option("--epsilon", o.epsilon, "Perturbation half-width (default: automatic)");
  two->add_option("--replicates", o.replicates, "Perturbations averaged for the ATE (0: off)")
      ->capture_default_str();
  two->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  two->add_option("--sigma-model", o.sigma_model, "empirical");
  detail::add_output_flags(two, o);

  auto* rel = app.add_subcommand("reliability", "Reliability diagrams");
  detail::add_input_flags(rel, o, true, true);
  rel->add_option("--bins", o.bins, "Number of bins")->capture_default_str();
  rel->add_option("--bin-policy", o.bin_policy, "equal-width or equal-ratio")
      ->capture_default_str();
  rel->add_flag("--share-bins", o.share_bins, "Use the black series' bins for the gray series");
  rel->add_option("--out-json", o.out_json, "Write diagram points as JSON here");
  rel->add_option("--out-svg", o.out_svg, "Write an SVG plot here");

  auto* pv = app.add_subcommand("pvalue", "Asymptotic P-value of a sigma-normalized statistic");
  pv->add_option("--kind", o.kind, "kuiper or ks")->capture_default_str();
  pv->add_option("--x", o.x, "Statistic divided by sigma")->required();

  auto* prep = app.add_subcommand("prep-brfss", "Prepare analysis files from BRFSS data");
  prep->add_option("--input", o.input, "BRFSS data (CSV or fixed-width per the map)")->required();
  prep->add_option("--variables", o.variables, "JSON variable map")->required();
  prep->add_option("--out-dir", o.out_dir, "Directory for the CSV files")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*paired) return detail::run_paired(o, out);
    if (*subpop) return detail::run_subpop(o, out);
    if (*two) return detail::run_two_sample(o, out);
    if (*rel) return detail::run_reliability(o, out);
    if (*pv) return detail::run_pvalue(o, out);
    if (*prep) return detail::run_prep_brfss(o, out, err);
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace cumdiff

#endif  // CUMDIFF_CLI_HPP_
