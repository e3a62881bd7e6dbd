#include <regex>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cumdiff/report.hpp"
#include "cumdiff/significance.hpp"
#include "test_util.hpp"

using namespace cumdiff;
using cumdiff_test::slurp;
using cumdiff_test::TempDir;

namespace {

CumulativeGraph example_graph(double sigma = 0.0) {
  return accumulate(std::vector{1.0, -1.0}, std::vector{1.0, 1.0}).with_sigma(sigma);
}

std::size_t count_points(const std::string& svg) {
  const std::regex re("class=\"cumulative\"[^>]*points=\"([^\"]*)\"");
  std::smatch m;
  if (!std::regex_search(svg, m, re)) return 0;
  const std::string pts = m[1];
  std::size_t n = 1;
  for (char ch : pts) n += ch == ' ';
  return n;
}

}  // namespace

TEST(PlotData, RowsAreTheGraphPoints) {
  EXPECT_EQ(plot_data_csv(example_graph()), "abscissa,ordinate\n0,0\n0.5,0.5\n1,0\n");
  TempDir tmp;
  emit_plot_data(example_graph(), tmp.path("p.csv"));
  EXPECT_EQ(slurp(tmp.path("p.csv")), plot_data_csv(example_graph()));
}

TEST(PlotData, RoundTripsDoubles) {
  const auto g = accumulate(std::vector{0.1, 1.0 / 3}, std::vector{0.7, 0.3});
  const auto csv = plot_data_csv(g);
  const auto second = csv.substr(csv.find('\n') + 1);
  const auto row = second.substr(second.find('\n') + 1);
  EXPECT_EQ(std::stod(row.substr(0, row.find(','))), g.abscissae()[1]);
  EXPECT_EQ(std::stod(row.substr(row.find(',') + 1)), g.ordinates()[1]);
}

TEST(PlotData, UnwritablePathIsIoError) {
  EXPECT_THROW(emit_plot_data(example_graph(), "/nonexistent/dir/p.csv"), IoError);
  AnalysisReport r;
  EXPECT_THROW(emit_svg(example_graph(), r, "/nonexistent/dir/g.svg"), IoError);
}

TEST(Svg, TriangleSpansFourSigma) {
  const auto svg = svg_document(example_graph(0.5), {"caption"});
  const std::regex re("class=\"sigma-triangle\" data-lower=\"([^\"]+)\" data-upper=\"([^\"]+)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, re));
  EXPECT_EQ(std::stod(m[1]), -1.0);
  EXPECT_EQ(std::stod(m[2]), 1.0);
  EXPECT_EQ(count_points(svg), 3u);
  EXPECT_NE(svg.find("cumulative weight"), std::string::npos);
  EXPECT_NE(svg.find("cumulative difference"), std::string::npos);
  EXPECT_NE(svg.find(">caption</text>"), std::string::npos);
}

TEST(Svg, NoTriangleWithoutSigma) {
  const auto svg = svg_document(example_graph(0.0), {});
  EXPECT_EQ(svg.find("sigma-triangle"), std::string::npos);
  EXPECT_EQ(count_points(svg), 3u);
}

TEST(Svg, EscapesCaptionText) {
  const auto svg = svg_document(example_graph(), {"a < b & c"});
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
}

TEST(Report, JsonSchema) {
  AnalysisReport r;
  r.mode = "paired";
  r.m = 10;
  r.l = 4;
  r.n = 4;
  r.stats = summarize(example_graph(0.25), 0.0);
  r.sigma_model = "paired";
  r.input_digest = "fnv1a64:0000000000000000";
  const auto j = to_json(r);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["mode"], "paired");
  EXPECT_EQ(j["counts"]["m"], 10);
  EXPECT_EQ(j["counts"]["n"], 4);
  EXPECT_FALSE(j["counts"].contains("n0"));
  EXPECT_DOUBLE_EQ(j["stats"]["kuiper_over_sigma"].get<double>(), 2.0);
  EXPECT_FALSE(j.contains("two_sample"));
  EXPECT_FALSE(j.contains("perturbation"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"schema_version", "mode", "counts", "stats",
                                            "sigma_model", "input_digest"}));
}

TEST(Report, JsonOmitsRatiosWithoutSigma) {
  AnalysisReport r;
  r.stats = summarize(example_graph(0.0), 0.0);
  const auto j = to_json(r);
  EXPECT_FALSE(j["stats"].contains("kuiper_over_sigma"));
  EXPECT_FALSE(j["stats"].contains("pvalue_ks"));
}

TEST(Report, TwoSampleSections) {
  AnalysisReport r;
  r.mode = "two-sample";
  r.stats = summarize(example_graph(0.5), 0.0);
  r.ate_nearest = -0.25;
  r.ate_replicated = -0.2;
  r.replicates = 25;
  r.swapped_labels = false;
  r.seed = 543216789;
  r.rng = "philox4x32-10";
  r.epsilon = 0.01;
  const auto j = to_json(r);
  EXPECT_DOUBLE_EQ(j["two_sample"]["ate_nearest_over_sigma"].get<double>(), -0.5);
  EXPECT_EQ(j["two_sample"]["replicates"], 25);
  EXPECT_EQ(j["perturbation"]["seed"], 543216789u);
  EXPECT_EQ(j["perturbation"]["rng"], "philox4x32-10");
}

TEST(Report, CaptionLines) {
  AnalysisReport r;
  r.mode = "paired";
  r.m = 396326;
  r.l = 3985;
  r.stats = summarize(example_graph(0.25), 0.0);
  const auto lines = caption_lines(r);
  EXPECT_EQ(lines[0], "m = 396,326 (with ℓ = 3,985 distinct scores)");
  EXPECT_EQ(lines[1], "Kuiper's statistic = 0.5 / σ = 2; the asymptotic P-value = 0.1815");
}

TEST(Report, TinyPValueText) {
  AnalysisReport r;
  r.stats = summarize(example_graph(0.01), 0.0);
  const auto lines = caption_lines(r);
  EXPECT_NE(lines[1].find("less than 1e-16"), std::string::npos);
}

TEST(Report, FileDigest) {
  TempDir tmp;
  // FNV-1a 64 of the empty input is the offset basis; of "a" a known value.
  EXPECT_EQ(file_digest(tmp.file("e", "")), "fnv1a64:cbf29ce484222325");
  EXPECT_EQ(file_digest(tmp.file("a", "a")), "fnv1a64:af63dc4c8601ec8c");
  EXPECT_THROW(file_digest(tmp.path("missing")), IoError);
}

TEST(Report, ReliabilityJsonAndSvg) {
  std::vector<Observation> black{{1, 1, 1}, {2, 0, 1}, {3, 0, 1}, {4, 1, 1}};
  const auto d = reliability_diagram(black, black, 2, BinPolicy::equal_width);
  const auto j = to_json(d);
  EXPECT_EQ(j["title"], "reliability diagram");
  EXPECT_EQ(j["black"]["points"].size(), 2u);
  const auto svg = svg_document(d);
  EXPECT_NE(svg.find("reliability diagram"), std::string::npos);
}
