#ifndef CUMDIFF_BRFSS_HPP_
#define CUMDIFF_BRFSS_HPP_

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cumdiff/error.hpp"
#include "cumdiff/ingest.hpp"

namespace cumdiff {

// Roles a variable map must (or may) bind to codebook variables.
inline const std::vector<std::string>& brfss_roles() {
  static const std::vector<std::string> roles{
      "final_weight", "height_cm",  "angina",    "heart_attack", "stroke",
      "kidney",       "cannot_afford_doctor",    "hiv_tested",   "male"};
  return roles;
}

/// A variable map: input format, the codebook variable behind each role,
/// and its decode rule. BMI is either a role of its own (the codebook's
/// precomputed field, "bmi_source": "field") or derived from the
/// "weight_kg" and "height_cm" roles ("bmi_source": "derived").
struct BrfssVariableMap {
  bool fixed_width = false;
  FixedWidthLayout layout;                  // fields named by codebook variable
  std::map<std::string, std::string> role;  // role -> codebook variable
  bool derive_bmi = false;
  std::optional<std::size_t> expected_total_rows;
  std::optional<std::size_t> expected_bmi_rows;
};

/// {"format": "csv" | "fixed-width", "record_length": N,
///  "bmi_source": "field" | "derived",
///  "expected_total_rows": 445132, "expected_bmi_rows": 396326,
///  "fields": [{"role": "bmi", "name": "_BMI5", "scale": 100,
///              "start": ..., "width": ..., "codes": {...}, "other": ...}, ...]}
inline BrfssVariableMap parse_brfss_variable_map(const nlohmann::json& j) {
  BrfssVariableMap map;
  try {
    const auto format = j.value("format", std::string("csv"));
    if (format != "csv" && format != "fixed-width") {
      throw ConfigError("format must be 'csv' or 'fixed-width'");
    }
    map.fixed_width = format == "fixed-width";
    map.layout = parse_layout(j);
    for (const auto& f : j.at("fields")) {
      map.role[f.at("role").get<std::string>()] = f.at("name").get<std::string>();
    }
    const auto source = j.value("bmi_source", std::string("field"));
    if (source != "field" && source != "derived") {
      throw ConfigError("bmi_source must be 'field' or 'derived'");
    }
    map.derive_bmi = source == "derived";
    if (j.contains("expected_total_rows")) {
      map.expected_total_rows = j.at("expected_total_rows").get<std::size_t>();
    }
    if (j.contains("expected_bmi_rows")) {
      map.expected_bmi_rows = j.at("expected_bmi_rows").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad variable map: ") + e.what());
  }
  std::vector<std::string> needed = brfss_roles();
  needed.push_back(map.derive_bmi ? "weight_kg" : "bmi");
  for (const auto& r : needed) {
    if (!map.role.count(r)) throw ConfigError("variable map lacks role '" + r + "'");
  }
  return map;
}

struct BrfssPrepared {
  std::size_t total_rows = 0;
  std::size_t bmi_rows = 0;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Writes the per-analysis CSV files into `out_dir`:
///   paired_angina_heart_attack.csv  bmi,angina,heart_attack,weight
///   paired_stroke_kidney.csv        bmi,stroke,kidney,weight
///   subpop_heart_attack_doctor.csv  bmi,cannot_afford_doctor,heart_attack,weight
///   two_sample_hiv_kidney.csv       bmi,kidney,not_hiv_tested,weight
///   heights_men_women.csv           height_cm,bmi,female,weight
/// Every file keeps only rows with a BMI and a weight. In the two-sample
/// files group 0 is the first-named subpopulation (HIV tested; men), and
/// rows whose group is missing are left out of that file only.
inline BrfssPrepared brfss_prepare(const std::string& raw_path, const BrfssVariableMap& map,
                                   const std::filesystem::path& out_dir) {
  std::vector<std::string> columns;
  for (const auto& [role, name] : map.role) columns.push_back(name);
  RawTable table;
  if (map.fixed_width) {
    map.layout.validate();
    table = read_fixed_width_columns(raw_path, map.layout, columns);
  } else {
    table = read_csv_columns(raw_path, columns);
  }

  auto rule_of = [&](const std::string& role) -> const DecodeRule& {
    return map.layout.field(map.role.at(role)).rule;
  };
  auto column_of = [&](const std::string& role) { return table.index_of(map.role.at(role)); };

  struct Row {
    double bmi, weight, height;
    std::optional<double> angina, heart_attack, stroke, kidney, doctor, hiv, male;
  };
  std::vector<Row> rows;
  BrfssPrepared out;
  out.total_rows = table.rows.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& raw = table.rows[r];
    auto get = [&](const std::string& role) -> std::optional<double> {
      try {
        return rule_of(role).decode(raw[column_of(role)]);
      } catch (const DataError& e) {
        throw RowError(table.row_numbers[r], role + ": " + e.what());
      }
    };
    const auto weight = get("final_weight");
    const auto height = get("height_cm");
    std::optional<double> bmi;
    if (map.derive_bmi) {
      const auto kg = get("weight_kg");
      if (kg && height && *height > 0.0) bmi = *kg / ((*height / 100.0) * (*height / 100.0));
    } else {
      bmi = get("bmi");
    }
    if (!bmi || !weight || !(*weight > 0.0)) continue;
    rows.push_back({*bmi, *weight, height.value_or(NAN), get("angina"), get("heart_attack"),
                    get("stroke"), get("kidney"), get("cannot_afford_doctor"),
                    get("hiv_tested"), get("male")});
  }
  out.bmi_rows = rows.size();
  if (map.expected_total_rows && *map.expected_total_rows != out.total_rows) {
    out.warnings.push_back("input has " + std::to_string(out.total_rows) + " rows, expected " +
                           std::to_string(*map.expected_total_rows));
  }
  if (map.expected_bmi_rows && *map.expected_bmi_rows != out.bmi_rows) {
    out.warnings.push_back("BMI filter kept " + std::to_string(out.bmi_rows) +
                           " rows, expected " + std::to_string(*map.expected_bmi_rows) +
                           "; check the variable map against the codebook");
  }

  std::filesystem::create_directories(out_dir);
  using detail::shortest;
  auto write = [&](const std::string& name, const std::string& header, auto emit_row) {
    const auto path = out_dir / name;
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << header << '\n';
    for (const auto& row : rows) {
      const std::string line = emit_row(row);
      if (!line.empty()) f << line << '\n';
    }
    if (!f) throw IoError("failed writing '" + path.string() + "'");
    out.files.push_back(path);
  };
  // Binary responses: an unanswered question counts as "no".
  auto yes = [](const std::optional<double>& v) { return shortest(v.value_or(0.0)); };

  write("paired_angina_heart_attack.csv", "bmi,angina,heart_attack,weight", [&](const Row& r) {
    return shortest(r.bmi) + ',' + yes(r.angina) + ',' + yes(r.heart_attack) + ',' +
           shortest(r.weight);
  });
  write("paired_stroke_kidney.csv", "bmi,stroke,kidney,weight", [&](const Row& r) {
    return shortest(r.bmi) + ',' + yes(r.stroke) + ',' + yes(r.kidney) + ',' + shortest(r.weight);
  });
  write("subpop_heart_attack_doctor.csv", "bmi,cannot_afford_doctor,heart_attack,weight",
        [&](const Row& r) {
          return shortest(r.bmi) + ',' + yes(r.doctor) + ',' + yes(r.heart_attack) + ',' +
                 shortest(r.weight);
        });
  write("two_sample_hiv_kidney.csv", "bmi,kidney,not_hiv_tested,weight", [&](const Row& r) {
    if (!r.hiv) return std::string();
    return shortest(r.bmi) + ',' + yes(r.kidney) + ',' + (*r.hiv == 1.0 ? "0" : "1") + ',' +
           shortest(r.weight);
  });
  write("heights_men_women.csv", "height_cm,bmi,female,weight", [&](const Row& r) {
    if (!r.male || !(r.height > 0.0)) return std::string();
    return shortest(r.height) + ',' + shortest(r.bmi) + ',' + (*r.male == 1.0 ? "0" : "1") + ',' +
           shortest(r.weight);
  });
  return out;
}

inline BrfssPrepared brfss_prepare(const std::string& raw_path, const std::string& variable_map,
                                   const std::filesystem::path& out_dir) {
  return brfss_prepare(raw_path, parse_brfss_variable_map(load_json_file(variable_map)), out_dir);
}

}  // namespace cumdiff

#endif  // CUMDIFF_BRFSS_HPP_
