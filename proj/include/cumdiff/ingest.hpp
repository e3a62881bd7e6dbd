#ifndef CUMDIFF_INGEST_HPP_
#define CUMDIFF_INGEST_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cumdiff/core.hpp"
#include "cumdiff/error.hpp"

namespace cumdiff {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace detail

/// How one raw field becomes a number. Listed codes map to a value or to
/// missing; codes match by exact text or by equal numeric value ("1" and
/// "1.0" are the same code). Unlisted values fall to `other` when set, and
/// otherwise are parsed as numbers and divided by `scale`. Blank fields are
/// always missing.
struct DecodeRule {
  std::vector<std::pair<std::string, std::optional<double>>> codes;
  std::optional<std::optional<double>> other;
  double scale = 1.0;

  // Throws DataError when a value has to be parsed as a number and is not one.
  std::optional<double> decode(std::string_view raw) const {
    const auto text = detail::trim(raw);
    if (text.empty()) return std::nullopt;
    const auto numeric = detail::parse_number(text);
    for (const auto& [code, value] : codes) {
      if (code == text) return value;
      if (numeric) {
        const auto c = detail::parse_number(code);
        if (c && *c == *numeric) return value;
      }
    }
    if (other) return *other;
    if (!numeric) throw DataError("cannot parse '" + std::string(text) + "' as a number");
    return *numeric / scale;
  }
};

// Which input columns play which role.
struct ColumnMapping {
  std::string score_column;
  std::string response_column;
  std::optional<std::string> second_response_column;
  std::string weight_column;
  std::optional<std::string> group_column;
  // Optional decode rules by column name; columns without one are numeric.
  std::map<std::string, DecodeRule> rules;
  // When set, the group label is 1 for rows whose raw group value equals
  // this text (or number) and 0 otherwise, and is never missing.
  std::optional<std::string> group_match;

  std::vector<std::string> columns() const {
    std::vector<std::string> out{score_column, response_column, weight_column};
    if (second_response_column) out.push_back(*second_response_column);
    if (group_column) out.push_back(*group_column);
    return out;
  }
};

// Raw text of the requested columns, one entry per data row.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_numbers;  // 1-based, for error messages

  std::size_t index_of(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("column '" + name + "' not present in input");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

template <class Obs>
struct LoadResult {
  Dataset<Obs> data;
  std::size_t raw_rows = 0;
  // Rows lacking a score, response, weight, or group value.
  std::size_t dropped = 0;
};

/// Splits one CSV line. Double-quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline RawTable read_csv_columns(const std::string& path, const std::vector<std::string>& wanted) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  std::vector<std::size_t> positions;
  RawTable table;
  for (const auto& name : wanted) {
    if (std::find(table.columns.begin(), table.columns.end(), name) != table.columns.end()) continue;
    std::size_t pos = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (detail::trim(header[i]) == name) {
        pos = i;
        break;
      }
    }
    if (pos == header.size()) throw ConfigError("column '" + name + "' not present in input");
    table.columns.push_back(name);
    positions.push_back(pos);
  }
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    std::vector<std::string> picked;
    picked.reserve(positions.size());
    for (std::size_t pos : positions) {
      picked.push_back(pos < fields.size() ? fields[pos] : std::string());
    }
    table.rows.push_back(std::move(picked));
    table.row_numbers.push_back(row);
  }
  return table;
}

struct FixedWidthField {
  std::string name;
  std::size_t start = 1;  // 1-based column
  std::size_t width = 1;
  DecodeRule rule;

  std::size_t end() const { return start + width - 1; }  // last column, inclusive
};

/// Field positions of a fixed-width record. `record_length` of 0 means
/// "whatever the fields need".
struct FixedWidthLayout {
  std::size_t record_length = 0;
  std::vector<FixedWidthField> fields;

  const FixedWidthField& field(const std::string& name) const {
    for (const auto& f : fields) {
      if (f.name == name) return f;
    }
    throw ConfigError("layout has no field '" + name + "'");
  }

  void validate() const {
    std::vector<const FixedWidthField*> sorted;
    for (const auto& f : fields) {
      if (f.start == 0 || f.width == 0) {
        throw ConfigError("field '" + f.name + "' needs a positive start and width");
      }
      if (record_length != 0 && f.end() > record_length) {
        throw ConfigError("field '" + f.name + "' runs past the record length");
      }
      sorted.push_back(&f);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->start < b->start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i]->start <= sorted[i - 1]->end()) {
        throw ConfigError("fields '" + sorted[i - 1]->name + "' and '" + sorted[i]->name +
                          "' overlap");
      }
    }
  }
};

namespace detail {

inline DecodeRule rule_from_json(const nlohmann::json& j) {
  DecodeRule rule;
  if (j.contains("codes")) {
    for (const auto& [code, value] : j.at("codes").items()) {
      rule.codes.emplace_back(code, value.is_null() ? std::nullopt
                                                    : std::optional<double>(value.get<double>()));
    }
  }
  if (j.contains("other")) {
    const auto& o = j.at("other");
    rule.other = o.is_null() ? std::optional<double>() : std::optional<double>(o.get<double>());
  }
  if (j.contains("scale")) {
    rule.scale = j.at("scale").get<double>();
    if (!(rule.scale != 0.0)) throw ConfigError("scale must be nonzero");
  }
  return rule;
}

}  // namespace detail

/// Layout from JSON:
///   {"record_length": 6,
///    "fields": [{"name": "bmi", "start": 1, "width": 2, "scale": 1},
///               {"name": "ha", "start": 3, "width": 1,
///                "codes": {"1": 1, "2": 0, "7": null}, "other": null}]}
/// Fields without start/width are allowed; they only carry decode rules
/// (useful for CSV input).
inline FixedWidthLayout parse_layout(const nlohmann::json& j) {
  FixedWidthLayout layout;
  try {
    layout.record_length = j.value("record_length", std::size_t{0});
    for (const auto& f : j.at("fields")) {
      FixedWidthField field;
      field.name = f.at("name").get<std::string>();
      field.start = f.value("start", std::size_t{0});
      field.width = f.value("width", std::size_t{0});
      field.rule = detail::rule_from_json(f);
      layout.fields.push_back(std::move(field));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad layout: ") + e.what());
  }
  return layout;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline FixedWidthLayout load_layout(const std::string& path) {
  return parse_layout(load_json_file(path));
}

/// Slices the named fields out of each record. Blank lines are skipped.
/// A record too short for a field it needs is an error unless the record
/// is entirely blank, in which case all its fields are empty.
inline RawTable read_fixed_width_columns(const std::string& path, const FixedWidthLayout& layout,
                                         const std::vector<std::string>& wanted) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  RawTable table;
  std::vector<const FixedWidthField*> fields;
  for (const auto& name : wanted) {
    if (std::find(table.columns.begin(), table.columns.end(), name) != table.columns.end()) continue;
    const auto& f = layout.field(name);
    if (f.start == 0 || f.width == 0) {
      throw ConfigError("field '" + name + "' has no position in the layout");
    }
    table.columns.push_back(name);
    fields.push_back(&f);
  }
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++record;
    const bool blank = detail::trim(line).empty();
    std::vector<std::string> picked;
    picked.reserve(fields.size());
    for (const auto* f : fields) {
      if (f->end() > line.size()) {
        if (blank) {
          picked.emplace_back();
          continue;
        }
        throw RowError(record, "record of length " + std::to_string(line.size()) +
                                   " is too short for field '" + f->name + "' (columns " +
                                   std::to_string(f->start) + "-" + std::to_string(f->end()) + ")");
      }
      picked.push_back(line.substr(f->start - 1, f->width));
    }
    table.rows.push_back(std::move(picked));
    table.row_numbers.push_back(record);
  }
  return table;
}

namespace detail {

inline bool group_matches(std::string_view raw, std::string_view wanted) {
  const auto text = trim(raw);
  if (text == trim(wanted)) return true;
  const auto a = parse_number(text);
  const auto b = parse_number(wanted);
  return a && b && *a == *b;
}

}  // namespace detail

/// Turns raw text into observations, dropping rows with any missing field
/// (listwise deletion). A value that cannot be decoded is an error carrying
/// the row number.
template <class Obs>
LoadResult<Obs> to_dataset(const RawTable& table, const ColumnMapping& mapping) {
  constexpr bool paired = std::is_same_v<Obs, PairedObservation>;
  if (paired && !mapping.second_response_column) {
    throw ConfigError("paired data needs a second response column");
  }
  const std::size_t score_i = table.index_of(mapping.score_column);
  const std::size_t resp_i = table.index_of(mapping.response_column);
  const std::size_t weight_i = table.index_of(mapping.weight_column);
  std::optional<std::size_t> resp2_i;
  std::optional<std::size_t> group_i;
  if (mapping.second_response_column) resp2_i = table.index_of(*mapping.second_response_column);
  if (mapping.group_column) group_i = table.index_of(*mapping.group_column);

  static const DecodeRule numeric;
  auto rule_for = [&](const std::string& col) -> const DecodeRule& {
    const auto it = mapping.rules.find(col);
    return it == mapping.rules.end() ? numeric : it->second;
  };
  const DecodeRule& score_rule = rule_for(mapping.score_column);
  const DecodeRule& resp_rule = rule_for(mapping.response_column);
  const DecodeRule& weight_rule = rule_for(mapping.weight_column);
  const DecodeRule* resp2_rule =
      mapping.second_response_column ? &rule_for(*mapping.second_response_column) : nullptr;
  const DecodeRule* group_rule = mapping.group_column ? &rule_for(*mapping.group_column) : nullptr;

  LoadResult<Obs> out;
  out.raw_rows = table.rows.size();
  std::vector<Obs> obs;
  std::vector<int> labels;
  obs.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto field = [&](const DecodeRule& rule, std::size_t col, const char* what) {
      try {
        return rule.decode(row[col]);
      } catch (const DataError& e) {
        throw RowError(table.row_numbers[r], std::string(what) + ": " + e.what());
      }
    };
    const auto score = field(score_rule, score_i, "score");
    const auto response = field(resp_rule, resp_i, "response");
    const auto weight = field(weight_rule, weight_i, "weight");
    std::optional<double> response2;
    if (resp2_i) response2 = field(*resp2_rule, *resp2_i, "second response");
    std::optional<int> label;
    if (group_i) {
      if (mapping.group_match) {
        label = detail::group_matches(row[*group_i], *mapping.group_match) ? 1 : 0;
      } else if (const auto g = field(*group_rule, *group_i, "group")) {
        if (*g != 0.0 && *g != 1.0) {
          throw RowError(table.row_numbers[r], "group label must be 0 or 1");
        }
        label = static_cast<int>(*g);
      }
    }
    if (!score || !response || !weight || (resp2_i && !response2) || (group_i && !label)) {
      ++out.dropped;
      continue;
    }
    if (!(*weight > 0.0)) {
      throw RowError(table.row_numbers[r], "weight must be positive");
    }
    if constexpr (paired) {
      obs.push_back({*score, *response, *response2, *weight});
    } else {
      obs.push_back({*score, *response, *weight});
    }
    if (label) labels.push_back(*label);
  }
  out.data = Dataset<Obs>(std::move(obs), std::move(labels));
  return out;
}

template <class Obs = Observation>
LoadResult<Obs> read_csv(const std::string& path, const ColumnMapping& mapping) {
  return to_dataset<Obs>(read_csv_columns(path, mapping.columns()), mapping);
}

// Decode rules come from the layout unless the mapping overrides them.
template <class Obs = Observation>
LoadResult<Obs> read_fixed_width(const std::string& path, const FixedWidthLayout& layout,
                                 const ColumnMapping& mapping) {
  layout.validate();
  ColumnMapping m = mapping;
  for (const auto& col : m.columns()) {
    if (!m.rules.count(col)) m.rules.emplace(col, layout.field(col).rule);
  }
  return to_dataset<Obs>(read_fixed_width_columns(path, layout, m.columns()), m);
}

// Attaches a layout's decode rules to a CSV mapping (fields not in the
// mapping are ignored).
inline void apply_rules(ColumnMapping& mapping, const FixedWidthLayout& layout) {
  for (const auto& f : layout.fields) {
    if (!mapping.rules.count(f.name)) mapping.rules.emplace(f.name, f.rule);
  }
}

}  // namespace cumdiff

#endif  // CUMDIFF_INGEST_HPP_
