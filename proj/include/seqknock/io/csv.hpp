#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "seqknock/elastic_net.hpp"
#include "seqknock/errors.hpp"
#include "seqknock/mixed_data.hpp"
#include "seqknock/numeric.hpp"

namespace seqknock::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_of_row;  // 1-based line where each row starts
};

/// RFC 4180 reader: comma separated, double-quote quoting with "" escapes,
/// LF or CRLF record ends, quoted fields may span lines. The first record is
/// the header. Blank lines are skipped.
inline CsvTable parse_csv(std::istream& in, const std::string& source = "input") {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false, after_quote = false;
  std::size_t line = 1, record_line = 1;
  const auto fail = [&](const std::string& what) {
    throw InputError(source + ":" + std::to_string(line) + ": " + what);
  };
  const auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = after_quote = false;
  };
  const auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw InputError(source + ":" + std::to_string(record_line) + ": expected " +
                           std::to_string(table.header.size()) + " fields, found " + std::to_string(record.size()));
        }
        table.rows.push_back(std::move(record));
        table.line_of_row.push_back(record_line);
      }
    }
    record.clear();
  };
  char c = 0;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || after_quote) fail("stray quote inside an unquoted field");
        quoted = field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() != '\n') fail("bare carriage return");
        break;
      case '\n':
        end_record();
        record_line = ++line;
        break;
      default:
        if (after_quote) fail("text after a closing quote");
        field += c;
        field_started = true;
    }
  }
  if (quoted) fail("unterminated quoted field");
  if (field_started || after_quote || !record.empty()) end_record();
  if (table.header.empty()) throw InputError(source + ": file is empty (a header row is required)");
  std::unordered_set<std::string> seen;
  for (const auto& name : table.header) {
    if (name.empty()) throw InputError(source + ": header has an empty column name");
    if (!seen.insert(name).second) throw InputError(source + ": duplicate column name '" + name + "'");
  }
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return parse_csv(in, path);
}

enum class DeclaredType { automatic, continuous, categorical };
enum class Transform { none, normal_score };
enum class Role { covariate, response, drop };

struct ColumnSchema {
  std::string name;
  DeclaredType declared_type = DeclaredType::automatic;
  Transform transform = Transform::none;
  Role role = Role::covariate;
};

inline std::string to_string(DeclaredType t) {
  switch (t) {
    case DeclaredType::automatic: return "auto";
    case DeclaredType::continuous: return "continuous";
    case DeclaredType::categorical: return "categorical";
  }
  return "auto";
}

inline DeclaredType declared_type_from_string(const std::string& s) {
  if (s == "auto") return DeclaredType::automatic;
  if (s == "continuous") return DeclaredType::continuous;
  if (s == "categorical") return DeclaredType::categorical;
  throw InputError("unknown column type '" + s + "' (expected auto, continuous or categorical)");
}

inline std::string to_string(Transform t) { return t == Transform::normal_score ? "normal_score" : "none"; }

inline Transform transform_from_string(const std::string& s) {
  if (s == "none") return Transform::none;
  if (s == "normal_score") return Transform::normal_score;
  throw InputError("unknown transform '" + s + "' (expected none or normal_score)");
}

inline std::string to_string(Role r) {
  switch (r) {
    case Role::covariate: return "covariate";
    case Role::response: return "response";
    case Role::drop: return "drop";
  }
  return "covariate";
}

inline Role role_from_string(const std::string& s) {
  if (s == "covariate") return Role::covariate;
  if (s == "response") return Role::response;
  if (s == "drop") return Role::drop;
  throw InputError("unknown role '" + s + "' (expected covariate, response or drop)");
}

/// Columns with at most this many distinct values are categorical under auto.
inline constexpr std::size_t kCategoricalMaxLevels = 10;

inline bool is_missing(const std::string& cell) {
  static const std::unordered_set<std::string> tokens{"", "NA", "N/A", "NaN", "nan", "null", "NULL"};
  return tokens.count(cell) > 0;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct ResolvedColumn {
  std::string name;
  DeclaredType type = DeclaredType::continuous;  // never automatic
  Transform transform = Transform::none;
  Role role = Role::covariate;
  std::size_t distinct = 0;
};

struct IngestResult {
  MixedDataMatrix x;
  Response y;
  std::string response_name;
  std::vector<std::string> response_levels;  // categorical response only
  std::vector<ResolvedColumn> columns;  // every input column, in file order
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::vector<std::string> warnings;
};

/// Typed covariates and response from a CSV table.
///
/// Roles and types come from `schema` where given; the column named
/// `response` gets the response role. Auto columns are categorical when
/// any value is non-numeric or at most 10 distinct values occur. Rows with a
/// missing cell in any used column are dropped; categorical levels are
/// collected in first-appearance order over the kept rows.
inline IngestResult ingest_table(const CsvTable& table, const std::string& response,
                                 const std::vector<ColumnSchema>& schema = {}) {
  const std::size_t p_all = table.header.size();
  std::vector<ResolvedColumn> cols(p_all);
  for (std::size_t j = 0; j < p_all; ++j) cols[j].name = table.header[j];
  std::vector<DeclaredType> declared(p_all, DeclaredType::automatic);
  for (const auto& s : schema) {
    const auto it = std::find(table.header.begin(), table.header.end(), s.name);
    if (it == table.header.end()) throw InputError("schema names column '" + s.name + "', which is not in the file");
    const auto j = static_cast<std::size_t>(it - table.header.begin());
    declared[j] = s.declared_type;
    cols[j].transform = s.transform;
    cols[j].role = s.role;
  }
  if (response.empty()) throw InputError("no response column given (use --response)");
  const auto rit = std::find(table.header.begin(), table.header.end(), response);
  if (rit == table.header.end()) throw InputError("response column '" + response + "' is not in the file");
  const auto r = static_cast<std::size_t>(rit - table.header.begin());
  for (std::size_t j = 0; j < p_all; ++j) {
    if (cols[j].role == Role::response && j != r) {
      throw InputError("schema marks '" + cols[j].name + "' as response but --response is '" + response + "'");
    }
  }
  cols[r].role = Role::response;

  IngestResult out;
  out.rows_read = table.rows.size();
  std::vector<std::vector<std::string>> cells(p_all);
  for (std::size_t j = 0; j < p_all; ++j) {
    cells[j].reserve(table.rows.size());
    for (const auto& row : table.rows) cells[j].push_back(trim(row[j]));
  }

  std::vector<char> keep(table.rows.size(), 1);
  for (std::size_t j = 0; j < p_all; ++j) {
    if (cols[j].role == Role::drop) continue;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (is_missing(cells[j][i])) keep[i] = 0;
    }
  }

  for (std::size_t j = 0; j < p_all; ++j) {
    if (cols[j].role == Role::drop) continue;
    bool numeric = true;
    std::unordered_set<std::string> distinct;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (!keep[i]) continue;
      distinct.insert(cells[j][i]);
      if (numeric && !parse_number(cells[j][i])) numeric = false;
    }
    cols[j].distinct = distinct.size();
    switch (declared[j]) {
      case DeclaredType::automatic:
        cols[j].type = !numeric || distinct.size() <= kCategoricalMaxLevels ? DeclaredType::categorical
                                                                             : DeclaredType::continuous;
        break;
      case DeclaredType::continuous:
        if (!numeric) throw InputError("column '" + cols[j].name + "' is declared continuous but has non-numeric values");
        cols[j].type = DeclaredType::continuous;
        break;
      case DeclaredType::categorical:
        cols[j].type = DeclaredType::categorical;
        break;
    }
    if (cols[j].transform == Transform::normal_score && cols[j].type != DeclaredType::continuous) {
      throw InputError("normal_score transform requested for categorical column '" + cols[j].name + "'");
    }
  }

  std::vector<std::size_t> kept_rows;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) kept_rows.push_back(i);
  }
  out.rows_dropped = table.rows.size() - kept_rows.size();
  if (out.rows_dropped > 0) {
    out.warnings.push_back("dropped " + std::to_string(out.rows_dropped) + " of " + std::to_string(out.rows_read) +
                           " rows with missing values");
  }
  if (kept_rows.empty()) throw InputError("no usable rows: every row has a missing value");

  const auto build = [&](std::size_t j) -> Column {
    const auto& rc = cols[j];
    if (rc.type == DeclaredType::categorical) {
      std::vector<std::string> labels;
      labels.reserve(kept_rows.size());
      for (const auto i : kept_rows) labels.push_back(cells[j][i]);
      return {rc.name, CategoricalColumn::from_labels(labels)};
    }
    Vector v(static_cast<Index>(kept_rows.size()));
    for (std::size_t k = 0; k < kept_rows.size(); ++k) v(static_cast<Index>(k)) = *parse_number(cells[j][kept_rows[k]]);
    if (rc.transform == Transform::normal_score) {
      if (kept_rows.size() < 2) throw InputError("normal_score on column '" + rc.name + "' needs at least 2 rows");
      v = normal_score_transform(v);
    }
    return {rc.name, ContinuousColumn{std::move(v)}};
  };

  std::vector<Column> covariates;
  for (std::size_t j = 0; j < p_all; ++j) {
    if (cols[j].role != Role::covariate) continue;
    auto col = build(j);
    if (col.categorical() && col.categorical_data().level_count() < 2) {
      throw InputError("categorical column '" + col.name + "' has a single level; drop it or declare it continuous");
    }
    covariates.push_back(std::move(col));
  }
  if (covariates.empty()) throw InputError("no covariate columns left after applying roles");
  out.x = MixedDataMatrix(std::move(covariates));

  auto ycol = build(r);
  if (ycol.categorical()) {
    const auto& c = ycol.categorical_data();
    if (c.level_count() < 2) throw InputError("response column '" + response + "' has a single level");
    out.y = CategoricalResponse{c.codes, c.level_count()};
    out.response_levels = c.levels;
  } else {
    out.y = ycol.continuous_data().values;
  }
  out.response_name = response;
  out.columns = std::move(cols);
  return out;
}

inline IngestResult ingest_csv(const std::string& path, const std::string& response,
                               const std::vector<ColumnSchema>& schema = {}) {
  return ingest_table(read_csv_file(path), response, schema);
}

}  // namespace seqknock::io
