#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "seqknock/errors.hpp"
#include "seqknock/numeric.hpp"

namespace seqknock {

struct ContinuousColumn {
  Vector values;
};

/// Codes index into `levels`; level 0 is the reference in dummy coding.
struct CategoricalColumn {
  std::vector<int> codes;
  std::vector<std::string> levels;

  /// Levels in order of first appearance.
  static CategoricalColumn from_labels(const std::vector<std::string>& labels) {
    CategoricalColumn col;
    std::unordered_map<std::string, int> index;
    col.codes.reserve(labels.size());
    for (const auto& label : labels) {
      auto [it, fresh] = index.emplace(label, static_cast<int>(col.levels.size()));
      if (fresh) col.levels.push_back(label);
      col.codes.push_back(it->second);
    }
    return col;
  }

  [[nodiscard]] int level_count() const { return static_cast<int>(levels.size()); }
};

struct Column {
  std::string name;
  std::variant<ContinuousColumn, CategoricalColumn> data;

  [[nodiscard]] bool categorical() const { return std::holds_alternative<CategoricalColumn>(data); }
  [[nodiscard]] const ContinuousColumn& continuous_data() const { return std::get<ContinuousColumn>(data); }
  [[nodiscard]] const CategoricalColumn& categorical_data() const { return std::get<CategoricalColumn>(data); }
  [[nodiscard]] std::size_t size() const {
    return categorical() ? categorical_data().codes.size()
                         : static_cast<std::size_t>(continuous_data().values.size());
  }
  /// Number of design columns after treatment coding.
  [[nodiscard]] Index encoded_width() const {
    return categorical() ? categorical_data().level_count() - 1 : 1;
  }
};

/// n × p covariate table with typed columns.
///
/// Construction checks lengths, unique names, at least two levels per
/// categorical column and codes in range. `require_observed_levels` adds the
/// stricter check used on input data; knockoff copies keep the level set of
/// their source even when a level is not drawn.
class MixedDataMatrix {
 public:
  MixedDataMatrix() = default;

  MixedDataMatrix(std::vector<Column> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw InvalidArgument("data matrix needs at least one column");
    n_ = columns_.front().size();
    std::unordered_set<std::string> names;
    for (const auto& col : columns_) {
      if (col.size() != n_) {
        throw DimensionMismatch("column '" + col.name + "' has " + std::to_string(col.size()) +
                                " rows, expected " + std::to_string(n_));
      }
      if (!names.insert(col.name).second) throw InvalidArgument("duplicate column name '" + col.name + "'");
      if (col.categorical()) {
        const auto& c = col.categorical_data();
        if (c.level_count() < 2) {
          throw InvalidArgument("categorical column '" + col.name + "' needs at least 2 levels");
        }
        for (const int code : c.codes) {
          if (code < 0 || code >= c.level_count()) {
            throw InvalidArgument("categorical column '" + col.name + "' has a code out of range");
          }
        }
      }
    }
  }

  [[nodiscard]] std::size_t rows() const { return n_; }
  [[nodiscard]] std::size_t cols() const { return columns_.size(); }
  [[nodiscard]] const Column& column(std::size_t j) const { return columns_.at(j); }
  [[nodiscard]] const std::vector<Column>& columns() const { return columns_; }

  [[nodiscard]] std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
  }

  [[nodiscard]] bool all_continuous() const {
    return std::none_of(columns_.begin(), columns_.end(), [](const Column& c) { return c.categorical(); });
  }

  /// Whether two tables agree in shape, column types and level sets.
  [[nodiscard]] bool compatible_with(const MixedDataMatrix& other) const {
    if (other.n_ != n_ || other.cols() != cols()) return false;
    for (std::size_t j = 0; j < cols(); ++j) {
      const auto& a = columns_[j];
      const auto& b = other.columns_[j];
      if (a.categorical() != b.categorical()) return false;
      if (a.categorical() && a.categorical_data().levels != b.categorical_data().levels) return false;
    }
    return true;
  }

  void require_observed_levels() const {
    for (const auto& col : columns_) {
      if (!col.categorical()) continue;
      const auto& c = col.categorical_data();
      std::vector<char> seen(static_cast<std::size_t>(c.level_count()), 0);
      for (const int code : c.codes) seen[static_cast<std::size_t>(code)] = 1;
      for (std::size_t k = 0; k < seen.size(); ++k) {
        if (!seen[k]) {
          throw InvalidArgument("level '" + c.levels[k] + "' of column '" + col.name + "' is never observed");
        }
      }
    }
  }

  /// Treatment-coded block for column j: the value itself, or one indicator
  /// per non-reference level.
  [[nodiscard]] Matrix encode_column(std::size_t j) const {
    const auto& col = columns_.at(j);
    const auto n = static_cast<Index>(n_);
    if (!col.categorical()) return col.continuous_data().values;
    const auto& c = col.categorical_data();
    Matrix block = Matrix::Zero(n, c.level_count() - 1);
    for (Index i = 0; i < n; ++i) {
      const int code = c.codes[static_cast<std::size_t>(i)];
      if (code > 0) block(i, code - 1) = 1.0;
    }
    return block;
  }

  /// Full design with the owning variable of each encoded column.
  [[nodiscard]] std::pair<Matrix, std::vector<std::size_t>> encode() const {
    Index width = 0;
    for (const auto& col : columns_) width += col.encoded_width();
    Matrix x(static_cast<Index>(n_), width);
    std::vector<std::size_t> owner;
    owner.reserve(static_cast<std::size_t>(width));
    Index at = 0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      const Matrix block = encode_column(j);
      x.middleCols(at, block.cols()) = block;
      at += block.cols();
      owner.insert(owner.end(), static_cast<std::size_t>(block.cols()), j);
    }
    return {std::move(x), std::move(owner)};
  }

  /// Rows `keep` in the given order.
  [[nodiscard]] MixedDataMatrix subset_rows(const std::vector<std::size_t>& keep) const {
    std::vector<Column> out;
    out.reserve(columns_.size());
    for (const auto& col : columns_) {
      if (col.categorical()) {
        const auto& c = col.categorical_data();
        CategoricalColumn sub{{}, c.levels};
        sub.codes.reserve(keep.size());
        for (const auto i : keep) sub.codes.push_back(c.codes.at(i));
        out.push_back({col.name, std::move(sub)});
      } else {
        const auto& v = col.continuous_data().values;
        Vector sub(static_cast<Index>(keep.size()));
        for (std::size_t r = 0; r < keep.size(); ++r) sub(static_cast<Index>(r)) = v(static_cast<Index>(keep[r]));
        out.push_back({col.name, ContinuousColumn{std::move(sub)}});
      }
    }
    return MixedDataMatrix(std::move(out));
  }

 private:
  std::size_t n_ = 0;
  std::vector<Column> columns_;
};

/// All-continuous table from a numeric matrix; names default to x1, x2, ...
inline MixedDataMatrix from_matrix(const Matrix& x, std::vector<std::string> names = {}) {
  if (names.empty()) {
    for (Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Index>(names.size()) != x.cols()) throw DimensionMismatch("one name per column required");
  std::vector<Column> cols;
  for (Index j = 0; j < x.cols(); ++j) cols.push_back({names[static_cast<std::size_t>(j)], ContinuousColumn{x.col(j)}});
  return MixedDataMatrix(std::move(cols));
}

}  // namespace seqknock
