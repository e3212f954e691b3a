#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "seqknock/detail/format.hpp"
#include "seqknock/errors.hpp"
#include "seqknock/knockoff_filter.hpp"
#include "seqknock/parallel.hpp"
#include "seqknock/rng.hpp"

namespace seqknock {

using IndexSet = std::vector<std::size_t>;

/// B × p matrix of per-draw selections, I(b, j) = 1 iff j ∈ S_b.
struct SelectionMatrix {
  Eigen::MatrixXi indicators;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> draw_stream_ids;
  std::vector<char> failed;  // draw recorded as all-zero after a retry failed
  std::vector<std::string> variable_names;

  [[nodiscard]] std::size_t draws() const { return static_cast<std::size_t>(indicators.rows()); }
  [[nodiscard]] std::size_t variables() const { return static_cast<std::size_t>(indicators.cols()); }

  [[nodiscard]] IndexSet row_set(std::size_t b) const {
    IndexSet out;
    for (Index j = 0; j < indicators.cols(); ++j) {
      if (indicators(static_cast<Index>(b), j)) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
  }

  [[nodiscard]] std::vector<int> counts() const {
    std::vector<int> out(variables(), 0);
    for (Index j = 0; j < indicators.cols(); ++j) out[static_cast<std::size_t>(j)] = indicators.col(j).sum();
    return out;
  }

  /// Build from explicit selection sets (p variables, names x1..xp).
  static SelectionMatrix from_sets(const std::vector<IndexSet>& sets, std::size_t p) {
    SelectionMatrix m;
    m.indicators = Eigen::MatrixXi::Zero(static_cast<Index>(sets.size()), static_cast<Index>(p));
    for (std::size_t b = 0; b < sets.size(); ++b) {
      for (const auto j : sets[b]) {
        if (j >= p) throw InvalidArgument("selection index out of range");
        m.indicators(static_cast<Index>(b), static_cast<Index>(j)) = 1;
      }
    }
    m.draw_stream_ids.assign(sets.size(), 0);
    m.failed.assign(sets.size(), 0);
    for (std::size_t j = 0; j < p; ++j) m.variable_names.push_back("x" + std::to_string(j + 1));
    return m;
  }
};

struct MultiOptions {
  FilterOptions filter{};
  std::size_t threads = 1;
  std::uint64_t replicate = 0;  // high bits of the draw stream ids
  KnockoffCache* cache = nullptr;
};

/// Tag of the substream used to retry a failed draw.
inline constexpr std::uint64_t kRetryTag = 0x5EED;

/// B independent knockoff filters. Draw b uses SeededStream::for_draw(
/// master_seed, replicate, b), so B = 1 reproduces a single run on the same
/// stream. A draw failing with a numerical error is retried once on the
/// child(kRetryTag) substream, then recorded as all-zero and flagged.
inline SelectionMatrix run_multi(const MixedDataMatrix& x, const Response& y, double q, std::size_t draws,
                                 GeneratorKind generator, std::uint64_t master_seed,
                                 const MultiOptions& opt = {}) {
  if (draws < 1) throw InvalidArgument("B must be at least 1");
  if (draws >= (std::size_t{1} << SeededStream::kDrawBits)) throw InvalidArgument("B too large");
  SelectionMatrix m;
  m.master_seed = master_seed;
  m.indicators = Eigen::MatrixXi::Zero(static_cast<Index>(draws), static_cast<Index>(x.cols()));
  m.draw_stream_ids.resize(draws);
  m.failed.assign(draws, 0);
  m.variable_names = x.names();
  parallel_for(draws, opt.threads, [&](std::size_t b) {
    SeededStream stream = SeededStream::for_draw(master_seed, opt.replicate, b);
    m.draw_stream_ids[b] = stream.stream_id();
    IndexSet selected;
    try {
      selected = run_filter(x, y, q, generator, stream, opt.filter, opt.cache).selection.selected;
    } catch (const NumericalError&) {
      try {
        SeededStream retry = stream.child(kRetryTag);
        selected = run_filter(x, y, q, generator, retry, opt.filter, opt.cache).selection.selected;
      } catch (const NumericalError&) {
        m.failed[b] = 1;
        return;
      }
    }
    for (const auto j : selected) m.indicators(static_cast<Index>(b), static_cast<Index>(j)) = 1;
  });
  return m;
}

/// F(r) = {j : Σ_b I(b, j) > r B}, strict. The comparison carries a 1e-9
/// guard so that r B landing a rounding error below an integer count does
/// not admit it.
inline IndexSet filter_frequent(const SelectionMatrix& mat, double r) {
  const double bound = r * static_cast<double>(mat.draws());
  const double guard = 1e-9 * std::max(1.0, static_cast<double>(mat.draws()));
  const auto counts = mat.counts();
  IndexSet out;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (static_cast<double>(counts[j]) - bound > guard) out.push_back(j);
  }
  return out;
}

/// Default r grid: 0.5 to 1 in steps of min(0.05, 1/(2B)).
inline std::vector<double> default_r_grid(std::size_t draws) {
  const double step = std::min(0.05, 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(draws, 1))));
  const auto steps = static_cast<std::size_t>(std::llround(0.5 / step));
  std::vector<double> grid;
  for (std::size_t k = 0; k <= steps; ++k) grid.push_back(std::min(1.0, 0.5 + static_cast<double>(k) * step));
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

struct ConsensusStep {
  double r = 0.5;
  IndexSet frequent;   // F(r)
  IndexSet consensus;  // S(r)
};

struct ConsensusResult {
  IndexSet selected;
  double r_hat = 0.5;
  std::vector<ConsensusStep> trace;
  std::vector<double> frequency;  // per variable, count / B
};

/// Most frequent of the sets F ∩ S_b; ties go to the larger set, then the
/// lexicographically smallest.
inline IndexSet filtered_mode(const SelectionMatrix& mat, const IndexSet& frequent) {
  std::map<IndexSet, std::size_t> tally;
  for (std::size_t b = 0; b < mat.draws(); ++b) {
    IndexSet s;
    for (const auto j : frequent) {
      if (mat.indicators(static_cast<Index>(b), static_cast<Index>(j))) s.push_back(j);
    }
    ++tally[s];
  }
  const IndexSet* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [set, count] : tally) {  // map order: lexicographic
    if (!best || count > best_count || (count == best_count && set.size() > best->size())) {
      best = &set;
      best_count = count;
    }
  }
  return best ? *best : IndexSet{};
}

/// Consensus over the r grid: S(r) = mode_b(F(r) ∩ S_b) and Ŝ = S(r̂) with
/// r̂ the first grid value maximising |S(r)|.
inline ConsensusResult consensus_select(const SelectionMatrix& mat, std::vector<double> r_grid = {}) {
  if (mat.draws() == 0) throw InvalidArgument("selection matrix has no draws");
  if (r_grid.empty()) r_grid = default_r_grid(mat.draws());
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    if (r_grid[k] < 0.5 || r_grid[k] > 1.0) throw InvalidArgument("r grid must lie in [0.5, 1]");
    if (k > 0 && !(r_grid[k] > r_grid[k - 1])) throw InvalidArgument("r grid must be increasing");
  }
  ConsensusResult out;
  const auto counts = mat.counts();
  for (const int c : counts) out.frequency.push_back(static_cast<double>(c) / static_cast<double>(mat.draws()));
  bool first = true;
  for (const double r : r_grid) {
    ConsensusStep step{r, filter_frequent(mat, r), {}};
    step.consensus = filtered_mode(mat, step.frequent);
    if (first || step.consensus.size() > out.selected.size()) {
      out.selected = step.consensus;
      out.r_hat = r;
      first = false;
    }
    out.trace.push_back(std::move(step));
  }
  return out;
}

enum class HeatmapOrder { by_frequency, input };

struct HeatmapRow {
  std::string variable;
  std::size_t draw = 0;
  int selected = 0;
};

struct HeatmapData {
  std::vector<std::size_t> order;  // variable indices, plotting order
  std::vector<double> frequency;   // indexed by variable
  std::vector<HeatmapRow> rows;    // variables in `order`, draws ascending
};

inline HeatmapData export_heatmap(const SelectionMatrix& mat, HeatmapOrder order = HeatmapOrder::by_frequency) {
  HeatmapData out;
  const std::size_t p = mat.variables();
  const auto counts = mat.counts();
  for (const int c : counts) {
    out.frequency.push_back(mat.draws() ? static_cast<double>(c) / static_cast<double>(mat.draws()) : 0.0);
  }
  out.order.resize(p);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  if (order == HeatmapOrder::by_frequency) {
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  }
  out.rows.reserve(p * mat.draws());
  for (const auto j : out.order) {
    const std::string& name = j < mat.variable_names.size() ? mat.variable_names[j] : "x" + std::to_string(j + 1);
    for (std::size_t b = 0; b < mat.draws(); ++b) {
      out.rows.push_back({name, b, mat.indicators(static_cast<Index>(b), static_cast<Index>(j))});
    }
  }
  return out;
}

/// `variable,draw,selected` with header.
inline void write_heatmap_csv(std::ostream& os, const HeatmapData& data) {
  os << "variable,draw,selected\n";
  for (const auto& row : data.rows) {
    os << detail::csv_field(row.variable) << ',' << row.draw << ',' << row.selected << '\n';
  }
}

/// `variable,freq` with header, in plotting order.
inline void write_frequency_csv(std::ostream& os, const HeatmapData& data, const std::vector<std::string>& names) {
  os << "variable,freq\n";
  for (const auto j : data.order) {
    os << detail::csv_field(names.at(j)) << ',' << detail::format_double(data.frequency[j]) << '\n';
  }
}

}  // namespace seqknock
