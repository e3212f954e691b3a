#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "seqknock/elastic_net.hpp"
#include "seqknock/errors.hpp"
#include "seqknock/knockoff_gen.hpp"
#include "seqknock/mixed_data.hpp"
#include "seqknock/rng.hpp"

namespace seqknock {

enum class GeneratorKind { gaussian, sequential };

inline std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::gaussian ? "gaussian" : "sequential";
}

inline GeneratorKind generator_from_string(const std::string& name) {
  if (name == "gaussian") return GeneratorKind::gaussian;
  if (name == "sequential") return GeneratorKind::sequential;
  throw InvalidArgument("unknown generator '" + name + "' (expected gaussian or sequential)");
}

/// W_j = |β_j| − |β̃_j| read from one cross-validated augmented fit.
struct FeatureStatistics {
  Vector w;
  std::string stat_kind = "enet_abs_coef_difference";
  double lambda_used = 0.0;
  /// Order of the 2p variable blocks in the fitted design: entry k is
  /// variable j for an original column, p + j for its knockoff.
  std::vector<std::size_t> block_order;
};

struct SelectionResult {
  std::vector<std::size_t> selected;  // sorted, zero-based
  double threshold = std::numeric_limits<double>::infinity();
  double q = 0.2;
  Vector w;
};

struct StatisticOptions {
  double alpha = 0.5;
  std::size_t folds = 10;
  SolverControl control{};
};

/// Feature statistics from an elastic net of y on the augmented design
/// [X, X̃], with the 2p variable blocks in a seeded random order (substream
/// child(0)); CV folds use child(1). For a categorical variable |β_j| is the
/// largest absolute coefficient over its dummy columns (and over classes for
/// a categorical response).
inline FeatureStatistics feature_statistics(const MixedDataMatrix& x, const MixedDataMatrix& x_knock,
                                            const Response& y, SeededStream& stream,
                                            const StatisticOptions& opt = {}) {
  if (!x.compatible_with(x_knock)) {
    throw DimensionMismatch("knockoff table does not match the data in shape, types or levels");
  }
  const std::size_t p = x.cols();
  const auto n = static_cast<Index>(x.rows());
  FeatureStatistics out;
  out.block_order.resize(2 * p);
  std::iota(out.block_order.begin(), out.block_order.end(), std::size_t{0});
  SeededStream order_stream = stream.child(0);
  order_stream.shuffle(out.block_order.begin(), out.block_order.end());

  std::vector<Matrix> blocks(2 * p);
  Index width = 0;
  for (std::size_t j = 0; j < p; ++j) {
    blocks[j] = x.encode_column(j);
    blocks[p + j] = x_knock.encode_column(j);
    width += 2 * blocks[j].cols();
  }
  Matrix design(n, width);
  std::vector<Index> start(2 * p);
  Index at = 0;
  for (const auto b : out.block_order) {
    start[b] = at;
    design.middleCols(at, blocks[b].cols()) = blocks[b];
    at += blocks[b].cols();
  }

  SeededStream fold_stream = stream.child(1);
  const std::size_t folds = std::min<std::size_t>(opt.folds, static_cast<std::size_t>(n));
  const auto cv = fit_cv(DesignSpec{std::move(design), y, true}, opt.alpha, folds, fold_stream, opt.control);
  out.lambda_used = cv.fit.lambda;
  const auto magnitude = [&](std::size_t b) {
    return cv.fit.beta.middleRows(start[b], blocks[b].cols()).cwiseAbs().maxCoeff();
  };
  out.w.resize(static_cast<Index>(p));
  for (std::size_t j = 0; j < p; ++j) out.w(static_cast<Index>(j)) = magnitude(j) - magnitude(p + j);
  return out;
}

/// Knockoffs+ selection: τ₊ is the smallest t among the nonzero |W_j| with
/// (1 + #{W_j ≤ −t}) / max(1, #{W_j ≥ t}) ≤ q, and Ŝ = {j : W_j ≥ τ₊}.
inline SelectionResult knockoff_plus_select(const Vector& w, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  if (!w.allFinite()) throw InvalidArgument("feature statistics must be finite");
  SelectionResult out;
  out.q = q;
  out.w = w;
  std::vector<double> candidates;
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) != 0.0) candidates.push_back(std::abs(w(j)));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const double t : candidates) {
    const auto negatives = (w.array() <= -t).count();
    const auto positives = (w.array() >= t).count();
    if (static_cast<double>(1 + negatives) / static_cast<double>(std::max<Index>(1, positives)) <= q) {
      out.threshold = t;
      break;
    }
  }
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) >= out.threshold) out.selected.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

inline SelectionResult knockoff_plus_select(const FeatureStatistics& stats, double q) {
  return knockoff_plus_select(stats.w, q);
}

struct FilterOptions {
  double alpha = 0.5;
  std::size_t folds = 10;
  bool shuffle_order = false;
  /// Covariance (and mean) of X for the gaussian generator; estimated from
  /// the data with a small ridge when absent.
  std::optional<Matrix> sigma;
  std::optional<Vector> mean;
  SolverControl control{};
};

struct KnockoffDraw {
  MixedDataMatrix knockoffs;
  std::vector<std::size_t> order;  // sequential processing order; empty for gaussian
  int shrink_steps = 0;            // gaussian s shrink count
};

/// Draw one knockoff copy of `x` with the chosen generator. Never sees y.
inline KnockoffDraw draw_knockoffs(const MixedDataMatrix& x, GeneratorKind generator, SeededStream& stream,
                                   const FilterOptions& opt = {}) {
  KnockoffDraw out;
  if (generator == GeneratorKind::sequential) {
    SequentialOptions so;
    so.alpha = opt.alpha;
    so.folds = opt.folds;
    so.shuffle_order = opt.shuffle_order;
    so.control = opt.control;
    auto seq = sequential_knockoffs(x, stream, so);
    out.knockoffs = std::move(seq.knockoffs);
    out.order = std::move(seq.order);
    return out;
  }
  if (!x.all_continuous()) {
    throw InputError("the gaussian generator needs all-continuous covariates; use the sequential generator");
  }
  const Matrix xm = x.encode().first;
  GaussianKnockoffModel model;
  if (opt.sigma) {
    model = make_gaussian_model(*opt.sigma, std::nullopt, opt.mean);
  } else {
    const auto [sigma, mean] = estimate_covariance(xm);
    model = make_gaussian_model(sigma, std::nullopt, mean);
  }
  out.shrink_steps = model.shrink_steps;
  out.knockoffs = from_matrix(gaussian_knockoffs(xm, model, stream), x.names());
  return out;
}

struct FilterResult {
  SelectionResult selection;
  FeatureStatistics stats;
  GeneratorKind generator = GeneratorKind::sequential;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::vector<std::size_t> knockoff_order;
  int shrink_steps = 0;
};

/// Statistics and selection for an existing knockoff copy.
inline FilterResult filter_with_knockoffs(const MixedDataMatrix& x, const KnockoffDraw& draw, const Response& y,
                                          double q, SeededStream& stat_stream, const FilterOptions& opt = {}) {
  FilterResult out;
  out.stats = feature_statistics(x, draw.knockoffs, y, stat_stream, {opt.alpha, opt.folds, opt.control});
  out.selection = knockoff_plus_select(out.stats, q);
  out.knockoff_order = draw.order;
  out.shrink_steps = draw.shrink_steps;
  return out;
}

/// Knockoff draws keyed by generator and stream address, for reuse when the
/// same covariates are filtered against several responses. A cache must only
/// ever see one covariate table. Thread-safe.
class KnockoffCache {
 public:
  template <class Make>
  std::shared_ptr<const KnockoffDraw> get(GeneratorKind generator, const SeededStream& stream, Make&& make) {
    const Key key{static_cast<int>(generator), stream.seed(), stream.stream_id()};
    {
      const std::lock_guard lock(mutex_);
      if (const auto it = draws_.find(key); it != draws_.end()) return it->second;
    }
    auto draw = std::make_shared<const KnockoffDraw>(make());
    const std::lock_guard lock(mutex_);
    return draws_.emplace(key, std::move(draw)).first->second;
  }

  [[nodiscard]] std::size_t size() const {
    const std::lock_guard lock(mutex_);
    return draws_.size();
  }

 private:
  using Key = std::tuple<int, std::uint64_t, std::uint64_t>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const KnockoffDraw>> draws_;
};

/// Knockoff filter: generate (substream child(0)), compute statistics
/// (child(1)), select with knockoffs+.
inline FilterResult run_filter(const MixedDataMatrix& x, const Response& y, double q, GeneratorKind generator,
                               SeededStream& stream, const FilterOptions& opt = {}, KnockoffCache* cache = nullptr) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  SeededStream knock_stream = stream.child(0);
  SeededStream stat_stream = stream.child(1);
  const auto make = [&] {
    SeededStream s = knock_stream;
    return draw_knockoffs(x, generator, s, opt);
  };
  const auto draw = cache ? cache->get(generator, knock_stream, make) : std::make_shared<const KnockoffDraw>(make());
  auto out = filter_with_knockoffs(x, *draw, y, q, stat_stream, opt);
  out.generator = generator;
  out.seed = stream.seed();
  out.stream_id = stream.stream_id();
  return out;
}

}  // namespace seqknock
