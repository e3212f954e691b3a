#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "seqknock/baselines.hpp"
#include "seqknock/detail/format.hpp"
#include "seqknock/errors.hpp"
#include "seqknock/knockoff_filter.hpp"
#include "seqknock/mixed_data.hpp"
#include "seqknock/multi_knockoff.hpp"
#include "seqknock/numeric.hpp"
#include "seqknock/parallel.hpp"
#include "seqknock/rng.hpp"

namespace seqknock {

/// Selectors a campaign can run.
enum class Method { seq_knockoff, mx_knockoff, multi_seq_knockoff, multi_mx_knockoff, bh, by, perm_lasso };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::seq_knockoff: return "seq_knockoff";
    case Method::mx_knockoff: return "mx_knockoff";
    case Method::multi_seq_knockoff: return "multi_seq_knockoff";
    case Method::multi_mx_knockoff: return "multi_mx_knockoff";
    case Method::bh: return "bh";
    case Method::by: return "by";
    case Method::perm_lasso: return "perm_lasso";
  }
  return "unknown";
}

inline Method method_from_string(const std::string& name) {
  for (const auto m : {Method::seq_knockoff, Method::mx_knockoff, Method::multi_seq_knockoff,
                       Method::multi_mx_knockoff, Method::bh, Method::by, Method::perm_lasso}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown method '" + name +
                        "' (expected seq_knockoff, mx_knockoff, multi_seq_knockoff, multi_mx_knockoff, bh, by or "
                        "perm_lasso)");
}

struct SimConfig {
  std::size_t n = 500;
  std::size_t p = 50;
  std::size_t p_b = 0;
  double rho = 0.5;
  CovarianceKind cov_kind = CovarianceKind::equicorrelated;
  std::size_t p_nn = 10;
  double a = 1.0;
  std::size_t n_sim = 100;
  double q = 0.2;
  std::vector<Method> methods{Method::seq_knockoff};
  std::size_t B = 0;  // draws for the multi methods
  std::uint64_t master_seed = 1;
  double alpha = 0.5;              // elastic-net mixing for knockoff fits
  std::size_t permutations = 100;  // perm_lasso

  void validate() const {
    if (n < 3) throw InvalidArgument("n must be at least 3");
    if (p < 1) throw InvalidArgument("p must be at least 1");
    if (p_b > p) throw InvalidArgument("p_b must not exceed p");
    if (p_nn > p) throw InvalidArgument("p_nn must not exceed p");
    if (n_sim < 1) throw InvalidArgument("n_sim must be at least 1");
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    if (!std::isfinite(a)) throw InvalidArgument("amplitude must be finite");
    if (methods.empty()) throw InvalidArgument("at least one method is required");
    for (const auto m : methods) {
      if ((m == Method::multi_seq_knockoff || m == Method::multi_mx_knockoff) && B < 1) {
        throw InvalidArgument("multi-knockoff methods need B >= 1");
      }
    }
    covariance_matrix({p, cov_kind, rho, 1.0});  // rho range
  }
};

namespace detail {

/// FNV-1a, for stable identifiers independent of the standard library.
class Fnv1a {
 public:
  Fnv1a& bytes(const void* data, std::size_t size) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& u64(std::uint64_t v) { return bytes(&v, sizeof v); }
  Fnv1a& f64(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof v);
    return u64(bits);
  }
  Fnv1a& str(const std::string& s) { return u64(s.size()).bytes(s.data(), s.size()); }
  [[nodiscard]] std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return out;
}

}  // namespace detail

/// Hash of the fields that define the covariate distribution and the truth
/// set size. Configs differing only in amplitude, q or methods share it, and
/// with it their designs, truth sets and noise (common random numbers).
inline std::uint64_t design_hash(const SimConfig& c) {
  return detail::Fnv1a{}
      .u64(c.n)
      .u64(c.p)
      .u64(c.p_b)
      .f64(c.rho)
      .str(to_string(c.cov_kind))
      .u64(c.p_nn)
      .u64(c.master_seed)
      .value();
}

/// Hash of every field of the config.
inline std::uint64_t config_hash(const SimConfig& c) {
  detail::Fnv1a h;
  h.u64(design_hash(c)).f64(c.a).u64(c.n_sim).f64(c.q).u64(c.B).f64(c.alpha).u64(c.permutations);
  for (const auto m : c.methods) h.str(to_string(m));
  return h.value();
}

struct TruthAssignment {
  std::vector<std::size_t> non_null;  // sorted
  Vector beta;
};

struct SimulatedDesign {
  MixedDataMatrix data;                // binarised columns typed categorical
  Matrix numeric;                      // n × p, scaled coding used for y
  std::vector<std::size_t> binarized;  // sorted
  Matrix sigma;                        // Σ / n of the latent Gaussian rows
};

/// Gaussian rows with covariance Σ/n; p_b randomly chosen columns replaced by
/// (1(x > 0) − ½) · 2/√n, so every column has marginal variance 1/n.
/// Binarised columns carry levels ("0", "1") in the typed table.
inline SimulatedDesign simulate_design(const SimConfig& config, SeededStream& stream) {
  if (config.p_b > config.p) throw InvalidArgument("p_b must not exceed p");
  const double nn = static_cast<double>(config.n);
  SimulatedDesign out;
  out.sigma = covariance_matrix({config.p, config.cov_kind, config.rho, 1.0 / nn});
  out.numeric = sample_mvn(stream, Vector::Zero(static_cast<Index>(config.p)), cholesky(out.sigma), config.n);
  auto perm = stream.permutation(config.p);
  out.binarized.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(config.p_b));
  std::sort(out.binarized.begin(), out.binarized.end());
  std::vector<char> is_binary(config.p, 0);
  for (const auto j : out.binarized) is_binary[j] = 1;

  const double half_step = 1.0 / std::sqrt(nn);
  std::vector<Column> cols;
  for (std::size_t j = 0; j < config.p; ++j) {
    const std::string name = "x" + std::to_string(j + 1);
    auto col = out.numeric.col(static_cast<Index>(j));
    if (!is_binary[j]) {
      cols.push_back({name, ContinuousColumn{col}});
      continue;
    }
    CategoricalColumn c{{}, {"0", "1"}};
    c.codes.reserve(config.n);
    for (Index i = 0; i < col.size(); ++i) {
      const bool up = col(i) > 0.0;
      c.codes.push_back(up ? 1 : 0);
      col(i) = up ? half_step : -half_step;
    }
    cols.push_back({name, std::move(c)});
  }
  out.data = MixedDataMatrix(std::move(cols));
  return out;
}

/// p_nn indices drawn uniformly without replacement; β = +a on them.
inline TruthAssignment draw_truth(std::size_t p, std::size_t p_nn, double a, SeededStream& stream) {
  if (p_nn > p) throw InvalidArgument("p_nn must not exceed p");
  TruthAssignment t;
  auto perm = stream.permutation(p);
  t.non_null.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(p_nn));
  std::sort(t.non_null.begin(), t.non_null.end());
  t.beta = Vector::Zero(static_cast<Index>(p));
  for (const auto j : t.non_null) t.beta(static_cast<Index>(j)) = a;
  return t;
}

/// y ~ N(Xβ, I).
inline Vector simulate_response(const Matrix& x, const TruthAssignment& truth, SeededStream& stream) {
  if (truth.beta.size() != x.cols()) throw DimensionMismatch("beta length does not match the design");
  Vector y = x * truth.beta;
  for (Index i = 0; i < y.size(); ++i) y(i) += stream.normal();
  return y;
}

struct Score {
  double fdp = 0.0;
  double tpp = 0.0;
};

/// fdp = |Ŝ \ S| / max(|Ŝ|, 1), tpp = |Ŝ ∩ S| / max(|S|, 1).
inline Score score(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& truth) {
  std::vector<std::size_t> s = selected, t = truth;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::vector<std::size_t> hit;
  std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(hit));
  const double false_count = static_cast<double>(s.size() - hit.size());
  return {false_count / static_cast<double>(std::max<std::size_t>(s.size(), 1)),
          static_cast<double>(hit.size()) / static_cast<double>(std::max<std::size_t>(t.size(), 1))};
}

inline Score score(const std::vector<std::size_t>& selected, const TruthAssignment& truth) {
  return score(selected, truth.non_null);
}

struct ScoreRecord {
  std::size_t config_id = 0;
  Method method = Method::seq_knockoff;
  std::size_t replicate = 0;
  double fdp = 0.0;
  double tpp = 0.0;
  std::size_t selected_count = 0;
  std::int64_t runtime_ms = 0;
  bool failed = false;
  std::string error;
  std::uint64_t data_hash = 0;  // same for every method of one (config, replicate)
};

struct CampaignOptions {
  std::size_t threads = 1;
  /// Copy measured wall time into runtime_ms; otherwise it stays 0 so result
  /// tables are reproducible byte for byte.
  bool record_runtime = false;
  /// Reuse knockoff draws across configs that share a design.
  bool cache_knockoffs = true;
  SolverControl control{};
  /// Called after each (design, replicate) task with the number done.
  std::function<void(std::size_t done, std::size_t total)> progress;
};

namespace detail {

inline std::uint64_t data_digest(const Matrix& x, const Vector& y) {
  Fnv1a h;
  h.bytes(x.data(), sizeof(double) * static_cast<std::size_t>(x.size()));
  h.bytes(y.data(), sizeof(double) * static_cast<std::size_t>(y.size()));
  return h.value();
}

/// Streams of one replicate of one design group. Everything except the
/// response mean is independent of the amplitude.
struct ReplicateStreams {
  SeededStream base;
  explicit ReplicateStreams(const SimConfig& c, std::size_t replicate)
      : base(SeededStream(c.master_seed, replicate).child(design_hash(c))) {}
  [[nodiscard]] SeededStream design() const { return base.child(0); }
  [[nodiscard]] SeededStream truth() const { return base.child(1); }
  [[nodiscard]] SeededStream noise() const { return base.child(2); }
  [[nodiscard]] SeededStream method(Method m) const { return base.child(16 + static_cast<std::uint64_t>(m)); }
};

inline std::vector<std::size_t> run_method(Method m, const SimConfig& c, const SimulatedDesign& d, const Vector& y,
                                           std::size_t replicate, const ReplicateStreams& streams,
                                           KnockoffCache* cache, const CampaignOptions& opt) {
  FilterOptions fo;
  fo.alpha = c.alpha;
  fo.control = opt.control;
  const bool gaussian = m == Method::mx_knockoff || m == Method::multi_mx_knockoff;
  if (gaussian) {
    fo.sigma = d.sigma;  // the simulated Σ is known
    fo.mean = Vector::Zero(static_cast<Index>(c.p));
  }
  const GeneratorKind gen = gaussian ? GeneratorKind::gaussian : GeneratorKind::sequential;
  SeededStream stream = streams.method(m);
  switch (m) {
    case Method::seq_knockoff:
    case Method::mx_knockoff:
      return run_filter(d.data, y, c.q, gen, stream, fo, cache).selection.selected;
    case Method::multi_seq_knockoff:
    case Method::multi_mx_knockoff: {
      MultiOptions mo;
      mo.filter = fo;
      mo.replicate = replicate;
      mo.cache = cache;
      const auto mat = run_multi(d.data, y, c.q, c.B, gen, stream.next_u64(), mo);
      return consensus_select(mat).selected;
    }
    case Method::bh:
      return bh_select(regression_pvalues(d.data, y), c.q);
    case Method::by:
      return by_select(regression_pvalues(d.data, y), c.q);
    case Method::perm_lasso: {
      PermutationLassoOptions po;
      po.permutations = c.permutations;
      po.control = opt.control;
      return permutation_lasso(d.data, y, c.q, stream, po).selected;
    }
  }
  return {};
}

}  // namespace detail

/// Run every config of `grid` for n_sim replicates.
///
/// Configs sharing a design hash (same n, p, p_b, ρ, covariance, p_nn and
/// seed) share designs, truth sets and noise per replicate, and by default
/// their knockoff draws. Tasks are (design group, replicate) pairs run on
/// `opt.threads` workers; the output is sorted by (config, method position,
/// replicate). A failing selector is recorded with failed = true and NaN
/// scores; the campaign continues.
inline std::vector<ScoreRecord> run_campaign(const std::vector<SimConfig>& grid, const CampaignOptions& opt = {}) {
  if (grid.empty()) throw InvalidArgument("campaign grid is empty");
  for (const auto& c : grid) c.validate();

  std::map<std::uint64_t, std::vector<std::size_t>> groups;  // design hash -> config ids
  std::vector<std::uint64_t> group_order;
  for (std::size_t id = 0; id < grid.size(); ++id) {
    const auto h = design_hash(grid[id]);
    if (!groups.count(h)) group_order.push_back(h);
    groups[h].push_back(id);
  }
  struct Task {
    std::uint64_t group;
    std::size_t replicate;
  };
  std::vector<Task> tasks;
  for (const auto g : group_order) {
    std::size_t reps = 0;
    for (const auto id : groups[g]) reps = std::max(reps, grid[id].n_sim);
    for (std::size_t r = 0; r < reps; ++r) tasks.push_back({g, r});
  }

  std::vector<std::vector<ScoreRecord>> slots(tasks.size());
  std::atomic<std::size_t> done{0};
  parallel_for(tasks.size(), opt.threads, [&](std::size_t t) {
    const auto& task = tasks[t];
    const auto& ids = groups[task.group];
    const SimConfig& first = grid[ids.front()];
    const detail::ReplicateStreams streams(first, task.replicate);
    SeededStream ds = streams.design(), ts = streams.truth(), ns = streams.noise();
    const auto design = simulate_design(first, ds);
    const auto truth_set = draw_truth(first.p, first.p_nn, 1.0, ts);
    Vector noise(static_cast<Index>(first.n));
    for (Index i = 0; i < noise.size(); ++i) noise(i) = ns.normal();
    KnockoffCache cache;

    for (const auto id : ids) {
      const SimConfig& c = grid[id];
      if (task.replicate >= c.n_sim) continue;
      const Vector y = design.numeric * (c.a * truth_set.beta) + noise;
      const auto digest = detail::data_digest(design.numeric, y);
      for (const auto m : c.methods) {
        ScoreRecord rec;
        rec.config_id = id;
        rec.method = m;
        rec.replicate = task.replicate;
        rec.data_hash = digest;
        const auto start = std::chrono::steady_clock::now();
        try {
          const auto selected = detail::run_method(m, c, design, y, task.replicate, streams,
                                                   opt.cache_knockoffs ? &cache : nullptr, opt);
          const auto s = score(selected, truth_set.non_null);
          rec.fdp = s.fdp;
          rec.tpp = s.tpp;
          rec.selected_count = selected.size();
        } catch (const Error& e) {
          rec.failed = true;
          rec.error = e.what();
          rec.fdp = rec.tpp = std::numeric_limits<double>::quiet_NaN();
        }
        if (opt.record_runtime) {
          rec.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
        }
        slots[t].push_back(std::move(rec));
      }
    }
    const auto finished = ++done;
    if (opt.progress) opt.progress(finished, tasks.size());
  });

  std::vector<ScoreRecord> out;
  for (auto& s : slots) {
    for (auto& r : s) out.push_back(std::move(r));
  }
  const auto method_pos = [&](const ScoreRecord& r) {
    const auto& ms = grid[r.config_id].methods;
    return static_cast<std::size_t>(std::find(ms.begin(), ms.end(), r.method) - ms.begin());
  };
  std::sort(out.begin(), out.end(), [&](const ScoreRecord& a, const ScoreRecord& b) {
    if (a.config_id != b.config_id) return a.config_id < b.config_id;
    if (method_pos(a) != method_pos(b)) return method_pos(a) < method_pos(b);
    return a.replicate < b.replicate;
  });
  return out;
}

struct MethodSummary {
  std::size_t config_id = 0;
  Method method = Method::seq_knockoff;
  double amplitude = 0.0;
  double mean_fdp = 0.0;
  double se_fdp = 0.0;
  double mean_tpp = 0.0;
  double se_tpp = 0.0;
  double mean_selected = 0.0;
  std::size_t replicates = 0;  // successful
  std::size_t failures = 0;
};

/// Mean ± SE (sample sd / √count) over successful replicates, per (config,
/// method), in record order.
inline std::vector<MethodSummary> summarize(const std::vector<ScoreRecord>& records,
                                            const std::vector<SimConfig>& grid) {
  std::vector<MethodSummary> out;
  std::map<std::pair<std::size_t, int>, std::size_t> index;
  std::vector<std::vector<const ScoreRecord*>> members;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.config_id, static_cast<int>(r.method));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      MethodSummary s;
      s.config_id = r.config_id;
      s.method = r.method;
      s.amplitude = grid.at(r.config_id).a;
      out.push_back(s);
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  const auto mean_se = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double m = 0.0;
    for (const double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (const double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
  };
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::vector<double> fdp, tpp;
    double sel = 0.0;
    for (const auto* r : members[k]) {
      if (r->failed) {
        ++out[k].failures;
        continue;
      }
      fdp.push_back(r->fdp);
      tpp.push_back(r->tpp);
      sel += static_cast<double>(r->selected_count);
    }
    out[k].replicates = fdp.size();
    std::tie(out[k].mean_fdp, out[k].se_fdp) = mean_se(fdp);
    std::tie(out[k].mean_tpp, out[k].se_tpp) = mean_se(tpp);
    out[k].mean_selected = fdp.empty() ? 0.0 : sel / static_cast<double>(fdp.size());
  }
  return out;
}

/// `config_id,method,replicate,fdp,tpp,selected_count,runtime_ms`.
inline void write_campaign_csv(std::ostream& os, const std::vector<ScoreRecord>& records) {
  os << "config_id,method,replicate,fdp,tpp,selected_count,runtime_ms\n";
  for (const auto& r : records) {
    os << r.config_id << ',' << to_string(r.method) << ',' << r.replicate << ',' << detail::format_double(r.fdp) << ','
       << detail::format_double(r.tpp) << ',' << r.selected_count << ',' << r.runtime_ms << '\n';
  }
}

/// One row per (config, method): the FDR / power curve points.
inline void write_curves_csv(std::ostream& os, const std::vector<MethodSummary>& rows,
                             const std::vector<SimConfig>& grid) {
  os << "config_id,design,method,amplitude,mean_fdp,se_fdp,mean_tpp,se_tpp,mean_selected,replicates,failures\n";
  for (const auto& s : rows) {
    os << s.config_id << ',' << detail::hex64(design_hash(grid.at(s.config_id))) << ',' << to_string(s.method) << ','
       << detail::format_double(s.amplitude) << ',' << detail::format_double(s.mean_fdp) << ','
       << detail::format_double(s.se_fdp) << ',' << detail::format_double(s.mean_tpp) << ','
       << detail::format_double(s.se_tpp) << ',' << detail::format_double(s.mean_selected) << ',' << s.replicates
       << ',' << s.failures << '\n';
  }
}

}  // namespace seqknock
