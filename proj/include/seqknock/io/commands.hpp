#pragma once

#include <chrono>
#include <cstdint>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seqknock/errors.hpp"
#include "seqknock/io/csv.hpp"
#include "seqknock/io/manifest.hpp"
#include "seqknock/io/svg.hpp"
#include "seqknock/knockoff_filter.hpp"
#include "seqknock/multi_knockoff.hpp"
#include "seqknock/sim_harness.hpp"

namespace seqknock::io {

using json = nlohmann::json;

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitNumerical = 3 };

/// Values given on the command line; unset fields fall back to the config
/// file, then to built-in defaults.
struct CliFlags {
  std::optional<std::string> input, response, generator, out_dir, config, heatmap_order;
  std::optional<double> q, alpha;
  std::optional<std::size_t> B, threads, folds, n_sim;
  std::optional<std::uint64_t> seed;
  std::optional<bool> record_runtime, shuffle_order;
};

namespace detail {

inline const std::set<std::string>& allowed_keys(const std::string& command) {
  static const std::set<std::string> filter{"input", "response", "q",       "generator", "seed",
                                            "alpha", "folds",    "threads", "out_dir",   "shuffle_order",
                                            "schema"};
  static const std::set<std::string> multi{"input", "response", "q",       "generator",     "seed",   "alpha",
                                           "folds", "threads",  "out_dir", "shuffle_order", "schema", "B",
                                           "heatmap_order"};
  static const std::set<std::string> simulate{"n",       "p",      "p_b",     "rho",            "cov_kind",
                                              "p_nn",    "a",      "n_sim",   "q",              "methods",
                                              "B",       "alpha",  "seed",    "permutations",   "grid",
                                              "threads", "out_dir", "record_runtime", "cache_knockoffs"};
  if (command == "filter") return filter;
  if (command == "multi") return multi;
  if (command == "simulate") return simulate;
  throw InputError("unknown command '" + command + "'");
}

inline json defaults(const std::string& command) {
  if (command == "simulate") {
    return {{"n", 500},       {"p", 50},          {"p_b", 0},
            {"rho", 0.5},     {"cov_kind", "equicorrelated"},
            {"p_nn", 10},     {"a", 1.0},         {"n_sim", 100},
            {"q", 0.2},       {"methods", json::array({"seq_knockoff"})},
            {"B", 100},       {"alpha", 0.5},     {"permutations", 100},
            {"grid", json::object()},             {"threads", 1},
            {"record_runtime", false},            {"cache_knockoffs", true}};
  }
  json d = {{"q", 0.2},        {"generator", "sequential"}, {"alpha", 0.5}, {"folds", 10},
            {"threads", 1},    {"shuffle_order", false},    {"schema", json::array()}};
  if (command == "multi") {
    d["B"] = 1000;
    d["heatmap_order"] = "frequency";
  }
  return d;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

template <class T>
T get_as(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("config value '" + key + "' is missing or has the wrong type");
  }
}

inline std::vector<ColumnSchema> parse_schema(const json& arr) {
  std::vector<ColumnSchema> out;
  if (!arr.is_array()) throw InputError("'schema' must be an array of column objects");
  for (const auto& item : arr) {
    if (!item.is_object() || !item.contains("name")) throw InputError("every schema entry needs a 'name'");
    for (const auto& [k, v] : item.items()) {
      if (k != "name" && k != "type" && k != "transform" && k != "role") {
        throw InputError("unknown schema field '" + k + "' (expected name, type, transform, role)");
      }
    }
    ColumnSchema s;
    s.name = get_as<std::string>(item, "name");
    if (item.contains("type")) s.declared_type = declared_type_from_string(get_as<std::string>(item, "type"));
    if (item.contains("transform")) s.transform = transform_from_string(get_as<std::string>(item, "transform"));
    if (item.contains("role")) s.role = role_from_string(get_as<std::string>(item, "role"));
    out.push_back(s);
  }
  return out;
}

inline json names_of(const std::vector<std::size_t>& idx, const std::vector<std::string>& names) {
  json out = json::array();
  for (const auto j : idx) out.push_back(names.at(j));
  return out;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Files produced by a command, written only after all computation succeeded.
struct OutputSet {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  void add(std::string name, std::string contents) { files.emplace_back(std::move(name), std::move(contents)); }
};

inline json columns_json(const IngestResult& data) {
  json cols = json::array();
  for (const auto& c : data.columns) {
    cols.push_back({{"name", c.name},
                    {"type", to_string(c.type)},
                    {"transform", to_string(c.transform)},
                    {"role", to_string(c.role)}});
  }
  return cols;
}

inline FilterOptions filter_options(const json& cfg) {
  FilterOptions fo;
  fo.alpha = get_as<double>(cfg, "alpha");
  fo.folds = get_as<std::size_t>(cfg, "folds");
  fo.shuffle_order = get_as<bool>(cfg, "shuffle_order");
  if (!(fo.alpha >= 0.0 && fo.alpha <= 1.0)) throw InputError("--alpha must lie in [0, 1]");
  if (fo.folds < 3) throw InputError("folds must be at least 3");
  return fo;
}

inline double checked_q(const json& cfg) {
  const double q = get_as<double>(cfg, "q");
  if (!(q > 0.0 && q < 1.0)) throw InputError("--q must lie in (0, 1)");
  return q;
}

inline IngestResult load_input(const json& cfg) {
  if (!cfg.contains("input")) throw InputError("missing --input (path to a CSV file)");
  if (!cfg.contains("response")) throw InputError("missing --response (name of the response column)");
  return ingest_csv(get_as<std::string>(cfg, "input"), get_as<std::string>(cfg, "response"),
                    parse_schema(cfg.at("schema")));
}

inline json ingest_summary(const IngestResult& data) {
  return {{"response", data.response_name},
          {"rows_read", data.rows_read},
          {"rows_dropped", data.rows_dropped},
          {"rows_used", data.x.rows()},
          {"columns", columns_json(data)}};
}

inline OutputSet run_filter_command(const json& cfg, std::ostream& log) {
  const double q = checked_q(cfg);
  const auto gen = generator_from_string(get_as<std::string>(cfg, "generator"));
  const auto fo = filter_options(cfg);
  const auto seed = get_as<std::uint64_t>(cfg, "seed");
  const auto data = load_input(cfg);
  for (const auto& w : data.warnings) log << "warning: " << w << '\n';
  SeededStream stream = SeededStream::for_draw(seed, 0, 0);
  const auto res = run_filter(data.x, data.y, q, gen, stream, fo);
  const auto names = data.x.names();
  json w = json::array();
  for (Index j = 0; j < res.stats.w.size(); ++j) w.push_back(res.stats.w(j));
  json out = {{"command", "filter"},
              {"generator", to_string(gen)},
              {"q", q},
              {"alpha", fo.alpha},
              {"seed", seed},
              {"stream_id", res.stream_id},
              {"selected", names_of(res.selection.selected, names)},
              {"selected_index", res.selection.selected},
              {"threshold", finite_or_null(res.selection.threshold)},
              {"variables", names},
              {"w", w},
              {"stat_kind", res.stats.stat_kind},
              {"lambda_used", res.stats.lambda_used},
              {"knockoff_order", names_of(res.knockoff_order, names)},
              {"shrink_steps", res.shrink_steps},
              {"data", ingest_summary(data)}};
  log << "selected " << res.selection.selected.size() << " of " << names.size() << " variables\n";
  OutputSet files;
  files.add("selection.json", out.dump(2) + "\n");
  return files;
}

inline OutputSet run_multi_command(const json& cfg, std::ostream& log) {
  const double q = checked_q(cfg);
  const auto gen = generator_from_string(get_as<std::string>(cfg, "generator"));
  const auto seed = get_as<std::uint64_t>(cfg, "seed");
  const auto draws = get_as<std::size_t>(cfg, "B");
  if (draws < 1) throw InputError("--B must be at least 1");
  const auto order_name = get_as<std::string>(cfg, "heatmap_order");
  if (order_name != "frequency" && order_name != "input") {
    throw InputError("heatmap_order must be 'frequency' or 'input'");
  }
  MultiOptions mo;
  mo.filter = filter_options(cfg);
  mo.threads = get_as<std::size_t>(cfg, "threads");
  const auto data = load_input(cfg);
  for (const auto& w : data.warnings) log << "warning: " << w << '\n';
  const auto mat = run_multi(data.x, data.y, q, draws, gen, seed, mo);
  const auto cons = consensus_select(mat);
  const auto names = data.x.names();

  json trace = json::array();
  for (const auto& s : cons.trace) {
    trace.push_back({{"r", s.r}, {"frequent", names_of(s.frequent, names)}, {"consensus", names_of(s.consensus, names)}});
  }
  json freq = json::array();
  for (std::size_t j = 0; j < names.size(); ++j) freq.push_back({{"variable", names[j]}, {"freq", cons.frequency[j]}});
  json failed = json::array();
  for (std::size_t b = 0; b < mat.failed.size(); ++b) {
    if (mat.failed[b]) failed.push_back(b);
  }
  json out = {{"command", "multi"},
              {"generator", to_string(gen)},
              {"q", q},
              {"alpha", mo.filter.alpha},
              {"seed", seed},
              {"B", draws},
              {"selected", names_of(cons.selected, names)},
              {"selected_index", cons.selected},
              {"r_hat", cons.r_hat},
              {"trace", trace},
              {"frequency", freq},
              {"failed_draws", failed},
              {"data", ingest_summary(data)}};
  if (!failed.empty()) log << "warning: " << failed.size() << " draws failed twice and were recorded as empty\n";
  log << "consensus selected " << cons.selected.size() << " of " << names.size() << " variables (r = " << cons.r_hat
      << ")\n";

  const auto heat = export_heatmap(mat, order_name == "input" ? HeatmapOrder::input : HeatmapOrder::by_frequency);
  std::ostringstream hcsv, fcsv, svg;
  write_heatmap_csv(hcsv, heat);
  write_frequency_csv(fcsv, heat, names);
  write_heatmap_svg(svg, mat, heat);
  OutputSet files;
  files.add("consensus.json", out.dump(2) + "\n");
  files.add("heatmap.csv", hcsv.str());
  files.add("heatmap_freq.csv", fcsv.str());
  files.add("heatmap.svg", svg.str());
  return files;
}

inline SimConfig sim_config_from(const json& cfg) {
  SimConfig c;
  c.n = get_as<std::size_t>(cfg, "n");
  c.p = get_as<std::size_t>(cfg, "p");
  c.p_b = get_as<std::size_t>(cfg, "p_b");
  c.rho = get_as<double>(cfg, "rho");
  try {
    c.cov_kind = covariance_kind_from_string(get_as<std::string>(cfg, "cov_kind"));
  } catch (const InvalidArgument& e) {
    throw InputError(e.what());
  }
  c.p_nn = get_as<std::size_t>(cfg, "p_nn");
  c.a = get_as<double>(cfg, "a");
  c.n_sim = get_as<std::size_t>(cfg, "n_sim");
  c.q = get_as<double>(cfg, "q");
  c.methods.clear();
  for (const auto& m : get_as<std::vector<std::string>>(cfg, "methods")) {
    try {
      c.methods.push_back(method_from_string(m));
    } catch (const InvalidArgument& e) {
      throw InputError(e.what());
    }
  }
  c.B = get_as<std::size_t>(cfg, "B");
  c.alpha = get_as<double>(cfg, "alpha");
  c.permutations = get_as<std::size_t>(cfg, "permutations");
  c.master_seed = get_as<std::uint64_t>(cfg, "seed");
  return c;
}

/// Cartesian product of the `grid` arrays (keys in sorted order, last key
/// varying fastest) applied over the base settings.
inline std::vector<SimConfig> expand_grid(const json& cfg) {
  const json& grid = cfg.at("grid");
  if (!grid.is_object()) throw InputError("'grid' must be an object mapping setting names to arrays");
  std::vector<std::pair<std::string, json>> axes;
  for (const auto& [k, v] : grid.items()) {
    if (k == "grid" || k == "seed" || k == "threads" || k == "out_dir" || !allowed_keys("simulate").count(k)) {
      throw InputError("grid key '" + k + "' cannot be varied");
    }
    if (!v.is_array() || v.empty()) throw InputError("grid entry '" + k + "' must be a non-empty array");
    axes.emplace_back(k, v);
  }
  std::vector<SimConfig> out;
  std::vector<std::size_t> at(axes.size(), 0);
  while (true) {
    json c = cfg;
    for (std::size_t k = 0; k < axes.size(); ++k) c[axes[k].first] = axes[k].second[at[k]];
    out.push_back(sim_config_from(c));
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++at[k] < axes[k].second.size()) break;
      at[k] = 0;
      if (k == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

inline json sim_config_json(const SimConfig& c, std::size_t id) {
  json methods = json::array();
  for (const auto m : c.methods) methods.push_back(to_string(m));
  return {{"config_id", id},
          {"config_hash", seqknock::detail::hex64(config_hash(c))},
          {"design_hash", seqknock::detail::hex64(design_hash(c))},
          {"n", c.n},
          {"p", c.p},
          {"p_b", c.p_b},
          {"rho", c.rho},
          {"cov_kind", to_string(c.cov_kind)},
          {"p_nn", c.p_nn},
          {"a", c.a},
          {"n_sim", c.n_sim},
          {"q", c.q},
          {"methods", methods},
          {"B", c.B},
          {"alpha", c.alpha},
          {"permutations", c.permutations},
          {"master_seed", c.master_seed}};
}

inline OutputSet run_simulate_command(const json& cfg, std::ostream& log) {
  auto grid = expand_grid(cfg);
  try {
    for (const auto& c : grid) c.validate();
  } catch (const InvalidArgument& e) {
    throw InputError(std::string("invalid simulation setting: ") + e.what());
  }
  CampaignOptions co;
  co.threads = get_as<std::size_t>(cfg, "threads");
  co.record_runtime = get_as<bool>(cfg, "record_runtime");
  co.cache_knockoffs = get_as<bool>(cfg, "cache_knockoffs");
  co.progress = [&log](std::size_t done, std::size_t total) {
    if (done == total || done % 10 == 0) log << "  " << done << "/" << total << " replicate tasks\n" << std::flush;
  };
  log << "running " << grid.size() << " configurations\n";
  const auto records = run_campaign(grid, co);
  const auto summary = summarize(records, grid);

  json configs = json::array();
  for (std::size_t id = 0; id < grid.size(); ++id) configs.push_back(sim_config_json(grid[id], id));
  json failures = json::array();
  for (const auto& r : records) {
    if (r.failed) {
      failures.push_back({{"config_id", r.config_id}, {"method", to_string(r.method)}, {"replicate", r.replicate},
                          {"error", r.error}});
    }
  }
  json summ = json::array();
  for (const auto& s : summary) {
    summ.push_back({{"config_id", s.config_id},
                    {"method", to_string(s.method)},
                    {"amplitude", s.amplitude},
                    {"mean_fdp", finite_or_null(s.mean_fdp)},
                    {"se_fdp", finite_or_null(s.se_fdp)},
                    {"mean_tpp", finite_or_null(s.mean_tpp)},
                    {"se_tpp", finite_or_null(s.se_tpp)},
                    {"replicates", s.replicates},
                    {"failures", s.failures}});
  }
  json sidecar = {{"master_seed", get_as<std::uint64_t>(cfg, "seed")},
                  {"seeding",
                   "replicate r of a design uses SeededStream(master_seed, r).child(design_hash); children 0, 1, 2 "
                   "draw the design, truth set and noise, child 16 + method index drives the selector"},
                  {"configs", configs},
                  {"summary", summ},
                  {"failures", failures}};
  if (!failures.empty()) log << "warning: " << failures.size() << " selector runs failed (listed in campaign.json)\n";

  std::ostringstream campaign, curves;
  write_campaign_csv(campaign, records);
  write_curves_csv(curves, summary, grid);
  OutputSet files;
  files.add("campaign.csv", campaign.str());
  files.add("campaign.json", sidecar.dump(2) + "\n");
  files.add("curves.csv", curves.str());

  // One figure per design group, one series per method.
  std::vector<std::uint64_t> designs;
  for (const auto& c : grid) {
    const auto h = design_hash(c);
    if (std::find(designs.begin(), designs.end(), h) == designs.end()) designs.push_back(h);
  }
  for (std::size_t d = 0; d < designs.size(); ++d) {
    std::vector<CurveSeries> fdr, power;
    const SimConfig* first = nullptr;
    for (const auto& s : summary) {
      const auto& c = grid[s.config_id];
      if (design_hash(c) != designs[d]) continue;
      if (!first) first = &c;
      const std::string label = to_string(s.method) + (c.q != first->q ? " q=" + seqknock::detail::format_double(c.q) : "");
      auto it = std::find_if(fdr.begin(), fdr.end(), [&](const CurveSeries& cs) { return cs.label == label; });
      if (it == fdr.end()) {
        fdr.push_back({label, {}, {}, {}});
        power.push_back({label, {}, {}, {}});
        it = fdr.end() - 1;
      }
      const auto k = static_cast<std::size_t>(it - fdr.begin());
      fdr[k].x.push_back(s.amplitude);
      fdr[k].y.push_back(s.mean_fdp);
      fdr[k].se.push_back(s.se_fdp);
      power[k].x.push_back(s.amplitude);
      power[k].y.push_back(s.mean_tpp);
      power[k].se.push_back(s.se_tpp);
    }
    for (auto* set : {&fdr, &power}) {
      for (auto& cs : *set) {
        std::vector<std::size_t> idx(cs.x.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cs.x[a] < cs.x[b]; });
        CurveSeries sorted{cs.label, {}, {}, {}};
        for (const auto i : idx) {
          sorted.x.push_back(cs.x[i]);
          sorted.y.push_back(cs.y[i]);
          sorted.se.push_back(cs.se[i]);
        }
        cs = std::move(sorted);
      }
    }
    std::ostringstream svg;
    const std::string title = "n=" + std::to_string(first->n) + " p=" + std::to_string(first->p) +
                              " p_b=" + std::to_string(first->p_b) + " " + to_string(first->cov_kind) +
                              " rho=" + seqknock::detail::format_double(first->rho) +
                              " p_nn=" + std::to_string(first->p_nn);
    write_curves_svg(svg, title, fdr, power, first->q);
    files.add("curves_" + std::to_string(d) + ".svg", svg.str());
  }
  return files;
}

/// Resolved settings: defaults, then the config file (or the `config` of a
/// manifest), then flags.
inline json resolve_config(const std::string& command, const CliFlags& flags, std::optional<json>* manifest_out = nullptr) {
  const auto& allowed = allowed_keys(command);
  json cfg = defaults(command);
  if (flags.config) {
    json file = read_json_file(*flags.config);
    if (!file.is_object()) throw InputError("config file must hold a JSON object");
    if (file.contains("config") && file.contains("command")) {
      if (file.at("command") != command) {
        throw InputError("manifest '" + *flags.config + "' records command '" + file.at("command").dump() +
                         "', not '" + command + "'");
      }
      if (manifest_out) *manifest_out = file;
      file = file.at("config");
    }
    for (const auto& [k, v] : file.items()) {
      if (!allowed.count(k)) throw InputError("unknown config key '" + k + "' for command '" + command + "'");
      cfg[k] = v;
    }
  }
  const auto set = [&](const char* key, const auto& value) {
    if (value) {
      if (!allowed.count(key)) throw InputError(std::string("flag for '") + key + "' does not apply to " + command);
      cfg[key] = *value;
    }
  };
  set("input", flags.input);
  set("response", flags.response);
  set("generator", flags.generator);
  set("out_dir", flags.out_dir);
  set("heatmap_order", flags.heatmap_order);
  set("q", flags.q);
  set("alpha", flags.alpha);
  set("B", flags.B);
  set("threads", flags.threads);
  set("folds", flags.folds);
  set("n_sim", flags.n_sim);
  set("seed", flags.seed);
  set("record_runtime", flags.record_runtime);
  set("shuffle_order", flags.shuffle_order);
  if (!cfg.contains("seed")) cfg["seed"] = (std::uint64_t{std::random_device{}()} << 32) | std::random_device{}();
  if (cfg.contains("input")) cfg["input"] = std::filesystem::absolute(get_as<std::string>(cfg, "input")).lexically_normal().string();
  if (!cfg.contains("out_dir")) throw InputError("missing --out-dir (directory for result files)");
  if (command != "simulate" && !cfg.contains("response")) {
    throw InputError("missing --response (name of the response column)");
  }
  return cfg;
}

}  // namespace detail

/// Run `command` ("filter", "multi" or "simulate"). Writes result files and
/// manifest.json into the output directory only when the run succeeds.
/// Returns the process exit code: 0 success, 2 input error, 3 numerical
/// failure.
inline int run_command(const std::string& command, const CliFlags& flags, std::ostream& log,
                       const std::vector<std::string>& argv = {}) {
  const auto started = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::optional<json> manifest_in;
    const json cfg = detail::resolve_config(command, flags, &manifest_in);
    json inputs = json::array();
    if (cfg.contains("input")) {
      const auto path = cfg.at("input").get<std::string>();
      const auto digest = sha256_file(path);
      if (manifest_in) {
        for (const auto& rec : manifest_in->value("inputs", json::array())) {
          if (rec.value("path", "") == path && rec.value("sha256", "") != digest) {
            throw InputError("input '" + path + "' changed since the manifest was written (SHA-256 mismatch)");
          }
        }
      }
      inputs.push_back({{"path", path}, {"sha256", digest}, {"bytes", std::filesystem::file_size(path)}});
    }
    detail::OutputSet files;
    if (command == "filter") {
      files = detail::run_filter_command(cfg, log);
    } else if (command == "multi") {
      files = detail::run_multi_command(cfg, log);
    } else {
      files = detail::run_simulate_command(cfg, log);
    }
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();

    const std::filesystem::path dir = cfg.at("out_dir").get<std::string>();
    std::filesystem::create_directories(dir);
    json outputs = json::array();
    for (const auto& [name, contents] : files.files) {
      std::ofstream out(dir / name, std::ios::binary);
      out << contents;
      if (!out) throw InputError("cannot write '" + (dir / name).string() + "'");
      outputs.push_back({{"file", name}, {"sha256", sha256_string(contents)}});
    }
    json manifest = {{"tool", "seqknock"},
                     {"version", kToolVersion},
                     {"command", command},
                     {"argv", argv},
                     {"config", cfg},
                     {"seed", cfg.at("seed")},
                     {"inputs", inputs},
                     {"outputs", outputs},
                     {"timing", {{"started_utc", started}, {"elapsed_ms", elapsed}}}};
    std::ofstream mout(dir / "manifest.json", std::ios::binary);
    mout << manifest.dump(2) << '\n';
    if (!mout) throw InputError("cannot write '" + (dir / "manifest.json").string() + "'");
    log << "wrote " << files.files.size() + 1 << " files to " << dir.string() << '\n';
    return kExitOk;
  } catch (const NumericalError& e) {
    log << "error (numerical): " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvalidArgument& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const json::exception& e) {
    log << "error: bad configuration value: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    log << "error (internal): " << e.what() << '\n';
    return kExitNumerical;
  }
}

/// Re-run the command recorded in a manifest, optionally into another
/// directory or with another thread count.
inline int replay_manifest(const std::string& manifest_path, std::optional<std::string> out_dir,
                           std::optional<std::size_t> threads, std::ostream& log) {
  std::string command;
  try {
    const json m = detail::read_json_file(manifest_path);
    command = m.at("command").get<std::string>();
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const json::exception&) {
    log << "error: '" << manifest_path << "' is not a seqknock manifest\n";
    return kExitInput;
  }
  CliFlags flags;
  flags.config = manifest_path;
  flags.out_dir = std::move(out_dir);
  flags.threads = threads;
  return run_command(command, flags, log, {"replay", manifest_path});
}

}  // namespace seqknock::io
