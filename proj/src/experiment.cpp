#include "dslc/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "csv_util.hpp"
#include "dslc/error.hpp"
#include "dslc/simd/kernels.hpp"

#ifndef DSLC_VERSION
#define DSLC_VERSION "0.0.0-unknown"
#endif

namespace dslc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) out += (k ? sep : "") + items[k];
  return out;
}

/// Pulls typed members out of one JSON object, recording every problem and
/// rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) errors_.push_back(where() + ": expected an object");
  }

  void real(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (v->is_number())
        out = v->get<double>();
      else
        errors_.push_back(at(key) + ": expected a number");
    }
  }
  void optional_real(const char* key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null())
        out.reset();
      else if (v->is_number())
        out = v->get<double>();
      else
        errors_.push_back(at(key) + ": expected a number or null");
    }
  }
  void count(const char* key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (v->is_number_unsigned())
        out = v->get<std::size_t>();
      else
        errors_.push_back(at(key) + ": expected a non-negative integer");
    }
  }
  void flag(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (v->is_boolean())
        out = v->get<bool>();
      else
        errors_.push_back(at(key) + ": expected true or false");
    }
  }
  void text(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (v->is_string())
        out = v->get<std::string>();
      else
        errors_.push_back(at(key) + ": expected a string");
    }
  }
  template <class Int>
  void count_list(const char* key, std::vector<Int>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) {
        errors_.push_back(at(key) + ": expected an array of non-negative integers");
        return;
      }
      out.clear();
      for (const json& item : *v) {
        if (!item.is_number_unsigned()) {
          errors_.push_back(at(key) + ": expected an array of non-negative integers");
          return;
        }
        out.push_back(item.get<Int>());
      }
    }
  }
  const json* child(const char* key) { return take(key); }
  std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  ~ObjectReader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) errors_.push_back("unknown key '" + at(key.c_str()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const json* take(const char* key) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.dslc.epoch_mode = EpochMode::explicit_;
  cfg.dslc.explicit_lengths = {16, 46, 128};
  return cfg;
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
  };
  check(grid.rows >= 1, "grid.rows must be >= 1");
  check(grid.cols >= 1, "grid.cols must be >= 1");
  check(grid.spacing > 0.0 && std::isfinite(grid.spacing), "grid.spacing must be > 0");
  check(kernel.variance > 0.0, "kernel.variance must be > 0");
  check(kernel.length_scale > 0.0, "kernel.length_scale must be > 0");
  check(std::isfinite(prior_mean), "kernel.prior_mean must be finite");
  check(jitter >= 0.0, "kernel.jitter must be >= 0");
  check(noise_sigma > 0.0 && std::isfinite(noise_sigma), "noise_sigma must be > 0");
  check(num_agents >= 1, "num_agents must be >= 1");
  check(num_agents <= grid.rows * grid.cols, "num_agents must not exceed the number of vertices");
  check(horizon >= 1, "horizon must be >= 1");
  check(!seeds.empty(), "seeds must be nonempty");
  check(phi_floor > 0.0 && phi_floor < 1.0, "phi_floor must lie in (0,1)");
  switch (field.source) {
    case FieldSource::gmm:
      check(!field.components.empty(), "field.components must be nonempty");
      for (const GaussianBump& c : field.components)
        check(c.scale > 0.0 && c.weight > 0.0, "field.components need scale > 0 and weight > 0");
      break;
    case FieldSource::kde:
      check(!field.path.empty(), "field.points is required for source 'kde'");
      check(field.bandwidth > 0.0, "field.bandwidth must be > 0");
      break;
    case FieldSource::file:
      check(!field.path.empty(), "field.path is required for source 'file'");
      break;
  }
  try {
    dslc.validate();
  } catch (const ValidationError& e) {
    errors.push_back(e.what());
  }
  if (!errors.empty()) throw ValidationError("invalid config: " + join(errors, "; "));
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg = default_config();
  std::vector<std::string> errors;
  {
    ObjectReader root(doc, "", errors);
    if (const json* g = root.child("grid")) {
      ObjectReader r(*g, "grid", errors);
      r.count("rows", cfg.grid.rows);
      r.count("cols", cfg.grid.cols);
      r.real("spacing", cfg.grid.spacing);
    }
    if (const json* k = root.child("kernel")) {
      ObjectReader r(*k, "kernel", errors);
      r.real("variance", cfg.kernel.variance);
      r.real("length_scale", cfg.kernel.length_scale);
      r.real("prior_mean", cfg.prior_mean);
      r.real("jitter", cfg.jitter);
    }
    root.real("noise_sigma", cfg.noise_sigma);
    root.count("num_agents", cfg.num_agents);
    std::string policy{policy_name(cfg.policy)};
    root.text("policy", policy);
    try {
      cfg.policy = parse_policy(policy);
    } catch (const ValidationError& e) {
      errors.push_back(e.what());
    }
    if (const json* d = root.child("dslc")) {
      ObjectReader r(*d, "dslc", errors);
      r.real("alpha", cfg.dslc.alpha);
      r.optional_real("beta", cfg.dslc.beta);
      std::string mode = cfg.dslc.epoch_mode == EpochMode::theorem ? "theorem" : "explicit";
      r.text("epoch_mode", mode);
      if (mode == "theorem")
        cfg.dslc.epoch_mode = EpochMode::theorem;
      else if (mode == "explicit")
        cfg.dslc.epoch_mode = EpochMode::explicit_;
      else
        errors.push_back("dslc.epoch_mode must be 'theorem' or 'explicit'");
      r.count_list("epoch_lengths", cfg.dslc.explicit_lengths);
      r.count("propagation_delay", cfg.dslc.propagation_delay);
      r.count("max_epochs", cfg.dslc.max_epochs);
      r.flag("strict_theorem", cfg.dslc.strict_theorem);
    }
    if (const json* f = root.child("field")) {
      ObjectReader r(*f, "field", errors);
      std::string source = "gmm";
      r.text("source", source);
      if (source == "gmm")
        cfg.field.source = FieldSource::gmm;
      else if (source == "kde")
        cfg.field.source = FieldSource::kde;
      else if (source == "file")
        cfg.field.source = FieldSource::file;
      else
        errors.push_back("field.source must be 'gmm', 'kde' or 'file'");
      if (const json* comps = r.child("components")) {
        if (!comps->is_array()) {
          errors.push_back("field.components: expected an array");
        } else {
          cfg.field.components.clear();
          for (std::size_t k = 0; k < comps->size(); ++k) {
            ObjectReader c((*comps)[k], "field.components[" + std::to_string(k) + "]", errors);
            GaussianBump bump;
            c.real("x", bump.center.x);
            c.real("y", bump.center.y);
            c.real("scale", bump.scale);
            c.real("weight", bump.weight);
            cfg.field.components.push_back(bump);
          }
        }
      }
      std::string path;
      r.text("points", path);
      if (cfg.field.source == FieldSource::kde) cfg.field.path = path;
      std::string field_path;
      r.text("path", field_path);
      if (cfg.field.source == FieldSource::file) cfg.field.path = field_path;
      r.real("bandwidth", cfg.field.bandwidth);
    }
    root.real("phi_floor", cfg.phi_floor);
    root.count_list("seeds", cfg.seeds);
    root.count("horizon", cfg.horizon);
    std::string out = cfg.output_dir.string();
    root.text("output_dir", out);
    cfg.output_dir = out;
    root.count("threads", cfg.threads);
  }
  if (!errors.empty()) throw ValidationError("invalid config: " + join(errors, "; "));
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  RunConfig cfg = parse_config(doc);
  if (!cfg.field.path.empty() && cfg.field.path.is_relative())
    cfg.field.path = path.parent_path() / cfg.field.path;
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json comps = json::array();
  for (const GaussianBump& c : cfg.field.components)
    comps.push_back({{"x", c.center.x}, {"y", c.center.y}, {"scale", c.scale}, {"weight", c.weight}});
  json field = {{"bandwidth", cfg.field.bandwidth}};
  switch (cfg.field.source) {
    case FieldSource::gmm:
      field["source"] = "gmm";
      field["components"] = comps;
      break;
    case FieldSource::kde:
      field["source"] = "kde";
      field["points"] = cfg.field.path.string();
      break;
    case FieldSource::file:
      field["source"] = "file";
      field["path"] = cfg.field.path.string();
      break;
  }
  return {
      {"grid", {{"rows", cfg.grid.rows}, {"cols", cfg.grid.cols}, {"spacing", cfg.grid.spacing}}},
      {"kernel",
       {{"variance", cfg.kernel.variance},
        {"length_scale", cfg.kernel.length_scale},
        {"prior_mean", cfg.prior_mean},
        {"jitter", cfg.jitter}}},
      {"noise_sigma", cfg.noise_sigma},
      {"num_agents", cfg.num_agents},
      {"policy", std::string(policy_name(cfg.policy))},
      {"dslc",
       {{"alpha", cfg.dslc.alpha},
        {"beta", cfg.dslc.effective_beta()},
        {"epoch_mode", cfg.dslc.epoch_mode == EpochMode::theorem ? "theorem" : "explicit"},
        {"epoch_lengths", cfg.dslc.explicit_lengths},
        {"propagation_delay", cfg.dslc.propagation_delay},
        {"max_epochs", cfg.dslc.max_epochs},
        {"strict_theorem", cfg.dslc.strict_theorem}}},
      {"field", field},
      {"phi_floor", cfg.phi_floor},
      {"seeds", cfg.seeds},
      {"horizon", cfg.horizon},
      {"output_dir", cfg.output_dir.string()},
      {"threads", cfg.threads},
  };
}

// ---------------------------------------------------------------------------
// Running

SensoryField build_field(const RunConfig& cfg, const WeightedGraph& g) {
  switch (cfg.field.source) {
    case FieldSource::gmm: return gmm_field(g, cfg.field.components);
    case FieldSource::kde: return kde_field(g, read_points_csv(cfg.field.path), cfg.field.bandwidth);
    case FieldSource::file: return read_field_csv(cfg.field.path, g.num_vertices());
  }
  throw ValidationError("unknown field source");
}

Scenario build_scenario(const RunConfig& cfg) {
  WeightedGraph graph = build_grid(cfg.grid.rows, cfg.grid.cols, cfg.grid.spacing);
  DistanceTable dist = all_pairs_distances(graph);
  SensoryField phi = build_field(cfg, graph);
  GaussianBelief prior = prior_from_kernel(graph, cfg.kernel, cfg.prior_mean,
                                           cfg.noise_sigma * cfg.noise_sigma, cfg.jitter);
  return {std::move(graph), std::move(dist), std::move(phi), std::move(prior)};
}

namespace {

void keep_team(SeedResult& result, const TeamState& ts) {
  result.final_coverage = ts.coverage;
  const auto& mu = ts.belief.mean();
  result.final_mean.assign(mu.data(), mu.data() + mu.size());
  result.final_var = ts.belief.variances();
}

}  // namespace

SeedResult run_seed(const RunConfig& cfg, const Scenario& scenario, std::uint64_t seed) {
  const Environment env{scenario.graph, scenario.dist, scenario.phi, cfg.noise_sigma};
  SeedResult result;
  result.seed = seed;
  auto record = [&](std::size_t t, const TickOutput& out) {
    result.series.append(t, out.epoch, out.phase, out.cost, out.inst_regret, out.max_var);
    if (out.flagged) ++result.flagged_iterations;
  };
  switch (cfg.policy) {
    case PolicyKind::dslc: {
      TeamState ts = make_team_state(scenario.graph, scenario.dist, scenario.prior,
                                     cfg.num_agents, seed, cfg.phi_floor);
      for (std::size_t t = 1; t <= cfg.horizon; ++t) record(t, dslc_tick(ts, cfg.dslc, env));
      result.epochs = ts.epochs;
      keep_team(result, ts);
      break;
    }
    case PolicyKind::cortes: {
      RngStreams rng = RngStreams::from_seed(seed);
      CoverageState cs = random_placement(scenario.graph, scenario.dist, cfg.num_agents,
                                          rng.placement);
      for (std::size_t t = 1; t <= cfg.horizon; ++t) record(t, cortes_tick(cs, env));
      result.final_coverage = std::move(cs);
      break;
    }
    case PolicyKind::todescato: {
      TeamState ts = make_team_state(scenario.graph, scenario.dist, scenario.prior,
                                     cfg.num_agents, seed, cfg.phi_floor);
      for (std::size_t t = 1; t <= cfg.horizon; ++t) record(t, todescato_tick(ts, env));
      keep_team(result, ts);
      break;
    }
  }
  return result;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<SeedResult>& runs) {
  if (runs.empty()) return {};
  const std::size_t len = runs.front().series.size();
  for (const SeedResult& r : runs)
    if (r.series.size() != len) throw RuntimeError("runs have different lengths");
  const double inv = 1.0 / static_cast<double>(runs.size());
  std::vector<AggregateRow> rows(len);
  for (std::size_t k = 0; k < len; ++k) {
    AggregateRow& row = rows[k];
    row.t = runs.front().series.records()[k].t;
    for (const SeedResult& r : runs) {
      const RegretRecord& rec = r.series.records()[k];
      row.cost += rec.cost;
      row.inst_regret += rec.inst_regret;
      row.cum_regret += rec.cum_regret;
      row.max_var += rec.max_var;
    }
    row.cost *= inv;
    row.inst_regret *= inv;
    row.cum_regret *= inv;
    row.max_var *= inv;
  }
  return rows;
}

ExperimentResult run_experiment(const RunConfig& cfg) {
  cfg.validate();
  const Scenario scenario = build_scenario(cfg);
  return run_experiment(cfg, scenario);
}

ExperimentResult run_experiment(const RunConfig& cfg, const Scenario& scenario) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.runs.resize(cfg.seeds.size());

  std::size_t workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, cfg.seeds.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(cfg.seeds.size());
  auto work = [&] {
    for (std::size_t k = next++; k < cfg.seeds.size(); k = next++) {
      try {
        result.runs[k] = run_seed(cfg, scenario, cfg.seeds[k]);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  result.aggregate = aggregate_runs(result.runs);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Output

std::string version_string() { return DSLC_VERSION; }

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::filesystem::path> write_results(const RunConfig& cfg,
                                                 const ExperimentResult& result,
                                                 const std::filesystem::path& dir,
                                                 bool snapshots) {
  if (result.runs.empty()) throw ValidationError("no runs to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RuntimeError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  for (const SeedResult& run : result.runs) {
    const auto path = dir / ("seed_" + std::to_string(run.seed) + ".csv");
    write_series_csv(run.series, path);
    written.push_back(path);
    if (!snapshots) continue;
    const std::string tag = std::to_string(run.seed) + ".csv";
    if (run.final_coverage) {
      const auto part_path = dir / ("partition_seed_" + tag);
      write_partition_csv(run.final_coverage->partition, run.final_coverage->eta, part_path);
      written.push_back(part_path);
    }
    if (!run.final_mean.empty()) {
      const auto belief_path = dir / ("belief_seed_" + tag);
      auto out = detail::open_for_write(belief_path);
      out << "vertex,mu,var\n";
      for (std::size_t v = 0; v < run.final_mean.size(); ++v)
        out << v << ',' << detail::format_real(run.final_mean[v]) << ','
            << detail::format_real(run.final_var[v]) << '\n';
      if (!out) throw RuntimeError("failed writing " + belief_path.string());
      written.push_back(belief_path);
    }
  }

  const auto agg_path = dir / "aggregate.csv";
  {
    auto out = detail::open_for_write(agg_path);
    out << kAggregateCsvHeader << '\n';
    for (const AggregateRow& row : result.aggregate)
      out << row.t << ',' << detail::format_real(row.cost) << ','
          << detail::format_real(row.inst_regret) << ',' << detail::format_real(row.cum_regret)
          << ',' << detail::format_real(row.max_var) << '\n';
    if (!out) throw RuntimeError("failed writing " + agg_path.string());
  }
  written.push_back(agg_path);

  json runs = json::array();
  for (const SeedResult& run : result.runs) {
    json epochs = json::array();
    for (const EpochSummary& e : run.epochs)
      epochs.push_back({{"epoch", e.epoch},
                        {"threshold", e.threshold},
                        {"planned_samples", e.planned_samples},
                        {"estimation_iterations", e.estimation_iterations},
                        {"propagation_iterations", e.propagation_iterations},
                        {"coverage_iterations", e.coverage_iterations},
                        {"planning_rounds", e.planning_rounds},
                        {"max_var_after_propagation", e.max_var_after_propagation}});
    runs.push_back({{"seed", run.seed},
                    {"file", "seed_" + std::to_string(run.seed) + ".csv"},
                    {"flagged_iterations", run.flagged_iterations},
                    {"epochs", epochs}});
  }
  const json manifest = {{"version", version_string()},
                         {"created_utc", utc_timestamp()},
                         {"wall_seconds", result.wall_seconds},
                         {"simd_backend", std::string(simd::backend_name(simd::active_backend()))},
                         {"seeds", cfg.seeds},
                         {"config", config_to_json(cfg)},
                         {"runs", runs},
                         {"aggregate", "aggregate.csv"}};
  const auto manifest_path = dir / "manifest.json";
  {
    auto out = detail::open_for_write(manifest_path);
    out << manifest.dump(2) << '\n';
    if (!out) throw RuntimeError("failed writing " + manifest_path.string());
  }
  written.push_back(manifest_path);
  return written;
}

}  // namespace dslc
