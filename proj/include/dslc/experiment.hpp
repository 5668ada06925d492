#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dslc/belief.hpp"
#include "dslc/field_gen.hpp"
#include "dslc/metrics.hpp"
#include "dslc/policies.hpp"

namespace dslc {

enum class FieldSource { gmm, kde, file };

struct FieldSpec {
  FieldSource source = FieldSource::gmm;
  std::vector<GaussianBump> components = two_hotspot_components();
  std::filesystem::path path;  // kde points or field csv
  double bandwidth = 0.08;
};

struct GridSpec {
  std::size_t rows = 21;
  std::size_t cols = 21;
  double spacing = 0.05;
};

/// Everything one experiment needs. Defaults reproduce the 21 x 21, nine
/// agent, three-epoch setup; see README for the full table.
struct RunConfig {
  GridSpec grid;
  KernelSpec kernel{0.25, 0.1};
  double prior_mean = 0.5;
  double jitter = kDefaultJitter;
  double noise_sigma = 0.1;
  std::size_t num_agents = 9;
  PolicyKind policy = PolicyKind::dslc;
  DslcConfig dslc;
  FieldSpec field;
  double phi_floor = kFieldFloor;
  std::vector<std::uint64_t> seeds{1};
  std::size_t horizon = 190;
  std::filesystem::path output_dir = "results";
  std::size_t threads = 0;  // 0: hardware concurrency

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

RunConfig default_config();

/// Strict JSON parsing: unknown keys and wrongly typed values are rejected
/// with the offending key path in the message.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Graph, distances, ground truth and prior, shared read-only by all seeds.
struct Scenario {
  WeightedGraph graph;
  DistanceTable dist;
  SensoryField phi;
  GaussianBelief prior;
};

Scenario build_scenario(const RunConfig& cfg);
SensoryField build_field(const RunConfig& cfg, const WeightedGraph& g);

struct SeedResult {
  std::uint64_t seed = 0;
  RegretSeries series;
  std::vector<EpochSummary> epochs;  // DSLC only
  std::size_t flagged_iterations = 0;
  std::optional<CoverageState> final_coverage;
  std::vector<double> final_mean;  // empty for cortes
  std::vector<double> final_var;
};

/// Runs one policy for one seed over cfg.horizon iterations.
SeedResult run_seed(const RunConfig& cfg, const Scenario& scenario, std::uint64_t seed);

struct AggregateRow {
  std::size_t t = 0;
  double cost = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double max_var = 0.0;
};

struct ExperimentResult {
  std::vector<SeedResult> runs;  // in cfg.seeds order
  std::vector<AggregateRow> aggregate;
  double wall_seconds = 0.0;
};

/// Per-iteration means over seeds, summed in seed order.
std::vector<AggregateRow> aggregate_runs(const std::vector<SeedResult>& runs);

/// Seeds may run concurrently; results do not depend on scheduling.
ExperimentResult run_experiment(const RunConfig& cfg);
ExperimentResult run_experiment(const RunConfig& cfg, const Scenario& scenario);

inline constexpr const char* kAggregateCsvHeader = "t,cost,inst_regret,cum_regret,max_var";

/// Writes seed_<seed>.csv per run, aggregate.csv and manifest.json into dir.
/// With snapshots, also the final partition_seed_<seed>.csv and, for
/// learning policies, belief_seed_<seed>.csv. Returns the written paths.
std::vector<std::filesystem::path> write_results(const RunConfig& cfg,
                                                 const ExperimentResult& result,
                                                 const std::filesystem::path& dir,
                                                 bool snapshots = false);

std::string version_string();

}  // namespace dslc
