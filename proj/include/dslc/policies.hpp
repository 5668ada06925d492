#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "dslc/belief.hpp"
#include "dslc/graph.hpp"
#include "dslc/metrics.hpp"
#include "dslc/partition.hpp"
#include "dslc/sensory_field.hpp"

namespace dslc {

enum class PolicyKind { dslc, cortes, todescato };

std::string_view policy_name(PolicyKind kind);
/// Throws ValidationError for anything but "dslc", "cortes" or "todescato".
PolicyKind parse_policy(std::string_view name);

enum class EpochMode {
  theorem,   // coverage phase of epoch j lasts ceil(beta^j) iterations
  explicit_  // epoch j lasts explicit_lengths[j-1] iterations in total
};

struct DslcConfig {
  double alpha = 0.5;
  std::optional<double> beta;  // defaults to alpha^{-3/2}
  EpochMode epoch_mode = EpochMode::theorem;
  std::vector<std::size_t> explicit_lengths;
  std::size_t propagation_delay = 1;
  std::size_t max_epochs = 0;  // 0: unlimited; afterwards coverage simply continues
  bool strict_theorem = false;  // require alpha == beta^{-2/3}

  double effective_beta() const;
  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Coverage iterations in epoch j (j >= 1). In explicit mode the
/// estimation and propagation iterations already spent in the epoch are
/// subtracted (never below zero). Throws RuntimeError once the explicit
/// list is exhausted.
std::size_t epoch_coverage_length(const DslcConfig& cfg, std::size_t j,
                                  std::size_t exploration_iterations = 0);

/// Independent generators derived from one master seed, one per consumer.
struct RngStreams {
  std::mt19937_64 placement;
  std::mt19937_64 gossip;
  std::mt19937_64 noise;
  std::mt19937_64 coin;

  static RngStreams from_seed(std::uint64_t master_seed);
};

/// What the coverage baselines may see: positions and partition only.
struct CoverageState {
  Configuration eta;
  PartitionState partition;
};

/// N distinct vertices drawn uniformly without replacement, with the
/// nearest-agent partition.
CoverageState random_placement(const WeightedGraph& g, const DistanceTable& dist,
                               std::size_t num_agents, std::mt19937_64& rng);

enum class Stage { plan, estimation, propagation, coverage };

struct EpochSummary {
  std::size_t epoch = 0;
  double threshold = 0.0;
  std::size_t planned_samples = 0;
  std::size_t estimation_iterations = 0;
  std::size_t propagation_iterations = 0;
  std::size_t coverage_iterations = 0;
  std::size_t planning_rounds = 0;
  /// Max posterior variance right after each propagation of the epoch.
  std::vector<double> max_var_after_propagation;
};

struct TeamState {
  CoverageState coverage;
  GaussianBelief belief;
  SensoryField phi_hat;
  double phi_floor = kFieldFloor;
  RngStreams rng;

  std::size_t epoch = 1;
  Stage stage = Stage::plan;
  std::size_t remaining = 0;  // iterations left in propagation/coverage
  std::vector<std::deque<VertexId>> pending_plan;
  std::vector<Sample> buffered;
  std::vector<EpochSummary> epochs;
};

TeamState make_team_state(const WeightedGraph& g, const DistanceTable& dist,
                          GaussianBelief prior, std::size_t num_agents, std::uint64_t seed,
                          double phi_floor = kFieldFloor);

/// Ground truth and sensing model owned by the simulator.
struct Environment {
  const WeightedGraph& graph;
  const DistanceTable& dist;
  const SensoryField& phi;
  double noise_sigma = 0.1;
};

struct TickOutput {
  std::size_t epoch = 0;
  Phase phase = Phase::coverage;
  double cost = 0.0;
  double inst_regret = 0.0;
  double max_var = 0.0;
  bool flagged = false;  // an agent was outside its part and was projected
};

/// Computes the greedy sample set for the current epoch's variance target,
/// splits it by part ownership and orders each agent's share into a tour.
void plan_estimation(TeamState& ts, const DslcConfig& cfg, const WeightedGraph& g);

/// One iteration of the epoch controller.
TickOutput dslc_tick(TeamState& ts, const DslcConfig& cfg, const Environment& env);

/// One Lloyd iteration with full knowledge of the field.
TickOutput cortes_tick(CoverageState& state, const Environment& env);

/// Each agent explores with probability min(1, max variance / prior bound),
/// otherwise heads to its part's centroid under the estimate.
TickOutput todescato_tick(TeamState& ts, const Environment& env);

/// Cost and regret of a state against the ground truth; agents found
/// outside their part are projected to the part's nearest vertex.
TickOutput evaluate(const CoverageState& state, const Environment& env);

}  // namespace dslc
