#include "dslc/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dslc/error.hpp"
#include "dslc/tour.hpp"

namespace dslc {

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::dslc: return "dslc";
    case PolicyKind::cortes: return "cortes";
    case PolicyKind::todescato: return "todescato";
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "dslc") return PolicyKind::dslc;
  if (name == "cortes") return PolicyKind::cortes;
  if (name == "todescato") return PolicyKind::todescato;
  throw ValidationError("policy must be one of dslc|cortes|todescato (got '" + std::string(name) +
                        "')");
}

double DslcConfig::effective_beta() const { return beta.value_or(std::pow(alpha, -1.5)); }

void DslcConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("dslc.alpha must lie in (0,1)");
  const double b = effective_beta();
  if (!(b > 1.0) || !std::isfinite(b)) throw ValidationError("dslc.beta must be > 1");
  if (epoch_mode == EpochMode::explicit_) {
    if (explicit_lengths.empty())
      throw ValidationError("dslc.epoch_lengths must be nonempty in explicit mode");
    for (std::size_t len : explicit_lengths)
      if (len == 0) throw ValidationError("dslc.epoch_lengths entries must be >= 1");
  }
  if (strict_theorem && std::abs(alpha - std::pow(b, -2.0 / 3.0)) > 1e-9)
    throw ValidationError("dslc.strict_theorem requires alpha = beta^(-2/3)");
}

std::size_t epoch_coverage_length(const DslcConfig& cfg, std::size_t j,
                                  std::size_t exploration_iterations) {
  if (j == 0) throw ValidationError("epochs are numbered from 1");
  if (cfg.epoch_mode == EpochMode::theorem) {
    const double raw = std::pow(cfg.effective_beta(), static_cast<double>(j));
    // Absorb pow rounding so exact integers such as 2^(3/2 * 2) stay put.
    const double len = std::ceil(raw * (1.0 - 1e-12));
    return static_cast<std::size_t>(std::max(1.0, len));
  }
  if (j > cfg.explicit_lengths.size())
    throw RuntimeError("explicit epoch schedule exhausted at epoch " + std::to_string(j));
  const std::size_t total = cfg.explicit_lengths[j - 1];
  return total > exploration_iterations ? total - exploration_iterations : 0;
}

RngStreams RngStreams::from_seed(std::uint64_t master_seed) {
  auto stream = [master_seed](std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32), id, 0x6473u};
    return std::mt19937_64(seq);
  };
  return {stream(1), stream(2), stream(3), stream(4)};
}

CoverageState random_placement(const WeightedGraph& g, const DistanceTable& dist,
                               std::size_t num_agents, std::mt19937_64& rng) {
  const std::size_t n = g.num_vertices();
  if (num_agents == 0 || num_agents > n)
    throw ValidationError("need 1 <= agents <= vertices (" + std::to_string(num_agents) + " of " +
                          std::to_string(n) + ")");
  // Partial Fisher-Yates with explicit draws keeps the sequence stable.
  std::vector<VertexId> pool(n);
  std::iota(pool.begin(), pool.end(), VertexId{0});
  for (std::size_t k = 0; k < num_agents; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng() % (n - k));
    std::swap(pool[k], pool[pick]);
  }
  Configuration eta(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(num_agents));
  PartitionState partition = voronoi_of(g, dist, eta);
  return {std::move(eta), std::move(partition)};
}

TeamState make_team_state(const WeightedGraph& g, const DistanceTable& dist,
                          GaussianBelief prior, std::size_t num_agents, std::uint64_t seed,
                          double phi_floor) {
  if (prior.size() != g.num_vertices()) throw ValidationError("prior size does not match graph");
  RngStreams rng = RngStreams::from_seed(seed);
  CoverageState coverage = random_placement(g, dist, num_agents, rng.placement);
  const auto& mu = prior.mean();
  SensoryField phi_hat = clamp_field({mu.data(), static_cast<std::size_t>(mu.size())}, phi_floor);
  TeamState ts{std::move(coverage), std::move(prior), std::move(phi_hat), phi_floor,
               std::move(rng), 1, Stage::plan, 0, {}, {}, {}};
  ts.pending_plan.assign(num_agents, {});
  return ts;
}

namespace {

double epoch_threshold(const TeamState& ts, const DslcConfig& cfg) {
  return std::pow(cfg.alpha, static_cast<double>(ts.epoch)) * ts.belief.prior_variance_bound();
}

EpochSummary& current_summary(TeamState& ts, const DslcConfig& cfg) {
  if (ts.epochs.empty() || ts.epochs.back().epoch != ts.epoch) {
    EpochSummary s;
    s.epoch = ts.epoch;
    s.threshold = epoch_threshold(ts, cfg);
    ts.epochs.push_back(s);
  }
  return ts.epochs.back();
}

void refresh_estimate(TeamState& ts) {
  const auto& mu = ts.belief.mean();
  ts.phi_hat = clamp_field({mu.data(), static_cast<std::size_t>(mu.size())}, ts.phi_floor);
}

bool tours_empty(const TeamState& ts) {
  return std::all_of(ts.pending_plan.begin(), ts.pending_plan.end(),
                     [](const auto& q) { return q.empty(); });
}

bool epochs_capped(const TeamState& ts, const DslcConfig& cfg) {
  return cfg.max_epochs != 0 && ts.epoch > cfg.max_epochs;
}

void enter_coverage(TeamState& ts, const DslcConfig& cfg) {
  EpochSummary& s = current_summary(ts, cfg);
  ts.stage = Stage::coverage;
  ts.remaining = epoch_coverage_length(cfg, ts.epoch,
                                       s.estimation_iterations + s.propagation_iterations);
}

/// All buffered samples join the shared belief; the estimate follows. If the
/// variance target is still missed (only possible through rounding), the
/// epoch goes back to estimation with a fresh plan.
void merge_samples(TeamState& ts, const DslcConfig& cfg) {
  ts.belief.update(ts.buffered);
  ts.buffered.clear();
  refresh_estimate(ts);
  EpochSummary& s = current_summary(ts, cfg);
  const double max_var = ts.belief.max_variance();
  s.max_var_after_propagation.push_back(max_var);
  if (max_var > s.threshold)
    ts.stage = Stage::plan;
  else
    enter_coverage(ts, cfg);
}

void finish_estimation(TeamState& ts, const DslcConfig& cfg) {
  if (cfg.propagation_delay == 0) {
    merge_samples(ts, cfg);
  } else {
    ts.stage = Stage::propagation;
    ts.remaining = cfg.propagation_delay;
  }
}

/// Resolves zero-length stages so the state names the phase of the next tick.
void settle(TeamState& ts, const DslcConfig& cfg, const WeightedGraph& g) {
  for (std::size_t guard = 0; guard < 64; ++guard) {
    switch (ts.stage) {
      case Stage::plan:
        if (epochs_capped(ts, cfg)) {
          ts.stage = Stage::coverage;
          ts.remaining = std::numeric_limits<std::size_t>::max();
          return;
        }
        plan_estimation(ts, cfg, g);
        if (tours_empty(ts)) finish_estimation(ts, cfg);
        break;
      case Stage::estimation:
        if (!tours_empty(ts)) return;
        finish_estimation(ts, cfg);
        break;
      case Stage::propagation:
        if (ts.remaining > 0) return;
        merge_samples(ts, cfg);
        break;
      case Stage::coverage:
        if (ts.remaining > 0) return;
        ++ts.epoch;
        ts.stage = Stage::plan;
        break;
    }
  }
  throw RuntimeError("epoch controller failed to reach an active phase");
}

Phase phase_of(Stage stage) {
  switch (stage) {
    case Stage::plan:
    case Stage::estimation: return Phase::estimation;
    case Stage::propagation: return Phase::propagation;
    case Stage::coverage: return Phase::coverage;
  }
  return Phase::coverage;
}

void gossip_step(CoverageState& state, const WeightedGraph& g, const SensoryField& weight,
                 std::mt19937_64& rng) {
  const auto pairs = adjacent_pairs(g, state.partition);
  if (pairs.empty()) {
    // A lone agent has no partner; it simply sits at its part's centroid.
    for (AgentId i = 0; i < state.eta.size(); ++i)
      state.eta[i] = centroid_of(g, state.partition.part(i), weight);
    return;
  }
  const auto [i, j] = pairs[static_cast<std::size_t>(rng() % pairs.size())];
  PairwiseStepResult step = pairwise_step(g, state.partition, state.eta, i, j, weight);
  state.partition = std::move(step.state);
  state.eta = std::move(step.eta);
}

double draw_sample(const Environment& env, VertexId v, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, env.noise_sigma);
  return env.phi[v] + (env.noise_sigma > 0.0 ? noise(rng) : 0.0);
}

}  // namespace

void plan_estimation(TeamState& ts, const DslcConfig& cfg, const WeightedGraph& g) {
  EpochSummary& summary = current_summary(ts, cfg);
  SamplePlan plan = plan_to_threshold(ts.belief, summary.threshold);
  const std::size_t num_agents = ts.coverage.eta.size();
  split_by_owner(plan, ts.coverage.partition.owners(), num_agents);
  for (AgentId r = 0; r < num_agents; ++r) {
    const std::vector<VertexId> tour = plan_tour(g, ts.coverage.partition.part(r),
                                                 ts.coverage.eta[r], plan.per_agent[r]);
    ts.pending_plan[r].assign(tour.begin(), tour.end());
  }
  summary.planned_samples += plan.sequence.size();
  ++summary.planning_rounds;
  ts.stage = Stage::estimation;
}

TickOutput dslc_tick(TeamState& ts, const DslcConfig& cfg, const Environment& env) {
  settle(ts, cfg, env.graph);
  const Stage stage = ts.stage;
  const std::size_t epoch = std::min(ts.epoch, cfg.max_epochs == 0 ? ts.epoch : cfg.max_epochs);

  switch (stage) {
    case Stage::estimation: {
      for (AgentId r = 0; r < ts.pending_plan.size(); ++r) {
        auto& queue = ts.pending_plan[r];
        if (queue.empty()) continue;
        const VertexId v = queue.front();
        queue.pop_front();
        ts.coverage.eta[r] = v;
        ts.buffered.push_back({v, draw_sample(env, v, ts.rng.noise)});
      }
      ++current_summary(ts, cfg).estimation_iterations;
      if (tours_empty(ts)) finish_estimation(ts, cfg);
      break;
    }
    case Stage::propagation: {
      ++current_summary(ts, cfg).propagation_iterations;
      if (--ts.remaining == 0) merge_samples(ts, cfg);
      break;
    }
    case Stage::coverage: {
      gossip_step(ts.coverage, env.graph, ts.phi_hat, ts.rng.gossip);
      if (!epochs_capped(ts, cfg)) {
        ++current_summary(ts, cfg).coverage_iterations;
        --ts.remaining;
      }
      break;
    }
    case Stage::plan: throw RuntimeError("epoch controller left in planning stage");
  }

  TickOutput out = evaluate(ts.coverage, env);
  out.epoch = epoch;
  out.phase = phase_of(stage);
  out.max_var = ts.belief.max_variance();
  return out;
}

TickOutput cortes_tick(CoverageState& state, const Environment& env) {
  LloydStepResult step = lloyd_step(env.graph, env.dist, state.partition, state.eta, env.phi);
  state.partition = std::move(step.state);
  state.eta = std::move(step.eta);
  TickOutput out = evaluate(state, env);
  out.phase = Phase::coverage;
  out.max_var = 0.0;
  return out;
}

TickOutput todescato_tick(TeamState& ts, const Environment& env) {
  const double p = std::min(1.0, ts.belief.max_variance() / ts.belief.prior_variance_bound());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  CoverageState& cs = ts.coverage;
  bool any_explored = false;
  std::vector<Sample> samples;
  for (AgentId r = 0; r < cs.eta.size(); ++r) {
    const bool explore = coin(ts.rng.coin) < p;
    if (explore) {
      VertexId target = cs.partition.part(r).front();
      for (VertexId v : cs.partition.part(r))
        if (ts.belief.variance(v) > ts.belief.variance(target)) target = v;
      cs.eta[r] = target;
      samples.push_back({target, draw_sample(env, target, ts.rng.noise)});
      any_explored = true;
    } else {
      cs.eta[r] = centroid_of(env.graph, cs.partition.part(r), ts.phi_hat);
    }
  }
  if (!samples.empty()) {
    ts.belief.update(samples);
    refresh_estimate(ts);
  }
  if (!any_explored) cs.partition = voronoi_of(env.graph, env.dist, cs.eta);

  TickOutput out = evaluate(cs, env);
  out.epoch = 0;
  out.phase = any_explored ? Phase::estimation : Phase::coverage;
  out.max_var = ts.belief.max_variance();
  return out;
}

TickOutput evaluate(const CoverageState& state, const Environment& env) {
  TickOutput out;
  Configuration eta = state.eta;
  for (AgentId i = 0; i < eta.size(); ++i) {
    if (state.partition.owner(eta[i]) == i) continue;
    VertexId nearest = state.partition.part(i).front();
    for (VertexId v : state.partition.part(i))
      if (env.dist(eta[i], v) < env.dist(eta[i], nearest)) nearest = v;
    eta[i] = nearest;
    out.flagged = true;
  }
  const RegretBreakdown r = regret_breakdown(env.graph, env.dist, state.partition, eta, env.phi);
  out.cost = r.cost;
  out.inst_regret = r.regret();
  return out;
}

}  // namespace dslc
