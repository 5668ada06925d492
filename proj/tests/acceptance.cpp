// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "dslc/belief.hpp"
#include "dslc/experiment.hpp"
#include "dslc/metrics.hpp"
#include "dslc/partition.hpp"
#include "oracles.hpp"

using namespace dslc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Instance {
  oracle::Matrix cov;
  std::vector<double> mean;
  double noise_var = 0.0;
  GaussianBelief belief;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  const double variance = 0.5 + 1.5 * u(rng);
  oracle::Matrix cov = oracle::se_kernel(pts, variance, 0.1 + 0.4 * u(rng));
  for (std::size_t i = 0; i < n; ++i) cov[i][i] += 1e-6 * variance;
  std::vector<double> mean;
  for (std::size_t i = 0; i < n; ++i) mean.push_back(2.0 * u(rng) - 1.0);
  const double noise_var = 0.01 + u(rng);
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd c(m, m);
  Eigen::VectorXd mu(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    mu(i) = mean[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j)
      c(i, j) = cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return {cov, mean, noise_var, GaussianBelief(c, mu, noise_var)};
}

std::vector<VertexId> greedy_sequence(const GaussianBelief& b, std::size_t n) {
  GaussianBelief walk = b;
  std::vector<VertexId> seq;
  for (std::size_t k = 0; k < n; ++k) {
    seq.push_back(greedy_next_vertex(walk));
    walk = posterior_update(walk, seq.back(), 0.0);
  }
  return seq;
}

Outcome posterior_oracle() {
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> noise(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    const Instance inst = random_instance(rng, n);
    GaussianBelief b = inst.belief;
    std::vector<std::size_t> where;
    std::vector<double> y;
    const std::size_t m = rng() % 21;
    for (std::size_t k = 0; k < m; ++k) {
      where.push_back(rng() % n);
      y.push_back(noise(rng));
      b = posterior_update(b, where.back(), y.back());
    }
    const oracle::Posterior post = oracle::condition(inst.mean, inst.cov, where, y, inst.noise_var);
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(b.mean()(static_cast<Eigen::Index>(i)) - post.mean[i]));
      for (std::size_t j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(b.covariance()(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j)) -
                                         post.cov[i][j]));
    }
  }
  return {worst <= 1e-9, fmt("100 instances, max abs deviation %.3g (tol 1e-9)", worst)};
}

Outcome greedy_near_optimal() {
  std::mt19937_64 rng(1002);
  const double factor = 1.0 - std::exp(-1.0);
  int bad = 0, checked = 0;
  double min_ratio = 1.0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t v = 1 + rng() % 6;
    const Instance inst = random_instance(rng, v);
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto seq = greedy_sequence(inst.belief, n);
      const double greedy = oracle::mutual_information(
          inst.cov, std::vector<std::size_t>(seq.begin(), seq.end()), inst.noise_var);
      const double gamma = oracle::gamma_by_sequences(inst.cov, n, inst.noise_var);
      ++checked;
      min_ratio = std::min(min_ratio, greedy / gamma);
      if (greedy < factor * gamma - 1e-12 || greedy > gamma + 1e-12) ++bad;
    }
  }
  return {bad == 0, fmt("%d (instance, n) pairs, min I/gamma %.4f >= %.4f, %d violations", checked,
                        min_ratio, factor, bad)};
}

Outcome variance_bound() {
  std::mt19937_64 rng(1003);
  int violations = 0, exact_ties = 0;
  double tightest = 0.0;
  for (int prior = 0; prior < 20; ++prior) {
    const std::size_t v = 8 + rng() % 9;
    const Instance inst = random_instance(rng, v);
    const double s0 = inst.belief.prior_variance_bound();
    const double c = 2.0 * s0 / std::log(1.0 + s0 / inst.noise_var);
    const auto seq = greedy_sequence(inst.belief, 50);
    GaussianBelief walk = inst.belief;
    for (std::size_t n = 1; n <= 50; ++n) {
      walk = posterior_update(walk, seq[n - 1], 0.0);
      const std::vector<std::size_t> prefix(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(n));
      const double gamma = n <= 3 ? oracle::gamma_by_sequences(inst.cov, n, inst.noise_var)
                                  : oracle::mutual_information(inst.cov, prefix, inst.noise_var);
      const double bound = c * gamma / static_cast<double>(n);
      tightest = std::max(tightest, walk.max_variance() / bound);
      // At n = 1 the bound equals s0^2 exactly, and a far vertex keeps s0^2 in
      // double precision; the bound's own evaluation is only good to a few ulps.
      if (walk.max_variance() > bound) ++exact_ties;
      if (walk.max_variance() > bound * (1.0 + 1e-12)) ++violations;
    }
  }
  return {violations == 0,
          fmt("20 priors, n = 1..50, max var / bound peaks at %.15f, %d violations beyond 1e-12 "
              "relative (%d above the rounded bound)",
              tightest, violations, exact_ties)};
}

struct Replication {
  RunConfig cfg;
  Scenario scenario;
  ExperimentResult dslc, cortes;
};

Replication run_replication() {
  RunConfig cfg = load_config(fs::path(DSLC_SOURCE_DIR) / "configs" / "grid21_nine_agents.json");
  cfg.policy = PolicyKind::dslc;
  Scenario sc = build_scenario(cfg);
  ExperimentResult d = run_experiment(cfg, sc);
  RunConfig cortes = cfg;
  cortes.policy = PolicyKind::cortes;
  ExperimentResult c = run_experiment(cortes, sc);
  return {cfg, std::move(sc), std::move(d), std::move(c)};
}

struct ContractRun {
  double alpha;
  double s0;
  std::vector<EpochSummary> epochs;
};

Outcome variance_contract(const Replication& rep) {
  std::vector<ContractRun> runs;
  const double rep_s0 = rep.scenario.prior.prior_variance_bound();
  for (const SeedResult& s : rep.dslc.runs) runs.push_back({rep.cfg.dslc.alpha, rep_s0, s.epochs});
  // Theorem-mode runs with other alphas and delays on a smaller grid.
  for (std::size_t delay : {0u, 1u, 3u})
    for (double alpha : {0.3, 0.5, 0.8}) {
      RunConfig cfg = default_config();
      cfg.grid = {8, 8, 1.0 / 7.0};
      cfg.kernel = {0.25, 0.15};
      cfg.num_agents = 4;
      cfg.dslc = DslcConfig{};
      cfg.dslc.alpha = alpha;
      cfg.dslc.propagation_delay = delay;
      cfg.horizon = 150;
      cfg.seeds = {1, 2, 3};
      const Scenario sc = build_scenario(cfg);
      for (const SeedResult& s : run_experiment(cfg, sc).runs)
        runs.push_back({alpha, sc.prior.prior_variance_bound(), s.epochs});
    }
  std::size_t epochs = 0, bad = 0;
  double worst = 0.0;
  for (const ContractRun& run : runs)
    for (const EpochSummary& e : run.epochs) {
      if (e.max_var_after_propagation.empty()) continue;
      ++epochs;
      const double bound = std::pow(run.alpha, static_cast<double>(e.epoch)) * run.s0;
      const double got = e.max_var_after_propagation.back();
      worst = std::max(worst, got / bound);
      if (!(got <= bound)) ++bad;
    }
  return {bad == 0 && epochs > 0,
          fmt("%zu runs, %zu epochs, max var / (alpha^j s0^2) peaks at %.6f, %zu violations",
              runs.size(), epochs, worst, bad)};
}

SensoryField random_field(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return SensoryField(v);
}

Configuration random_configuration(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<VertexId> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k)};
}

Outcome pairwise_implies_centroidal() {
  std::mt19937_64 rng(1005);
  int fixed_points = 0, implications = 0, unconverged = 0, broken = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    const std::size_t k = 2 + rng() % 2;
    const WeightedGraph g = oracle::random_graph(rng, n, 0.25, trial % 2 == 0);
    const DistanceTable dist = all_pairs_distances(g);
    const SensoryField phi = random_field(rng, n);
    Configuration eta = random_configuration(rng, n, k);
    PartitionState state = voronoi_of(g, dist, eta);
    bool converged = false;
    for (int round = 0; round < 500 && !converged; ++round) {
      auto pairs = adjacent_pairs(g, state);
      std::shuffle(pairs.begin(), pairs.end(), rng);
      bool moved = false;
      for (const auto& [i, j] : pairs) {
        if (!are_adjacent(g, state, i, j)) continue;
        PairwiseStepResult step = pairwise_step(g, state, eta, i, j, phi);
        moved = moved || !std::ranges::equal(step.state.owners(), state.owners()) || step.eta != eta;
        state = std::move(step.state);
        eta = std::move(step.eta);
      }
      converged = !moved;
    }
    if (!converged) {
      ++unconverged;
      continue;
    }
    ++fixed_points;
    if (is_pairwise_optimal(g, state, phi)) {
      ++implications;
      if (!is_centroidal_voronoi(g, dist, state, eta, phi)) ++broken;
    }
  }
  return {broken == 0 && unconverged == 0 && implications > 0,
          fmt("200 graphs, %d fixed points, %d pairwise optimal, %d not centroidal Voronoi, %d unconverged",
              fixed_points, implications, broken, unconverged)};
}

struct RandomState {
  PartitionState state;
  Configuration eta;
};

RandomState random_state(std::mt19937_64& rng, const WeightedGraph& g, std::size_t k) {
  const std::size_t n = g.num_vertices();
  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<AgentId> owner(n, k);
  for (AgentId i = 0; i < k; ++i) owner[order[i]] = i;
  std::size_t assigned = k;
  while (assigned < n) {
    const AgentId i = rng() % k;
    std::vector<VertexId> options;
    for (VertexId v = 0; v < n; ++v)
      if (owner[v] == i)
        for (const Neighbor& nb : g.neighbors(v))
          if (owner[nb.vertex] == k) options.push_back(nb.vertex);
    if (options.empty()) continue;
    owner[options[rng() % options.size()]] = i;
    ++assigned;
  }
  RandomState rs{PartitionState(g, owner, k), {}};
  for (AgentId i = 0; i < k; ++i) {
    const auto part = rs.state.part(i);
    rs.eta.push_back(part[rng() % part.size()]);
  }
  return rs;
}

Outcome regret_axioms() {
  std::mt19937_64 rng(1006);
  int negative = 0, gap_negative = 0, mismatched = 0, zeros = 0, oracle_mismatch = 0;
  double lowest = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(3, n);
    const WeightedGraph g = oracle::random_graph(rng, n, 0.25, trial % 2 == 0);
    const DistanceTable dist = all_pairs_distances(g);
    const SensoryField phi = random_field(rng, n);
    RandomState rs = random_state(rng, g, k);
    // Every other state is driven to a Lloyd fixed point so zero regret occurs.
    if (trial % 2 == 1)
      for (int step = 0; step < 100; ++step) {
        LloydStepResult next = lloyd_step(g, dist, rs.state, rs.eta, phi);
        const bool same = next.eta == rs.eta && std::ranges::equal(next.state.owners(), rs.state.owners());
        rs.state = std::move(next.state);
        rs.eta = std::move(next.eta);
        if (same) break;
      }
    const RegretBreakdown r = regret_breakdown(g, dist, rs.state, rs.eta, phi);
    const double regret = r.regret();
    lowest = std::min(lowest, regret);
    if (regret < -1e-9) ++negative;
    if (r.configuration_gap() < -1e-9 || r.partition_gap() < -1e-9) ++gap_negative;

    // Independent evaluation of the three terms.
    const std::vector<double> w(phi.values().begin(), phi.values().end());
    double cost = 0.0, centroid = 0.0;
    for (AgentId i = 0; i < k; ++i) {
      const auto part = rs.state.part(i);
      const std::vector<std::size_t> members(part.begin(), part.end());
      cost += oracle::part_cost(g, members, rs.eta[i], w);
      centroid += oracle::centroid(g, members, w).second;
    }
    const double voronoi = oracle::nearest_generator_cost(
        oracle::floyd(g), std::vector<std::size_t>(rs.eta.begin(), rs.eta.end()), w);
    if (std::abs(2.0 * cost - centroid - voronoi - regret) > 1e-9 * std::max(1.0, cost)) ++oracle_mismatch;

    const bool zero = regret < 1e-9;
    zeros += zero ? 1 : 0;
    if (zero != is_centroidal_voronoi(g, dist, rs.state, rs.eta, phi)) ++mismatched;
  }
  return {negative == 0 && gap_negative == 0 && mismatched == 0 && oracle_mismatch == 0 && zeros > 0,
          fmt("1000 states, min regret %.3g, %d zero-regret states, %d negative, %d negative gaps, "
              "%d zero/centroidal-Voronoi mismatches, %d oracle mismatches",
              lowest, zeros, negative, gap_negative, mismatched, oracle_mismatch)};
}

Outcome replication_trends(const Replication& rep) {
  const auto& agg = rep.dslc.aggregate;
  const auto& cortes = rep.cortes.aggregate;
  const std::size_t T = agg.size();
  if (T != 190 || cortes.size() != 190) return {false, "unexpected horizon"};
  auto cum = [&](std::size_t t) { return agg[t - 1].cum_regret; };
  const double first = cum(95), second = cum(190) - cum(95);
  const bool a = second < 0.6 * first;

  double global_max = 0.0, tail = 0.0;
  for (const AggregateRow& row : agg) global_max = std::max(global_max, row.inst_regret);
  for (std::size_t t = T - 10; t < T; ++t) tail += agg[t].inst_regret / 10.0;
  // Spike in the opening iterations of each epoch, lower over the epoch's last iterations.
  std::vector<std::size_t> onsets{1};
  for (std::size_t len : rep.cfg.dslc.explicit_lengths) onsets.push_back(onsets.back() + len);
  bool spikes = true;
  std::string spike_text;
  for (std::size_t j = 0; j + 1 < onsets.size() && onsets[j] <= T; ++j) {
    const std::size_t begin = onsets[j], end = std::min(onsets[j + 1] - 1, T);
    double peak = 0.0, late = 0.0;
    for (std::size_t t = begin; t < std::min(begin + 10, end + 1); ++t) peak = std::max(peak, agg[t - 1].inst_regret);
    for (std::size_t t = end - 4; t <= end; ++t) late += agg[t - 1].inst_regret / 5.0;
    spikes = spikes && peak > late;
    spike_text += fmt(" e%zu %.3g->%.3g", j + 1, peak, late);
  }
  const bool b = spikes && tail < 0.1 * global_max;

  std::size_t reached = 0;
  for (std::size_t t = 1; t < 50 && reached == 0; ++t)
    if (cortes[t - 1].inst_regret < 1e-6) reached = t;
  const bool c = reached != 0;

  const double dslc_cost = agg.back().cost, cortes_cost = cortes.back().cost;
  const double gap = std::abs(dslc_cost - cortes_cost) / cortes_cost;
  const bool d = gap <= 0.10;
  return {a && b && c && d,
          fmt("(a) %.4f < 0.6 %s; (b) tail/max %.4f < 0.1,%s %s; (c) cortes < 1e-6 at t=%zu %s; "
              "(d) cost %.4f vs %.4f, gap %.2f%% %s; %zu seeds, %.1f s",
              second / first, a ? "ok" : "no", tail / global_max, spike_text.c_str(),
              b ? "ok" : "no", reached, c ? "ok" : "no", dslc_cost, cortes_cost, 100.0 * gap,
              d ? "ok" : "no", rep.dslc.runs.size(), rep.dslc.wall_seconds + rep.cortes.wall_seconds)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const Replication& rep) {
  const fs::path root = fs::temp_directory_path() / "dslc_acceptance";
  fs::remove_all(root);
  write_results(rep.cfg, rep.dslc, root / "first");
  const ExperimentResult again = run_experiment(rep.cfg, rep.scenario);
  write_results(rep.cfg, again, root / "second");
  const std::string a = slurp(root / "first" / "aggregate.csv");
  const std::string b = slurp(root / "second" / "aggregate.csv");
  bool seeds_equal = true;
  for (std::uint64_t s : rep.cfg.seeds) {
    const std::string name = "seed_" + std::to_string(s) + ".csv";
    seeds_equal = seeds_equal && slurp(root / "first" / name) == slurp(root / "second" / name);
  }
  fs::remove_all(root);
  return {!a.empty() && a == b && seeds_equal,
          fmt("aggregate.csv %zu bytes, %s; per-seed files %s", a.size(),
              a == b ? "identical" : "different", seeds_equal ? "identical" : "different")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %-40s %s  %s [%.2f s]\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };

  report(1, "posterior oracle equivalence", posterior_oracle);
  report(2, "greedy near-optimality", greedy_near_optimal);
  report(3, "variance bound after n samples", variance_bound);

  std::optional<Replication> rep;
  const auto start = std::chrono::steady_clock::now();
  try {
    rep = run_replication();
  } catch (const std::exception& e) {
    std::printf("replication run failed: %s\n", e.what());
  }
  const double rep_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto needs_rep = [&](auto fn) {
    return [&, fn]() -> Outcome {
      if (!rep) return {false, "replication run unavailable"};
      return fn(*rep);
    };
  };
  report(4, "epoch variance contract", needs_rep(variance_contract));
  report(5, "pairwise optimal => centroidal Voronoi", pairwise_implies_centroidal);
  report(6, "regret axioms", regret_axioms);
  report(7, "grid replication trends", needs_rep(replication_trends));
  std::printf("  (replication runs took %.2f s)\n", rep_secs);
  report(8, "determinism", needs_rep(determinism));

  std::printf("%s: %d of 8 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
