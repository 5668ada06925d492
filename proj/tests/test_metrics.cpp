#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "dslc/error.hpp"
#include "dslc/metrics.hpp"
#include "oracles.hpp"

using namespace dslc;

namespace {

WeightedGraph path_graph(std::size_t n) {
  std::vector<Point> pts;
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < n; ++v) pts.push_back({static_cast<double>(v), 0.0});
  for (std::size_t v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, 1.0});
  return WeightedGraph(pts, edges);
}

std::vector<VertexId> to_vec(std::span<const VertexId> s) { return {s.begin(), s.end()}; }

/// A random connected partition grown from random seeds by BFS, with every
/// agent placed on a random vertex of its own part.
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
  std::vector<std::vector<VertexId>> frontier(k);
  for (AgentId i = 0; i < k; ++i) {
    owner[order[i]] = i;
    frontier[i].push_back(order[i]);
  }
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

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> w(n);
  for (double& x : w) x = u(rng);
  return w;
}

struct OracleRegret {
  double cost = 0, centroid = 0, voronoi = 0;
};

OracleRegret oracle_regret(const WeightedGraph& g, const PartitionState& s, const Configuration& eta,
                           const std::vector<double>& w) {
  OracleRegret r;
  for (AgentId i = 0; i < s.num_parts(); ++i) {
    const auto part = to_vec(s.part(i));
    r.cost += oracle::part_cost(g, part, eta[i], w);
    r.centroid += oracle::centroid(g, part, w).second;
  }
  r.voronoi = oracle::nearest_generator_cost(oracle::floyd(g), eta, w);
  return r;
}

}  // namespace

TEST_CASE("coverage cost examples") {
  const WeightedGraph p3 = path_graph(3);
  CHECK(coverage_cost(p3, PartitionState(p3, {0, 1, 2}, 3), {0, 1, 2}, SensoryField({1, 1, 1})) == 0.0);
  CHECK(coverage_cost(p3, PartitionState(p3, {0, 0, 0}, 1), {1}, SensoryField({1, 3, 1})) == 2.0);
  CHECK_THROWS_AS(coverage_cost(p3, PartitionState(p3, {0, 0, 1}, 2), {2, 0}, SensoryField({1, 1, 1})),
                  ValidationError);
}

TEST_CASE("centroids minimise cost over every in-part configuration") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 7;
    const WeightedGraph g = oracle::random_graph(rng, n, 0.3, true);
    const auto w = random_weights(rng, n);
    const SensoryField phi(w);
    const RandomState rs = random_state(rng, g, 2);
    Configuration centroids;
    for (AgentId i = 0; i < 2; ++i) centroids.push_back(centroid_of(g, rs.state.part(i), phi));
    const double best = coverage_cost(g, rs.state, centroids, phi);
    for (VertexId a : rs.state.part(0))
      for (VertexId b : rs.state.part(1))
        CHECK(best <= coverage_cost(g, rs.state, {a, b}, phi) + 1e-12);
  }
}

TEST_CASE("regret on a path") {
  const WeightedGraph p4 = path_graph(4);
  const DistanceTable d4 = all_pairs_distances(p4);
  const SensoryField phi({1, 1, 1, 1});
  const PartitionState opt(p4, {0, 0, 1, 1}, 2);
  CHECK(instantaneous_regret(p4, d4, opt, {0, 2}, phi) == 0.0);

  // Both vertices of a two-vertex part are centroids under a uniform field.
  const RegretBreakdown r = regret_breakdown(p4, d4, opt, {0, 3}, phi);
  CHECK(r.cost == 2.0);
  CHECK(r.centroid_cost == 2.0);
  CHECK(r.voronoi_cost == 2.0);  // v1 -> v0, v2 -> v3
  CHECK(r.configuration_gap() == 0.0);

  const SensoryField peaked({1, 2, 2, 1});
  const RegretBreakdown off = regret_breakdown(p4, d4, opt, {0, 3}, peaked);
  CHECK(off.cost == 4.0);
  CHECK(off.centroid_cost == 2.0);
  CHECK(off.voronoi_cost == 4.0);
  CHECK(off.configuration_gap() == 2.0);
  CHECK(off.partition_gap() == 0.0);
  CHECK(off.regret() == 2.0);
  CHECK(instantaneous_regret(p4, d4, opt, {1, 2}, peaked) == 0.0);

  const PartitionState whole(p4, {0, 0, 0, 0}, 1);
  const RegretBreakdown far = regret_breakdown(p4, d4, whole, {3}, phi);
  CHECK(far.cost == 6.0);
  CHECK(far.centroid_cost == 4.0);
  CHECK(far.voronoi_cost == 6.0);
  CHECK(far.configuration_gap() == 2.0);
  CHECK(far.partition_gap() == 0.0);
  CHECK(far.regret() > 0.0);
  CHECK(instantaneous_regret(p4, d4, whole, {3}, phi) == 2.0);
}

TEST_CASE("regret is the sum of two non-negative gaps") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    const WeightedGraph g = oracle::random_graph(rng, n, 0.25, trial % 2 == 0);
    const DistanceTable dist = all_pairs_distances(g);
    const auto w = random_weights(rng, n);
    const std::size_t k = 1 + rng() % std::min<std::size_t>(3, n);
    const RandomState rs = random_state(rng, g, k);
    const RegretBreakdown r = regret_breakdown(g, dist, rs.state, rs.eta, SensoryField(w));
    const OracleRegret o = oracle_regret(g, rs.state, rs.eta, w);
    CHECK(r.cost == doctest::Approx(o.cost).epsilon(1e-12));
    CHECK(r.centroid_cost == doctest::Approx(o.centroid).epsilon(1e-12));
    CHECK(r.voronoi_cost == doctest::Approx(o.voronoi).epsilon(1e-12));
    CHECK(r.configuration_gap() >= -1e-9);
    CHECK(r.partition_gap() >= -1e-9);
    CHECK(r.regret() == doctest::Approx(r.configuration_gap() + r.partition_gap()));
  }
}

TEST_CASE("regret is linear in the field") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 8;
    const WeightedGraph g = oracle::random_graph(rng, n, 0.25, true);
    const DistanceTable dist = all_pairs_distances(g);
    const RandomState rs = random_state(rng, g, 2);
    const auto w1 = random_weights(rng, n), w2 = random_weights(rng, n);
    std::vector<double> sum(n), scaled(n);
    for (std::size_t v = 0; v < n; ++v) {
      sum[v] = w1[v] + w2[v];
      scaled[v] = 3.5 * w1[v];
    }
    // The centroid term is a minimum over vertices, hence only superadditive.
    const RegretBreakdown a = regret_breakdown(g, dist, rs.state, rs.eta, SensoryField(w1));
    const RegretBreakdown b = regret_breakdown(g, dist, rs.state, rs.eta, SensoryField(w2));
    const RegretBreakdown ab = regret_breakdown(g, dist, rs.state, rs.eta, SensoryField(sum));
    const RegretBreakdown c = regret_breakdown(g, dist, rs.state, rs.eta, SensoryField(scaled));
    CHECK(ab.cost == doctest::Approx(a.cost + b.cost).epsilon(1e-12));
    CHECK(ab.voronoi_cost == doctest::Approx(a.voronoi_cost + b.voronoi_cost).epsilon(1e-12));
    CHECK(ab.centroid_cost >= a.centroid_cost + b.centroid_cost - 1e-9);
    CHECK(c.regret() == doctest::Approx(3.5 * a.regret()).epsilon(1e-12));
  }
}

TEST_CASE("regret series") {
  RegretSeries s;
  CHECK(s.append(1, 1, Phase::estimation, 5.0, 1.0, 0.3).cum_regret == 1.0);
  CHECK(s.append(2, 1, Phase::coverage, 4.0, 0.5, 0.3).cum_regret == 1.5);
  CHECK_THROWS_AS(s.append(2, 1, Phase::coverage, 4.0, 0.5, 0.3), ValidationError);

  RegretSeries long_run;
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> values;
  for (std::size_t t = 1; t <= 190; ++t) {
    values.push_back(u(rng));
    long_run.append(t, 1, Phase::coverage, 1.0, values.back(), 0.0);
  }
  long double total = 0;
  for (double v : values) total += v;
  CHECK(std::abs(long_run.back().cum_regret - static_cast<double>(total)) < 1e-12 * static_cast<double>(total));
  CHECK(phase_name(Phase::propagation) == "propagation");
}

TEST_CASE("series csv") {
  RegretSeries s;
  s.append(1, 1, Phase::estimation, 0.1, 1.0 / 3.0, 0.25);
  s.append(2, 1, Phase::propagation, 2.0, 0.0, 0.125);
  const auto path = std::filesystem::temp_directory_path() / "dslc_series_test.csv";
  write_series_csv(s, path);
  std::ifstream in(path);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "t,epoch,phase,cost,inst_regret,cum_regret,max_var");
  CHECK(row1 == "1,1,estimation,0.10000000000000001,0.33333333333333331,0.33333333333333331,0.25");
  CHECK(row2 == "2,1,propagation,2,0,0.33333333333333331,0.125");
  std::filesystem::remove(path);
}
