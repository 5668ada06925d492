#include "dslc/partition.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "csv_util.hpp"
#include "dslc/error.hpp"
#include "dslc/simd/kernels.hpp"

namespace dslc {

namespace {

bool approx_le(double a, double b, double tolerance) {
  return a <= b + tolerance * std::max(1.0, std::abs(b));
}

std::vector<double> gather(const SensoryField& weight, std::span<const VertexId> members) {
  std::vector<double> out(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) out[k] = weight[members[k]];
  return out;
}

void check_field(const WeightedGraph& g, const SensoryField& weight) {
  if (weight.size() != g.num_vertices())
    throw ValidationError("field size does not match the graph");
}

void check_configuration(const WeightedGraph& g, const Configuration& eta) {
  if (eta.empty()) throw ValidationError("configuration must name at least one agent");
  std::set<VertexId> seen;
  for (VertexId v : eta) {
    if (v >= g.num_vertices())
      throw ValidationError("configuration vertex out of range: " + std::to_string(v));
    if (!seen.insert(v).second)
      throw ValidationError("configuration has duplicate entry " + std::to_string(v));
  }
}

/// Connected components of the subgraph induced by one owner's vertices.
std::vector<std::vector<VertexId>> components_of(const WeightedGraph& g,
                                                 std::span<const AgentId> owner, AgentId agent,
                                                 std::span<const VertexId> members) {
  std::vector<std::vector<VertexId>> out;
  std::vector<char> seen(g.num_vertices(), 0);
  for (VertexId start : members) {
    if (seen[start]) continue;
    std::vector<VertexId> comp{start}, stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : g.neighbors(u)) {
        if (owner[nb.vertex] == agent && !seen[nb.vertex]) {
          seen[nb.vertex] = 1;
          comp.push_back(nb.vertex);
          stack.push_back(nb.vertex);
        }
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

/// Moves every component of `agent`'s vertices within `scope` that does not
/// contain `generator` over to agent `to`.
void reassign_stranded(const WeightedGraph& g, std::vector<AgentId>& owner,
                       std::span<const VertexId> scope, AgentId agent, VertexId generator,
                       AgentId to) {
  std::vector<VertexId> members;
  for (VertexId v : scope)
    if (owner[v] == agent) members.push_back(v);
  const auto comps = components_of(g, owner, agent, members);
  if (comps.size() <= 1) return;
  for (const auto& comp : comps)
    if (std::find(comp.begin(), comp.end(), generator) == comp.end())
      for (VertexId u : comp) owner[u] = to;
}

/// Hands each component not containing its agent's generator to the
/// lowest-indexed neighbouring owner, until every cell is connected.
void repair_connectivity(const WeightedGraph& g, std::vector<AgentId>& owner,
                         const Configuration& eta) {
  const std::size_t num_agents = eta.size();
  for (std::size_t round = 0; round <= g.num_vertices(); ++round) {
    bool changed = false;
    std::vector<std::vector<VertexId>> members(num_agents);
    for (VertexId v = 0; v < owner.size(); ++v) members[owner[v]].push_back(v);
    for (AgentId a = 0; a < num_agents && !changed; ++a) {
      const auto comps = components_of(g, owner, a, members[a]);
      if (comps.size() <= 1) continue;
      for (const auto& comp : comps) {
        if (std::find(comp.begin(), comp.end(), eta[a]) != comp.end()) continue;
        AgentId target = num_agents;
        for (VertexId u : comp)
          for (const Neighbor& nb : g.neighbors(u))
            if (owner[nb.vertex] != a) target = std::min(target, owner[nb.vertex]);
        if (target == num_agents) continue;
        for (VertexId u : comp) owner[u] = target;
        changed = true;
      }
    }
    if (!changed) return;
  }
  throw RuntimeError("could not repair partition connectivity");
}

}  // namespace

PartitionState::PartitionState(const WeightedGraph& g, std::vector<AgentId> owner,
                               std::size_t num_parts, std::size_t generation)
    : owner_(std::move(owner)), parts_(num_parts), generation_(generation) {
  if (owner_.size() != g.num_vertices())
    throw ValidationError("partition owner vector does not match the graph");
  if (num_parts == 0) throw ValidationError("partition needs at least one part");
  for (VertexId v = 0; v < owner_.size(); ++v) {
    if (owner_[v] >= num_parts)
      throw ValidationError("vertex " + std::to_string(v) + " has no valid owner");
    parts_[owner_[v]].push_back(v);
  }
  for (std::size_t i = 0; i < num_parts; ++i) {
    if (parts_[i].empty()) throw ValidationError("part " + std::to_string(i) + " is empty");
    if (!is_connected_subset(g, parts_[i]))
      throw ValidationError("part " + std::to_string(i) + " is not connected");
  }
}

PartitionState voronoi_of(const WeightedGraph& g, const DistanceTable& dist,
                          const Configuration& eta) {
  check_configuration(g, eta);
  const std::size_t n = g.num_vertices();
  if (dist.size() != n) throw ValidationError("Voronoi needs the full-graph distance table");
  std::vector<AgentId> owner(n, 0);
  std::vector<double> best(n, kUnreachable);
  for (AgentId a = 0; a < eta.size(); ++a) {
    const auto row = dist.row(eta[a]);
    for (VertexId v = 0; v < n; ++v) {
      if (row[v] < best[v]) {  // strict: earlier agents keep ties
        best[v] = row[v];
        owner[v] = a;
      }
    }
  }
  repair_connectivity(g, owner, eta);
  return PartitionState(g, std::move(owner), eta.size());
}

CentroidResult centroid_with_cost(const WeightedGraph& g, std::span<const VertexId> part,
                                  const SensoryField& weight) {
  check_field(g, weight);
  if (part.empty()) throw ValidationError("centroid of an empty part");
  if (!is_connected_subset(g, part)) throw ValidationError("centroid of a disconnected part");
  const DistanceTable dist = induced_distances(g, part);
  const std::vector<double> w = gather(weight, dist.members());
  CentroidResult best{dist.members()[0], kUnreachable};
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double cost = simd::weighted_sum(dist.row_local(k), w);
    if (cost < best.cost) best = {dist.members()[k], cost};
  }
  return best;
}

VertexId centroid_of(const WeightedGraph& g, std::span<const VertexId> part,
                     const SensoryField& weight) {
  return centroid_with_cost(g, part, weight).vertex;
}

PairResult pairwise_optimal_pair(const WeightedGraph& g, std::span<const VertexId> union_set,
                                 const SensoryField& weight) {
  check_field(g, weight);
  if (union_set.size() < 2) throw ValidationError("pair search needs at least two vertices");
  if (!is_connected_subset(g, union_set))
    throw ValidationError("pair search over a disconnected union");
  const DistanceTable dist = induced_distances(g, union_set);
  const std::size_t m = dist.size();
  if (m < 2) throw ValidationError("pair search needs at least two distinct vertices");
  const std::vector<double> w = gather(weight, dist.members());
  PairResult best{0, 0, kUnreachable};
  for (std::size_t a = 0; a < m; ++a) {
    const auto row_a = dist.row_local(a);
    for (std::size_t b = a + 1; b < m; ++b) {
      const double cost = simd::weighted_min_sum(row_a, dist.row_local(b), w);
      if (cost < best.cost) best = {dist.members()[a], dist.members()[b], cost};
    }
  }
  return best;
}

std::vector<std::pair<AgentId, AgentId>> adjacent_pairs(const WeightedGraph& g,
                                                        const PartitionState& state) {
  std::set<std::pair<AgentId, AgentId>> pairs;
  for (const Edge& e : g.edges()) {
    const AgentId a = state.owner(e.u), b = state.owner(e.v);
    if (a != b) pairs.emplace(std::min(a, b), std::max(a, b));
  }
  return {pairs.begin(), pairs.end()};
}

bool are_adjacent(const WeightedGraph& g, const PartitionState& state, AgentId i, AgentId j) {
  if (i == j) return false;
  for (const Edge& e : g.edges()) {
    const AgentId a = state.owner(e.u), b = state.owner(e.v);
    if ((a == i && b == j) || (a == j && b == i)) return true;
  }
  return false;
}

namespace {

/// Coverage cost contribution of one part from a given generator.
double part_cost(const WeightedGraph& g, std::span<const VertexId> part, VertexId generator,
                 const SensoryField& weight) {
  std::vector<bool> allowed(g.num_vertices(), false);
  for (VertexId v : part) allowed[v] = true;
  if (!allowed[generator]) throw ValidationError("agent is not inside its own part");
  const std::vector<double> d = single_source_distances(g, generator, allowed);
  std::vector<double> dv(part.size());
  for (std::size_t k = 0; k < part.size(); ++k) dv[k] = d[part[k]];
  return simd::weighted_sum(dv, gather(weight, part));
}

}  // namespace

PairwiseStepResult pairwise_step(const WeightedGraph& g, const PartitionState& state,
                                 const Configuration& eta, AgentId i, AgentId j,
                                 const SensoryField& weight) {
  check_field(g, weight);
  if (eta.size() != state.num_parts())
    throw ValidationError("configuration size does not match the partition");
  if (i >= eta.size() || j >= eta.size()) throw ValidationError("agent index out of range");
  if (!are_adjacent(g, state, i, j))
    throw ValidationError("agents " + std::to_string(i) + " and " + std::to_string(j) +
                          " do not own adjacent parts");

  std::vector<VertexId> union_set(state.part(i).begin(), state.part(i).end());
  union_set.insert(union_set.end(), state.part(j).begin(), state.part(j).end());
  std::sort(union_set.begin(), union_set.end());

  PairwiseStepResult result;
  result.cost_before =
      part_cost(g, state.part(i), eta[i], weight) + part_cost(g, state.part(j), eta[j], weight);

  const PairResult best = pairwise_optimal_pair(g, union_set, weight);
  result.eta = eta;
  result.eta[i] = best.a;
  result.eta[j] = best.b;

  std::vector<bool> allowed(g.num_vertices(), false);
  for (VertexId v : union_set) allowed[v] = true;
  const std::vector<double> from_a = single_source_distances(g, best.a, allowed);
  const std::vector<double> from_b = single_source_distances(g, best.b, allowed);
  std::vector<AgentId> owner(state.owners().begin(), state.owners().end());
  for (VertexId v : union_set) owner[v] = from_a[v] <= from_b[v] ? i : j;

  // Floating-point ties can strand a component on the wrong side; hand it over.
  reassign_stranded(g, owner, union_set, i, best.a, j);
  reassign_stranded(g, owner, union_set, j, best.b, i);

  result.state = PartitionState(g, std::move(owner), state.num_parts(), state.generation() + 1);
  result.cost_after = part_cost(g, result.state.part(i), best.a, weight) +
                      part_cost(g, result.state.part(j), best.b, weight);
  return result;
}

bool is_pairwise_optimal(const WeightedGraph& g, const PartitionState& state,
                         const SensoryField& weight, double tolerance) {
  check_field(g, weight);
  std::vector<double> centroid_cost(state.num_parts());
  for (AgentId i = 0; i < state.num_parts(); ++i)
    centroid_cost[i] = centroid_with_cost(g, state.part(i), weight).cost;
  for (const auto& [i, j] : adjacent_pairs(g, state)) {
    std::vector<VertexId> union_set(state.part(i).begin(), state.part(i).end());
    union_set.insert(union_set.end(), state.part(j).begin(), state.part(j).end());
    const double best = pairwise_optimal_pair(g, union_set, weight).cost;
    if (!approx_le(centroid_cost[i] + centroid_cost[j], best, tolerance)) return false;
  }
  return true;
}

bool is_voronoi_partition(const WeightedGraph& g, const DistanceTable& dist,
                          const PartitionState& state, const Configuration& eta,
                          double tolerance) {
  if (eta.size() != state.num_parts()) return false;
  try {
    check_configuration(g, eta);
  } catch (const ValidationError&) {
    return false;
  }
  for (AgentId i = 0; i < eta.size(); ++i) {
    if (state.owner(eta[i]) != i) return false;
    std::vector<bool> allowed(g.num_vertices(), false);
    for (VertexId v : state.part(i)) allowed[v] = true;
    const std::vector<double> own = single_source_distances(g, eta[i], allowed);
    for (VertexId v : state.part(i)) {
      double nearest = kUnreachable;
      for (VertexId gen : eta) nearest = std::min(nearest, dist(gen, v));
      if (!approx_le(own[v], nearest, tolerance)) return false;
    }
  }
  return true;
}

bool is_centroidal_voronoi(const WeightedGraph& g, const DistanceTable& dist,
                           const PartitionState& state, const Configuration& eta,
                           const SensoryField& weight, double tolerance) {
  if (!is_voronoi_partition(g, dist, state, eta, tolerance)) return false;
  for (AgentId i = 0; i < eta.size(); ++i) {
    const double best = centroid_with_cost(g, state.part(i), weight).cost;
    if (!approx_le(part_cost(g, state.part(i), eta[i], weight), best, tolerance)) return false;
  }
  return true;
}

LloydStepResult lloyd_step(const WeightedGraph& g, const DistanceTable& dist,
                           const PartitionState& state, const Configuration& eta,
                           const SensoryField& weight) {
  if (eta.size() != state.num_parts())
    throw ValidationError("configuration size does not match the partition");
  LloydStepResult result;
  result.eta.resize(eta.size());
  for (AgentId i = 0; i < eta.size(); ++i) result.eta[i] = centroid_of(g, state.part(i), weight);

  std::vector<std::size_t> uses(g.num_vertices(), 0);
  for (VertexId v : result.eta) ++uses[v];
  for (AgentId i = 0; i < eta.size(); ++i) {
    if (uses[result.eta[i]] > 1) {
      result.collision = true;
      result.eta[i] = eta[i];
    }
  }
  if (result.collision) {
    std::set<VertexId> distinct(result.eta.begin(), result.eta.end());
    if (distinct.size() != result.eta.size()) {
      result.eta = eta;
      result.state = state;
      return result;
    }
  }
  PartitionState next = voronoi_of(g, dist, result.eta);
  result.state = PartitionState(g, {next.owners().begin(), next.owners().end()}, eta.size(),
                                state.generation() + 1);
  return result;
}

void write_partition_csv(const PartitionState& state, const Configuration& eta,
                         const std::filesystem::path& path) {
  if (eta.size() != state.num_parts())
    throw ValidationError("configuration size does not match the partition");
  std::vector<bool> generator(state.owners().size(), false);
  for (VertexId v : eta) {
    if (v >= generator.size()) throw ValidationError("generator outside the graph");
    generator[v] = true;
  }
  auto out = detail::open_for_write(path);
  out << "vertex,owner,is_generator\n";
  for (VertexId v = 0; v < generator.size(); ++v)
    out << v << ',' << state.owner(v) << ',' << (generator[v] ? 1 : 0) << '\n';
  if (!out) throw RuntimeError("failed writing " + path.string());
}

}  // namespace dslc
