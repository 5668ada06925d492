#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "dslc/graph.hpp"
#include "dslc/sensory_field.hpp"

namespace dslc {

/// Agent positions: entry i is the vertex occupied by agent i.
using Configuration = std::vector<VertexId>;
using AgentId = std::size_t;

/// Connected N-partition of a graph's vertices. Construction validates that
/// parts are disjoint, cover V, are nonempty, and induce connected subgraphs.
class PartitionState {
 public:
  PartitionState() = default;
  PartitionState(const WeightedGraph& g, std::vector<AgentId> owner, std::size_t num_parts,
                 std::size_t generation = 0);

  std::size_t num_parts() const { return parts_.size(); }
  /// Vertices of part i in ascending order.
  std::span<const VertexId> part(AgentId i) const { return parts_[i]; }
  AgentId owner(VertexId v) const { return owner_[v]; }
  std::span<const AgentId> owners() const { return owner_; }
  /// Bumped by every operation that produces a new partition from this one.
  std::size_t generation() const { return generation_; }

  friend bool operator==(const PartitionState& a, const PartitionState& b) {
    return a.owner_ == b.owner_ && a.parts_.size() == b.parts_.size();
  }

 private:
  std::vector<AgentId> owner_;
  std::vector<std::vector<VertexId>> parts_;
  std::size_t generation_ = 0;
};

/// Nearest-generator assignment by graph distance, ties to the lowest agent
/// index. Throws ValidationError on duplicate or out-of-range generators.
/// Cells left disconnected by floating-point ties are repaired by handing the
/// stranded components to the lowest-indexed adjacent cell.
PartitionState voronoi_of(const WeightedGraph& g, const DistanceTable& dist,
                          const Configuration& eta);

struct CentroidResult {
  VertexId vertex = 0;
  double cost = 0.0;  // sum over the part of induced distance * weight
};

/// Throws ValidationError if part is empty or disconnected.
CentroidResult centroid_with_cost(const WeightedGraph& g, std::span<const VertexId> part,
                                  const SensoryField& weight);
VertexId centroid_of(const WeightedGraph& g, std::span<const VertexId> part,
                     const SensoryField& weight);

struct PairResult {
  VertexId a = 0;
  VertexId b = 0;
  double cost = 0.0;
};

/// Exhaustive best pair of distinct generators inside the union, measured with
/// the union's induced distances. Lexicographically first (a < b) minimiser.
PairResult pairwise_optimal_pair(const WeightedGraph& g, std::span<const VertexId> union_set,
                                 const SensoryField& weight);

/// Agent pairs (i < j) whose parts share at least one edge, ascending.
std::vector<std::pair<AgentId, AgentId>> adjacent_pairs(const WeightedGraph& g,
                                                        const PartitionState& state);
bool are_adjacent(const WeightedGraph& g, const PartitionState& state, AgentId i, AgentId j);

struct PairwiseStepResult {
  PartitionState state;
  Configuration eta;
  double cost_before = 0.0;  // the pair's share of the coverage cost before
  double cost_after = 0.0;
};

/// Gossip update between adjacent agents i and j: both move to the best pair
/// (eta_i <- a, eta_j <- b) and the union is re-split, ties going to i.
PairwiseStepResult pairwise_step(const WeightedGraph& g, const PartitionState& state,
                                 const Configuration& eta, AgentId i, AgentId j,
                                 const SensoryField& weight);

/// Relative tolerance used when comparing costs for optimality.
inline constexpr double kCostTolerance = 1e-9;

bool is_pairwise_optimal(const WeightedGraph& g, const PartitionState& state,
                         const SensoryField& weight, double tolerance = kCostTolerance);

/// True iff every vertex's induced distance to its own generator equals its
/// graph distance to the nearest generator (a Voronoi partition of eta up to
/// the tie rule) and eta has distinct entries.
bool is_voronoi_partition(const WeightedGraph& g, const DistanceTable& dist,
                          const PartitionState& state, const Configuration& eta,
                          double tolerance = kCostTolerance);

/// Voronoi partition of eta whose generators attain their parts' centroid cost.
bool is_centroidal_voronoi(const WeightedGraph& g, const DistanceTable& dist,
                           const PartitionState& state, const Configuration& eta,
                           const SensoryField& weight, double tolerance = kCostTolerance);

struct LloydStepResult {
  PartitionState state;
  Configuration eta;
  bool collision = false;  // colliding agents kept their previous vertex
};

/// Move every agent to its part's centroid, then recompute the Voronoi partition.
LloydStepResult lloyd_step(const WeightedGraph& g, const DistanceTable& dist,
                           const PartitionState& state, const Configuration& eta,
                           const SensoryField& weight);

/// CSV with header "vertex,owner,is_generator".
void write_partition_csv(const PartitionState& state, const Configuration& eta,
                         const std::filesystem::path& path);

}  // namespace dslc
