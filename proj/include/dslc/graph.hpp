#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace dslc {

using VertexId = std::size_t;

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double euclidean_distance(Point a, Point b);

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  double weight = 0.0;
};

struct Neighbor {
  VertexId vertex = 0;
  double weight = 0.0;
};

/// Undirected, connected, positively weighted graph with a planar embedding.
/// Immutable after construction.
class WeightedGraph {
 public:
  /// Throws ValidationError on self-loops, duplicate edges, non-positive or
  /// non-finite weights, out-of-range endpoints, or a disconnected graph.
  WeightedGraph(std::vector<Point> positions, std::vector<Edge> edges);

  std::size_t num_vertices() const { return positions_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Point> positions() const { return positions_; }
  Point position(VertexId v) const { return positions_[v]; }
  std::span<const Neighbor> neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }

 private:
  std::vector<Point> positions_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// 4-connected rows x cols lattice, row-major ids, edge weight = spacing,
/// vertex (r, c) at (c * spacing, r * spacing).
WeightedGraph build_grid(std::size_t rows, std::size_t cols, double spacing);

/// Shortest-path distances restricted to a vertex set (the whole graph or an
/// induced subgraph). Rows are computed by one priority-queue search per
/// member, so row(u)[k] is exactly the distance that search assigned.
class DistanceTable {
 public:
  DistanceTable() = default;
  DistanceTable(std::vector<VertexId> members, std::vector<double> dist,
                std::size_t num_graph_vertices);

  std::size_t size() const { return members_.size(); }
  std::span<const VertexId> members() const { return members_; }
  bool contains(VertexId v) const {
    return v < local_.size() && local_[v] != kAbsent;
  }
  /// Position of v in members(); v must be contained.
  std::size_t local_index(VertexId v) const { return local_[v]; }

  /// Distance between two member vertices (global ids).
  double operator()(VertexId u, VertexId v) const {
    return dist_[local_[u] * members_.size() + local_[v]];
  }
  /// Distances from member u to every member, in members() order.
  std::span<const double> row(VertexId u) const {
    return {dist_.data() + local_[u] * members_.size(), members_.size()};
  }
  std::span<const double> row_local(std::size_t k) const {
    return {dist_.data() + k * members_.size(), members_.size()};
  }

 private:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<VertexId> members_;
  std::vector<std::size_t> local_;
  std::vector<double> dist_;
};

DistanceTable all_pairs_distances(const WeightedGraph& g);

/// Throws ValidationError for an empty subset or out-of-range ids.
/// Duplicates are ignored; members() is sorted ascending.
DistanceTable induced_distances(const WeightedGraph& g, std::span<const VertexId> subset);

/// Distances from source to every vertex of the subgraph induced by `allowed`
/// (indexed by global id, kUnreachable outside). allowed[source] must be true.
std::vector<double> single_source_distances(const WeightedGraph& g, VertexId source,
                                            const std::vector<bool>& allowed);

bool is_connected_subset(const WeightedGraph& g, std::span<const VertexId> subset);

/// Text format: first line num_vertices, then one "index x y" line per
/// vertex, then one "u v weight" line per edge. '#' starts a comment.
void write_graph(const WeightedGraph& g, const std::filesystem::path& path);
WeightedGraph read_graph(const std::filesystem::path& path);

}  // namespace dslc
