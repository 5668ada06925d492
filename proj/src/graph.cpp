#include "dslc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "dslc/error.hpp"

namespace dslc {

double euclidean_distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

WeightedGraph::WeightedGraph(std::vector<Point> positions, std::vector<Edge> edges)
    : positions_(std::move(positions)), edges_(std::move(edges)) {
  const std::size_t n = positions_.size();
  if (n == 0) throw ValidationError("graph must have at least one vertex");
  for (const Point& p : positions_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw ValidationError("vertex positions must be finite");

  std::set<std::pair<VertexId, VertexId>> seen;
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : edges_) {
    if (e.u >= n || e.v >= n)
      throw ValidationError("edge endpoint out of range: (" + std::to_string(e.u) + ", " +
                            std::to_string(e.v) + ")");
    if (e.u == e.v) throw ValidationError("self-loop at vertex " + std::to_string(e.u));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw ValidationError("edge weights must be finite and > 0");
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second)
      throw ValidationError("duplicate edge (" + std::to_string(e.u) + ", " +
                            std::to_string(e.v) + ")");
    ++degree[e.u];
    ++degree[e.v];
  }

  offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[fill[e.u]++] = {e.v, e.weight};
    adjacency_[fill[e.v]++] = {e.u, e.weight};
  }
  for (std::size_t v = 0; v < n; ++v)
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]),
              [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });

  std::vector<VertexId> all(n);
  for (std::size_t v = 0; v < n; ++v) all[v] = v;
  if (!is_connected_subset(*this, all)) throw ValidationError("graph is not connected");
}

WeightedGraph build_grid(std::size_t rows, std::size_t cols, double spacing) {
  if (rows == 0 || cols == 0) throw ValidationError("grid needs rows >= 1 and cols >= 1");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ValidationError("grid spacing must be finite and > 0");
  std::vector<Point> positions;
  positions.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      positions.push_back({static_cast<double>(c) * spacing, static_cast<double>(r) * spacing});
  std::vector<Edge> edges;
  edges.reserve(rows * (cols - 1) + cols * (rows - 1));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const VertexId v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1, spacing});
      if (r + 1 < rows) edges.push_back({v, v + cols, spacing});
    }
  return WeightedGraph(std::move(positions), std::move(edges));
}

DistanceTable::DistanceTable(std::vector<VertexId> members, std::vector<double> dist,
                             std::size_t num_graph_vertices)
    : members_(std::move(members)), local_(num_graph_vertices, kAbsent), dist_(std::move(dist)) {
  for (std::size_t k = 0; k < members_.size(); ++k) local_[members_[k]] = k;
}

namespace {

struct LocalGraph {
  std::vector<std::size_t> offsets;
  std::vector<Neighbor> adjacency;  // vertex field holds local indices
};

LocalGraph restrict_to(const WeightedGraph& g, std::span<const VertexId> members,
                       const std::vector<std::size_t>& local) {
  constexpr auto absent = std::numeric_limits<std::size_t>::max();
  LocalGraph lg;
  lg.offsets.reserve(members.size() + 1);
  lg.offsets.push_back(0);
  for (VertexId v : members) {
    for (const Neighbor& nb : g.neighbors(v))
      if (local[nb.vertex] != absent) lg.adjacency.push_back({local[nb.vertex], nb.weight});
    lg.offsets.push_back(lg.adjacency.size());
  }
  return lg;
}

void dijkstra(const LocalGraph& lg, std::size_t source, std::span<double> out) {
  using Item = std::pair<double, std::size_t>;
  std::fill(out.begin(), out.end(), kUnreachable);
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  out[source] = 0.0;
  frontier.emplace(0.0, source);
  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (d > out[u]) continue;
    for (std::size_t k = lg.offsets[u]; k < lg.offsets[u + 1]; ++k) {
      const Neighbor& nb = lg.adjacency[k];
      const double candidate = d + nb.weight;
      if (candidate < out[nb.vertex]) {
        out[nb.vertex] = candidate;
        frontier.emplace(candidate, nb.vertex);
      }
    }
  }
}

DistanceTable distances_over(const WeightedGraph& g, std::vector<VertexId> members) {
  constexpr auto absent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> local(g.num_vertices(), absent);
  for (std::size_t k = 0; k < members.size(); ++k) local[members[k]] = k;
  const LocalGraph lg = restrict_to(g, members, local);
  const std::size_t m = members.size();
  std::vector<double> dist(m * m);
  for (std::size_t s = 0; s < m; ++s) dijkstra(lg, s, std::span<double>(dist).subspan(s * m, m));
  return DistanceTable(std::move(members), std::move(dist), g.num_vertices());
}

std::vector<VertexId> normalized_subset(const WeightedGraph& g, std::span<const VertexId> subset) {
  if (subset.empty()) throw ValidationError("vertex subset must be nonempty");
  std::vector<VertexId> members(subset.begin(), subset.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.back() >= g.num_vertices())
    throw ValidationError("vertex id out of range: " + std::to_string(members.back()));
  return members;
}

}  // namespace

DistanceTable all_pairs_distances(const WeightedGraph& g) {
  std::vector<VertexId> members(g.num_vertices());
  for (std::size_t v = 0; v < members.size(); ++v) members[v] = v;
  return distances_over(g, std::move(members));
}

DistanceTable induced_distances(const WeightedGraph& g, std::span<const VertexId> subset) {
  return distances_over(g, normalized_subset(g, subset));
}

std::vector<double> single_source_distances(const WeightedGraph& g, VertexId source,
                                            const std::vector<bool>& allowed) {
  using Item = std::pair<double, VertexId>;
  std::vector<double> out(g.num_vertices(), kUnreachable);
  if (source >= g.num_vertices() || !allowed[source])
    throw ValidationError("source vertex is outside the allowed subset");
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  out[source] = 0.0;
  frontier.emplace(0.0, source);
  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (d > out[u]) continue;
    for (const Neighbor& nb : g.neighbors(u)) {
      if (!allowed[nb.vertex]) continue;
      const double candidate = d + nb.weight;
      if (candidate < out[nb.vertex]) {
        out[nb.vertex] = candidate;
        frontier.emplace(candidate, nb.vertex);
      }
    }
  }
  return out;
}

bool is_connected_subset(const WeightedGraph& g, std::span<const VertexId> subset) {
  const std::vector<VertexId> members = normalized_subset(g, subset);
  std::vector<char> inside(g.num_vertices(), 0), seen(g.num_vertices(), 0);
  for (VertexId v : members) inside[v] = 1;
  std::vector<VertexId> stack{members.front()};
  seen[members.front()] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    for (const Neighbor& nb : g.neighbors(u)) {
      if (inside[nb.vertex] && !seen[nb.vertex]) {
        seen[nb.vertex] = 1;
        ++reached;
        stack.push_back(nb.vertex);
      }
    }
  }
  return reached == members.size();
}

void write_graph(const WeightedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot open graph file for writing: " + path.string());
  out << std::setprecision(17);
  out << g.num_vertices() << '\n';
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    out << v << ' ' << g.position(v).x << ' ' << g.position(v).y << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << e.weight << '\n';
  if (!out) throw RuntimeError("failed writing graph file: " + path.string());
}

WeightedGraph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open graph file: " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  if (lines.empty()) throw ValidationError(path.string() + ": empty graph file");

  auto fail = [&](std::size_t line_no, const std::string& what) {
    return ValidationError(path.string() + ": record " + std::to_string(line_no + 1) + ": " +
                           what);
  };
  std::size_t n = 0;
  {
    std::istringstream header(lines[0]);
    if (!(header >> n) || n == 0) throw fail(0, "expected positive vertex count");
  }
  if (lines.size() < n + 1) throw fail(lines.size(), "missing vertex records");
  std::vector<Point> positions(n);
  std::vector<bool> assigned(n, false);
  for (std::size_t k = 1; k <= n; ++k) {
    std::istringstream rec(lines[k]);
    std::size_t idx = 0;
    Point p;
    if (!(rec >> idx >> p.x >> p.y) || idx >= n || assigned[idx])
      throw fail(k, "expected 'index x y' with a unique index < " + std::to_string(n));
    positions[idx] = p;
    assigned[idx] = true;
  }
  std::vector<Edge> edges;
  for (std::size_t k = n + 1; k < lines.size(); ++k) {
    std::istringstream rec(lines[k]);
    Edge e;
    if (!(rec >> e.u >> e.v >> e.weight)) throw fail(k, "expected 'u v weight'");
    edges.push_back(e);
  }
  return WeightedGraph(std::move(positions), std::move(edges));
}

}  // namespace dslc
