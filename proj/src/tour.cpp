#include "dslc/tour.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "dslc/error.hpp"

namespace dslc {

double tour_length(const DistanceTable& dist, VertexId start, std::span<const VertexId> tour) {
  double total = 0.0;
  VertexId at = start;
  for (VertexId v : tour) {
    total += dist(at, v);
    at = v;
  }
  return total;
}

std::vector<VertexId> plan_tour(const WeightedGraph& g, std::span<const VertexId> part,
                                VertexId start, std::span<const VertexId> points) {
  if (points.empty()) return {};
  const DistanceTable dist = induced_distances(g, part);
  if (!dist.contains(start)) throw ValidationError("tour start is outside the part");
  std::map<VertexId, std::size_t> multiplicity;
  for (VertexId v : points) {
    if (!dist.contains(v))
      throw ValidationError("sampling point " + std::to_string(v) + " is outside the part");
    ++multiplicity[v];
  }

  // path[0] is the fixed start; the rest are distinct points.
  std::vector<VertexId> path{start};
  std::vector<VertexId> remaining;
  for (const auto& [v, count] : multiplicity) remaining.push_back(v);
  while (!remaining.empty()) {
    const VertexId at = path.back();
    auto best = remaining.begin();
    for (auto it = remaining.begin(); it != remaining.end(); ++it)
      if (dist(at, *it) < dist(at, *best)) best = it;  // ascending ids: first wins ties
    path.push_back(*best);
    remaining.erase(best);
  }

  const std::size_t last = path.size() - 1;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i < last; ++i) {
      for (std::size_t j = i + 1; j <= last; ++j) {
        const double before = dist(path[i - 1], path[i]) + (j < last ? dist(path[j], path[j + 1]) : 0.0);
        const double after = dist(path[i - 1], path[j]) + (j < last ? dist(path[i], path[j + 1]) : 0.0);
        if (after < before - 1e-12 * std::max(1.0, before)) {
          std::reverse(path.begin() + static_cast<std::ptrdiff_t>(i),
                       path.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          improved = true;
        }
      }
    }
  }

  std::vector<VertexId> tour;
  tour.reserve(points.size());
  for (std::size_t k = 1; k < path.size(); ++k)
    tour.insert(tour.end(), multiplicity[path[k]], path[k]);
  return tour;
}

}  // namespace dslc
