#pragma once

#include <span>
#include <vector>

#include "dslc/graph.hpp"

namespace dslc {

/// Open sampling tour through `points` (repeats allowed) starting from
/// `start`, using distances inside the subgraph induced by `part`. Distinct
/// points are ordered by nearest neighbour (ties to the lowest id), then
/// improved by segment-reversal passes until none shortens the path; repeated
/// points are visited back to back. `start` itself is not part of the result.
std::vector<VertexId> plan_tour(const WeightedGraph& g, std::span<const VertexId> part,
                                VertexId start, std::span<const VertexId> points);

/// Length of start -> tour[0] -> tour[1] -> ... under the given table.
double tour_length(const DistanceTable& dist, VertexId start, std::span<const VertexId> tour);

}  // namespace dslc
