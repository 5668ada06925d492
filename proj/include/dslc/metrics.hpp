#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "dslc/graph.hpp"
#include "dslc/partition.hpp"
#include "dslc/sensory_field.hpp"

namespace dslc {

enum class Phase { estimation, propagation, coverage };

std::string_view phase_name(Phase phase);

/// Sum over parts of weight-scaled induced distances from each agent to the
/// vertices of its part. Throws ValidationError if an agent is outside its part.
double coverage_cost(const WeightedGraph& g, const PartitionState& state,
                     const Configuration& eta, const SensoryField& phi);

/// The two non-negative gaps whose sum is the instantaneous coverage regret:
/// how far eta is from the centroids of the current parts, and how far the
/// current parts are from the Voronoi partition of eta.
struct RegretBreakdown {
  double cost = 0.0;           // H(eta, P)
  double centroid_cost = 0.0;  // H(c(P), P)
  double voronoi_cost = 0.0;   // H(eta, V(eta))
  double configuration_gap() const { return cost - centroid_cost; }
  double partition_gap() const { return cost - voronoi_cost; }
  double regret() const { return 2.0 * cost - centroid_cost - voronoi_cost; }
};

RegretBreakdown regret_breakdown(const WeightedGraph& g, const DistanceTable& dist,
                                 const PartitionState& state, const Configuration& eta,
                                 const SensoryField& phi);

double instantaneous_regret(const WeightedGraph& g, const DistanceTable& dist,
                            const PartitionState& state, const Configuration& eta,
                            const SensoryField& phi);

struct RegretRecord {
  std::size_t t = 0;
  std::size_t epoch = 0;
  Phase phase = Phase::coverage;
  double cost = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double max_var = 0.0;
};

/// Per-run series with a running cumulative regret.
class RegretSeries {
 public:
  /// Throws ValidationError unless t is strictly greater than the last t.
  const RegretRecord& append(std::size_t t, std::size_t epoch, Phase phase, double cost,
                             double inst_regret, double max_var);

  std::span<const RegretRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const RegretRecord& back() const { return records_.back(); }

 private:
  std::vector<RegretRecord> records_;
};

inline constexpr std::string_view kSeriesCsvHeader =
    "t,epoch,phase,cost,inst_regret,cum_regret,max_var";

void write_series_csv(const RegretSeries& series, const std::filesystem::path& path);

}  // namespace dslc
