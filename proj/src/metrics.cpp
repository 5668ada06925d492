#include "dslc/metrics.hpp"

#include <string>

#include "csv_util.hpp"
#include "dslc/error.hpp"
#include "dslc/simd/kernels.hpp"

namespace dslc {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::estimation: return "estimation";
    case Phase::propagation: return "propagation";
    case Phase::coverage: return "coverage";
  }
  return "unknown";
}

double coverage_cost(const WeightedGraph& g, const PartitionState& state,
                     const Configuration& eta, const SensoryField& phi) {
  if (eta.size() != state.num_parts())
    throw ValidationError("configuration size does not match the partition");
  if (phi.size() != g.num_vertices()) throw ValidationError("field size does not match the graph");
  double total = 0.0;
  std::vector<bool> allowed(g.num_vertices(), false);
  for (AgentId i = 0; i < eta.size(); ++i) {
    const auto part = state.part(i);
    if (eta[i] >= g.num_vertices() || state.owner(eta[i]) != i)
      throw ValidationError("agent " + std::to_string(i) + " is not inside its part");
    for (VertexId v : part) allowed[v] = true;
    const std::vector<double> d = single_source_distances(g, eta[i], allowed);
    std::vector<double> dv(part.size()), w(part.size());
    for (std::size_t k = 0; k < part.size(); ++k) {
      dv[k] = d[part[k]];
      w[k] = phi[part[k]];
    }
    total += simd::weighted_sum(dv, w);
    for (VertexId v : part) allowed[v] = false;
  }
  return total;
}

RegretBreakdown regret_breakdown(const WeightedGraph& g, const DistanceTable& dist,
                                 const PartitionState& state, const Configuration& eta,
                                 const SensoryField& phi) {
  RegretBreakdown out;
  out.cost = coverage_cost(g, state, eta, phi);
  for (AgentId i = 0; i < state.num_parts(); ++i)
    out.centroid_cost += centroid_with_cost(g, state.part(i), phi).cost;
  out.voronoi_cost = coverage_cost(g, voronoi_of(g, dist, eta), eta, phi);
  return out;
}

double instantaneous_regret(const WeightedGraph& g, const DistanceTable& dist,
                            const PartitionState& state, const Configuration& eta,
                            const SensoryField& phi) {
  return regret_breakdown(g, dist, state, eta, phi).regret();
}

const RegretRecord& RegretSeries::append(std::size_t t, std::size_t epoch, Phase phase,
                                         double cost, double inst_regret, double max_var) {
  if (!records_.empty() && t <= records_.back().t)
    throw ValidationError("record times must be strictly increasing (got " + std::to_string(t) +
                          " after " + std::to_string(records_.back().t) + ")");
  const double cum = (records_.empty() ? 0.0 : records_.back().cum_regret) + inst_regret;
  records_.push_back({t, epoch, phase, cost, inst_regret, cum, max_var});
  return records_.back();
}

void write_series_csv(const RegretSeries& series, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << kSeriesCsvHeader << '\n';
  for (const RegretRecord& r : series.records())
    out << r.t << ',' << r.epoch << ',' << phase_name(r.phase) << ','
        << detail::format_real(r.cost) << ',' << detail::format_real(r.inst_regret) << ','
        << detail::format_real(r.cum_regret) << ',' << detail::format_real(r.max_var) << '\n';
  if (!out) throw RuntimeError("failed writing " + path.string());
}

}  // namespace dslc
