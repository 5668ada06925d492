#include "dslc/field_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "csv_util.hpp"
#include "dslc/error.hpp"

namespace dslc {

SensoryField normalize_field(std::span<const double> raw, double floor) {
  if (raw.empty()) throw ValidationError("cannot normalize an empty field");
  for (double x : raw)
    if (!std::isfinite(x)) throw ValidationError("field values must be finite");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double range = *hi - *lo;
  std::vector<double> out(raw.size(), 1.0);
  if (range > 0.0)
    for (std::size_t k = 0; k < raw.size(); ++k)
      out[k] = std::max((raw[k] - *lo) / range, floor);
  return SensoryField(std::move(out));
}

SensoryField gmm_field(const WeightedGraph& g, std::span<const GaussianBump> components) {
  if (components.empty()) throw ValidationError("mixture needs at least one component");
  for (const GaussianBump& c : components)
    if (!(c.weight > 0.0) || !(c.scale > 0.0))
      throw ValidationError("mixture weights and scales must be > 0");
  std::vector<double> raw(g.num_vertices(), 0.0);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const Point p = g.position(v);
    for (const GaussianBump& c : components) {
      const double d = euclidean_distance(p, c.center);
      raw[v] += c.weight * std::exp(-(d * d) / (2.0 * c.scale * c.scale));
    }
  }
  return normalize_field(raw);
}

SensoryField kde_field(const WeightedGraph& g, std::span<const Point> points, double bandwidth) {
  if (points.empty()) throw ValidationError("density estimate needs at least one point");
  if (!(bandwidth > 0.0)) throw ValidationError("bandwidth must be > 0");
  const double norm = 1.0 / (2.0 * M_PI * bandwidth * bandwidth * static_cast<double>(points.size()));
  std::vector<double> raw(g.num_vertices(), 0.0);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const Point p = g.position(v);
    double acc = 0.0;
    for (const Point& q : points) {
      const double d = euclidean_distance(p, q);
      acc += std::exp(-(d * d) / (2.0 * bandwidth * bandwidth));
    }
    raw[v] = acc * norm;
  }
  return normalize_field(raw);
}

std::vector<GaussianBump> two_hotspot_components() {
  return {{{0.3, 0.7}, 0.12, 1.0}, {{0.72, 0.28}, 0.09, 0.8}};
}

std::vector<Point> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open point file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header");
  const auto header = detail::split_csv(line);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cx = col("x"), cy = col("y");
  std::vector<Point> points;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv(line);
    try {
      points.push_back({std::stod(fields.at(cx)), std::stod(fields.at(cy))});
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": expected numeric x and y");
    }
  }
  if (points.empty()) throw ValidationError(path.string() + ": no points");
  return points;
}

void write_field_csv(const WeightedGraph& g, const SensoryField& phi,
                     const std::filesystem::path& path) {
  if (phi.size() != g.num_vertices()) throw ValidationError("field size does not match the graph");
  auto out = detail::open_for_write(path);
  out << "vertex,x,y,phi\n";
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    out << v << ',' << detail::format_real(g.position(v).x) << ','
        << detail::format_real(g.position(v).y) << ',' << detail::format_real(phi[v]) << '\n';
  if (!out) throw RuntimeError("failed writing " + path.string());
}

SensoryField read_field_csv(const std::filesystem::path& path, std::size_t num_vertices) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open field file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header");
  const auto header = detail::split_csv(line);
  const auto vcol = std::find(header.begin(), header.end(), "vertex");
  const auto pcol = std::find(header.begin(), header.end(), "phi");
  if (vcol == header.end() || pcol == header.end())
    throw ValidationError(path.string() + ": needs 'vertex' and 'phi' columns");
  std::vector<double> values(num_vertices, 0.0);
  std::vector<bool> seen(num_vertices, false);
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv(line);
    std::size_t v = 0;
    double phi = 0.0;
    try {
      v = std::stoul(fields.at(static_cast<std::size_t>(vcol - header.begin())));
      phi = std::stod(fields.at(static_cast<std::size_t>(pcol - header.begin())));
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) + ": bad record");
    }
    if (v >= num_vertices || seen[v])
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": vertex out of range or repeated");
    values[v] = phi;
    seen[v] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ValidationError(path.string() + ": field does not cover every vertex");
  return SensoryField(std::move(values));
}

}  // namespace dslc
