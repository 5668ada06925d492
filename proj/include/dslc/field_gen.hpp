#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "dslc/graph.hpp"
#include "dslc/sensory_field.hpp"

namespace dslc {

struct GaussianBump {
  Point center;
  double scale = 0.1;  // standard deviation, distance units
  double weight = 1.0;
};

/// Affine map onto [0, 1] followed by a floor at `floor`; a constant input
/// maps to all ones. Throws ValidationError on empty or non-finite input.
SensoryField normalize_field(std::span<const double> raw, double floor = kFieldFloor);

/// Normalized mixture of isotropic Gaussian bumps evaluated at vertex positions.
SensoryField gmm_field(const WeightedGraph& g, std::span<const GaussianBump> components);

/// Normalized isotropic Gaussian kernel density of the points, evaluated at
/// vertex positions.
SensoryField kde_field(const WeightedGraph& g, std::span<const Point> points, double bandwidth);

/// Two bumps of different height and width on the unit square.
std::vector<GaussianBump> two_hotspot_components();

/// CSV with header "x,y" (extra columns ignored).
std::vector<Point> read_points_csv(const std::filesystem::path& path);

/// CSV with header "vertex,x,y,phi".
void write_field_csv(const WeightedGraph& g, const SensoryField& phi,
                     const std::filesystem::path& path);
SensoryField read_field_csv(const std::filesystem::path& path, std::size_t num_vertices);

}  // namespace dslc
