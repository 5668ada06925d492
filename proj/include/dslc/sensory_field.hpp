#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dslc/graph.hpp"

namespace dslc {

inline constexpr double kFieldFloor = 1e-6;

/// Strictly positive, finite per-vertex demand values.
class SensoryField {
 public:
  SensoryField() = default;
  /// Throws ValidationError if any entry is <= 0 or non-finite, or if empty.
  explicit SensoryField(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](VertexId v) const { return values_[v]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Raises every entry below floor to floor (used to turn posterior means into
/// a valid estimate).
SensoryField clamp_field(std::span<const double> raw, double floor = kFieldFloor);

}  // namespace dslc
