#include "dslc/sensory_field.hpp"

#include <cmath>
#include <string>

#include "dslc/error.hpp"

namespace dslc {

SensoryField::SensoryField(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("sensory field must be nonempty");
  for (std::size_t v = 0; v < values_.size(); ++v)
    if (!(values_[v] > 0.0) || !std::isfinite(values_[v]))
      throw ValidationError("sensory field must be finite and > 0 (vertex " + std::to_string(v) +
                            ")");
}

SensoryField clamp_field(std::span<const double> raw, double floor) {
  if (!(floor > 0.0)) throw ValidationError("field floor must be > 0");
  std::vector<double> out(raw.begin(), raw.end());
  for (double& x : out) {
    if (!std::isfinite(x)) throw ValidationError("field values must be finite");
    if (x < floor) x = floor;
  }
  return SensoryField(std::move(out));
}

}  // namespace dslc
