#include "dslc/simd/kernels.hpp"

#include <algorithm>

namespace dslc::simd::scalar {

double weighted_sum(const double* dist, const double* weight, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += dist[k] * weight[k];
  return acc;
}

double weighted_min_sum(const double* dist_a, const double* dist_b, const double* weight,
                        std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += std::min(dist_a[k], dist_b[k]) * weight[k];
  return acc;
}

void rank_one_downdate(double* matrix, const double* column, double scale, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double f = scale * column[r];
    double* row = matrix + r * n;
    for (std::size_t c = 0; c < n; ++c) row[c] -= f * column[c];
  }
}

}  // namespace dslc::simd::scalar
