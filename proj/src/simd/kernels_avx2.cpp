// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <algorithm>

#include "dslc/simd/kernels.hpp"

namespace dslc::simd::avx2 {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double weighted_sum(const double* dist, const double* weight, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(dist + k), _mm256_loadu_pd(weight + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(dist + k + 4), _mm256_loadu_pd(weight + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(dist + k), _mm256_loadu_pd(weight + k), acc0);
  double acc = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += dist[k] * weight[k];
  return acc;
}

double weighted_min_sum(const double* dist_a, const double* dist_b, const double* weight,
                        std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d m0 = _mm256_min_pd(_mm256_loadu_pd(dist_a + k), _mm256_loadu_pd(dist_b + k));
    const __m256d m1 =
        _mm256_min_pd(_mm256_loadu_pd(dist_a + k + 4), _mm256_loadu_pd(dist_b + k + 4));
    acc0 = _mm256_fmadd_pd(m0, _mm256_loadu_pd(weight + k), acc0);
    acc1 = _mm256_fmadd_pd(m1, _mm256_loadu_pd(weight + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    const __m256d m0 = _mm256_min_pd(_mm256_loadu_pd(dist_a + k), _mm256_loadu_pd(dist_b + k));
    acc0 = _mm256_fmadd_pd(m0, _mm256_loadu_pd(weight + k), acc0);
  }
  double acc = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += std::min(dist_a[k], dist_b[k]) * weight[k];
  return acc;
}

void rank_one_downdate(double* matrix, const double* column, double scale, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double f = scale * column[r];
    const __m256d vf = _mm256_set1_pd(f);
    double* row = matrix + r * n;
    std::size_t c = 0;
    for (; c + 4 <= n; c += 4) {
      const __m256d updated =
          _mm256_fnmadd_pd(vf, _mm256_loadu_pd(column + c), _mm256_loadu_pd(row + c));
      _mm256_storeu_pd(row + c, updated);
    }
    for (; c < n; ++c) row[c] -= f * column[c];
  }
}

}  // namespace dslc::simd::avx2
