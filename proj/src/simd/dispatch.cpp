#include <atomic>
#include <cassert>
#include <string_view>

#include "dslc/simd/kernels.hpp"

namespace dslc::simd {
namespace {

bool cpu_has_avx2() {
#if defined(DSLC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() { return cpu_has_avx2() ? Backend::avx2 : Backend::scalar; }

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

bool backend_available(Backend backend) {
  return backend == Backend::scalar || cpu_has_avx2();
}

bool set_backend(Backend backend) {
  if (!backend_available(backend)) return false;
  backend_slot().store(backend, std::memory_order_relaxed);
  return true;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

double weighted_sum(std::span<const double> dist, std::span<const double> weight) {
  assert(dist.size() == weight.size());
#if defined(DSLC_HAVE_AVX2)
  if (active_backend() == Backend::avx2)
    return avx2::weighted_sum(dist.data(), weight.data(), dist.size());
#endif
  return scalar::weighted_sum(dist.data(), weight.data(), dist.size());
}

double weighted_min_sum(std::span<const double> dist_a, std::span<const double> dist_b,
                        std::span<const double> weight) {
  assert(dist_a.size() == weight.size() && dist_b.size() == weight.size());
#if defined(DSLC_HAVE_AVX2)
  if (active_backend() == Backend::avx2)
    return avx2::weighted_min_sum(dist_a.data(), dist_b.data(), weight.data(), weight.size());
#endif
  return scalar::weighted_min_sum(dist_a.data(), dist_b.data(), weight.data(), weight.size());
}

void rank_one_downdate(std::span<double> matrix, std::span<const double> column, double scale) {
  assert(matrix.size() == column.size() * column.size());
#if defined(DSLC_HAVE_AVX2)
  if (active_backend() == Backend::avx2) {
    avx2::rank_one_downdate(matrix.data(), column.data(), scale, column.size());
    return;
  }
#endif
  scalar::rank_one_downdate(matrix.data(), column.data(), scale, column.size());
}

}  // namespace dslc::simd
