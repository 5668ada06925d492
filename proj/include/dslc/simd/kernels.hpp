#pragma once

// Data-parallel inner loops shared by the coverage and inference code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is selected once at startup from CPUID and
// may be overridden with set_backend() (the CLI exposes it as --simd). Results of
// the two backends agree to rounding, not bit-for-bit: summation order differs.

#include <cstddef>
#include <span>
#include <string_view>

namespace dslc::simd {

enum class Backend { scalar, avx2 };

/// Sum of dist[k] * weight[k].
double weighted_sum(std::span<const double> dist, std::span<const double> weight);

/// Sum of min(dist_a[k], dist_b[k]) * weight[k].
double weighted_min_sum(std::span<const double> dist_a, std::span<const double> dist_b,
                        std::span<const double> weight);

/// Row-major n x n update: matrix -= scale * column * column^T.
void rank_one_downdate(std::span<double> matrix, std::span<const double> column, double scale);

Backend active_backend();
/// Returns false (and leaves the backend unchanged) if the CPU lacks support.
bool set_backend(Backend backend);
bool backend_available(Backend backend);
std::string_view backend_name(Backend backend);

// Direct entry points, used by the equivalence tests.
namespace scalar {
double weighted_sum(const double* dist, const double* weight, std::size_t n);
double weighted_min_sum(const double* dist_a, const double* dist_b, const double* weight,
                        std::size_t n);
void rank_one_downdate(double* matrix, const double* column, double scale, std::size_t n);
}  // namespace scalar

#if defined(DSLC_HAVE_AVX2)
namespace avx2 {
double weighted_sum(const double* dist, const double* weight, std::size_t n);
double weighted_min_sum(const double* dist_a, const double* dist_b, const double* weight,
                        std::size_t n);
void rank_one_downdate(double* matrix, const double* column, double scale, std::size_t n);
}  // namespace avx2
#endif

}  // namespace dslc::simd
