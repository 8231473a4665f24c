#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Dense-vector kernels behind the embedding similarity features. Every
// instruction-set variant must agree with the scalar reference: dot products
// to rounding of the summation order, axpy bit for bit (all variants use
// fused multiply-add).

namespace tabret::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct Kernels {
  Isa isa;
  const char* name;
  /// Sum of a[i]*b[i], accumulated in double.
  double (*dot)(const float* a, const float* b, std::size_t n);
  /// y[i] = fma(alpha, x[i], y[i]).
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
};

const Kernels& scalar_kernels();

/// Variants compiled into this build and supported by the running CPU,
/// scalar first.
std::vector<const Kernels*> available_kernels();

/// The fastest available variant, chosen once per process. Setting the
/// environment variable TABRET_SIMD to scalar, avx2 or neon forces a variant
/// (falling back to scalar when it is unavailable).
const Kernels& active_kernels();

inline double dot(std::span<const float> a, std::span<const float> b) {
  return active_kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  active_kernels().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace tabret::simd
