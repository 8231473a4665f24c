#include <cmath>

#include "tabret/simd.hpp"

namespace tabret::simd {

namespace {

double dot_scalar(const float* a, const float* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

void axpy_scalar(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::kScalar, "scalar", dot_scalar, axpy_scalar};
  return k;
}

}  // namespace tabret::simd
