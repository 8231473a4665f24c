#include <cmath>
#include <cstdlib>
#include <string_view>

#include "kernels.hpp"

namespace tabret::simd {

std::vector<const Kernels*> available_kernels() {
  std::vector<const Kernels*> out{&scalar_kernels()};
#if defined(TABRET_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) out.push_back(&detail::avx2_kernels());
#endif
#if defined(TABRET_HAVE_NEON)
  out.push_back(&detail::neon_kernels());
#endif
  return out;
}

const Kernels& active_kernels() {
  static const Kernels& chosen = []() -> const Kernels& {
    auto all = available_kernels();
    if (const char* env = std::getenv("TABRET_SIMD")) {
      for (const auto* k : all)
        if (std::string_view(env) == k->name) return *k;
      return scalar_kernels();
    }
    return *all.back();
  }();
  return chosen;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  const auto& k = active_kernels();
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  const double na = k.dot(a.data(), a.data(), n);
  const double nb = k.dot(b.data(), b.data(), n);
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  const double c = k.dot(a.data(), b.data(), n) / std::sqrt(na * nb);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

}  // namespace tabret::simd
