#pragma once

#include "tabret/simd.hpp"

namespace tabret::simd::detail {

#if defined(TABRET_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif
#if defined(TABRET_HAVE_NEON)
const Kernels& neon_kernels();
#endif

}  // namespace tabret::simd::detail
