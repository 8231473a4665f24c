#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "tabret/random.hpp"
#include "tabret/simd.hpp"

using namespace tabret;

namespace {

std::vector<float> random_floats(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(standard_normal(rng) * 3.0);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const auto& k = simd::scalar_kernels();
  const float a[] = {1, 2, 3};
  const float b[] = {4, -5, 6};
  CHECK(k.dot(a, b, 3) == 12.0);
  CHECK(k.dot(a, b, 0) == 0.0);
  float y[] = {1, 1, 1};
  k.axpy(2.0f, a, y, 3);
  CHECK(y[0] == 3.0f);
  CHECK(y[1] == 5.0f);
  CHECK(y[2] == 7.0f);
}

TEST_CASE("available kernels start with scalar and include the active one") {
  auto all = simd::available_kernels();
  REQUIRE_FALSE(all.empty());
  CHECK(all.front()->isa == simd::Isa::kScalar);
  bool found = false;
  for (const auto* k : all) found = found || k == &simd::active_kernels();
  CHECK(found);
  MESSAGE("active kernels: " << std::string(simd::active_kernels().name));
}

TEST_CASE("every variant matches the scalar reference") {
  const auto& ref = simd::scalar_kernels();
  Rng rng(7);
  for (const auto* k : simd::available_kernels()) {
    CAPTURE(std::string(k->name));
    for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u, 200u, 300u, 1001u}) {
      CAPTURE(n);
      for (int rep = 0; rep < 5; ++rep) {
        auto a = random_floats(rng, n);
        auto b = random_floats(rng, n);
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) abs_sum += std::fabs(double(a[i]) * b[i]);
        const double bound = abs_sum * static_cast<double>(n + 1) * 0x1.0p-52;
        CHECK(std::fabs(k->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= bound);

        const float alpha = static_cast<float>(standard_normal(rng));
        auto y1 = b, y2 = b;
        ref.axpy(alpha, a.data(), y1.data(), n);
        k->axpy(alpha, a.data(), y2.data(), n);
        if (n > 0) CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(float)) == 0);
      }
    }
  }
}

TEST_CASE("kernels handle unaligned pointers") {
  Rng rng(11);
  auto a = random_floats(rng, 131);
  auto b = random_floats(rng, 131);
  const auto& ref = simd::scalar_kernels();
  for (const auto* k : simd::available_kernels()) {
    for (std::size_t off = 0; off < 4; ++off) {
      const std::size_t n = 127;
      CHECK(k->dot(a.data() + off, b.data() + off, n) ==
            doctest::Approx(ref.dot(a.data() + off, b.data() + off, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cosine") {
  const std::vector<float> x{1, 0}, y{0, 2}, z{0, 0}, w{3, 0};
  CHECK(simd::cosine(x, y) == 0.0);
  CHECK(simd::cosine(x, w) == doctest::Approx(1.0));
  CHECK(simd::cosine(x, z) == 0.0);
  const std::vector<float> u{1, 1};
  CHECK(simd::cosine(x, u) == doctest::Approx(std::sqrt(0.5)));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto a = random_floats(rng, 50);
    auto b = random_floats(rng, 50);
    const double c = simd::cosine(a, b);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(simd::cosine(a, a) == doctest::Approx(1.0));
  }
}
