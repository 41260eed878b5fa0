#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "generators.hpp"
#include "otto_tem/kernels.hpp"

using namespace otto_tem::kernels;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (const auto* t = avx2_table()) out.push_back(t);
  if (const auto* t = neon_table()) out.push_back(t);
  return out;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("active table is one of the variants") {
  const auto& a = active();
  bool found = false;
  for (const auto* t : variants()) found = found || t->isa == a.isa;
  CHECK(found);
  CHECK(isa_name(Isa::Scalar) == "scalar");
  MESSAGE("active kernels: " << isa_name(a.isa));
}

TEST_CASE("pairwise distances are bitwise identical across variants") {
  gen::Rng rng(1);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 101u}) {
    const auto xyz = gen::cloud_coords(rng, n, 3);
    std::vector<double> ref(n * n, -1.0);
    scalar_table().pairwise_distances3(xyz.data(), n, ref.data());
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(ref[i * n + i] == 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double dx = xyz[3 * i] - xyz[3 * j], dy = xyz[3 * i + 1] - xyz[3 * j + 1], dz = xyz[3 * i + 2] - xyz[3 * j + 2];
        REQUIRE(ref[i * n + j] == doctest::Approx(std::sqrt(dx * dx + dy * dy + dz * dz)).epsilon(1e-15));
        REQUIRE(ref[i * n + j] == ref[j * n + i]);
      }
    }
    for (const auto* t : variants()) {
      std::vector<double> out(n * n, -1.0);
      t->pairwise_distances3(xyz.data(), n, out.data());
      CHECK(out == ref);
    }
  }
}

TEST_CASE("dot, axpy and rank1_update agree across variants") {
  gen::Rng rng(2);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 9u, 17u, 1600u}) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = gen::uniform(rng, -1, 1);
      b[i] = gen::uniform(rng, -1, 1);
    }
    double ref_dot = 0.0, abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ref_dot += a[i] * b[i];
      abs_sum += std::abs(a[i] * b[i]);
    }
    for (const auto* t : variants()) {
      CHECK(std::abs(t->dot(a.data(), b.data(), n) - ref_dot) <= 1e-14 * (1.0 + abs_sum));
      auto y = b;
      t->axpy(0.37, a.data(), y.data(), n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(y[i] == doctest::Approx(b[i] + 0.37 * a[i]).epsilon(1e-15));
    }
  }
  for (std::size_t rows : {1u, 5u, 40u}) {
    for (std::size_t cols : {1u, 3u, 4u, 7u, 40u}) {
      std::vector<double> u(rows), v(cols), base(rows * cols);
      for (double& x : u) x = gen::uniform(rng, -1, 1);
      for (double& x : v) x = gen::uniform(rng, -1, 1);
      for (double& x : base) x = gen::uniform(rng, -1, 1);
      for (const auto* t : variants()) {
        auto img = base;
        t->rank1_update(1.5, u.data(), rows, v.data(), cols, img.data());
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            REQUIRE(img[r * cols + c] == doctest::Approx(base[r * cols + c] + 1.5 * u[r] * v[c]).epsilon(1e-14));
          }
        }
      }
    }
  }
}

TEST_CASE("span wrappers") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(dot(a, b) == 32.0);
  std::vector<double> y{1, 1, 1};
  axpy(2.0, a, y);
  CHECK(y == std::vector<double>{3, 5, 7});
  std::vector<double> img(6, 0.0);
  rank1_update(1.0, std::vector<double>{1, 2}, a, img);
  CHECK(img == std::vector<double>{1, 2, 3, 2, 4, 6});
}

}  // TEST_SUITE
