#include <cstdlib>
#include <stdexcept>
#include <string>

#include "otto_tem/kernels.hpp"
#include "variants.hpp"

namespace otto_tem::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, detail::pairwise_distances3_scalar,
                                 detail::dot_scalar, detail::axpy_scalar,
                                 detail::rank1_update_scalar};
  return table;
}

const KernelTable* avx2_table() {
#ifdef OTTO_TEM_HAVE_AVX2_VARIANT
  static const KernelTable table{Isa::Avx2, detail::pairwise_distances3_avx2,
                                 detail::dot_avx2, detail::axpy_avx2,
                                 detail::rank1_update_avx2};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#ifdef OTTO_TEM_HAVE_NEON_VARIANT
  static const KernelTable table{Isa::Neon, detail::pairwise_distances3_neon,
                                 detail::dot_neon, detail::axpy_neon,
                                 detail::rank1_update_neon};
  return &table;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("OTTO_TEM_SIMD")) {
    if (std::string(env) == "scalar") return scalar_table();
  }
  if (const KernelTable* t = avx2_table()) return *t;
  if (const KernelTable* t = neon_table()) return *t;
  return scalar_table();
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

void pairwise_distances3(std::span<const double> xyz, std::span<double> out) {
  require(xyz.size() % 3 == 0, "pairwise_distances3: input is not packed xyz");
  const std::size_t n = xyz.size() / 3;
  require(out.size() == n * n, "pairwise_distances3: output must be n*n");
  active().pairwise_distances3(xyz.data(), n, out.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void rank1_update(double alpha, std::span<const double> u,
                  std::span<const double> v, std::span<double> image) {
  require(image.size() == u.size() * v.size(), "rank1_update: shape mismatch");
  active().rank1_update(alpha, u.data(), u.size(), v.data(), v.size(), image.data());
}

}  // namespace otto_tem::kernels
