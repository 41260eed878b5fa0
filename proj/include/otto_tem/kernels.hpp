#pragma once

// Data-parallel inner loops shared by the TDA and ML stages.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 (x86-64) or NEON (aarch64) variant. The active table
// is chosen once at startup from CPUID and can be forced back to scalar by
// setting OTTO_TEM_SIMD=scalar.

#include <cstddef>
#include <span>
#include <string_view>

namespace otto_tem::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Function table for one instruction set. All pointers are non-null.
struct KernelTable {
  Isa isa;

  /// Dense n x n Euclidean distance matrix of packed 3-vectors
  /// (xyz xyz ...). The result is bitwise identical across variants: the
  /// vector paths use the same operation order and no fused multiply-add.
  void (*pairwise_distances3)(const double* xyz, std::size_t n, double* out);

  double (*dot)(const double* a, const double* b, std::size_t n);

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// image[r * cols + c] += alpha * u[r] * v[c]
  void (*rank1_update)(double alpha, const double* u, std::size_t rows,
                       const double* v, std::size_t cols, double* image);
};

const KernelTable& scalar_table();

/// nullptr when the variant is not compiled in or not supported by this CPU.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// The table selected for this process.
const KernelTable& active();

// Convenience wrappers over active().

void pairwise_distances3(std::span<const double> xyz, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void rank1_update(double alpha, std::span<const double> u,
                  std::span<const double> v, std::span<double> image);

}  // namespace otto_tem::kernels
