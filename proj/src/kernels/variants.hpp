#pragma once

// Raw entry points of each kernel variant. Kept free of standard-library
// headers beyond <cstddef> so the per-ISA translation units stay minimal.

#include <cstddef>

namespace otto_tem::kernels::detail {

void pairwise_distances3_scalar(const double* xyz, std::size_t n, double* out);
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void rank1_update_scalar(double alpha, const double* u, std::size_t rows,
                         const double* v, std::size_t cols, double* image);

#if defined(__x86_64__) || defined(_M_X64)
#define OTTO_TEM_HAVE_AVX2_VARIANT 1
void pairwise_distances3_avx2(const double* xyz, std::size_t n, double* out);
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void rank1_update_avx2(double alpha, const double* u, std::size_t rows,
                       const double* v, std::size_t cols, double* image);
#endif

#if defined(__aarch64__)
#define OTTO_TEM_HAVE_NEON_VARIANT 1
void pairwise_distances3_neon(const double* xyz, std::size_t n, double* out);
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
void rank1_update_neon(double alpha, const double* u, std::size_t rows,
                       const double* v, std::size_t cols, double* image);
#endif

}  // namespace otto_tem::kernels::detail
