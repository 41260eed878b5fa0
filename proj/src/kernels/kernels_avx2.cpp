// Compiled with -mavx2 (see CMakeLists.txt). Only reached after a runtime
// CPUID check, so nothing here may be inlined into generic code.

#include <immintrin.h>

#include <cmath>

#include "variants.hpp"

namespace otto_tem::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void pairwise_distances3_avx2(const double* xyz, std::size_t n, double* out) {
  // Gather coordinates into structure-of-arrays so four j's load at once.
  double* xs = new double[3 * n];
  double* ys = xs + n;
  double* zs = ys + n;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = xyz[3 * i];
    ys[i] = xyz[3 * i + 1];
    zs[i] = xyz[3 * i + 2];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d xi = _mm256_set1_pd(xs[i]);
    const __m256d yi = _mm256_set1_pd(ys[i]);
    const __m256d zi = _mm256_set1_pd(zs[i]);
    double* row = out + i * n;
    row[i] = 0.0;
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) {
      const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(xs + j));
      const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(ys + j));
      const __m256d dz = _mm256_sub_pd(zi, _mm256_loadu_pd(zs + j));
      // ((dx*dx + dy*dy) + dz*dz), matching the scalar evaluation order.
      __m256d acc = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(dz, dz));
      _mm256_storeu_pd(row + j, _mm256_sqrt_pd(acc));
    }
    for (; j < n; ++j) {
      const double dx = xs[i] - xs[j];
      const double dy = ys[i] - ys[j];
      const double dz = zs[i] - zs[j];
      row[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    for (std::size_t k = i + 1; k < n; ++k) out[k * n + i] = row[k];
  }
  delete[] xs;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i,
                     _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void rank1_update_avx2(double alpha, const double* u, std::size_t rows,
                       const double* v, std::size_t cols, double* image) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = alpha * u[r];
    axpy_avx2(s, v, image + r * cols, cols);
  }
}

}  // namespace otto_tem::kernels::detail
