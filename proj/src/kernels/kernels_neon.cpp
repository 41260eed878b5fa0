// aarch64 only. NEON is baseline on aarch64, so no runtime check is needed.

#include <arm_neon.h>

#include <cmath>

#include "variants.hpp"

namespace otto_tem::kernels::detail {

void pairwise_distances3_neon(const double* xyz, std::size_t n, double* out) {
  double* xs = new double[3 * n];
  double* ys = xs + n;
  double* zs = ys + n;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = xyz[3 * i];
    ys[i] = xyz[3 * i + 1];
    zs[i] = xyz[3 * i + 2];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t xi = vdupq_n_f64(xs[i]);
    const float64x2_t yi = vdupq_n_f64(ys[i]);
    const float64x2_t zi = vdupq_n_f64(zs[i]);
    double* row = out + i * n;
    row[i] = 0.0;
    std::size_t j = i + 1;
    for (; j + 2 <= n; j += 2) {
      const float64x2_t dx = vsubq_f64(xi, vld1q_f64(xs + j));
      const float64x2_t dy = vsubq_f64(yi, vld1q_f64(ys + j));
      const float64x2_t dz = vsubq_f64(zi, vld1q_f64(zs + j));
      // Separate multiply and add (no vfmaq) to match the scalar rounding.
      float64x2_t acc = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
      acc = vaddq_f64(acc, vmulq_f64(dz, dz));
      vst1q_f64(row + j, vsqrtq_f64(acc));
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

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double res = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void rank1_update_neon(double alpha, const double* u, std::size_t rows,
                       const double* v, std::size_t cols, double* image) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_neon(alpha * u[r], v, image + r * cols, cols);
  }
}

}  // namespace otto_tem::kernels::detail
