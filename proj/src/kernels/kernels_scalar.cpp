#include <cmath>

#include "variants.hpp"

namespace otto_tem::kernels::detail {

void pairwise_distances3_scalar(const double* xyz, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = xyz[3 * i], yi = xyz[3 * i + 1], zi = xyz[3 * i + 2];
    out[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = xi - xyz[3 * j];
      const double dy = yi - xyz[3 * j + 1];
      const double dz = zi - xyz[3 * j + 2];
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      out[i * n + j] = d;
      out[j * n + i] = d;
    }
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void rank1_update_scalar(double alpha, const double* u, std::size_t rows,
                         const double* v, std::size_t cols, double* image) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = alpha * u[r];
    double* row = image + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += s * v[c];
  }
}

}  // namespace otto_tem::kernels::detail
