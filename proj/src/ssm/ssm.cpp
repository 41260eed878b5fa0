#include "otto_tem/ssm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace otto_tem::ssm {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// |X_k| for k = 0 .. n/2 of the real-input DFT.
std::vector<double> half_spectrum_magnitudes(std::span<const double> series) {
  const std::size_t n = series.size();
  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  if (!in || !out) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  }
  std::copy(series.begin(), series.end(), in.get());
  fftw_execute(plan);
  std::vector<double> mag(bins);
  for (std::size_t k = 0; k < bins; ++k) mag[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return mag;
}

}  // namespace

SSMFeatures ssm_features(std::span<const double> series, double sample_rate) {
  if (series.size() < kMinLength) throw std::domain_error("ssm_features: series too short");
  if (!(sample_rate > 0.0)) throw std::domain_error("ssm_features: sample_rate must be > 0");
  const double n = static_cast<double>(series.size());

  double mean = 0.0, sq = 0.0;
  for (double v : series) {
    mean += v;
    sq += v * v;
  }
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : series) {
    const double c = v - mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  // A constant series has a rounded mean that can leave ulp-level residuals.
  if (*hi == *lo) m2 = m3 = m4 = 0.0;

  SSMFeatures f;
  f.std_dev = std::sqrt(m2);
  f.peak_to_peak = *hi - *lo;
  f.rms = std::sqrt(sq / n);
  if (f.peak_to_peak == 0.0 || m2 == 0.0) {
    f.degenerate = true;
  } else {
    f.skewness = m3 / (m2 * f.std_dev);
    f.kurtosis = m4 / (m2 * m2);
  }

  const auto mag = half_spectrum_magnitudes(series);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k < mag.size(); ++k) {
    const double freq = static_cast<double>(k) * sample_rate / n;
    num += freq * mag[k];
    den += mag[k];
  }
  f.spectral_centroid = den > 0.0 ? num / den : 0.0;
  return f;
}

}  // namespace otto_tem::ssm
