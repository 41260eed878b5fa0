#pragma once

// Six-statistic spectral-statistical baseline monitor.

#include <array>
#include <span>

namespace otto_tem::ssm {

struct SSMFeatures {
  double std_dev = 0.0;
  double skewness = 0.0;
  /// Raw fourth standardized moment (3 for a Gaussian).
  double kurtosis = 0.0;
  double peak_to_peak = 0.0;
  double rms = 0.0;
  /// Magnitude-weighted mean frequency of the positive-frequency DFT bins,
  /// excluding the zero-frequency bin.
  double spectral_centroid = 0.0;
  /// Set for constant input; skewness and kurtosis are then reported as 0.
  bool degenerate = false;

  static constexpr std::size_t kCount = 6;
  std::array<double, kCount> as_array() const {
    return {std_dev, skewness, kurtosis, peak_to_peak, rms, spectral_centroid};
  }
};

inline constexpr std::size_t kMinLength = 8;

/// Throws std::domain_error for series shorter than kMinLength or a
/// non-positive sample rate. Frequencies are in units of sample_rate.
SSMFeatures ssm_features(std::span<const double> series, double sample_rate);

}  // namespace otto_tem::ssm
