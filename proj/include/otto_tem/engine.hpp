#pragma once

// Finite-time quantum Otto engine on a single qubit, integrated in the Bloch
// representation with forward Euler.
//
// Cycle order: hot isochore, expansion stroke (omega_h -> omega_c), cold
// isochore, compression stroke (omega_c -> omega_h). The transverse field
// omega_x = omega_x_max * sin(pi s) is only on during the two unitary strokes.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace otto_tem::engine {

using Rng = std::mt19937_64;

/// Splitmix64 finalizer over (master_seed, index). Used to give every
/// trajectory its own generator independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

struct EngineParams {
  double omega_h = 2.0;
  double omega_c = 1.0;
  double T_h = 0.8;
  double T_c = 0.25;
  double gamma = 0.6;
  double omega_x_max = 1.0;
  double tau_h = 0.7;
  double tau_c = 0.7;
  double tau_1 = 0.6;
  double tau_3 = 0.6;
  int steps_per_stroke = 150;

  /// Throws std::domain_error when an invariant is violated.
  void validate() const;

  double dephasing_rate() const { return 0.5 * gamma; }
  double longitudinal_rate() const { return gamma; }
};

enum class NoiseModel { None, TimingJitter, RampDistortion, OUSweep, Ripple, Combined };

std::string_view noise_model_name(NoiseModel model);
/// Accepts the CLI spellings: none, jitter, ramp, ou, ripple, combined.
NoiseModel parse_noise_model(std::string_view name);

/// Per-channel intensities after resolving a NoiseSpec.
struct ChannelIntensities {
  double sigma_tau = 0.0;
  double sigma_alpha = 0.0;
  double sigma_ou = 0.0;
  double sigma_ripple = 0.0;
};

/// Fixed mixing proportions of the combined model, scaled by its master
/// intensity.
inline constexpr ChannelIntensities kCombinedMix{0.25, 0.5, 0.3, 0.4};

struct NoiseSpec {
  NoiseModel model = NoiseModel::None;
  double amplitude = 0.0;
  double ou_theta = 50.0;
  double ou_mu = 1.0;
  int ripple_k_expand = 10;
  int ripple_k_compress = 2;

  void validate() const;
  ChannelIntensities channels() const;
};

struct BlochState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm2() const { return x * x + y * y + z * z; }
  friend bool operator==(const BlochState&, const BlochState&) = default;
};

struct ControlFields {
  double omega_z = 0.0;
  double omega_x = 0.0;
};

enum class Sweep { Expand, Compress };

struct OUState {
  double alpha = 1.0;
};

inline constexpr double kMinSweepExponent = 0.01;
inline constexpr double kOUIntensityScale = 8.0;
/// Jittered durations never drop below this fraction of nominal.
inline constexpr double kDurationFloor = 0.05;

struct StrokeDurations {
  double tau_h = 0.0;
  double tau_1 = 0.0;
  double tau_c = 0.0;
  double tau_3 = 0.0;
};

struct Sample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double omega_x = 0.0;
  double omega_z = 0.0;
  int cycle_index = 0;
};

struct Trajectory {
  EngineParams params;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;
  /// Sample index at which each recorded cycle begins.
  std::vector<std::size_t> cycle_marks;
  std::vector<double> cycle_work;

  /// The measured observable <sigma_x>(t) over the recorded window.
  std::vector<double> observable() const;
};

/// Thermal fixed point -tanh(omega_z / 2T).
double z_eq(double omega_z, double T);

BlochState unitary_step(const BlochState& s, double omega_x, double omega_z, double dt);

BlochState dissipative_step(const BlochState& s, double omega_z, double T,
                            double gamma, double dt);

/// Control fields at normalized stroke time s in [0, 1].
ControlFields ramp_fields(double s, Sweep direction, double alpha,
                          double ripple_delta, int ripple_k, const EngineParams& p);

/// One Euler-Maruyama step of the sweep-exponent OU process. The effective
/// diffusion is kOUIntensityScale * sigma_ou and alpha is clamped from below
/// at kMinSweepExponent.
OUState ou_step(OUState state, double ds, double sigma_ou, double theta, double mu,
                double gaussian);

/// Applies tau_j * (1 + delta_j) with the duration floor, deltas ordered
/// (hot, expansion, cold, compression).
StrokeDurations scale_durations(const EngineParams& p, std::span<const double, 4> deltas);

StrokeDurations sample_stroke_durations(const EngineParams& p, double sigma_tau, Rng& rng);

/// <H> = (omega_z z + omega_x x) / 2
double internal_energy(const BlochState& s, double omega_x, double omega_z);

Trajectory run_trajectory(const EngineParams& p, const NoiseSpec& noise, int burn_in,
                          int record_cycles, std::uint64_t seed);

struct WorkStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Population mean and variance (1/N normalization).
WorkStats work_stats(std::span<const double> works);

}  // namespace otto_tem::engine
