#include "otto_tem/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace otto_tem::engine {

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void EngineParams::validate() const {
  auto fail = [](const char* what) { throw std::domain_error(std::string("EngineParams: ") + what); };
  if (!(omega_c > 0.0 && omega_h > omega_c)) fail("require omega_h > omega_c > 0");
  if (!(T_c > 0.0 && T_h > T_c)) fail("require T_h > T_c > 0");
  if (!(gamma > 0.0)) fail("require gamma > 0");
  if (!(omega_x_max >= 0.0)) fail("require omega_x_max >= 0");
  if (!(tau_h > 0.0 && tau_c > 0.0 && tau_1 > 0.0 && tau_3 > 0.0)) fail("stroke durations must be positive");
  if (steps_per_stroke < 1) fail("steps_per_stroke must be >= 1");
}

std::string_view noise_model_name(NoiseModel model) {
  switch (model) {
    case NoiseModel::None: return "none";
    case NoiseModel::TimingJitter: return "jitter";
    case NoiseModel::RampDistortion: return "ramp";
    case NoiseModel::OUSweep: return "ou";
    case NoiseModel::Ripple: return "ripple";
    case NoiseModel::Combined: return "combined";
  }
  return "unknown";
}

NoiseModel parse_noise_model(std::string_view name) {
  for (auto m : {NoiseModel::None, NoiseModel::TimingJitter, NoiseModel::RampDistortion,
                 NoiseModel::OUSweep, NoiseModel::Ripple, NoiseModel::Combined}) {
    if (noise_model_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown noise model: " + std::string(name));
}

void NoiseSpec::validate() const {
  if (!(amplitude >= 0.0)) throw std::domain_error("NoiseSpec: amplitude must be >= 0");
  if (model == NoiseModel::None && amplitude != 0.0) {
    throw std::domain_error("NoiseSpec: model none requires amplitude 0");
  }
  if (!(ou_theta >= 0.0)) throw std::domain_error("NoiseSpec: ou_theta must be >= 0");
  for (int k : {ripple_k_expand, ripple_k_compress}) {
    if (k < 2 || k % 2 != 0) throw std::domain_error("NoiseSpec: ripple wave numbers must be even and >= 2");
  }
}

ChannelIntensities NoiseSpec::channels() const {
  ChannelIntensities c;
  switch (model) {
    case NoiseModel::None: break;
    case NoiseModel::TimingJitter: c.sigma_tau = amplitude; break;
    case NoiseModel::RampDistortion: c.sigma_alpha = amplitude; break;
    case NoiseModel::OUSweep: c.sigma_ou = amplitude; break;
    case NoiseModel::Ripple: c.sigma_ripple = amplitude; break;
    case NoiseModel::Combined:
      c.sigma_tau = amplitude * kCombinedMix.sigma_tau;
      c.sigma_alpha = amplitude * kCombinedMix.sigma_alpha;
      c.sigma_ou = amplitude * kCombinedMix.sigma_ou;
      c.sigma_ripple = amplitude * kCombinedMix.sigma_ripple;
      break;
  }
  return c;
}

std::vector<double> Trajectory::observable() const {
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s.x);
  return xs;
}

double z_eq(double omega_z, double T) {
  if (!(T > 0.0)) throw std::domain_error("z_eq: temperature must be positive");
  return -std::tanh(omega_z / (2.0 * T));
}

BlochState unitary_step(const BlochState& s, double omega_x, double omega_z, double dt) {
  return {s.x - dt * omega_z * s.y,
          s.y + dt * (omega_z * s.x - omega_x * s.z),
          s.z + dt * omega_x * s.y};
}

BlochState dissipative_step(const BlochState& s, double omega_z, double T, double gamma,
                            double dt) {
  const double target = z_eq(omega_z, T);
  const double g2 = 0.5 * gamma;
  return {s.x + dt * (-g2 * s.x - omega_z * s.y),
          s.y + dt * (omega_z * s.x - g2 * s.y),
          s.z - dt * gamma * (s.z - target)};
}

ControlFields ramp_fields(double s, Sweep direction, double alpha, double ripple_delta,
                          int ripple_k, const EngineParams& p) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("ramp_fields: s outside [0, 1]");
  if (!(alpha >= kMinSweepExponent)) throw std::domain_error("ramp_fields: alpha below 0.01");
  const double from = direction == Sweep::Expand ? p.omega_h : p.omega_c;
  const double to = direction == Sweep::Expand ? p.omega_c : p.omega_h;
  const double ripple =
      ripple_delta == 0.0 ? 0.0 : ripple_delta * std::sin(ripple_k * std::numbers::pi * s);
  ControlFields f;
  f.omega_z = from + (to - from) * std::pow(s, alpha) + ripple;
  f.omega_x = p.omega_x_max * std::sin(std::numbers::pi * s);
  return f;
}

OUState ou_step(OUState state, double ds, double sigma_ou, double theta, double mu,
                double gaussian) {
  const double sigma_eff = kOUIntensityScale * sigma_ou;
  double a = state.alpha + theta * (mu - state.alpha) * ds + sigma_eff * std::sqrt(ds) * gaussian;
  return {std::max(a, kMinSweepExponent)};
}

StrokeDurations scale_durations(const EngineParams& p, std::span<const double, 4> deltas) {
  auto scale = [](double tau, double delta) {
    return std::max(tau * (1.0 + delta), kDurationFloor * tau);
  };
  return {scale(p.tau_h, deltas[0]), scale(p.tau_1, deltas[1]), scale(p.tau_c, deltas[2]),
          scale(p.tau_3, deltas[3])};
}

StrokeDurations sample_stroke_durations(const EngineParams& p, double sigma_tau, Rng& rng) {
  if (!(sigma_tau >= 0.0)) throw std::domain_error("sample_stroke_durations: sigma_tau < 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, 4> deltas{};
  for (double& d : deltas) d = sigma_tau * normal(rng);
  return scale_durations(p, deltas);
}

double internal_energy(const BlochState& s, double omega_x, double omega_z) {
  return 0.5 * (omega_z * s.z + omega_x * s.x);
}

namespace {

struct StrokeNoise {
  double alpha = 1.0;         // static exponent (ramp channel)
  double ripple_delta = 0.0;  // ripple amplitude for this stroke
  int ripple_k = 2;
};

class CycleRunner {
 public:
  CycleRunner(const EngineParams& p, const NoiseSpec& noise, std::uint64_t seed,
              BlochState initial)
      : p_(p), noise_(noise), ch_(noise.channels()), rng_(seed), r_(initial) {
    const NoiseModel m = noise.model;
    jitter_ = m == NoiseModel::TimingJitter || m == NoiseModel::Combined;
    ramp_ = m == NoiseModel::RampDistortion || m == NoiseModel::Combined;
    ou_ = m == NoiseModel::OUSweep || m == NoiseModel::Combined;
    ripple_ = m == NoiseModel::Ripple || m == NoiseModel::Combined;
  }

  /// Runs one full cycle; appends samples when `out` is non-null and returns
  /// the cycle work.
  double run_cycle(std::vector<Sample>* out, int cycle_index) {
    StrokeDurations d{p_.tau_h, p_.tau_1, p_.tau_c, p_.tau_3};
    if (jitter_) d = sample_stroke_durations(p_, ch_.sigma_tau, rng_);

    StrokeNoise expand{1.0, 0.0, noise_.ripple_k_expand};
    StrokeNoise compress{1.0, 0.0, noise_.ripple_k_compress};
    if (ramp_) {
      expand.alpha = std::max(1.0 + ch_.sigma_alpha * normal_(rng_), kMinSweepExponent);
      compress.alpha = std::max(1.0 + ch_.sigma_alpha * normal_(rng_), kMinSweepExponent);
    }
    if (ripple_) {
      expand.ripple_delta = ch_.sigma_ripple * normal_(rng_);
      compress.ripple_delta = ch_.sigma_ripple * normal_(rng_);
    }

    isochore(d.tau_h, p_.omega_h, p_.T_h, out, cycle_index);
    double work = unitary(d.tau_1, Sweep::Expand, expand, out, cycle_index);
    isochore(d.tau_c, p_.omega_c, p_.T_c, out, cycle_index);
    work += unitary(d.tau_3, Sweep::Compress, compress, out, cycle_index);
    return work;
  }

  std::size_t sample_count_hint(int cycles) const {
    return static_cast<std::size_t>(cycles) * 4 * static_cast<std::size_t>(p_.steps_per_stroke);
  }

 private:
  void record(std::vector<Sample>* out, const ControlFields& f, int cycle_index) const {
    if (out) out->push_back({t_, r_.x, r_.y, r_.z, f.omega_x, f.omega_z, cycle_index});
  }

  void isochore(double tau, double omega_z, double T, std::vector<Sample>* out, int cycle_index) {
    const int n = p_.steps_per_stroke;
    const double dt = tau / n;
    for (int k = 0; k < n; ++k) {
      record(out, {omega_z, 0.0}, cycle_index);
      r_ = dissipative_step(r_, omega_z, T, p_.gamma, dt);
      t_ += dt;
    }
  }

  double unitary(double tau, Sweep dir, const StrokeNoise& sn, std::vector<Sample>* out,
                 int cycle_index) {
    const int n = p_.steps_per_stroke;
    const double dt = tau / n;
    const double ds = 1.0 / n;
    // With the ramp channel active the OU process reverts to this cycle's
    // static exponent instead of the configured mean.
    const double mu = ramp_ ? sn.alpha : noise_.ou_mu;
    OUState ou{ou_ ? mu : sn.alpha};

    ControlFields f = ramp_fields(0.0, dir, ou.alpha, sn.ripple_delta, sn.ripple_k, p_);
    double e_prev = internal_energy(r_, f.omega_x, f.omega_z);
    double work = 0.0;
    for (int k = 0; k < n; ++k) {
      record(out, f, cycle_index);
      r_ = unitary_step(r_, f.omega_x, f.omega_z, dt);
      t_ += dt;
      if (ou_) ou = ou_step(ou, ds, ch_.sigma_ou, noise_.ou_theta, mu, normal_(rng_));
      const double s_next = k + 1 == n ? 1.0 : static_cast<double>(k + 1) / n;
      f = ramp_fields(s_next, dir, ou.alpha, sn.ripple_delta, sn.ripple_k, p_);
      const double e_next = internal_energy(r_, f.omega_x, f.omega_z);
      work += e_next - e_prev;
      e_prev = e_next;
    }
    return work;
  }

  const EngineParams& p_;
  const NoiseSpec& noise_;
  ChannelIntensities ch_;
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  BlochState r_;
  double t_ = 0.0;
  bool jitter_ = false, ramp_ = false, ou_ = false, ripple_ = false;
};

}  // namespace

Trajectory run_trajectory(const EngineParams& p, const NoiseSpec& noise, int burn_in,
                          int record_cycles, std::uint64_t seed) {
  p.validate();
  noise.validate();
  if (burn_in < 0) throw std::domain_error("run_trajectory: burn_in must be >= 0");
  if (record_cycles < 1) throw std::domain_error("run_trajectory: record_cycles must be >= 1");

  Trajectory traj;
  traj.params = p;
  traj.noise = noise;
  traj.seed = seed;

  CycleRunner runner(p, traj.noise, seed, {0.0, 0.0, z_eq(p.omega_h, p.T_h)});
  traj.samples.reserve(runner.sample_count_hint(record_cycles));
  for (int c = 0; c < burn_in; ++c) runner.run_cycle(nullptr, -1);
  for (int c = 0; c < record_cycles; ++c) {
    traj.cycle_marks.push_back(traj.samples.size());
    traj.cycle_work.push_back(runner.run_cycle(&traj.samples, c));
  }
  return traj;
}

WorkStats work_stats(std::span<const double> works) {
  if (works.empty()) throw std::domain_error("work_stats: empty input");
  const double n = static_cast<double>(works.size());
  double mean = 0.0;
  for (double w : works) mean += w;
  mean /= n;
  double var = 0.0;
  for (double w : works) var += (w - mean) * (w - mean);
  return {mean, var / n};
}

}  // namespace otto_tem::engine
