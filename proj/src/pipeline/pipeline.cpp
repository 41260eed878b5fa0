#include "otto_tem/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace otto_tem::pipeline {

using engine::NoiseModel;

namespace {

double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Stream tags mixed into a trajectory seed for its non-engine draws.
constexpr std::uint64_t kAmplitudeStream = 0xA;
constexpr std::uint64_t kLabelStream = 0xB;

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::TemImage: return "tem-image";
    case Method::TemSilhouette: return "tem-silhouette";
    case Method::Ssm: return "ssm";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected tem-image, tem-silhouette or ssm)");
}

double default_amplitude_max(NoiseModel model) {
  switch (model) {
    case NoiseModel::None: return 0.0;
    case NoiseModel::TimingJitter: return 0.25;
    case NoiseModel::RampDistortion: return 0.5;
    case NoiseModel::OUSweep: return 0.3;
    case NoiseModel::Ripple: return 0.4;
    case NoiseModel::Combined: return 1.0;
  }
  return 0.0;
}

ExperimentConfig ExperimentConfig::for_model(NoiseModel model) {
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.amplitude_min = 0.0;
  cfg.amplitude_max = default_amplitude_max(model);
  cfg.threshold = 0.5 * (cfg.amplitude_min + cfg.amplitude_max);
  cfg.random_labels = model == NoiseModel::None;
  return cfg;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::domain_error("ExperimentConfig: " + what); };
  engine.validate();
  noise_template.validate();
  if (n_trajectories < 2) fail("n_trajectories must be >= 2");
  if (!(amplitude_min >= 0.0) || !(amplitude_max >= amplitude_min)) {
    fail("amplitude range must satisfy 0 <= min <= max");
  }
  if (model == NoiseModel::None && amplitude_max != 0.0) fail("model none requires amplitude range [0, 0]");
  if (!random_labels && !(threshold > amplitude_min && threshold < amplitude_max)) {
    fail("threshold must lie strictly inside the amplitude range");
  }
  if (burn_in < 0) fail("burn_in must be >= 0");
  if (window < 1) fail("window must be >= 1");
  if (cv_folds < 2) fail("cv_folds must be >= 2");
  if (tda.embed_dim < 1 || tda.embed_tau < 1) fail("embedding dimension and delay must be >= 1");
  if (tda.point_budget < 2) fail("point_budget must be >= 2");
  if (!(tda.max_scale_fraction > 0.0)) fail("max_scale_fraction must be > 0");
  if (vectorize.image_rows == 0 || vectorize.image_cols == 0) fail("image resolution must be positive");
  if (!(vectorize.sigma > 0.0)) fail("sigma must be > 0");
  if (vectorize.silhouette_points < 2) fail("silhouette_points must be >= 2");
  vectorize::weight_by_name(vectorize.weight);
}

int label_for(double amplitude, double threshold) { return amplitude > threshold ? 1 : 0; }

TrajectoryDraw draw_trajectory(const ExperimentConfig& cfg, std::size_t index) {
  TrajectoryDraw d;
  d.index = index;
  d.seed = engine::derive_seed(cfg.master_seed, index);
  const double u = unit_interval(engine::derive_seed(d.seed, kAmplitudeStream));
  d.amplitude = cfg.amplitude_min + (cfg.amplitude_max - cfg.amplitude_min) * u;
  d.label = cfg.random_labels ? static_cast<int>(engine::derive_seed(d.seed, kLabelStream) >> 63)
                              : label_for(d.amplitude, cfg.threshold);
  return d;
}

GeneratedDataset generate_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  GeneratedDataset out;
  out.config = cfg;
  out.draws.resize(cfg.n_trajectories);
  out.trajectories.resize(cfg.n_trajectories);
  parallel_for(cfg.n_trajectories, [&](std::size_t i) {
    const TrajectoryDraw d = draw_trajectory(cfg, i);
    engine::NoiseSpec noise = cfg.noise_template;
    noise.model = cfg.model;
    noise.amplitude = d.amplitude;
    out.draws[i] = d;
    out.trajectories[i] = engine::run_trajectory(cfg.engine, noise, cfg.burn_in, cfg.window, d.seed);
  });
  return out;
}

DiagramResult series_diagram(std::span<const double> series, const TdaConfig& tda) {
  const auto cloud = tda::subsample(tda::delay_embed(series, tda.embed_dim, tda.embed_tau),
                                    tda.point_budget, tda.subsample);
  const auto dm = cloud.distance_matrix();
  const double diam = *std::max_element(dm.begin(), dm.end());
  DiagramResult r;
  r.points = cloud.size();
  // A cloud of coincident points has no loops at any scale.
  r.max_scale = diam > 0.0 ? tda.max_scale_fraction * diam : 1.0;
  r.diagram = tda::rips_persistence_h1(dm, cloud.size(), r.max_scale);
  return r;
}

ReferenceDiagram build_reference(const engine::EngineParams& p, const TdaConfig& tda) {
  ReferenceDiagram ref;
  ref.params = p;
  const auto traj = engine::run_trajectory(p, engine::NoiseSpec{}, ref.burn_in, ref.window, ref.seed);
  const auto obs = traj.observable();
  auto r = series_diagram(obs, tda);
  ref.diagram = std::move(r.diagram);
  ref.max_scale = r.max_scale;
  return ref;
}

FeatureSet extract_features(std::span<const std::vector<double>> observables,
                            std::span<const TrajectoryDraw> draws, const TdaConfig& tda,
                            Method method) {
  if (observables.size() != draws.size()) throw std::invalid_argument("extract_features: count mismatch");
  FeatureSet fs;
  fs.method = method;
  const std::size_t n = observables.size();
  for (const auto& d : draws) {
    fs.labels.push_back(d.label);
    fs.amplitudes.push_back(d.amplitude);
  }
  if (method == Method::Ssm) {
    fs.ssm.resize(n);
    // Frequencies in cycles per sample.
    parallel_for(n, [&](std::size_t i) { fs.ssm[i] = ssm::ssm_features(observables[i], 1.0); });
  } else {
    fs.diagrams.resize(n);
    fs.max_scales.resize(n);
    parallel_for(n, [&](std::size_t i) {
      auto r = series_diagram(observables[i], tda);
      fs.diagrams[i] = std::move(r.diagram);
      fs.max_scales[i] = r.max_scale;
    });
  }
  return fs;
}

FeatureSet extract_features(const GeneratedDataset& data, Method method) {
  std::vector<std::vector<double>> obs(data.trajectories.size());
  for (std::size_t i = 0; i < obs.size(); ++i) obs[i] = data.trajectories[i].observable();
  return extract_features(obs, data.draws, data.config.tda, method);
}

mlkit::Dataset vectorize_features(const FeatureSet& fs, const VectorizeConfig& vc,
                                  std::span<const std::size_t> fit_rows) {
  mlkit::Dataset out;
  const std::size_t n = fs.labels.size();
  if (fs.method == Method::Ssm) {
    out.dim = ssm::SSMFeatures::kCount;
    for (std::size_t i = 0; i < n; ++i) out.add(fs.ssm[i].as_array(), fs.labels[i], fs.amplitudes[i]);
    return out;
  }
  std::vector<tda::PersistenceDiagram> fit;
  fit.reserve(fit_rows.size());
  for (std::size_t i : fit_rows) fit.push_back(fs.diagrams.at(i));
  if (fs.method == Method::TemImage) {
    const auto grid = vectorize::fit_image_grid(fit, vc.image_rows, vc.image_cols, vc.sigma, vc.grid_pad);
    const auto weight = vectorize::weight_by_name(vc.weight);
    out.dim = grid.size();
    out.features.resize(n * out.dim);
    parallel_for(n, [&](std::size_t i) {
      const auto img = vectorize::persistence_image(fs.diagrams[i], grid, weight);
      std::copy(img.pixels.begin(), img.pixels.end(), out.features.begin() + static_cast<std::ptrdiff_t>(i * out.dim));
    });
  } else {
    const auto [lo, hi] = vectorize::fit_silhouette_domain(fit);
    out.dim = vc.silhouette_points;
    out.features.resize(n * out.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = vectorize::persistence_silhouette(fs.diagrams[i], vc.silhouette_points, lo, hi);
      std::copy(s.values.begin(), s.values.end(), out.features.begin() + static_cast<std::ptrdiff_t>(i * out.dim));
    }
  }
  out.labels = fs.labels;
  out.amplitudes = fs.amplitudes;
  return out;
}

PixelMap ensemble_pixel_map(const FeatureSet& fs, const VectorizeConfig& vc) {
  if (fs.method == Method::Ssm) throw std::invalid_argument("ensemble_pixel_map: needs diagrams");
  PixelMap out;
  out.grid = vectorize::fit_image_grid(fs.diagrams, vc.image_rows, vc.image_cols, vc.sigma, vc.grid_pad);
  const auto weight = vectorize::weight_by_name(vc.weight);
  std::vector<vectorize::PersistenceImage> images(fs.diagrams.size());
  parallel_for(images.size(), [&](std::size_t i) {
    images[i] = vectorize::persistence_image(fs.diagrams[i], out.grid, weight);
  });
  out.r = mlkit::pearson_pixel_map(images, fs.amplitudes);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const FeatureSet& fs) {
  cfg.validate();
  const auto cv = mlkit::kfold_cv(
      fs.labels, cfg.cv_folds, cfg.cv_seed,
      [&](std::span<const std::size_t> train, std::span<const std::size_t> test) {
        const auto all = vectorize_features(fs, cfg.vectorize, train);
        const auto model = mlkit::logreg_train(all.subset(train), cfg.train);
        std::vector<double> scores;
        scores.reserve(test.size());
        for (std::size_t i : test) scores.push_back(mlkit::logreg_decision(model, all.row(i)));
        return scores;
      });
  ExperimentResult r;
  r.method = fs.method;
  r.model = cfg.model;
  r.per_fold_auc = cv.per_fold_auc();
  r.mean_auc = cv.mean_auc;
  r.roc = cv.folds.front().roc.points;
  return r;
}

std::vector<QiSweepRow> qi_sweep(const QiSweepConfig& cfg, const ReferenceDiagram& ref) {
  cfg.engine.validate();
  for (double a : cfg.grid) {
    if (!(a >= 0.0 && a <= 0.25)) throw std::domain_error("qi_sweep: grid must lie within [0, 0.25]");
  }
  if (cfg.runs_per_point < 1) throw std::domain_error("qi_sweep: runs_per_point must be >= 1");
  std::vector<QiSweepRow> rows(cfg.grid.size() * cfg.runs_per_point);
  parallel_for(rows.size(), [&](std::size_t k) {
    QiSweepRow& row = rows[k];
    row.amplitude = cfg.grid[k / cfg.runs_per_point];
    row.run = k % cfg.runs_per_point;
    row.seed = engine::derive_seed(cfg.master_seed, k);
    engine::NoiseSpec noise;
    noise.model = NoiseModel::TimingJitter;
    noise.amplitude = row.amplitude;
    const auto traj = engine::run_trajectory(cfg.engine, noise, cfg.burn_in, cfg.window, row.seed);
    const auto ws = engine::work_stats(traj.cycle_work);
    row.work_mean = ws.mean;
    row.work_var = ws.variance;
    if (cfg.compute_qi) {
      const auto d = series_diagram(traj.observable(), cfg.tda);
      const auto q = tda::quality_index(d.diagram, ref.diagram);
      row.qi = q.qi;
      row.wasserstein1 = q.wasserstein1;
      row.bottleneck = q.bottleneck;
    }
  });
  return rows;
}

std::vector<double> mean_work_variance(const QiSweepConfig& cfg, std::span<const QiSweepRow> rows) {
  std::vector<double> sum(cfg.grid.size(), 0.0);
  std::vector<std::size_t> count(cfg.grid.size(), 0);
  for (const auto& r : rows) {
    const auto it = std::find(cfg.grid.begin(), cfg.grid.end(), r.amplitude);
    if (it == cfg.grid.end()) continue;
    const auto g = static_cast<std::size_t>(it - cfg.grid.begin());
    sum[g] += r.work_var;
    ++count[g];
  }
  for (std::size_t g = 0; g < sum.size(); ++g) sum[g] = count[g] ? sum[g] / static_cast<double>(count[g]) : 0.0;
  return sum;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OTTO_TEM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace otto_tem::pipeline
