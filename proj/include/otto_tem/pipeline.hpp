#pragma once

// Experiment orchestration: dataset generation, feature extraction,
// cross-validated evaluation, quality-index sweeps and report tables.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "otto_tem/engine.hpp"
#include "otto_tem/mlkit.hpp"
#include "otto_tem/ssm.hpp"
#include "otto_tem/tda.hpp"
#include "otto_tem/vectorize.hpp"

namespace otto_tem::pipeline {

struct TdaConfig {
  std::size_t embed_dim = 3;
  std::size_t embed_tau = 10;
  std::size_t point_budget = 400;
  tda::SubsampleMethod subsample = tda::SubsampleMethod::Stride;
  /// Rips truncation as a fraction of the subsampled cloud's diameter.
  double max_scale_fraction = 0.5;
};

struct VectorizeConfig {
  std::size_t image_rows = 40;
  std::size_t image_cols = 40;
  double sigma = 0.02;
  std::string weight = "linear";
  double grid_pad = 0.05;
  std::size_t silhouette_points = 100;
};

enum class Method { TemImage, TemSilhouette, Ssm };
std::string_view method_name(Method m);
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::Ssm, Method::TemImage, Method::TemSilhouette};

/// Default upper end of the amplitude range for each degradation model.
double default_amplitude_max(engine::NoiseModel model);

struct ExperimentConfig {
  engine::NoiseModel model = engine::NoiseModel::TimingJitter;
  std::size_t n_trajectories = 200;
  double amplitude_min = 0.0;
  double amplitude_max = 0.25;
  /// Rows with amplitude > threshold are labelled degraded.
  double threshold = 0.125;
  int burn_in = 2;
  int window = 5;
  std::uint64_t master_seed = 1;
  int cv_folds = 5;
  std::uint64_t cv_seed = 0;
  /// Overrides amplitude-based labels with a seeded fair coin. Used for the
  /// no-signal control where every amplitude is equal.
  bool random_labels = false;
  engine::EngineParams engine;
  /// Model-specific knobs (OU rate and target, ripple wave numbers); model
  /// and amplitude are filled in per trajectory.
  engine::NoiseSpec noise_template;
  TdaConfig tda;
  VectorizeConfig vectorize;
  mlkit::TrainOptions train;

  /// Config with the default range and midpoint threshold for `model`.
  static ExperimentConfig for_model(engine::NoiseModel model);
  void validate() const;
};

/// Uniform amplitude draw and seed of trajectory `index`.
struct TrajectoryDraw {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  int label = 0;
};

TrajectoryDraw draw_trajectory(const ExperimentConfig& cfg, std::size_t index);
int label_for(double amplitude, double threshold);

struct GeneratedDataset {
  ExperimentConfig config;
  std::vector<TrajectoryDraw> draws;
  std::vector<engine::Trajectory> trajectories;
};

GeneratedDataset generate_dataset(const ExperimentConfig& cfg);

struct DiagramResult {
  tda::PersistenceDiagram diagram;
  double max_scale = 0.0;
  std::size_t points = 0;
};

/// Embed, subsample and compute H1 of one observable series.
DiagramResult series_diagram(std::span<const double> series, const TdaConfig& tda);

struct ReferenceDiagram {
  tda::PersistenceDiagram diagram;
  double max_scale = 0.0;
  engine::EngineParams params;
  std::uint64_t seed = 0;
  int burn_in = 15;
  int window = 15;
};

/// Noiseless run (seed 0, burn-in 15, window 15) through series_diagram.
ReferenceDiagram build_reference(const engine::EngineParams& p, const TdaConfig& tda = {});

/// Per-trajectory features that do not depend on the training split.
struct FeatureSet {
  Method method = Method::TemImage;
  std::vector<tda::PersistenceDiagram> diagrams;  // TEM methods
  std::vector<double> max_scales;                 // TEM methods
  std::vector<ssm::SSMFeatures> ssm;              // SSM
  std::vector<int> labels;
  std::vector<double> amplitudes;
};

FeatureSet extract_features(const GeneratedDataset& data, Method method);
FeatureSet extract_features(std::span<const std::vector<double>> observables,
                            std::span<const TrajectoryDraw> draws, const TdaConfig& tda,
                            Method method);

/// Vectorize every diagram on a grid or domain fit from the `fit_rows`
/// subset only.
mlkit::Dataset vectorize_features(const FeatureSet& fs, const VectorizeConfig& vc,
                                  std::span<const std::size_t> fit_rows);

/// Per-pixel amplitude correlation over an ensemble of diagrams, on one
/// image grid fit to all of them.
struct PixelMap {
  vectorize::ImageGrid grid;
  std::vector<double> r;
};
PixelMap ensemble_pixel_map(const FeatureSet& fs, const VectorizeConfig& vc);

struct ExperimentResult {
  Method method = Method::TemImage;
  engine::NoiseModel model = engine::NoiseModel::TimingJitter;
  std::vector<double> per_fold_auc;
  double mean_auc = 0.0;
  /// ROC of the first fold.
  std::vector<mlkit::RocPoint> roc;
};

/// Stratified k-fold CV with grid, domain and standardization fit on each
/// fold's training rows.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const FeatureSet& fs);

struct QiSweepRow {
  double amplitude = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double qi = 0.0;
  double wasserstein1 = 0.0;
  double bottleneck = 0.0;
  double work_mean = 0.0;
  double work_var = 0.0;
};

struct QiSweepConfig {
  engine::EngineParams engine;
  std::vector<double> grid{0.0, 0.0625, 0.125, 0.1875, 0.25};
  std::size_t runs_per_point = 20;
  int burn_in = 15;
  int window = 15;
  std::uint64_t master_seed = 7;
  bool compute_qi = true;
  TdaConfig tda;
};

/// Timing-jitter sweep: QI against `ref` and work statistics per run.
std::vector<QiSweepRow> qi_sweep(const QiSweepConfig& cfg, const ReferenceDiagram& ref);

/// Mean of work_var per grid point, in grid order.
std::vector<double> mean_work_variance(const QiSweepConfig& cfg, std::span<const QiSweepRow> rows);

/// Worker count: hardware concurrency capped by OTTO_TEM_THREADS.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on worker_count() threads. The first exception
/// is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace otto_tem::pipeline
