#pragma once

// File formats. All numbers are written with 9 significant digits and every
// file is written to a temporary sibling and renamed into place.
//
// Dataset directory layout:
//   config.json                 ExperimentConfig
//   manifest.json               per-trajectory index, seed, amplitude, label
//   trajectories/traj_NNNNN.csv t,x,y,z,omega_x,omega_z,cycle_index
//   trajectories/traj_NNNNN.json params, noise, seed, cycle marks and work
//   diagrams/diag_NNNNN.csv     H1 diagrams (written by featurize)
//   features/<method>.csv       label, amplitude, feature values
//   metrics/<method>.json       cross-validated AUC

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "otto_tem/pipeline.hpp"

namespace otto_tem::io {

namespace fs = std::filesystem;
using Json = nlohmann::json;

/// printf("%.9g").
std::string fmt(double v);
/// Value as printed by fmt(), so JSON output carries at most 9 significant digits.
double round9(double v);

void write_text_atomic(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

Json to_json(const engine::EngineParams& p);
engine::EngineParams engine_params_from_json(const Json& j);
Json to_json(const engine::NoiseSpec& n);
engine::NoiseSpec noise_spec_from_json(const Json& j);

/// Missing keys keep their defaults; a "model" key switches the amplitude
/// range and threshold defaults to that model's before other keys apply.
Json to_json(const pipeline::ExperimentConfig& cfg);
pipeline::ExperimentConfig config_from_json(const Json& j);
pipeline::ExperimentConfig load_config(const fs::path& path);

std::string trajectory_csv(const engine::Trajectory& t);
Json trajectory_sidecar(const engine::Trajectory& t);
/// Observable column of a trajectory CSV.
std::vector<double> read_observable(const fs::path& csv);

void write_dataset(const fs::path& dir, const pipeline::GeneratedDataset& data);

/// Everything featurize needs from a dataset directory: config, draws and
/// the observable series.
struct StoredDataset {
  pipeline::ExperimentConfig config;
  std::vector<pipeline::TrajectoryDraw> draws;
  std::vector<std::vector<double>> observables;
};
StoredDataset load_dataset(const fs::path& dir);

/// Writes diagrams (TEM methods) and the feature CSV. Images and silhouettes
/// in the CSV use a grid fit over all rows; evaluation refits per fold.
void write_features(const fs::path& dir, const pipeline::FeatureSet& fs,
                    const pipeline::VectorizeConfig& vc);
pipeline::FeatureSet load_features(const fs::path& dir, pipeline::Method method);

Json to_json(const pipeline::ExperimentResult& r);
void write_result(const fs::path& dir, const pipeline::ExperimentResult& r);

std::string qi_sweep_csv(std::span<const pipeline::QiSweepRow> rows);
std::string grid_csv(std::span<const double> values, std::size_t rows, std::size_t cols);

struct ReportFiles {
  fs::path auc_table;
  fs::path pixel_map;
};

/// Reads <root>/<model>/metrics/<method>.json for the five degradation
/// models and three methods, and the jitter diagrams, then writes
/// <root>/table_auc.csv and <root>/pixel_map_jitter.csv. Throws
/// std::runtime_error listing every missing run.
ReportFiles emit_report(const fs::path& root);

}  // namespace otto_tem::io
