// Command-line front end for dataset generation, featurization, evaluation,
// quality-index sweeps and report tables.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "otto_tem/io.hpp"
#include "otto_tem/mlkit.hpp"
#include "otto_tem/pipeline.hpp"
#include "otto_tem/tda.hpp"

namespace fs = std::filesystem;
using namespace otto_tem;

namespace {

io::Json read_json_file(const fs::path& path) { return io::Json::parse(io::read_text(path)); }

std::vector<pipeline::Method> methods_for(const std::string& name) {
  if (name == "all") return {std::begin(pipeline::kAllMethods), std::end(pipeline::kAllMethods)};
  return {pipeline::parse_method(name)};
}

const std::vector<std::string> kMethodNames{"tem-image", "tem-silhouette", "ssm", "all"};
const std::vector<std::string> kModelNames{"none", "jitter", "ramp", "ou", "ripple", "combined"};

struct Options {
  std::string config;
  unsigned threads = 0;

  std::string ref_out = "reference";

  std::string model = "jitter";
  std::size_t n = 200;
  std::uint64_t seed = 1;
  std::string out = "data";

  std::string dir = "data";
  std::string method = "all";
  int cv = 5;

  std::string sweep_out = "qi_sweep.csv";
  std::string sweep_reference;
  std::vector<double> grid{0.0, 0.0625, 0.125, 0.1875, 0.25};
  std::size_t runs = 20;
  std::uint64_t sweep_seed = 7;
  int burn_in = 15;
  int window = 15;
  bool no_qi = false;

  std::string root = ".";
};

pipeline::ExperimentConfig base_config(const Options& o) {
  return o.config.empty() ? pipeline::ExperimentConfig{} : io::load_config(o.config);
}

void write_reference(const fs::path& dir, const pipeline::ReferenceDiagram& ref) {
  fs::create_directories(dir);
  std::ostringstream os;
  tda::write_diagram_csv(os, ref.diagram, ref.max_scale);
  io::write_text_atomic(dir / "reference_diagram.csv", os.str());
  const io::Json j{{"engine", io::to_json(ref.params)},
                   {"seed", ref.seed},
                   {"burn_in", ref.burn_in},
                   {"window", ref.window},
                   {"max_scale", io::round9(ref.max_scale)},
                   {"pairs", ref.diagram.size()}};
  io::write_text_atomic(dir / "reference.json", j.dump(2) + "\n");
}

int cmd_reference(const Options& o) {
  const auto cfg = base_config(o);
  const auto ref = pipeline::build_reference(cfg.engine, cfg.tda);
  write_reference(o.ref_out, ref);
  std::printf("reference: %zu H1 pairs, max_scale %s -> %s\n", ref.diagram.size(), io::fmt(ref.max_scale).c_str(),
              o.ref_out.c_str());
  return 0;
}

int cmd_dataset(const Options& o) {
  io::Json j = o.config.empty() ? io::Json::object() : read_json_file(o.config);
  // Setting the model before parsing picks up that model's range and threshold.
  j["model"] = o.model;
  j["n_trajectories"] = o.n;
  j["master_seed"] = o.seed;
  const auto cfg = io::config_from_json(j);
  cfg.validate();
  const auto data = pipeline::generate_dataset(cfg);
  io::write_dataset(o.out, data);
  std::size_t degraded = 0;
  for (const auto& d : data.draws) degraded += static_cast<std::size_t>(d.label);
  std::printf("dataset: model %s, %zu trajectories (%zu degraded) -> %s\n", o.model.c_str(), data.draws.size(),
              degraded, o.out.c_str());
  return 0;
}

int cmd_featurize(const Options& o) {
  const auto stored = io::load_dataset(o.dir);
  for (auto method : methods_for(o.method)) {
    const auto feats = pipeline::extract_features(stored.observables, stored.draws, stored.config.tda, method);
    io::write_features(o.dir, feats, stored.config.vectorize);
    std::printf("featurize: %s, %zu rows\n", std::string(pipeline::method_name(method)).c_str(), feats.labels.size());
  }
  return 0;
}

int cmd_evaluate(const Options& o) {
  auto cfg = io::load_config(fs::path(o.dir) / "config.json");
  cfg.cv_folds = o.cv;
  cfg.validate();
  for (auto method : methods_for(o.method)) {
    const auto feats = io::load_features(o.dir, method);
    const auto result = pipeline::run_experiment(cfg, feats);
    io::write_result(o.dir, result);
    std::printf("evaluate: %s mean AUC %s over %d folds\n", std::string(pipeline::method_name(method)).c_str(),
                io::fmt(result.mean_auc).c_str(), o.cv);
  }
  return 0;
}

int cmd_qi_sweep(const Options& o) {
  const auto cfg = base_config(o);
  pipeline::QiSweepConfig sweep;
  sweep.engine = cfg.engine;
  sweep.tda = cfg.tda;
  sweep.grid = o.grid;
  sweep.runs_per_point = o.runs;
  sweep.master_seed = o.sweep_seed;
  sweep.burn_in = o.burn_in;
  sweep.window = o.window;
  sweep.compute_qi = !o.no_qi;

  pipeline::ReferenceDiagram ref;
  if (!sweep.compute_qi) {
    // Work statistics only; no reference needed.
  } else if (!o.sweep_reference.empty()) {
    std::ifstream is(fs::path(o.sweep_reference) / "reference_diagram.csv");
    if (!is) throw std::runtime_error("cannot open reference diagram in " + o.sweep_reference);
    ref.diagram = tda::read_diagram_csv(is, &ref.max_scale);
  } else {
    ref = pipeline::build_reference(cfg.engine, cfg.tda);
  }

  const auto rows = pipeline::qi_sweep(sweep, ref);
  const fs::path out(o.sweep_out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_text_atomic(out, io::qi_sweep_csv(rows));

  const auto var = pipeline::mean_work_variance(sweep, rows);
  if (sweep.compute_qi) {
    std::vector<double> amp, qi;
    for (const auto& r : rows) {
      amp.push_back(r.amplitude);
      qi.push_back(r.qi);
    }
    std::printf("qi-sweep: %zu rows, pearson(amplitude, QI) %s\n", rows.size(), io::fmt(mlkit::pearson(amp, qi).r).c_str());
  } else {
    std::printf("qi-sweep: %zu rows\n", rows.size());
  }
  for (std::size_t g = 0; g < sweep.grid.size(); ++g) {
    std::printf("  amplitude %s mean Var_W %s\n", io::fmt(sweep.grid[g]).c_str(), io::fmt(var[g]).c_str());
  }
  std::printf("-> %s\n", out.string().c_str());
  return 0;
}

int cmd_report(const Options& o) {
  const auto files = io::emit_report(o.root);
  std::printf("report: %s, %s\n", files.auc_table.string().c_str(), files.pixel_map.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological and spectral-statistical monitors for a finite-time quantum Otto engine"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "ExperimentConfig JSON; missing keys keep defaults")->check(CLI::ExistingFile);
  app.add_option("--threads", o.threads, "Worker cap, same as OTTO_TEM_THREADS");

  auto* reference = app.add_subcommand("reference", "Noiseless reference diagram (burn-in 15, window 15, seed 0)");
  reference->add_option("--out", o.ref_out, "Output directory")->capture_default_str();

  auto* dataset = app.add_subcommand("dataset", "Simulate and store a labelled trajectory ensemble");
  dataset->add_option("--model", o.model, "Degradation model")->check(CLI::IsMember(kModelNames))->capture_default_str();
  dataset->add_option("--n", o.n, "Number of trajectories")->check(CLI::PositiveNumber)->capture_default_str();
  dataset->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  dataset->add_option("--out", o.out, "Dataset directory")->capture_default_str();

  auto* featurize = app.add_subcommand("featurize", "Diagrams and feature CSVs for a dataset directory");
  featurize->add_option("--method", o.method, "Feature method")->check(CLI::IsMember(kMethodNames))->capture_default_str();
  featurize->add_option("--dir", o.dir, "Dataset directory")->check(CLI::ExistingDirectory)->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold logistic-regression AUC");
  evaluate->add_option("--cv", o.cv, "Number of folds")->check(CLI::Range(2, 1000))->capture_default_str();
  evaluate->add_option("--method", o.method, "Feature method")->check(CLI::IsMember(kMethodNames))->capture_default_str();
  evaluate->add_option("--dir", o.dir, "Dataset directory")->check(CLI::ExistingDirectory)->capture_default_str();

  auto* sweep = app.add_subcommand("qi-sweep", "Timing-jitter sweep of QI and cycle-work statistics");
  sweep->add_option("--out", o.sweep_out, "Long-format CSV path")->capture_default_str();
  sweep->add_option("--reference", o.sweep_reference, "Directory written by `reference`; rebuilt when omitted")
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--grid", o.grid, "Jitter amplitudes")->delimiter(',')->capture_default_str();
  sweep->add_option("--runs", o.runs, "Runs per grid point")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--seed", o.sweep_seed, "Master seed")->capture_default_str();
  sweep->add_option("--burn-in", o.burn_in, "Discarded cycles (2 for the ML window)")->capture_default_str();
  sweep->add_option("--window", o.window, "Recorded cycles (5 for the ML window)")->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_flag("--no-qi", o.no_qi, "Work statistics only");

  auto* report = app.add_subcommand("report", "AUC table and jitter pixel-correlation map");
  report->add_option("--root", o.root, "Directory holding one dataset directory per model")
      ->check(CLI::ExistingDirectory)
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (o.threads > 0) setenv("OTTO_TEM_THREADS", std::to_string(o.threads).c_str(), 1);

  try {
    if (reference->parsed()) return cmd_reference(o);
    if (dataset->parsed()) return cmd_dataset(o);
    if (featurize->parsed()) return cmd_featurize(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (sweep->parsed()) return cmd_qi_sweep(o);
    if (report->parsed()) return cmd_report(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
