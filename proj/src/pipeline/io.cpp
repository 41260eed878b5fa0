#include "otto_tem/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace otto_tem::io {

using pipeline::ExperimentConfig;
using pipeline::Method;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double round9(double v) { return std::strtod(fmt(v).c_str(), nullptr); }

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << text;
    if (!os.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

namespace {

std::string index_name(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu%s", prefix, i, ext);
  return buf;
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json rounded(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(round9(x));
  return a;
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(std::stod(cell));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

const char* subsample_name(tda::SubsampleMethod m) {
  return m == tda::SubsampleMethod::Stride ? "stride" : "maxmin";
}

tda::SubsampleMethod parse_subsample(const std::string& s) {
  if (s == "stride") return tda::SubsampleMethod::Stride;
  if (s == "maxmin") return tda::SubsampleMethod::MaxMin;
  throw std::invalid_argument("unknown subsample method '" + s + "'");
}

}  // namespace

Json to_json(const engine::EngineParams& p) {
  return {{"omega_h", p.omega_h}, {"omega_c", p.omega_c}, {"T_h", p.T_h},
          {"T_c", p.T_c},         {"gamma", p.gamma},     {"omega_x_max", p.omega_x_max},
          {"tau_h", p.tau_h},     {"tau_c", p.tau_c},     {"tau_1", p.tau_1},
          {"tau_3", p.tau_3},     {"steps_per_stroke", p.steps_per_stroke}};
}

engine::EngineParams engine_params_from_json(const Json& j) {
  engine::EngineParams p;
  take(j, "omega_h", p.omega_h);
  take(j, "omega_c", p.omega_c);
  take(j, "T_h", p.T_h);
  take(j, "T_c", p.T_c);
  take(j, "gamma", p.gamma);
  take(j, "omega_x_max", p.omega_x_max);
  take(j, "tau_h", p.tau_h);
  take(j, "tau_c", p.tau_c);
  take(j, "tau_1", p.tau_1);
  take(j, "tau_3", p.tau_3);
  take(j, "steps_per_stroke", p.steps_per_stroke);
  return p;
}

Json to_json(const engine::NoiseSpec& n) {
  return {{"model", std::string(engine::noise_model_name(n.model))},
          {"amplitude", round9(n.amplitude)},
          {"ou_theta", n.ou_theta},
          {"ou_mu", n.ou_mu},
          {"ripple_k_expand", n.ripple_k_expand},
          {"ripple_k_compress", n.ripple_k_compress}};
}

engine::NoiseSpec noise_spec_from_json(const Json& j) {
  engine::NoiseSpec n;
  if (j.contains("model")) n.model = engine::parse_noise_model(j.at("model").get<std::string>());
  take(j, "amplitude", n.amplitude);
  take(j, "ou_theta", n.ou_theta);
  take(j, "ou_mu", n.ou_mu);
  take(j, "ripple_k_expand", n.ripple_k_expand);
  take(j, "ripple_k_compress", n.ripple_k_compress);
  return n;
}

Json to_json(const ExperimentConfig& c) {
  const auto noise = to_json(c.noise_template);
  return {
      {"model", std::string(engine::noise_model_name(c.model))},
      {"n_trajectories", c.n_trajectories},
      {"amplitude_range", {c.amplitude_min, c.amplitude_max}},
      {"threshold", c.threshold},
      {"burn_in", c.burn_in},
      {"window", c.window},
      {"master_seed", c.master_seed},
      {"random_labels", c.random_labels},
      {"engine", to_json(c.engine)},
      {"noise",
       {{"ou_theta", noise["ou_theta"]},
        {"ou_mu", noise["ou_mu"]},
        {"ripple_k_expand", noise["ripple_k_expand"]},
        {"ripple_k_compress", noise["ripple_k_compress"]}}},
      {"embed", {{"d", c.tda.embed_dim}, {"tau", c.tda.embed_tau}}},
      {"tda",
       {{"point_budget", c.tda.point_budget},
        {"subsample", subsample_name(c.tda.subsample)},
        {"max_scale_fraction", c.tda.max_scale_fraction}}},
      {"vectorize",
       {{"image_rows", c.vectorize.image_rows},
        {"image_cols", c.vectorize.image_cols},
        {"sigma", c.vectorize.sigma},
        {"weight", c.vectorize.weight},
        {"grid_pad", c.vectorize.grid_pad},
        {"silhouette_points", c.vectorize.silhouette_points}}},
      {"cv", {{"k", c.cv_folds}, {"seed", c.cv_seed}}},
      {"train",
       {{"l2", c.train.l2},
        {"lr", c.train.lr},
        {"epochs", c.train.epochs},
        {"seed", c.train.seed},
        {"cap_step_at_smoothness", c.train.cap_step_at_smoothness}}},
  };
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  if (j.contains("model")) {
    c = ExperimentConfig::for_model(engine::parse_noise_model(j.at("model").get<std::string>()));
  }
  take(j, "n_trajectories", c.n_trajectories);
  if (j.contains("amplitude_range")) {
    const auto& r = j.at("amplitude_range");
    if (!r.is_array() || r.size() != 2) throw std::invalid_argument("amplitude_range must be [min, max]");
    c.amplitude_min = r[0].get<double>();
    c.amplitude_max = r[1].get<double>();
    c.threshold = 0.5 * (c.amplitude_min + c.amplitude_max);
  }
  take(j, "threshold", c.threshold);
  take(j, "burn_in", c.burn_in);
  take(j, "window", c.window);
  take(j, "master_seed", c.master_seed);
  take(j, "random_labels", c.random_labels);
  if (j.contains("engine")) c.engine = engine_params_from_json(j.at("engine"));
  if (j.contains("noise")) c.noise_template = noise_spec_from_json(j.at("noise"));
  c.noise_template.model = engine::NoiseModel::None;
  c.noise_template.amplitude = 0.0;
  if (j.contains("embed")) {
    take(j.at("embed"), "d", c.tda.embed_dim);
    take(j.at("embed"), "tau", c.tda.embed_tau);
  }
  if (j.contains("tda")) {
    const auto& t = j.at("tda");
    take(t, "point_budget", c.tda.point_budget);
    if (t.contains("subsample")) c.tda.subsample = parse_subsample(t.at("subsample").get<std::string>());
    take(t, "max_scale_fraction", c.tda.max_scale_fraction);
  }
  if (j.contains("vectorize")) {
    const auto& v = j.at("vectorize");
    take(v, "image_rows", c.vectorize.image_rows);
    take(v, "image_cols", c.vectorize.image_cols);
    take(v, "sigma", c.vectorize.sigma);
    take(v, "weight", c.vectorize.weight);
    take(v, "grid_pad", c.vectorize.grid_pad);
    take(v, "silhouette_points", c.vectorize.silhouette_points);
  }
  if (j.contains("cv")) {
    take(j.at("cv"), "k", c.cv_folds);
    take(j.at("cv"), "seed", c.cv_seed);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    take(t, "l2", c.train.l2);
    take(t, "lr", c.train.lr);
    take(t, "epochs", c.train.epochs);
    take(t, "seed", c.train.seed);
    take(t, "cap_step_at_smoothness", c.train.cap_step_at_smoothness);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) { return config_from_json(Json::parse(read_text(path))); }

std::string trajectory_csv(const engine::Trajectory& t) {
  std::string out = "t,x,y,z,omega_x,omega_z,cycle_index\n";
  out.reserve(t.samples.size() * 80);
  for (const auto& s : t.samples) {
    out += fmt(s.t) + ',' + fmt(s.x) + ',' + fmt(s.y) + ',' + fmt(s.z) + ',' + fmt(s.omega_x) + ',' +
           fmt(s.omega_z) + ',' + std::to_string(s.cycle_index) + '\n';
  }
  return out;
}

Json trajectory_sidecar(const engine::Trajectory& t) {
  return {{"params", to_json(t.params)},
          {"noise", to_json(t.noise)},
          {"seed", t.seed},
          {"cycle_marks", t.cycle_marks},
          {"cycle_work", rounded(t.cycle_work)}};
}

std::vector<double> read_observable(const fs::path& csv) {
  std::istringstream is(read_text(csv));
  std::string line;
  if (!std::getline(is, line) || line != "t,x,y,z,omega_x,omega_z,cycle_index") {
    throw std::runtime_error(csv.string() + ": unexpected trajectory header");
  }
  std::vector<double> x;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto row = parse_row(line);
    if (row.size() != 7) throw std::runtime_error(csv.string() + ": malformed row");
    x.push_back(row[1]);
  }
  return x;
}

void write_dataset(const fs::path& dir, const pipeline::GeneratedDataset& data) {
  write_text_atomic(dir / "config.json", to_json(data.config).dump(2) + "\n");
  Json manifest = {{"model", std::string(engine::noise_model_name(data.config.model))},
                   {"master_seed", data.config.master_seed},
                   {"threshold", round9(data.config.threshold)},
                   {"trajectories", Json::array()}};
  pipeline::parallel_for(data.trajectories.size(), [&](std::size_t i) {
    const auto& t = data.trajectories[i];
    write_text_atomic(dir / "trajectories" / index_name("traj", i, ".csv"), trajectory_csv(t));
    write_text_atomic(dir / "trajectories" / index_name("traj", i, ".json"), trajectory_sidecar(t).dump(2) + "\n");
  });
  for (const auto& d : data.draws) {
    manifest["trajectories"].push_back({{"index", d.index},
                                        {"seed", d.seed},
                                        {"amplitude", round9(d.amplitude)},
                                        {"label", d.label},
                                        {"file", "trajectories/" + index_name("traj", d.index, ".csv")}});
  }
  write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

StoredDataset load_dataset(const fs::path& dir) {
  StoredDataset out;
  out.config = load_config(dir / "config.json");
  const Json manifest = Json::parse(read_text(dir / "manifest.json"));
  for (const auto& e : manifest.at("trajectories")) {
    pipeline::TrajectoryDraw d;
    d.index = e.at("index").get<std::size_t>();
    d.seed = e.at("seed").get<std::uint64_t>();
    d.amplitude = e.at("amplitude").get<double>();
    d.label = e.at("label").get<int>();
    out.draws.push_back(d);
  }
  out.observables.resize(out.draws.size());
  pipeline::parallel_for(out.draws.size(), [&](std::size_t i) {
    out.observables[i] = read_observable(dir / "trajectories" / index_name("traj", out.draws[i].index, ".csv"));
  });
  return out;
}

void write_features(const fs::path& dir, const pipeline::FeatureSet& feats,
                    const pipeline::VectorizeConfig& vc) {
  const std::size_t n = feats.labels.size();
  if (feats.method != Method::Ssm) {
    pipeline::parallel_for(n, [&](std::size_t i) {
      std::ostringstream os;
      tda::write_diagram_csv(os, feats.diagrams[i], feats.max_scales.at(i));
      write_text_atomic(dir / "diagrams" / index_name("diag", i, ".csv"), os.str());
    });
  }
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const auto data = pipeline::vectorize_features(feats, vc, all);
  std::string out = "label,amplitude";
  for (std::size_t j = 0; j < data.dim; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(data.labels[i]) + ',' + fmt(data.amplitudes[i]);
    for (double v : data.row(i)) out += ',' + fmt(v);
    out += '\n';
  }
  write_text_atomic(dir / "features" / (std::string(pipeline::method_name(feats.method)) + ".csv"), out);
}

pipeline::FeatureSet load_features(const fs::path& dir, Method method) {
  const Json manifest = Json::parse(read_text(dir / "manifest.json"));
  pipeline::FeatureSet feats;
  feats.method = method;
  for (const auto& e : manifest.at("trajectories")) {
    feats.labels.push_back(e.at("label").get<int>());
    feats.amplitudes.push_back(e.at("amplitude").get<double>());
  }
  const std::size_t n = feats.labels.size();
  if (method == Method::Ssm) {
    const fs::path csv = dir / "features" / "ssm.csv";
    std::istringstream is(read_text(csv));
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto row = parse_row(line);
      if (row.size() != 2 + ssm::SSMFeatures::kCount) throw std::runtime_error(csv.string() + ": malformed row");
      ssm::SSMFeatures f{row[2], row[3], row[4], row[5], row[6], row[7], false};
      feats.ssm.push_back(f);
    }
    if (feats.ssm.size() != n) throw std::runtime_error(csv.string() + ": row count differs from manifest");
  } else {
    feats.diagrams.resize(n);
    feats.max_scales.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::istringstream is(read_text(dir / "diagrams" / index_name("diag", i, ".csv")));
      feats.diagrams[i] = tda::read_diagram_csv(is, &feats.max_scales[i]);
    }
  }
  return feats;
}

Json to_json(const pipeline::ExperimentResult& r) {
  Json roc = Json::array();
  for (const auto& p : r.roc) roc.push_back({{"fpr", round9(p.fpr)}, {"tpr", round9(p.tpr)}});
  return {{"method", std::string(pipeline::method_name(r.method))},
          {"model", std::string(engine::noise_model_name(r.model))},
          {"per_fold_auc", rounded(r.per_fold_auc)},
          {"mean_auc", round9(r.mean_auc)},
          {"roc", roc}};
}

void write_result(const fs::path& dir, const pipeline::ExperimentResult& r) {
  write_text_atomic(dir / "metrics" / (std::string(pipeline::method_name(r.method)) + ".json"),
                    to_json(r).dump(2) + "\n");
}

std::string qi_sweep_csv(std::span<const pipeline::QiSweepRow> rows) {
  std::string out = "amplitude,run,seed,qi,wasserstein1,bottleneck,work_mean,work_var\n";
  for (const auto& r : rows) {
    out += fmt(r.amplitude) + ',' + std::to_string(r.run) + ',' + std::to_string(r.seed) + ',' + fmt(r.qi) +
           ',' + fmt(r.wasserstein1) + ',' + fmt(r.bottleneck) + ',' + fmt(r.work_mean) + ',' +
           fmt(r.work_var) + '\n';
  }
  return out;
}

std::string grid_csv(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw std::invalid_argument("grid_csv: shape mismatch");
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out += ',';
      out += fmt(values[r * cols + c]);
    }
    out += '\n';
  }
  return out;
}

ReportFiles emit_report(const fs::path& root) {
  using engine::NoiseModel;
  const NoiseModel models[] = {NoiseModel::TimingJitter, NoiseModel::RampDistortion, NoiseModel::OUSweep,
                               NoiseModel::Ripple, NoiseModel::Combined};
  const Method columns[] = {Method::Ssm, Method::TemImage, Method::TemSilhouette};
  std::vector<std::string> missing;
  std::string table = "model,ssm,tem_image,tem_silhouette\n";
  for (NoiseModel m : models) {
    const std::string name(engine::noise_model_name(m));
    table += name;
    for (Method meth : columns) {
      const fs::path p = root / name / "metrics" / (std::string(pipeline::method_name(meth)) + ".json");
      if (!fs::exists(p)) {
        missing.push_back(name + "/" + std::string(pipeline::method_name(meth)));
        continue;
      }
      table += ',' + fmt(Json::parse(read_text(p)).at("mean_auc").get<double>());
    }
    table += '\n';
  }
  const fs::path jitter = root / "jitter";
  if (!fs::exists(jitter / "diagrams")) missing.push_back("jitter diagrams (featurize --method tem-image)");
  if (!missing.empty()) {
    std::string msg = "report: missing results:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw std::runtime_error(msg);
  }
  ReportFiles files{root / "table_auc.csv", root / "pixel_map_jitter.csv"};
  write_text_atomic(files.auc_table, table);
  const auto cfg = load_config(jitter / "config.json");
  const auto feats = load_features(jitter, Method::TemImage);
  const auto map = pipeline::ensemble_pixel_map(feats, cfg.vectorize);
  write_text_atomic(files.pixel_map, grid_csv(map.r, map.grid.rows, map.grid.cols));
  return files;
}

}  // namespace otto_tem::io
