#pragma once

// Logistic regression, ROC/AUC, stratified cross-validation and Pearson
// correlation maps.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "otto_tem/vectorize.hpp"

namespace otto_tem::mlkit {

/// Row-major feature matrix with binary labels (1 = degraded) and the noise
/// amplitude that produced each row.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<double> amplitudes;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  void add(std::span<const double> x, int label, double amplitude);
  /// Throws std::domain_error on inconsistent shapes or labels outside {0, 1}.
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;
  /// Columns with zero training variance: scale 1, and mapped to 0.
  std::vector<bool> constant;

  std::size_t dim() const { return mean.size(); }
  void apply(std::span<const double> x, std::span<double> out) const;
};

/// Per-column mean and population standard deviation of `train`.
Standardization standardize_fit(const Dataset& train);

struct TrainOptions {
  double l2 = 1e-3;
  double lr = 0.1;
  int epochs = 500;
  std::uint64_t seed = 0;
  /// Clamp the step to 1/L, with L the smoothness constant of the objective
  /// on the standardized training matrix, so gradient descent cannot diverge
  /// on wide, correlated feature sets.
  bool cap_step_at_smoothness = true;
};

struct LogRegModel {
  Standardization standardization;
  std::vector<double> weights;
  double bias = 0.0;
  /// Objective value before the first and after every epoch.
  std::vector<double> loss_history;
  double step = 0.0;
};

/// Mean cross-entropy plus (l2 / 2) |w|^2 over standardized rows `z`
/// (row-major, `labels.size()` rows). Writes the gradient when the output
/// spans are nonempty.
double logreg_objective(std::span<const double> z, std::span<const int> labels,
                        std::span<const double> w, double b, double l2,
                        std::span<double> grad_w, double* grad_b);

/// Full-batch gradient descent from zero. Throws std::domain_error when only
/// one class is present.
LogRegModel logreg_train(const Dataset& train, const TrainOptions& options = {});

/// sigma(w . z(f) + b). Throws std::domain_error on a dimension mismatch.
double logreg_predict(const LogRegModel& model, std::span<const double> features);
double logreg_decision(const LogRegModel& model, std::span<const double> features);

double sigmoid(double t);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  double auc = 0.0;
  std::vector<RocPoint> points;
};

/// Tie-corrected Mann-Whitney AUC and the ROC curve over all distinct
/// thresholds, from (0, 0) to (1, 1).
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Stratified fold id per row, shuffled within each class by `seed`.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

/// Scores for the rows in `test`, given a model fit on `train` only.
using FoldScorer = std::function<std::vector<double>(std::span<const std::size_t> train,
                                                     std::span<const std::size_t> test)>;

struct FoldOutcome {
  std::vector<std::size_t> test;
  std::vector<double> scores;
  RocResult roc;
};

struct CvResult {
  std::vector<FoldOutcome> folds;
  double mean_auc = 0.0;
  std::vector<double> per_fold_auc() const;
};

/// Throws std::domain_error when k < 2 or a class has fewer than k rows.
CvResult kfold_cv(std::span<const int> labels, int k, std::uint64_t seed, const FoldScorer& scorer);

/// Cross-validated logistic regression on fixed features; standardization is
/// refit on every training portion.
CvResult kfold_cv(const Dataset& data, int k, std::uint64_t seed, const TrainOptions& options = {});

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;
};

/// Product-moment correlation; r = 0 with the degenerate flag when either
/// input is constant. Throws std::domain_error on length mismatch or n < 2.
PearsonResult pearson(std::span<const double> xs, std::span<const double> ys);

/// Per-pixel correlation with the amplitudes, row-major over the shared grid.
/// Constant pixels report 0.
std::vector<double> pearson_pixel_map(std::span<const vectorize::PersistenceImage> images,
                                      std::span<const double> amplitudes);

}  // namespace otto_tem::mlkit
