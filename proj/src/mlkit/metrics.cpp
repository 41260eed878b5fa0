#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "otto_tem/mlkit.hpp"

namespace otto_tem::mlkit {

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw std::domain_error("roc_auc: length mismatch");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::domain_error("roc_auc: labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw std::domain_error("roc_auc: both classes are required");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks of the positives (1-based).
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  RocResult out;
  out.auc = (rank_sum - p * (p + 1.0) / 2.0) / (p * q);

  // Sweep thresholds from the highest score down.
  out.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = n; i > 0;) {
    std::size_t j = i;
    while (j > 0 && scores[order[j - 1]] == scores[order[i - 1]]) {
      --j;
      if (labels[order[j]]) ++tp; else ++fp;
    }
    out.points.push_back({static_cast<double>(fp) / q, static_cast<double>(tp) / p});
    i = j;
  }
  return out;
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::domain_error("stratified_folds: k must be >= 2");
  std::vector<int> fold(labels.size(), -1);
  std::mt19937_64 rng(seed);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < static_cast<std::size_t>(k)) {
      throw std::domain_error("stratified_folds: each class needs at least k rows");
    }
    // Fisher-Yates with an explicit draw so the permutation does not depend on
    // the standard library's distribution implementation.
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(members[i], members[j]);
    }
    for (std::size_t p = 0; p < members.size(); ++p) fold[members[p]] = static_cast<int>(p % k);
  }
  for (int f : fold) {
    if (f < 0) throw std::domain_error("stratified_folds: labels must be 0 or 1");
  }
  return fold;
}

std::vector<double> CvResult::per_fold_auc() const {
  std::vector<double> out;
  for (const auto& f : folds) out.push_back(f.roc.auc);
  return out;
}

CvResult kfold_cv(std::span<const int> labels, int k, std::uint64_t seed, const FoldScorer& scorer) {
  const auto fold = stratified_folds(labels, k, seed);
  CvResult out;
  double sum = 0.0;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    FoldOutcome o;
    o.scores = scorer(train, test);
    if (o.scores.size() != test.size()) throw std::logic_error("kfold_cv: scorer returned wrong count");
    std::vector<int> y(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) y[i] = labels[test[i]];
    o.roc = roc_auc(o.scores, y);
    o.test = std::move(test);
    sum += o.roc.auc;
    out.folds.push_back(std::move(o));
  }
  out.mean_auc = sum / k;
  return out;
}

CvResult kfold_cv(const Dataset& data, int k, std::uint64_t seed, const TrainOptions& options) {
  data.validate();
  return kfold_cv(data.labels, k, seed,
                  [&](std::span<const std::size_t> train, std::span<const std::size_t> test) {
                    const auto model = logreg_train(data.subset(train), options);
                    std::vector<double> s;
                    s.reserve(test.size());
                    for (std::size_t i : test) s.push_back(logreg_decision(model, data.row(i)));
                    return s;
                  });
}

PearsonResult pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::domain_error("pearson: length mismatch");
  if (xs.size() < 2) throw std::domain_error("pearson: need at least two points");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(xs) || constant(ys)) return {0.0, true};
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

std::vector<double> pearson_pixel_map(std::span<const vectorize::PersistenceImage> images,
                                      std::span<const double> amplitudes) {
  if (images.size() != amplitudes.size()) throw std::domain_error("pearson_pixel_map: count mismatch");
  if (images.empty()) throw std::domain_error("pearson_pixel_map: no images");
  const auto& grid = images.front().grid;
  for (const auto& img : images) {
    if (!(img.grid == grid) || img.pixels.size() != grid.size()) {
      throw std::domain_error("pearson_pixel_map: images use different grids");
    }
  }
  std::vector<double> out(grid.size());
  std::vector<double> column(images.size());
  for (std::size_t px = 0; px < grid.size(); ++px) {
    for (std::size_t i = 0; i < images.size(); ++i) column[i] = images[i].pixels[px];
    out[px] = pearson(amplitudes, column).r;
  }
  return out;
}

}  // namespace otto_tem::mlkit
