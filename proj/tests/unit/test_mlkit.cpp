#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <set>
#include <vector>

#include "generators.hpp"
#include "otto_tem/mlkit.hpp"

using namespace otto_tem;
using namespace otto_tem::mlkit;

namespace {

Dataset random_dataset(gen::Rng& rng, std::size_t rows, std::size_t dim, double signal) {
  Dataset d;
  d.dim = dim;
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < rows; ++i) {
    const int y = static_cast<int>(i % 2);
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < dim; ++k) x[k] = g(rng) + (k == 0 ? signal * y : 0.0);
    d.add(x, y, static_cast<double>(y));
  }
  return d;
}

// Exhaustive pair count: P(score_pos > score_neg) + 0.5 P(tie).
double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_SUITE("mlkit") {

TEST_CASE("standardize_fit examples") {
  Dataset d;
  d.dim = 3;
  d.add(std::vector<double>{1, 0, 5}, 0, 0);
  d.add(std::vector<double>{1, 2, 7}, 1, 0);
  d.add(std::vector<double>{1, 1, 9}, 1, 0);
  const auto st = standardize_fit(d);
  CHECK(st.mean[0] == 1.0);
  CHECK(st.scale[0] == 1.0);
  CHECK(st.constant[0]);
  CHECK(!st.constant[1]);
  CHECK(st.mean[2] == 7.0);

  Dataset two;
  two.dim = 1;
  two.add(std::vector<double>{0}, 0, 0);
  two.add(std::vector<double>{2}, 1, 0);
  const auto s2 = standardize_fit(two);
  CHECK(s2.mean[0] == 1.0);
  CHECK(s2.scale[0] == 1.0);
  CHECK(!s2.constant[0]);
}

TEST_CASE("standardization of the training columns") {
  gen::Rng rng(1);
  const auto d = random_dataset(rng, 97, 5, 1.0);
  const auto st = standardize_fit(d);
  std::vector<double> z(5);
  std::vector<double> sum(5, 0.0), sq(5, 0.0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    st.apply(d.row(i), z);
    for (std::size_t k = 0; k < 5; ++k) {
      sum[k] += z[k];
      sq[k] += z[k] * z[k];
    }
  }
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::abs(sum[k] / 97.0) < 1e-12);
    CHECK(sq[k] / 97.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::vector<double> wrong(4);
  CHECK_THROWS_AS(st.apply(d.row(0), wrong), std::domain_error);
}

TEST_CASE("constant columns within floating noise are detected exactly") {
  Dataset d;
  d.dim = 1;
  for (int i = 0; i < 30; ++i) d.add(std::vector<double>{0.1}, i % 2, 0);
  const auto st = standardize_fit(d);
  CHECK(st.constant[0]);
  std::vector<double> z(1);
  st.apply(std::vector<double>{0.7}, z);
  CHECK(z[0] == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
  gen::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen::index(rng, 4, 30), dim = gen::index(rng, 1, 6);
    std::vector<double> z(n * dim);
    std::vector<int> y(n);
    for (double& v : z) v = gen::uniform(rng, -2.0, 2.0);
    for (int& v : y) v = static_cast<int>(gen::index(rng, 0, 1));
    std::vector<double> w(dim);
    for (double& v : w) v = gen::uniform(rng, -1.5, 1.5);
    const double b = gen::uniform(rng, -1.0, 1.0), l2 = gen::uniform(rng, 0.0, 0.1);
    std::vector<double> gw(dim);
    double gb = 0.0;
    logreg_objective(z, y, w, b, l2, gw, &gb);
    const double h = 1e-5;
    for (std::size_t k = 0; k < dim; ++k) {
      auto wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      const double fd = (logreg_objective(z, y, wp, b, l2, {}, nullptr) - logreg_objective(z, y, wm, b, l2, {}, nullptr)) / (2 * h);
      CHECK(std::abs(fd - gw[k]) <= 1e-6);
    }
    const double fdb = (logreg_objective(z, y, w, b + h, l2, {}, nullptr) - logreg_objective(z, y, w, b - h, l2, {}, nullptr)) / (2 * h);
    CHECK(std::abs(fdb - gb) <= 1e-6);
  }
}

TEST_CASE("bias gradient vanishes at zero on balanced data") {
  const std::vector<double> z{0.3, -1.0, 2.0, 0.5};
  const std::vector<int> y{0, 1, 0, 1};
  std::vector<double> w{0.0}, gw(1);
  double gb = 1.0;
  const double loss = logreg_objective(z, y, w, 0.0, 1e-3, gw, &gb);
  CHECK(gb == 0.0);
  CHECK(loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("logreg examples") {
  Dataset sep;
  sep.dim = 1;
  for (int i = 0; i < 20; ++i) sep.add(std::vector<double>{static_cast<double>(i)}, i >= 10 ? 1 : 0, 0);
  const auto m = logreg_train(sep);
  int correct = 0;
  for (std::size_t i = 0; i < sep.rows(); ++i) correct += (logreg_predict(m, sep.row(i)) > 0.5) == (sep.labels[i] == 1);
  CHECK(correct == 20);

  gen::Rng rng(99);
  Dataset noise;
  noise.dim = 3;
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) noise.add(std::vector<double>{g(rng), g(rng), g(rng)}, i % 2, 0);
  const auto mn = logreg_train(noise);
  double dev = 0.0;
  for (std::size_t i = 0; i < noise.rows(); ++i) dev += std::abs(logreg_predict(mn, noise.row(i)) - 0.5);
  CHECK(dev / 500.0 < 0.1);

  Dataset one;
  one.dim = 1;
  one.add(std::vector<double>{1}, 1, 0);
  one.add(std::vector<double>{2}, 1, 0);
  CHECK_THROWS_AS(logreg_train(one), std::domain_error);
  TrainOptions bad;
  bad.epochs = -1;
  CHECK_THROWS_AS(logreg_train(sep, bad), std::domain_error);
}

TEST_CASE("logreg_predict examples") {
  LogRegModel m;
  m.standardization.mean = {0.0};
  m.standardization.scale = {1.0};
  m.standardization.constant = {false};
  m.weights = {0.0};
  CHECK(logreg_predict(m, std::vector<double>{12.0}) == 0.5);
  m.weights = {1.0};
  CHECK(logreg_predict(m, std::vector<double>{std::log(3.0)}) == doctest::Approx(0.75).epsilon(1e-15));
  double prev = 0.0;
  for (double f = -5.0; f <= 5.0; f += 0.5) {
    const double p = logreg_predict(m, std::vector<double>{f});
    CHECK(p > prev);
    prev = p;
  }
  CHECK_THROWS_AS(logreg_predict(m, std::vector<double>{1.0, 2.0}), std::domain_error);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("training loss is non-increasing at lr 0.1") {
  gen::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = random_dataset(rng, gen::index(rng, 20, 200), gen::index(rng, 1, 40), gen::uniform(rng, 0.0, 3.0));
    for (bool cap : {true, false}) {
      TrainOptions o;
      o.epochs = 200;
      o.cap_step_at_smoothness = cap;
      if (!cap && d.dim > 3) continue;  // uncapped 0.1 is only safe when L < 10
      const auto m = logreg_train(d, o);
      REQUIRE(m.loss_history.size() == 201);
      for (std::size_t e = 1; e < m.loss_history.size(); ++e) REQUIRE(m.loss_history[e] <= m.loss_history[e - 1] + 1e-15);
      CHECK(m.step <= 0.1);
    }
  }
}

TEST_CASE("training is deterministic") {
  gen::Rng rng(3);
  const auto d = random_dataset(rng, 60, 8, 1.0);
  const auto a = logreg_train(d), b = logreg_train(d);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("prediction uses the stored standardization") {
  gen::Rng rng(4);
  const auto train = random_dataset(rng, 80, 3, 2.0);
  const auto m = logreg_train(train);
  const auto st = standardize_fit(train);
  for (std::size_t i = 0; i < 10; ++i) {
    std::vector<double> x{gen::uniform(rng, -3, 3), gen::uniform(rng, -3, 3), gen::uniform(rng, -3, 3)};
    double t = m.bias;
    for (std::size_t k = 0; k < 3; ++k) t += m.weights[k] * (x[k] - st.mean[k]) / st.scale[k];
    CHECK(logreg_decision(m, x) == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("roc_auc examples") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  CHECK(roc_auc(s, y).auc == 0.75);
  CHECK(roc_auc(std::vector<double>(4, 0.3), y).auc == 0.5);
  CHECK(roc_auc(std::vector<double>{0, 1, 2, 3}, y).auc == 1.0);
  const auto r = roc_auc(s, y);
  REQUIRE(r.points.size() >= 2);
  CHECK(r.points.front().fpr == 0.0);
  CHECK(r.points.front().tpr == 0.0);
  CHECK(r.points.back().fpr == 1.0);
  CHECK(r.points.back().tpr == 1.0);
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 1, 1, 1}), std::domain_error);
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 0}), std::domain_error);
}

TEST_CASE("AUC properties") {
  gen::Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = gen::index(rng, 4, 60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(gen::uniform(rng, 0.0, 10.0));  // coarse: plenty of ties
      y[i] = static_cast<int>(i % 2);
    }
    std::shuffle(y.begin(), y.end(), rng);
    const auto r = roc_auc(s, y);
    CHECK(r.auc == doctest::Approx(pair_count_auc(s, y)).epsilon(1e-12));
    std::vector<double> neg(n), mono(n);
    for (std::size_t i = 0; i < n; ++i) {
      neg[i] = -s[i];
      mono[i] = std::exp(0.3 * s[i]) + 7.0;
    }
    CHECK(r.auc + roc_auc(neg, y).auc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(roc_auc(mono, y).auc == doctest::Approx(r.auc).epsilon(1e-12));
    CHECK(r.auc >= 0.0);
    CHECK(r.auc <= 1.0);
    // Trapezoid area under the swept curve equals the rank AUC.
    double area = 0.0;
    for (std::size_t k = 1; k < r.points.size(); ++k) {
      area += (r.points[k].fpr - r.points[k - 1].fpr) * 0.5 * (r.points[k].tpr + r.points[k - 1].tpr);
    }
    CHECK(area == doctest::Approx(r.auc).epsilon(1e-12));
  }
}

TEST_CASE("stratified folds") {
  std::vector<int> y;
  for (int i = 0; i < 53; ++i) y.push_back(i % 3 == 0 ? 1 : 0);
  const auto f = stratified_folds(y, 5, 11);
  CHECK(f == stratified_folds(y, 5, 11));
  CHECK(f != stratified_folds(y, 5, 12));
  for (int cls : {0, 1}) {
    std::vector<int> count(5, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) ++count[static_cast<std::size_t>(f[i])];
    }
    const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
    CHECK(*hi - *lo <= 1);
    CHECK(*lo >= 1);
  }
  CHECK_THROWS_AS(stratified_folds(y, 1, 0), std::domain_error);
  CHECK_THROWS_AS(stratified_folds(std::vector<int>{0, 0, 0, 1}, 2, 0), std::domain_error);
}

TEST_CASE("kfold_cv examples") {
  Dataset sep;
  sep.dim = 2;
  gen::Rng rng(8);
  for (int i = 0; i < 60; ++i) {
    const int y = i % 2;
    sep.add(std::vector<double>{y * 10.0 + gen::uniform(rng, 0, 1), gen::uniform(rng, 0, 1)}, y, 0);
  }
  const auto r = kfold_cv(sep, 5, 0);
  CHECK(r.mean_auc == 1.0);
  CHECK(r.per_fold_auc().size() == 5);

  // Every row is a copy of one row per class, so both folds see the same
  // data and must report the same AUC.
  Dataset dup;
  dup.dim = 2;
  for (int i = 0; i < 20; ++i) dup.add(i % 2 ? std::vector<double>{1.0, 0.5} : std::vector<double>{0.2, 0.9}, i % 2, 0);
  const auto halves = kfold_cv(dup, 2, 3);
  REQUIRE(halves.folds.size() == 2);
  CHECK(halves.folds[0].roc.auc == halves.folds[1].roc.auc);

  auto feature_scorer = [&](std::span<const std::size_t>, std::span<const std::size_t> test) {
    std::vector<double> s;
    for (std::size_t i : test) s.push_back(sep.row(i)[1]);
    return s;
  };
  const auto a = kfold_cv(sep.labels, 5, 5, feature_scorer);
  const auto b = kfold_cv(sep.labels, 5, 5, feature_scorer);
  CHECK(a.per_fold_auc() == b.per_fold_auc());
  std::set<std::size_t> seen;
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(a.folds[f].test == b.folds[f].test);
    seen.insert(a.folds[f].test.begin(), a.folds[f].test.end());
  }
  CHECK(seen.size() == sep.rows());
  CHECK_THROWS_AS(kfold_cv(sep, 1, 0), std::domain_error);
}

TEST_CASE("no leakage: test labels never reach the scorer's model") {
  gen::Rng rng(10);
  auto d = random_dataset(rng, 50, 4, 1.0);
  const auto folds = stratified_folds(d.labels, 5, 0);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < d.rows(); ++i) (folds[i] == 0 ? test : train).push_back(i);
  const auto m1 = logreg_train(d.subset(train));
  auto mutated = d;
  mutated.labels[test[0]] = 1 - mutated.labels[test[0]];
  mutated.features[test[0] * 4] += 100.0;
  const auto m2 = logreg_train(mutated.subset(train));
  for (std::size_t i : test) CHECK(logreg_predict(m1, d.row(i)) == logreg_predict(m2, d.row(i)));
}

TEST_CASE("pearson examples") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> nx{-1, -2, -3};
  CHECK(pearson(x, x).r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, nx).r == doctest::Approx(-1.0).epsilon(1e-15));
  // Deviations (-1, 0, 1) and (-13/6, -1/6, 7/3): r = 4.5 / sqrt(2 * 61 / 6).
  CHECK(pearson(x, std::vector<double>{2, 4, 6.5}).r == doctest::Approx(4.5 / std::sqrt(122.0 / 6.0)).epsilon(1e-14));
  const auto deg = pearson(x, std::vector<double>{0.1, 0.1, 0.1});
  CHECK(deg.degenerate);
  CHECK(deg.r == 0.0);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), std::domain_error);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), std::domain_error);
}

TEST_CASE("pearson_pixel_map examples") {
  vectorize::ImageGrid g;
  g.rows = 3;
  g.cols = 4;
  const std::vector<double> amp{0.1, 0.5, 0.2, 0.9};
  std::vector<vectorize::PersistenceImage> same(4, {g, std::vector<double>(12, 0.3)});
  const auto zero = pearson_pixel_map(same, amp);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));

  auto marked = same;
  for (std::size_t i = 0; i < 4; ++i) marked[i].pixels[5] = amp[i];
  const auto map = pearson_pixel_map(marked, amp);
  for (std::size_t k = 0; k < 12; ++k) CHECK(map[k] == (k == 5 ? doctest::Approx(1.0) : doctest::Approx(0.0)));

  auto mixed = same;
  mixed[2].grid.sigma = 0.5;
  CHECK_THROWS_AS(pearson_pixel_map(mixed, amp), std::domain_error);
}

}  // TEST_SUITE
