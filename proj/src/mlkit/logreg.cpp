#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otto_tem/kernels.hpp"
#include "otto_tem/mlkit.hpp"

namespace otto_tem::mlkit {

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

std::vector<double> standardized_matrix(const Dataset& data, const Standardization& st) {
  std::vector<double> z(data.features.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    st.apply(data.row(i), std::span<double>(z.data() + i * data.dim, data.dim));
  }
  return z;
}

// Largest eigenvalue of [Z 1]^T [Z 1] / n by power iteration from the ones vector.
double gram_top_eigenvalue(std::span<const double> z, std::size_t rows, std::size_t dim) {
  std::vector<double> v(dim + 1, 1.0), zv(rows), next(dim + 1);
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    double vn = std::sqrt(kernels::dot(v, v));
    for (double& c : v) c /= vn;
    for (std::size_t i = 0; i < rows; ++i) {
      zv[i] = kernels::dot(z.subspan(i * dim, dim), std::span<const double>(v.data(), dim)) + v[dim];
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      kernels::axpy(zv[i], z.subspan(i * dim, dim), std::span<double>(next.data(), dim));
      next[dim] += zv[i];
    }
    const double estimate = std::sqrt(kernels::dot(next, next)) / static_cast<double>(rows);
    v.swap(next);
    if (it > 0 && std::abs(estimate - lambda) <= 1e-6 * estimate) {
      lambda = estimate;
      break;
    }
    lambda = estimate;
  }
  return lambda;
}

}  // namespace

void Dataset::add(std::span<const double> x, int label, double amplitude) {
  if (rows() == 0 && dim == 0) dim = x.size();
  if (x.size() != dim) throw std::domain_error("Dataset: feature dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
  amplitudes.push_back(amplitude);
}

void Dataset::validate() const {
  if (features.size() != rows() * dim || amplitudes.size() != rows()) {
    throw std::domain_error("Dataset: inconsistent shapes");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::domain_error("Dataset: labels must be 0 or 1");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.dim = dim;
  out.features.reserve(indices.size() * dim);
  for (std::size_t i : indices) {
    if (i >= rows()) throw std::out_of_range("Dataset::subset: index out of range");
    out.add(row(i), labels[i], amplitudes[i]);
  }
  return out;
}

void Standardization::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim() || out.size() != dim()) {
    throw std::domain_error("Standardization: dimension mismatch");
  }
  for (std::size_t j = 0; j < dim(); ++j) out[j] = constant[j] ? 0.0 : (x[j] - mean[j]) / scale[j];
}

Standardization standardize_fit(const Dataset& train) {
  train.validate();
  if (train.rows() == 0) throw std::domain_error("standardize_fit: empty dataset");
  const std::size_t d = train.dim;
  const double n = static_cast<double>(train.rows());
  Standardization st{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0),
                     std::vector<bool>(d, false)};
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) st.mean[j] += r[j];
  }
  for (double& m : st.mean) m /= n;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) st.scale[j] += (r[j] - st.mean[j]) * (r[j] - st.mean[j]);
  }
  std::vector<bool> varies(d, false);
  const auto first = train.row(0);
  for (std::size_t i = 1; i < train.rows(); ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < d; ++j) varies[j] = varies[j] || r[j] != first[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(st.scale[j] / n);
    st.constant[j] = !varies[j] || !(sd > 0.0);
    st.scale[j] = st.constant[j] ? 1.0 : sd;
  }
  return st;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logreg_objective(std::span<const double> z, std::span<const int> labels,
                        std::span<const double> w, double b, double l2,
                        std::span<double> grad_w, double* grad_b) {
  const std::size_t n = labels.size(), d = w.size();
  if (n == 0 || z.size() != n * d) throw std::domain_error("logreg_objective: shape mismatch");
  const bool want_grad = !grad_w.empty();
  if (want_grad) {
    if (grad_w.size() != d) throw std::domain_error("logreg_objective: gradient shape mismatch");
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0, gb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = z.subspan(i * d, d);
    const double t = kernels::dot(zi, w) + b;
    // -[y log s(t) + (1 - y) log(1 - s(t))]
    loss += labels[i] ? softplus(-t) : softplus(t);
    if (want_grad) {
      const double r = sigmoid(t) - labels[i];
      kernels::axpy(r * inv_n, zi, grad_w);
      gb += r;
    }
  }
  loss = loss * inv_n + 0.5 * l2 * kernels::dot(w, w);
  if (want_grad) {
    kernels::axpy(l2, w, grad_w);
    if (grad_b) *grad_b = gb * inv_n;
  }
  return loss;
}

LogRegModel logreg_train(const Dataset& train, const TrainOptions& options) {
  train.validate();
  if (options.epochs < 0 || !(options.lr > 0.0) || options.l2 < 0.0) {
    throw std::domain_error("logreg_train: invalid options");
  }
  const bool has0 = std::find(train.labels.begin(), train.labels.end(), 0) != train.labels.end();
  const bool has1 = std::find(train.labels.begin(), train.labels.end(), 1) != train.labels.end();
  if (!has0 || !has1) throw std::domain_error("logreg_train: both classes are required");

  LogRegModel model;
  model.standardization = standardize_fit(train);
  const std::size_t d = train.dim;
  const auto z = standardized_matrix(train, model.standardization);
  model.weights.assign(d, 0.0);

  double step = options.lr;
  if (options.cap_step_at_smoothness) {
    // Hessian of the mean logistic loss is bounded by [Z 1]^T [Z 1] / (4n).
    const double smooth = gram_top_eigenvalue(z, train.rows(), d) / 4.0 + options.l2;
    // Power iteration approaches the top eigenvalue from below; keep a margin.
    step = std::min(step, 1.0 / (1.05 * smooth));
  }
  model.step = step;

  std::vector<double> gw(d);
  double gb = 0.0;
  model.loss_history.reserve(static_cast<std::size_t>(options.epochs) + 1);
  double loss = logreg_objective(z, train.labels, model.weights, model.bias, options.l2, gw, &gb);
  model.loss_history.push_back(loss);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t j = 0; j < d; ++j) {
      if (model.standardization.constant[j]) gw[j] = 0.0;
    }
    kernels::axpy(-step, gw, model.weights);
    model.bias -= step * gb;
    loss = logreg_objective(z, train.labels, model.weights, model.bias, options.l2, gw, &gb);
    model.loss_history.push_back(loss);
  }
  return model;
}

double logreg_decision(const LogRegModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    throw std::domain_error("logreg_predict: feature dimension mismatch");
  }
  std::vector<double> z(features.size());
  model.standardization.apply(features, z);
  return kernels::dot(z, model.weights) + model.bias;
}

double logreg_predict(const LogRegModel& model, std::span<const double> features) {
  return sigmoid(logreg_decision(model, features));
}

}  // namespace otto_tem::mlkit
