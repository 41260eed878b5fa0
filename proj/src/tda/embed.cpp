#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "otto_tem/kernels.hpp"
#include "otto_tem/tda.hpp"

namespace otto_tem::tda {

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw std::domain_error("PointCloud: dimension must be >= 1");
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    throw std::domain_error("PointCloud: coordinates must form a nonempty set of points");
  }
}

std::vector<double> PointCloud::distance_matrix() const {
  const std::size_t n = size();
  std::vector<double> out(n * n);
  if (dim_ == 3) {
    kernels::pairwise_distances3(coords_, out);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double d = coords_[i * dim_ + k] - coords_[j * dim_ + k];
        acc += d * d;
      }
      out[i * n + j] = out[j * n + i] = std::sqrt(acc);
    }
  }
  return out;
}

double PointCloud::diameter() const {
  const auto dm = distance_matrix();
  return dm.empty() ? 0.0 : *std::max_element(dm.begin(), dm.end());
}

PersistenceDiagram PersistenceDiagram::sorted() const {
  PersistenceDiagram out = *this;
  std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) {
    return a.birth < b.birth || (a.birth == b.birth && a.death < b.death);
  });
  return out;
}

PointCloud delay_embed(std::span<const double> series, std::size_t dim, std::size_t tau) {
  if (dim < 1) throw std::domain_error("delay_embed: dimension must be >= 1");
  if (tau < 1) throw std::domain_error("delay_embed: delay must be >= 1");
  const std::size_t span = (dim - 1) * tau;
  if (series.size() <= span) throw std::domain_error("delay_embed: series too short");
  const std::size_t count = series.size() - span;
  std::vector<double> coords(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < dim; ++k) coords[i * dim + k] = series[i + k * tau];
  }
  return PointCloud(dim, std::move(coords));
}

std::vector<std::size_t> subsample_indices(const PointCloud& cloud, std::size_t target,
                                           SubsampleMethod method) {
  if (target < 2) throw std::domain_error("subsample: target must be >= 2");
  const std::size_t n = cloud.size();
  std::vector<std::size_t> idx;
  if (n <= target) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  if (method == SubsampleMethod::Stride) {
    const std::size_t stride = (n + target - 1) / target;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    return idx;
  }
  // Greedy farthest-point landmarks from index 0; ties go to the lower index.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  auto dist = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    const auto pa = cloud.point(a), pb = cloud.point(b);
    for (std::size_t k = 0; k < cloud.dim(); ++k) acc += (pa[k] - pb[k]) * (pa[k] - pb[k]);
    return std::sqrt(acc);
  };
  std::size_t current = 0;
  while (idx.size() < target) {
    idx.push_back(current);
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], dist(i, current));
      if (nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    current = best;
  }
  return idx;
}

PointCloud subsample(const PointCloud& cloud, std::size_t target, SubsampleMethod method) {
  const auto idx = subsample_indices(cloud, target, method);
  std::vector<double> coords;
  coords.reserve(idx.size() * cloud.dim());
  for (std::size_t i : idx) {
    const auto p = cloud.point(i);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return PointCloud(cloud.dim(), std::move(coords));
}

double default_max_scale(const PointCloud& cloud) { return 0.5 * cloud.diameter(); }

void write_diagram_csv(std::ostream& os, const PersistenceDiagram& d, double max_scale) {
  os << "# degree=" << d.degree << " max_scale=" << std::setprecision(9) << max_scale << '\n';
  os << "birth,death\n";
  for (const auto& p : d.pairs) os << std::setprecision(9) << p.birth << ',' << p.death << '\n';
}

PersistenceDiagram read_diagram_csv(std::istream& is, double* max_scale) {
  PersistenceDiagram d;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# degree=", 0) != 0) {
    throw std::runtime_error("diagram csv: missing '# degree=' header");
  }
  {
    std::istringstream hs(line.substr(9));
    hs >> d.degree;
    std::string rest;
    hs >> rest;
    if (max_scale && rest.rfind("max_scale=", 0) == 0) *max_scale = std::stod(rest.substr(10));
  }
  if (!std::getline(is, line) || line != "birth,death") {
    throw std::runtime_error("diagram csv: missing 'birth,death' column header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("diagram csv: malformed row");
    d.pairs.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return d;
}

}  // namespace otto_tem::tda
