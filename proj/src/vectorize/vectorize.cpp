#include "otto_tem/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "otto_tem/kernels.hpp"

namespace otto_tem::vectorize {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Mass of N(mu, sigma^2) in each of `cells` equal bins spanning [lo, hi].
void axis_mass(double mu, double sigma, double lo, double hi, std::size_t cells,
               std::vector<double>& out) {
  out.resize(cells);
  const double step = (hi - lo) / static_cast<double>(cells);
  double prev = normal_cdf((lo - mu) / sigma);
  for (std::size_t c = 0; c < cells; ++c) {
    const double edge = c + 1 == cells ? hi : lo + step * static_cast<double>(c + 1);
    const double next = normal_cdf((edge - mu) / sigma);
    out[c] = next - prev;
    prev = next;
  }
}

}  // namespace

void ImageGrid::validate() const {
  if (rows == 0 || cols == 0) throw std::domain_error("ImageGrid: resolution must be positive");
  if (!(birth_max > birth_min) || !(pers_max > pers_min)) {
    throw std::domain_error("ImageGrid: ranges must satisfy max > min");
  }
  if (!(sigma > 0.0)) throw std::domain_error("ImageGrid: sigma must be > 0");
}

ImageGrid fit_image_grid(std::span<const tda::PersistenceDiagram> diagrams, std::size_t rows,
                         std::size_t cols, double sigma, double pad) {
  double bmax = 0.0, pmax = 0.0;
  for (const auto& d : diagrams) {
    for (const auto& p : d.pairs) {
      bmax = std::max(bmax, p.birth);
      pmax = std::max(pmax, p.persistence());
    }
  }
  ImageGrid g;
  g.rows = rows;
  g.cols = cols;
  g.sigma = sigma;
  g.birth_max = bmax > 0.0 ? bmax * (1.0 + pad) : 1.0;
  g.pers_max = pmax > 0.0 ? pmax * (1.0 + pad) : 1.0;
  g.validate();
  return g;
}

Weight weight_by_name(std::string_view name) {
  if (name == "linear") return [](double p) { return p; };
  if (name == "sqrt") return [](double p) { return std::sqrt(std::max(p, 0.0)); };
  if (name == "unit") return [](double) { return 1.0; };
  throw std::invalid_argument("unknown persistence weight '" + std::string(name) + "'");
}

double PersistenceImage::total() const { return std::accumulate(pixels.begin(), pixels.end(), 0.0); }

PersistenceImage persistence_image(const tda::PersistenceDiagram& d, const ImageGrid& grid,
                                   const Weight& weight) {
  grid.validate();
  PersistenceImage img{grid, std::vector<double>(grid.size(), 0.0)};
  std::vector<double> along_pers, along_birth;
  for (const auto& p : d.pairs) {
    const double w = weight(p.persistence());
    if (w == 0.0) continue;
    axis_mass(p.persistence(), grid.sigma, grid.pers_min, grid.pers_max, grid.rows, along_pers);
    axis_mass(p.birth, grid.sigma, grid.birth_min, grid.birth_max, grid.cols, along_birth);
    kernels::rank1_update(w, along_pers, along_birth, img.pixels);
  }
  return img;
}

PersistenceImage persistence_image(const tda::PersistenceDiagram& d, const ImageGrid& grid) {
  return persistence_image(d, grid, weight_by_name("linear"));
}

double silhouette_at(const tda::PersistenceDiagram& d, double x) {
  double acc = 0.0;
  for (const auto& p : d.pairs) {
    const double pers = p.persistence();
    const double tent = 0.5 * pers - std::abs(x - 0.5 * (p.birth + p.death));
    if (tent > 0.0) acc += std::sqrt(pers) * tent;
  }
  return acc;
}

Silhouette persistence_silhouette(const tda::PersistenceDiagram& d, std::size_t n_grid,
                                  double x_min, double x_max) {
  if (n_grid < 2) throw std::domain_error("persistence_silhouette: n_grid must be >= 2");
  if (!(x_max > x_min)) throw std::domain_error("persistence_silhouette: empty domain");
  Silhouette s{x_min, x_max, std::vector<double>(n_grid)};
  const double step = (x_max - x_min) / static_cast<double>(n_grid - 1);
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double x = i + 1 == n_grid ? x_max : x_min + step * static_cast<double>(i);
    s.values[i] = silhouette_at(d, x);
  }
  return s;
}

std::pair<double, double> fit_silhouette_domain(std::span<const tda::PersistenceDiagram> diagrams) {
  double dmax = 0.0;
  for (const auto& d : diagrams) {
    for (const auto& p : d.pairs) dmax = std::max(dmax, p.death);
  }
  return {0.0, dmax > 0.0 ? dmax : 1.0};
}

}  // namespace otto_tem::vectorize
