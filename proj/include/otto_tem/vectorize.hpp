#pragma once

// Fixed-length vectorizations of persistence diagrams.
//
// Persistence images live in (birth, persistence) coordinates. Rows index the
// persistence axis (row 0 is the lowest band) and columns index birth, so a
// 40 x 40 image flattens row-major into 1600 features.

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "otto_tem/tda.hpp"

namespace otto_tem::vectorize {

struct ImageGrid {
  std::size_t rows = 40;
  std::size_t cols = 40;
  double birth_min = 0.0;
  double birth_max = 1.0;
  double pers_min = 0.0;
  double pers_max = 1.0;
  double sigma = 0.02;

  void validate() const;
  std::size_t size() const { return rows * cols; }
  double birth_step() const { return (birth_max - birth_min) / static_cast<double>(cols); }
  double pers_step() const { return (pers_max - pers_min) / static_cast<double>(rows); }
  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

/// Grid covering [0, max birth] x [0, max persistence] of the given diagrams,
/// with both upper ends padded by `pad` (relative). Degenerate extents fall
/// back to a unit range so the grid stays valid.
ImageGrid fit_image_grid(std::span<const tda::PersistenceDiagram> diagrams, std::size_t rows = 40,
                         std::size_t cols = 40, double sigma = 0.02, double pad = 0.05);

using Weight = std::function<double(double persistence)>;

/// Named weights: "linear" (w = p), "sqrt" (w = sqrt p), "unit" (w = 1).
Weight weight_by_name(std::string_view name);

struct PersistenceImage {
  ImageGrid grid;
  std::vector<double> pixels;

  double at(std::size_t row, std::size_t col) const { return pixels[row * grid.cols + col]; }
  double total() const;
};

/// Each feature contributes w(p) times the mass of an isotropic Gaussian
/// centred at (b, p) over every cell, integrated exactly per axis.
PersistenceImage persistence_image(const tda::PersistenceDiagram& d, const ImageGrid& grid,
                                   const Weight& weight);
PersistenceImage persistence_image(const tda::PersistenceDiagram& d, const ImageGrid& grid);

struct Silhouette {
  double x_min = 0.0;
  double x_max = 1.0;
  std::vector<double> values;
};

/// Lambda(x) = sum_j sqrt(p_j) max(0, p_j / 2 - |x - (b_j + d_j) / 2|).
double silhouette_at(const tda::PersistenceDiagram& d, double x);

/// Lambda sampled at n_grid evenly spaced nodes including both endpoints.
Silhouette persistence_silhouette(const tda::PersistenceDiagram& d, std::size_t n_grid,
                                  double x_min, double x_max);

/// [0, max death] over the given diagrams; unit range when all are empty.
std::pair<double, double> fit_silhouette_domain(std::span<const tda::PersistenceDiagram> diagrams);

}  // namespace otto_tem::vectorize
