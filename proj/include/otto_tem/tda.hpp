#pragma once

// Delay embedding, Vietoris-Rips H1 persistence and diagram distances.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace otto_tem::tda {

/// Row-major cloud of `size()` points in `dim` dimensions.
class PointCloud {
 public:
  PointCloud(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return coords_.size() / dim_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const { return coords_; }

  /// Largest pairwise Euclidean distance.
  double diameter() const;

  /// Dense n x n Euclidean distance matrix.
  std::vector<double> distance_matrix() const;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;

  double persistence() const { return death - birth; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  int degree = 1;
  std::vector<PersistencePair> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  /// Pairs sorted by (birth, death); canonical form for comparisons.
  PersistenceDiagram sorted() const;
};

/// v_i = (x_i, x_{i+tau}, ..., x_{i+(d-1)tau}) for i in [0, N - (d-1)tau).
PointCloud delay_embed(std::span<const double> series, std::size_t dim, std::size_t tau);

enum class SubsampleMethod { Stride, MaxMin };

/// Indices kept by subsample(); exposed for tests and provenance.
std::vector<std::size_t> subsample_indices(const PointCloud& cloud, std::size_t target,
                                           SubsampleMethod method);

PointCloud subsample(const PointCloud& cloud, std::size_t target, SubsampleMethod method);

/// H1 persistence of the Vietoris-Rips filtration truncated at max_scale.
/// Classes still alive at max_scale are reported with death == max_scale;
/// zero-persistence pairs are dropped.
PersistenceDiagram rips_persistence_h1(const PointCloud& cloud, double max_scale);

/// Same, over a precomputed n x n distance matrix.
PersistenceDiagram rips_persistence_h1(std::span<const double> distances, std::size_t n,
                                       double max_scale);

/// Default truncation: half the cloud diameter.
double default_max_scale(const PointCloud& cloud);

/// Exact 1-Wasserstein distance with L1 ground metric. A point (b, d)
/// matched to the diagonal costs d - b.
double wasserstein1(const PersistenceDiagram& d, const PersistenceDiagram& ref);

/// Exact bottleneck distance with L-infinity ground metric. A point (b, d)
/// matched to the diagonal costs (d - b) / 2.
double bottleneck(const PersistenceDiagram& d, const PersistenceDiagram& ref);

struct DiagramDistanceReport {
  double wasserstein1 = 0.0;
  double bottleneck = 0.0;
  double qi = 0.0;
};

/// QI = W1 + bottleneck against a reference diagram.
DiagramDistanceReport quality_index(const PersistenceDiagram& d, const PersistenceDiagram& ref);

/// CSV: `# degree=<k> max_scale=<v>` header, then `birth,death` rows.
void write_diagram_csv(std::ostream& os, const PersistenceDiagram& d, double max_scale);
PersistenceDiagram read_diagram_csv(std::istream& is, double* max_scale = nullptr);

}  // namespace otto_tem::tda
