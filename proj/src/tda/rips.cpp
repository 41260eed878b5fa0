// H1 persistence of a truncated Vietoris-Rips filtration.
//
// Persistent cohomology with clearing: edges that merge components (the
// Kruskal tree) are paired in degree 0 and never become degree-1 columns.
// The remaining edges are reduced in reverse filtration order; the pivot of a
// coboundary column is its earliest triangle. Most columns are settled by
// their unreduced pivot, and only collisions go through the heap.
//
// Filtration order: simplices of equal diameter are ordered by their
// combinatorial (colexicographic) index.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "otto_tem/tda.hpp"

namespace otto_tem::tda {

namespace {

using Index = std::uint64_t;

struct Edge {
  double diam;
  std::uint32_t i;  // i < j
  std::uint32_t j;
};

bool edge_before(const Edge& a, const Edge& b) {
  if (a.diam != b.diam) return a.diam < b.diam;
  if (a.j != b.j) return a.j < b.j;
  return a.i < b.i;
}

struct Entry {
  double diam;
  Index key;
  friend bool operator==(const Entry&, const Entry&) = default;
};

// Min-heap ordering on (diam, key).
struct Later {
  bool operator()(const Entry& a, const Entry& b) const {
    return a.diam > b.diam || (a.diam == b.diam && a.key > b.key);
  }
};

Index choose2(Index n) { return n < 2 ? 0 : n * (n - 1) / 2; }
Index choose3(Index n) { return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6; }

// Colex index of {a, b, c}.
class TriangleKeys {
 public:
  explicit TriangleKeys(std::size_t n) : c2_(n), c3_(n) {
    for (std::size_t v = 0; v < n; ++v) {
      c2_[v] = choose2(v);
      c3_[v] = choose3(v);
    }
  }
  // Requires i < j; k distinct from both.
  Index operator()(std::uint32_t i, std::uint32_t j, std::size_t k) const {
    if (k > j) return c3_[k] + c2_[j] + i;
    if (k > i) return c3_[j] + c2_[k] + i;
    return c3_[j] + c2_[i] + k;
  }

 private:
  std::vector<Index> c2_, c3_;
};

// Open-addressing map from triangle key to the column that owns it as pivot.
class PivotTable {
 public:
  explicit PivotTable(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected + 1) cap <<= 1;
    slots_.assign(cap, {kEmpty, 0});
    mask_ = cap - 1;
  }
  const std::uint32_t* find(Index key) const {
    for (std::size_t s = slot(key);; s = (s + 1) & mask_) {
      if (slots_[s].key == key) return &slots_[s].column;
      if (slots_[s].key == kEmpty) return nullptr;
    }
  }
  void insert(Index key, std::uint32_t column) {
    std::size_t s = slot(key);
    while (slots_[s].key != kEmpty) s = (s + 1) & mask_;
    slots_[s] = {key, column};
  }

 private:
  static constexpr Index kEmpty = std::numeric_limits<Index>::max();
  struct Slot {
    Index key;
    std::uint32_t column;
  };
  std::size_t slot(Index key) const {
    return static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ull) >> 20) & mask_;
  }
  std::vector<Slot> slots_;
  std::size_t mask_ = 0;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

class CohomologyReducer {
 public:
  CohomologyReducer(std::span<const double> dist, std::size_t n, double threshold)
      : dist_(dist), n_(n), threshold_(threshold), key_(n) {}

  PersistenceDiagram run() {
    collect_edges();
    const auto columns = cycle_edges();
    PersistenceDiagram diagram;
    diagram.degree = 1;
    pivot_of_ = PivotTable(columns.size());
    for (auto it = columns.rbegin(); it != columns.rend(); ++it) reduce(*it, diagram);
    return diagram;
  }

 private:
  double d(std::size_t a, std::size_t b) const { return dist_[a * n_ + b]; }

  void collect_edges() {
    for (std::uint32_t j = 1; j < n_; ++j) {
      for (std::uint32_t i = 0; i < j; ++i) {
        const double w = d(i, j);
        if (w <= threshold_) edges_.push_back({w, i, j});
      }
    }
    std::sort(edges_.begin(), edges_.end(), edge_before);
  }

  // Edges that close a cycle when added, in filtration order.
  std::vector<std::uint32_t> cycle_edges() {
    UnionFind uf(n_);
    std::vector<std::uint32_t> out;
    for (std::uint32_t e = 0; e < edges_.size(); ++e) {
      if (!uf.unite(edges_[e].i, edges_[e].j)) out.push_back(e);
    }
    return out;
  }

  // Earliest triangle in the coboundary of edge e. Keys grow with the third
  // vertex, so a strict improvement scan over k keeps the lowest key on ties.
  bool min_coface(const Edge& e, Entry& out) const {
    const double* ri = dist_.data() + static_cast<std::size_t>(e.i) * n_;
    const double* rj = dist_.data() + static_cast<std::size_t>(e.j) * n_;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = n_;
    for (std::size_t k = 0; k < n_; ++k) {
      if (k == e.i || k == e.j) continue;
      const double m = std::max(ri[k], rj[k]);
      if (m > threshold_) continue;
      const double diam = std::max(m, e.diam);
      if (diam < best) {
        best = diam;
        best_k = k;
        if (diam == e.diam) break;
      }
    }
    if (best_k == n_) return false;
    out = {best, key_(e.i, e.j, best_k)};
    return true;
  }

  void push_coboundary(const Edge& e) {
    const double* ri = dist_.data() + static_cast<std::size_t>(e.i) * n_;
    const double* rj = dist_.data() + static_cast<std::size_t>(e.j) * n_;
    for (std::size_t k = 0; k < n_; ++k) {
      if (k == e.i || k == e.j) continue;
      const double m = std::max(ri[k], rj[k]);
      if (m > threshold_) continue;
      heap_.push_back({std::max(m, e.diam), key_(e.i, e.j, k)});
    }
  }

  Entry pop() {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    const Entry t = heap_.back();
    heap_.pop_back();
    return t;
  }

  // Pivot of the working column over Z/2, or false when it reduced to zero.
  bool working_pivot(Entry& out) {
    while (!heap_.empty()) {
      const Entry t = pop();
      if (!heap_.empty() && heap_.front() == t) {
        pop();
        continue;
      }
      heap_.push_back(t);
      std::push_heap(heap_.begin(), heap_.end(), Later{});
      out = t;
      return true;
    }
    return false;
  }

  void emit(double birth, double death, PersistenceDiagram& diagram) const {
    if (death > birth) diagram.pairs.push_back({birth, death});
  }

  void reduce(std::uint32_t column, PersistenceDiagram& diagram) {
    const Edge& e = edges_[column];
    Entry pivot;
    if (!min_coface(e, pivot)) {
      emit(e.diam, threshold_, diagram);
      return;
    }
    if (!pivot_of_.find(pivot.key)) {
      pivot_of_.insert(pivot.key, column);
      emit(e.diam, pivot.diam, diagram);
      return;
    }

    heap_.clear();
    std::vector<std::uint32_t> chain{column};
    push_coboundary(e);
    std::make_heap(heap_.begin(), heap_.end(), Later{});
    bool alive = working_pivot(pivot);
    while (alive) {
      const std::uint32_t* hit = pivot_of_.find(pivot.key);
      if (!hit) break;
      const auto stored = chains_.find(*hit);
      const std::size_t before = heap_.size();
      if (stored == chains_.end()) {
        chain.push_back(*hit);
        push_coboundary(edges_[*hit]);
      } else {
        for (std::uint32_t c : stored->second) {
          chain.push_back(c);
          push_coboundary(edges_[c]);
        }
      }
      for (std::size_t k = before + 1; k <= heap_.size(); ++k) {
        std::push_heap(heap_.begin(), heap_.begin() + static_cast<std::ptrdiff_t>(k), Later{});
      }
      alive = working_pivot(pivot);
    }
    if (!alive) {
      emit(e.diam, threshold_, diagram);
      return;
    }
    pivot_of_.insert(pivot.key, column);
    chains_.emplace(column, reduce_mod2(std::move(chain)));
    emit(e.diam, pivot.diam, diagram);
  }

  static std::vector<std::uint32_t> reduce_mod2(std::vector<std::uint32_t> chain) {
    std::sort(chain.begin(), chain.end());
    std::vector<std::uint32_t> out;
    for (std::size_t k = 0; k < chain.size();) {
      std::size_t run = k;
      while (run < chain.size() && chain[run] == chain[k]) ++run;
      if ((run - k) % 2 == 1) out.push_back(chain[k]);
      k = run;
    }
    return out;
  }

  std::span<const double> dist_;
  std::size_t n_;
  double threshold_;
  std::vector<Edge> edges_;
  TriangleKeys key_;
  PivotTable pivot_of_{0};
  // Cochain representatives of reduced columns other than the trivial {e}.
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> chains_;
  std::vector<Entry> heap_;
};

}  // namespace

PersistenceDiagram rips_persistence_h1(std::span<const double> distances, std::size_t n,
                                       double max_scale) {
  if (!(max_scale > 0.0)) throw std::domain_error("rips_persistence_h1: max_scale must be > 0");
  if (n == 0) throw std::domain_error("rips_persistence_h1: empty cloud");
  if (distances.size() != n * n) throw std::invalid_argument("rips_persistence_h1: need n*n distances");
  if (n > (1u << 20)) throw std::domain_error("rips_persistence_h1: cloud too large");
  return CohomologyReducer(distances, n, max_scale).run();
}

PersistenceDiagram rips_persistence_h1(const PointCloud& cloud, double max_scale) {
  if (!(max_scale > 0.0)) throw std::domain_error("rips_persistence_h1: max_scale must be > 0");
  const auto dm = cloud.distance_matrix();
  return rips_persistence_h1(dm, cloud.size(), max_scale);
}

}  // namespace otto_tem::tda
