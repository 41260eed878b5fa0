// Exact diagram distances on the diagonal-augmented bipartite graph.
//
// Rows: the n points of D followed by m diagonal slots, one per point of the
// reference. Columns: the m reference points followed by n diagonal slots.
// A point may only use its own diagonal slot; slot-to-slot edges are free.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "otto_tem/tda.hpp"

namespace otto_tem::tda {

namespace {

constexpr double kForbidden = std::numeric_limits<double>::infinity();

enum class Ground { L1, LInf };

double point_cost(const PersistencePair& a, const PersistencePair& b, Ground g) {
  const double db = std::abs(a.birth - b.birth);
  const double dd = std::abs(a.death - b.death);
  return g == Ground::L1 ? db + dd : std::max(db, dd);
}

double diagonal_cost(const PersistencePair& a, Ground g) {
  const double p = a.death - a.birth;
  return g == Ground::L1 ? p : 0.5 * p;
}

struct CostMatrix {
  std::size_t size = 0;
  std::vector<double> c;
  double at(std::size_t r, std::size_t col) const { return c[r * size + col]; }
};

CostMatrix augmented(const PersistenceDiagram& d, const PersistenceDiagram& ref, Ground g) {
  if (d.degree != ref.degree) throw std::domain_error("diagram distance: degree mismatch");
  const std::size_t n = d.size(), m = ref.size();
  CostMatrix cm;
  cm.size = n + m;
  cm.c.assign(cm.size * cm.size, kForbidden);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) cm.c[i * cm.size + j] = point_cost(d.pairs[i], ref.pairs[j], g);
    cm.c[i * cm.size + m + i] = diagonal_cost(d.pairs[i], g);
  }
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t r = n + j;
    cm.c[r * cm.size + j] = diagonal_cost(ref.pairs[j], g);
    for (std::size_t i = 0; i < n; ++i) cm.c[r * cm.size + m + i] = 0.0;
  }
  return cm;
}

// Minimum-cost perfect assignment (shortest augmenting paths with
// potentials). Forbidden entries are skipped. Returns the summed cost of the
// chosen entries rather than the dual objective.
double assignment_cost(const CostMatrix& cm) {
  const std::size_t n = cm.size;
  if (n == 0) return 0.0;
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kForbidden);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kForbidden;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double a = cm.at(i0 - 1, j - 1);
        if (a != kForbidden) {
          const double cur = a - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw std::logic_error("assignment_cost: no feasible augmenting path");
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else if (minv[j] != kForbidden) {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cm.at(match[j] - 1, j - 1);
  return total;
}

// Hopcroft-Karp: does the graph of entries <= radius admit a perfect matching?
class PerfectMatching {
 public:
  PerfectMatching(const CostMatrix& cm, double radius) : n_(cm.size), adj_(cm.size) {
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t c = 0; c < n_; ++c) {
        if (cm.at(r, c) <= radius) adj_[r].push_back(c);
      }
    }
  }

  bool exists() {
    match_row_.assign(n_, kNone);
    match_col_.assign(n_, kNone);
    std::size_t matched = 0;
    while (bfs()) {
      for (std::size_t r = 0; r < n_; ++r) {
        if (match_row_[r] == kNone && dfs(r)) ++matched;
      }
    }
    return matched == n_;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool bfs() {
    dist_.assign(n_, kNone);
    std::queue<std::size_t> q;
    for (std::size_t r = 0; r < n_; ++r) {
      if (match_row_[r] == kNone) {
        dist_[r] = 0;
        q.push(r);
      }
    }
    bool found = false;
    while (!q.empty()) {
      const std::size_t r = q.front();
      q.pop();
      for (std::size_t c : adj_[r]) {
        const std::size_t next = match_col_[c];
        if (next == kNone) {
          found = true;
        } else if (dist_[next] == kNone) {
          dist_[next] = dist_[r] + 1;
          q.push(next);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t r) {
    for (std::size_t c : adj_[r]) {
      const std::size_t next = match_col_[c];
      if (next == kNone || (dist_[next] == dist_[r] + 1 && dfs(next))) {
        match_row_[r] = c;
        match_col_[c] = r;
        return true;
      }
    }
    dist_[r] = kNone;
    return false;
  }

  std::size_t n_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_row_, match_col_, dist_;
};

}  // namespace

double wasserstein1(const PersistenceDiagram& d, const PersistenceDiagram& ref) {
  return assignment_cost(augmented(d, ref, Ground::L1));
}

double bottleneck(const PersistenceDiagram& d, const PersistenceDiagram& ref) {
  const CostMatrix cm = augmented(d, ref, Ground::LInf);
  if (cm.size == 0) return 0.0;
  std::vector<double> radii;
  radii.reserve(cm.c.size());
  for (double c : cm.c) {
    if (c != kForbidden) radii.push_back(c);
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  // The all-diagonal matching is always feasible, so the largest radius works.
  std::size_t lo = 0, hi = radii.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (PerfectMatching(cm, radii[mid]).exists()) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return radii[lo];
}

DiagramDistanceReport quality_index(const PersistenceDiagram& d, const PersistenceDiagram& ref) {
  DiagramDistanceReport r;
  r.wasserstein1 = wasserstein1(d, ref);
  r.bottleneck = bottleneck(d, ref);
  r.qi = r.wasserstein1 + r.bottleneck;
  return r;
}

}  // namespace otto_tem::tda
