#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "sk/common.hpp"
#include "sk/kernels.hpp"

namespace sk {

struct KnnResult {
  std::vector<int> indices;      // nearest first
  std::vector<double> distances; // non-decreasing
};

/// Exact M-nearest-neighbor index. Uses a kd-tree above a small-N cutoff and
/// a linear scan below it; both paths return identical results, with ties
/// broken by ascending point index.
class NeighborIndex {
 public:
  enum class Kind { automatic, brute_force, kd_tree };

  explicit NeighborIndex(PointSet points, Metric metric = Metric::euclidean,
                         Kind kind = Kind::automatic)
      : pts_(std::move(points)), metric_(metric) {
    if (pts_.rows() < 1) throw InputError("build_index: empty point set");
    use_tree_ = kind == Kind::kd_tree || (kind == Kind::automatic && pts_.rows() >= 64);
    if (use_tree_) build_tree();
  }

  Eigen::Index size() const { return pts_.rows(); }
  Eigen::Index dim() const { return pts_.cols(); }
  const PointSet& points() const { return pts_; }
  Metric metric() const { return metric_; }

  KnnResult query(const double* z, int m) const {
    m = int(std::min<Eigen::Index>(std::max(m, 1), pts_.rows()));
    Heap heap;
    heap.reserve(size_t(m));
    if (use_tree_)
      search_node(0, z, m, heap);
    else
      for (Eigen::Index i = 0; i < pts_.rows(); ++i)
        offer(heap, m, point_distance(z, i), int(i));

    std::sort(heap.begin(), heap.end());
    KnnResult out;
    out.indices.reserve(heap.size());
    out.distances.reserve(heap.size());
    for (const auto& [d, i] : heap) {
      out.indices.push_back(i);
      out.distances.push_back(metric_ == Metric::euclidean ? std::sqrt(d) : d);
    }
    return out;
  }

  KnnResult query(const Vector& z, int m) const {
    if (z.size() != dim())
      throw InputError("query_knn: dimension mismatch (" + std::to_string(z.size()) + " vs " +
                       std::to_string(dim()) + ")");
    return query(z.data(), m);
  }

 private:
  // (distance, index) pairs; euclidean entries hold squared distances.
  using Heap = std::vector<std::pair<double, int>>;

  double point_distance(const double* z, Eigen::Index i) const {
    const double* p = pts_.data() + i * pts_.cols();
    return metric_ == Metric::euclidean ? detail::row_sqdist_l2(z, p, pts_.cols())
                                        : detail::row_distance(z, p, pts_.cols(), metric_);
  }

  static void offer(Heap& heap, int m, double d, int idx) {
    const std::pair<double, int> cand{d, idx};
    if (int(heap.size()) < m) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end());
    } else if (cand < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  struct Node {
    int begin = 0, end = 0;
    int left = -1, right = -1;
    int split_dim = -1;
    double split_val = 0.0;
    Vector lo, hi;
  };

  void build_tree() {
    perm_.resize(size_t(pts_.rows()));
    std::iota(perm_.begin(), perm_.end(), 0);
    nodes_.reserve(size_t(2 * pts_.rows() / kLeafSize + 2));
    build_node(0, int(pts_.rows()));
  }

  int build_node(int begin, int end) {
    const int id = int(nodes_.size());
    nodes_.push_back({});
    Node n;
    n.begin = begin;
    n.end = end;
    const Eigen::Index d = pts_.cols();
    n.lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
    n.hi = Vector::Constant(d, -std::numeric_limits<double>::infinity());
    for (int t = begin; t < end; ++t) {
      const double* p = pts_.data() + Eigen::Index(perm_[size_t(t)]) * d;
      for (Eigen::Index j = 0; j < d; ++j) {
        n.lo[j] = std::min(n.lo[j], p[j]);
        n.hi[j] = std::max(n.hi[j], p[j]);
      }
    }
    if (end - begin > kLeafSize) {
      Eigen::Index widest = 0;
      for (Eigen::Index j = 1; j < d; ++j)
        if (n.hi[j] - n.lo[j] > n.hi[widest] - n.lo[widest]) widest = j;
      if (n.hi[widest] > n.lo[widest]) {
        const int mid = begin + (end - begin) / 2;
        std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                         [&](int a, int b) {
                           return pts_(a, widest) < pts_(b, widest);
                         });
        n.split_dim = int(widest);
        n.split_val = pts_(perm_[size_t(mid)], widest);
        nodes_[size_t(id)] = n;  // children reallocate nodes_
        const int left = build_node(begin, mid);
        const int right = build_node(mid, end);
        nodes_[size_t(id)].left = left;
        nodes_[size_t(id)].right = right;
        return id;
      }
    }
    nodes_[size_t(id)] = n;
    return id;
  }

  double box_distance(const Node& n, const double* z) const {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < pts_.cols(); ++j) {
      double t = 0.0;
      if (z[j] < n.lo[j]) t = n.lo[j] - z[j];
      else if (z[j] > n.hi[j]) t = z[j] - n.hi[j];
      if (metric_ == Metric::euclidean) acc += t * t;
      else acc += t;
    }
    return acc;
  }

  void search_node(int id, const double* z, int m, Heap& heap) const {
    const Node& n = nodes_[size_t(id)];
    // Prune only on a strictly greater bound: an equal-distance point with a
    // lower index may still displace the current worst.
    if (int(heap.size()) == m && box_distance(n, z) > heap.front().first) return;
    if (n.left < 0) {
      for (int t = n.begin; t < n.end; ++t) {
        const int idx = perm_[size_t(t)];
        offer(heap, m, point_distance(z, idx), idx);
      }
      return;
    }
    const int near = z[n.split_dim] < n.split_val ? n.left : n.right;
    const int far = near == n.left ? n.right : n.left;
    search_node(near, z, m, heap);
    search_node(far, z, m, heap);
  }

  static constexpr int kLeafSize = 16;

  PointSet pts_;
  Metric metric_;
  bool use_tree_ = false;
  std::vector<Node> nodes_;
  std::vector<int> perm_;
};

inline NeighborIndex build_index(PointSet x, Metric metric,
                                 NeighborIndex::Kind kind = NeighborIndex::Kind::automatic) {
  return NeighborIndex(std::move(x), metric, kind);
}

/// M nearest training points of z, nearest first; M is clamped to N.
inline KnnResult query_knn(const NeighborIndex& index, const Vector& z, int m) {
  return index.query(z, m);
}

/// Canonical identity of a tessellation cell: the sorted support-index set.
/// Two queries share a CellKey iff they share the same M-NN set, which is
/// exactly when their local predictors coincide.
struct CellKey {
  std::vector<std::int32_t> ids;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  size_t operator()(const CellKey& k) const {
    size_t h = 1469598103934665603ull;
    for (std::int32_t v : k.ids) {
      h ^= size_t(std::uint32_t(v));
      h *= 1099511628211ull;
    }
    return h;
  }
};

inline CellKey cell_key(std::span<const int> sigma) {
  CellKey key;
  key.ids.assign(sigma.begin(), sigma.end());
  std::sort(key.ids.begin(), key.ids.end());
  if (std::adjacent_find(key.ids.begin(), key.ids.end()) != key.ids.end())
    throw std::logic_error("cell_key: duplicate indices in neighbor tuple");
  return key;
}

}  // namespace sk
