#pragma once

#include <limits>
#include <span>
#include <vector>

#include "sk/common.hpp"
#include "sk/kernels.hpp"

namespace sk {

/// Which points may be picked at each greedy step. `unselected` is the
/// standard farthest-point rule; `suffix` additionally restricts step n to
/// raw indices >= n, the literal prefix-constrained pool.
enum class CandidatePool { unselected, suffix };

struct Selection {
  std::vector<int> indices;  // selection order, starts with start_index
  std::vector<double> radii; // distance of each pick to the previously selected set
};

/// Farthest-point (k-center) greedy selection: repeatedly add the point with
/// the largest distance to the selected set, ties broken by lowest index.
/// The first radius is +inf by convention; radii are non-increasing.
inline Selection greedy_select(const PointSet& x, int count, Metric metric, int start_index = 0,
                               CandidatePool pool = CandidatePool::unselected) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n < 1) throw InputError("greedy_select: empty point set");
  if (count < 1 || count > n)
    throw InputError("greedy_select: count " + std::to_string(count) + " out of range [1, " +
                     std::to_string(n) + "]");
  if (start_index < 0 || start_index >= n) throw InputError("greedy_select: bad start index");

  Selection sel;
  sel.indices.reserve(size_t(count));
  sel.radii.reserve(size_t(count));
  std::vector<char> selected(size_t(n), 0);
  std::vector<double> min_dist(size_t(n), std::numeric_limits<double>::infinity());

  int current = start_index;
  sel.indices.push_back(current);
  sel.radii.push_back(std::numeric_limits<double>::infinity());
  selected[size_t(current)] = 1;

  while (int(sel.indices.size()) < count) {
    const double* c = x.data() + Eigen::Index(current) * d;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (selected[size_t(i)]) continue;
      const double dist = detail::row_distance(x.data() + i * d, c, d, metric);
      if (dist < min_dist[size_t(i)]) min_dist[size_t(i)] = dist;
    }
    const Eigen::Index lowest = pool == CandidatePool::suffix
                                    ? Eigen::Index(sel.indices.size())
                                    : Eigen::Index(0);
    int best = -1;
    double best_dist = -1.0;
    for (Eigen::Index i = lowest; i < n; ++i) {
      if (selected[size_t(i)]) continue;
      if (min_dist[size_t(i)] > best_dist) {
        best_dist = min_dist[size_t(i)];
        best = int(i);
      }
    }
    if (best < 0) throw InputError("greedy_select: candidate pool exhausted before count");
    sel.indices.push_back(best);
    sel.radii.push_back(best_dist);
    selected[size_t(best)] = 1;
    current = best;
  }
  return sel;
}

/// max over x in X of the distance to the nearest subset point.
inline double fill_distance(const PointSet& x, std::span<const int> subset, Metric metric) {
  if (subset.empty()) throw InputError("fill_distance: empty subset");
  const Eigen::Index d = x.cols();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int s : subset) {
      if (s < 0 || s >= x.rows()) throw InputError("fill_distance: subset index out of range");
      nearest = std::min(nearest, detail::row_distance(x.data() + i * d,
                                                       x.data() + Eigen::Index(s) * d, d, metric));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

}  // namespace sk
