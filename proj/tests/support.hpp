#pragma once

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "sk/common.hpp"
#include "sk/kernels.hpp"

namespace sk::test {

inline double rel_error(const PointSet& got, const PointSet& want) {
  const double denom = std::max(want.norm(), 1e-12);
  return (got - want).norm() / denom;
}

/// Central finite differences of a scalar function with respect to every
/// entry of x; `f` must read x by reference so perturbations take effect.
template <class F>
PointSet fd_gradient(F&& f, PointSet& x, double step = 1e-5) {
  PointSet grad(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.reshaped()[i];
    x.reshaped()[i] = saved + step;
    const double hi = f();
    x.reshaped()[i] = saved - step;
    const double lo = f();
    x.reshaped()[i] = saved;
    grad.reshaped()[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

inline PointSet random_matrix(std::mt19937_64& rng, long rows, long cols, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  PointSet m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.reshaped()[i] = gauss(rng);
  return m;
}

/// Random points with a guaranteed pairwise separation, so interpolation
/// instances stay well-posed. 1-D uses a jittered grid; higher dimensions
/// draw gaussians and resample on near-collisions.
inline PointSet separated_points(std::mt19937_64& rng, long n, long d, double min_sep = 1e-3) {
  if (d == 1) {
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    PointSet x(n, 1);
    for (long i = 0; i < n; ++i) x(i, 0) = (double(i) + jitter(rng)) * 4.0 / double(std::max(n, 2L));
    std::shuffle(x.data(), x.data() + n, rng);
    return x;
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  PointSet x(n, d);
  for (long i = 0; i < n; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (long j = 0; j < d; ++j) x(i, j) = gauss(rng);
      bool ok = true;
      for (long k = 0; k < i && ok; ++k)
        ok = detail::row_distance(x.data() + i * d, x.data() + k * d, d, Metric::euclidean) >=
             min_sep;
      if (ok) break;
    }
  }
  return x;
}

/// Exhaustive nearest-neighbor oracle: full sort of (distance, index) pairs.
inline std::pair<std::vector<int>, std::vector<double>> brute_knn(const PointSet& x,
                                                                  const double* z, int m,
                                                                  Metric metric) {
  std::vector<std::pair<double, int>> all;
  all.reserve(size_t(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    all.emplace_back(detail::row_distance(z, x.data() + i * x.cols(), x.cols(), metric), int(i));
  std::sort(all.begin(), all.end());
  const int take = int(std::min<Eigen::Index>(m, x.rows()));
  std::vector<int> idx(static_cast<size_t>(take));
  std::vector<double> dist(static_cast<size_t>(take));
  for (int i = 0; i < take; ++i) {
    idx[size_t(i)] = all[size_t(i)].second;
    dist[size_t(i)] = all[size_t(i)].first;
  }
  return {idx, dist};
}

}  // namespace sk::test
