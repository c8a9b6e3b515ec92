#pragma once

#include <limits>
#include <vector>

#include "sk/common.hpp"
#include "sk/kernels.hpp"

namespace sk {

enum class AssignCost { squared_l2, l2 };

/// Bijective matching n -> permutation[n] with its total cost.
struct Assignment {
  std::vector<int> permutation;
  double cost = 0.0;
};

namespace detail {

/// Exact linear sum assignment (shortest augmenting paths with dual
/// potentials, O(n^3)). Returns row -> column of the minimum-cost matching.
inline std::vector<int> solve_lsap(const Matrix& cost) {
  const int n = int(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size_t(n) + 1, 0.0), v(size_t(n) + 1, 0.0);
  std::vector<int> col_row(size_t(n) + 1, 0), way(size_t(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    col_row[0] = i;
    int j0 = 0;
    std::vector<double> min_slack(size_t(n) + 1, kInf);
    std::vector<char> used(size_t(n) + 1, 0);
    do {
      used[size_t(j0)] = 1;
      const int i0 = col_row[size_t(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[size_t(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[size_t(i0)] - v[size_t(j)];
        if (cur < min_slack[size_t(j)]) {
          min_slack[size_t(j)] = cur;
          way[size_t(j)] = j0;
        }
        if (min_slack[size_t(j)] < delta) {
          delta = min_slack[size_t(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[size_t(j)]) {
          u[size_t(col_row[size_t(j)])] += delta;
          v[size_t(j)] -= delta;
        } else {
          min_slack[size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (col_row[size_t(j0)] != 0);
    do {
      const int j1 = way[size_t(j0)];
      col_row[size_t(j0)] = col_row[size_t(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_col(size_t(n), -1);
  for (int j = 1; j <= n; ++j)
    if (col_row[size_t(j)] > 0) row_col[size_t(col_row[size_t(j)]) - 1] = j - 1;
  return row_col;
}

}  // namespace detail

/// Exact Monge matching between equal-size point sets: the permutation
/// minimizing sum_n c(x^n, y^{sigma^n}).
inline Assignment monge_assign(const PointSet& x, const PointSet& y,
                               AssignCost cost = AssignCost::squared_l2) {
  if (x.rows() != y.rows()) throw InputError("monge_assign: point counts differ");
  if (x.cols() != y.cols()) throw InputError("monge_assign: dimensions differ");
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n == 0) throw InputError("monge_assign: empty point sets");
  Matrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sq = detail::row_sqdist_l2(x.data() + i * d, y.data() + j * d, d);
      c(i, j) = cost == AssignCost::squared_l2 ? sq : std::sqrt(sq);
    }
  Assignment out;
  out.permutation = detail::solve_lsap(c);
  for (Eigen::Index i = 0; i < n; ++i) out.cost += c(i, out.permutation[size_t(i)]);
  return out;
}

struct GromovMonge {
  double value = 0.0;
  PointSet grad_x;
  PointSet grad_y;
};

/// Gromov-Monge functional sum_{i,j} |c_x(x^i,x^j) - c_y(y^i,y^j)|^2 with
/// euclidean internal costs, plus its exact gradients. Compares pairwise
/// geometry across spaces of different dimension; zero under rigid motions.
inline GromovMonge gromov_monge(const PointSet& x, const PointSet& y) {
  if (x.rows() != y.rows()) throw InputError("gromov_monge: point counts differ");
  const Eigen::Index n = x.rows(), dx = x.cols(), dy = y.cols();
  GromovMonge out;
  out.grad_x = PointSet::Zero(n, dx);
  out.grad_y = PointSet::Zero(n, dy);
  if (n < 2) return out;  // empty sum by convention

  Matrix rx(n, n), ry(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rx(i, i) = 0.0;
    ry(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      rx(i, j) = rx(j, i) =
          detail::row_distance(x.data() + i * dx, x.data() + j * dx, dx, Metric::euclidean);
      ry(i, j) = ry(j, i) =
          detail::row_distance(y.data() + i * dy, y.data() + j * dy, dy, Metric::euclidean);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double diff = rx(i, j) - ry(i, j);
      out.value += diff * diff;
      if (i == j) continue;
      // Row i picks up d/dx_i of both the (i,j) and (j,i) terms, so each
      // ordered pair contributes with weight 4; r = 0 uses the
      // zero-subgradient convention.
      if (rx(i, j) > 0.0)
        out.grad_x.row(i) += (4.0 * diff / rx(i, j)) * (x.row(i) - x.row(j));
      if (ry(i, j) > 0.0)
        out.grad_y.row(i) -= (4.0 * diff / ry(i, j)) * (y.row(i) - y.row(j));
    }
  return out;
}

}  // namespace sk
