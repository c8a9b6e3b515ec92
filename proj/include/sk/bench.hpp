#pragma once

#include <Eigen/QR>

#include <chrono>
#include <string>
#include <vector>

#include "sk/continuous.hpp"
#include "sk/datasets.hpp"
#include "sk/dense.hpp"
#include "sk/sparse.hpp"
#include "sk/train.hpp"

namespace sk {

namespace detail {

inline double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline IndexVector argmax_rows(const PointSet& scores) {
  IndexVector out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out[i] = int(best);
  }
  return out;
}

inline double accuracy(const IndexVector& pred, const IndexVector& truth) {
  long correct = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  return double(correct) / double(std::max<Eigen::Index>(pred.size(), 1));
}

/// Closed-form least squares [X 1] W ~ one-hot(labels); the training-free
/// linear baseline.
inline PointSet linear_fit(const PointSet& x, const IndexVector& labels, int classes) {
  Matrix design(x.rows(), x.cols() + 1);
  design.leftCols(x.cols()) = x;
  design.col(x.cols()).setOnes();
  return PointSet(design.colPivHouseholderQr().solve(Matrix(one_hot(labels, classes))));
}

inline PointSet linear_scores(const PointSet& x, const PointSet& weights) {
  Matrix design(x.rows(), x.cols() + 1);
  design.leftCols(x.cols()) = x;
  design.col(x.cols()).setOnes();
  return PointSet(design * weights);
}

}  // namespace detail

struct BenchRow {
  long size = 0;
  std::string method;
  double accuracy = 0.0;
  double wall_ms = 0.0;
};

/// Accuracy/time comparison of readouts on the rings dataset: closed-form
/// linear least squares vs sparse, blended and hierarchical kernel readouts.
inline std::vector<BenchRow> readout_comparison(const std::vector<long>& sizes,
                                                std::uint64_t seed, int bandwidth = 100) {
  std::vector<BenchRow> rows;
  for (long n : sizes) {
    if (n < 4) throw InputError("readout_comparison: sizes must be >= 4");
    const LabeledData train = make_rings(n, seed);
    const LabeledData test = make_rings(n, seed + 1);
    const int classes = 2;
    const int m = int(std::min<long>(bandwidth, n));

    {
      const auto t0 = std::chrono::steady_clock::now();
      const PointSet w = detail::linear_fit(train.x, train.labels, classes);
      const IndexVector pred = detail::argmax_rows(detail::linear_scores(test.x, w));
      rows.push_back({n, "linear", detail::accuracy(pred, test.labels), detail::elapsed_ms(t0)});
    }
    KernelSpec spec;
    spec.normalizer = fit_normalizer(train.x);
    const PointSet onehot = one_hot(train.labels, classes);
    {
      const auto t0 = std::chrono::steady_clock::now();
      SparseModel sk_model(spec, train.x, onehot, m, 1e-9);
      const IndexVector pred = detail::argmax_rows(sk_model.predict(test.x));
      rows.push_back(
          {n, "sparse-sk", detail::accuracy(pred, test.labels), detail::elapsed_ms(t0)});
    }
    {
      const auto t0 = std::chrono::steady_clock::now();
      const BlendedModel blended = make_blended(SparseModel(spec, train.x, onehot, m, 1e-9), 4);
      const IndexVector pred = detail::argmax_rows(predict_blended(blended, test.x));
      rows.push_back({n, "blended", detail::accuracy(pred, test.labels), detail::elapsed_ms(t0)});
    }
    {
      const auto t0 = std::chrono::steady_clock::now();
      const int coarse = int(std::min<long>(1000, std::max<long>(n / 4, 1)));
      const HierModel hier = fit_hierarchical(spec, train.x, onehot, m, coarse, 1e-9);
      const IndexVector pred = detail::argmax_rows(predict_hierarchical(hier, test.x));
      rows.push_back(
          {n, "hierarchical", detail::accuracy(pred, test.labels), detail::elapsed_ms(t0)});
    }
  }
  return rows;
}

struct ScalingRow {
  long size = 0;
  double build_ms = 0.0;
  double per_query_us = 0.0;
};

/// Per-query cost of the lazy sparse predictor across training-set sizes at
/// fixed bandwidth; the cell cache is cleared so every query pays its solve.
inline std::vector<ScalingRow> lazy_scaling(const std::vector<long>& sizes, int bandwidth,
                                            long queries, std::uint64_t seed) {
  std::vector<ScalingRow> rows;
  for (long n : sizes) {
    const PointSet x = make_uniform(n, 2, seed);
    PointSet y(n, 1);
    for (long i = 0; i < n; ++i) y(i, 0) = std::sin(3.0 * x(i, 0)) + x(i, 1);
    const PointSet z = make_uniform(queries, 2, seed + 7);

    const auto t0 = std::chrono::steady_clock::now();
    SparseModel model(KernelSpec{}, x, y, int(std::min<long>(bandwidth, n)), 1e-9);
    const double build = detail::elapsed_ms(t0);

    model.clear_cache();
    const auto t1 = std::chrono::steady_clock::now();
    (void)model.predict(z);
    const double per_query = detail::elapsed_ms(t1) * 1000.0 / double(queries);
    rows.push_back({n, build, per_query});
  }
  return rows;
}

}  // namespace sk
