#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sk/common.hpp"

namespace sk {

struct LabeledData {
  PointSet x;
  IndexVector labels;
};

struct RegressionData {
  PointSet x;
  PointSet y;
};

/// Two gaussian blobs in 2-D, linearly separable up to noise.
inline LabeledData make_clusters(long n, std::uint64_t seed) {
  if (n < 2) throw InputError("make_clusters: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.6);
  LabeledData d;
  d.x.resize(n, 2);
  d.labels.resize(n);
  for (long i = 0; i < n; ++i) {
    const int label = int(i % 2);
    const double cx = label == 0 ? -1.5 : 1.5;
    d.x(i, 0) = cx + gauss(rng);
    d.x(i, 1) = gauss(rng);
    d.labels[i] = label;
  }
  return d;
}

/// Two concentric rings in 2-D; no linear separator does better than chance.
inline LabeledData make_rings(long n, std::uint64_t seed) {
  if (n < 2) throw InputError("make_rings: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> inner(0.2, 1.0), outer(1.6, 2.4);
  std::normal_distribution<double> noise(0.0, 0.05);
  LabeledData d;
  d.x.resize(n, 2);
  d.labels.resize(n);
  for (long i = 0; i < n; ++i) {
    const int label = int(i % 2);
    const double r = label == 0 ? inner(rng) : outer(rng);
    const double a = angle(rng);
    d.x(i, 0) = r * std::cos(a) + noise(rng);
    d.x(i, 1) = r * std::sin(a) + noise(rng);
    d.labels[i] = label;
  }
  return d;
}

/// 1-D regression target y = sin(2x) + noise on [-3, 3].
inline RegressionData make_sine1d(long n, std::uint64_t seed) {
  if (n < 2) throw InputError("make_sine1d: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  RegressionData d;
  d.x.resize(n, 1);
  d.y.resize(n, 1);
  for (long i = 0; i < n; ++i) {
    d.x(i, 0) = ux(rng);
    d.y(i, 0) = std::sin(2.0 * d.x(i, 0)) + noise(rng);
  }
  return d;
}

inline PointSet make_uniform(long n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointSet x(n, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.reshaped()[i] = u(rng);
  return x;
}

}  // namespace sk
