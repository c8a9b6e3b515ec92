#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "sk/common.hpp"

namespace sk {

enum class Metric { euclidean, manhattan };
enum class Activation { exponential, gaussian };

inline const char* to_string(Metric m) { return m == Metric::euclidean ? "l2" : "l1"; }
inline const char* to_string(Activation a) {
  return a == Activation::exponential ? "exp" : "gauss";
}

/// phi(r); normalized so phi(0) = 1 and phi is non-increasing on r >= 0.
inline double activation_value(Activation a, double r) {
  switch (a) {
    case Activation::exponential: return std::exp(-r);
    case Activation::gaussian: return std::exp(-r * r);
  }
  return 0.0;
}

/// d/dr phi(r).
inline double activation_slope(Activation a, double r) {
  switch (a) {
    case Activation::exponential: return -std::exp(-r);
    case Activation::gaussian: return -2.0 * r * std::exp(-r * r);
  }
  return 0.0;
}

namespace detail {

// Shared by Gram assembly, the neighbor index and the brute-force oracle so
// that all paths produce bit-identical distances.
inline double row_distance(const double* a, const double* b, Eigen::Index d, Metric metric) {
  if (metric == Metric::euclidean) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double t = a[i] - b[i];
      s += t * t;
    }
    return std::sqrt(s);
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double row_sqdist_l2(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace detail

/// Per-dimension affine map u -> (u - shift) / scale fitted to a point set.
struct Normalizer {
  Vector shift;
  Vector scale;

  Eigen::Index dim() const { return shift.size(); }

  PointSet apply(const PointSet& x) const {
    if (x.cols() != dim())
      throw InputError("normalizer expects dimension " + std::to_string(dim()) + ", got " +
                       std::to_string(x.cols()));
    PointSet out = x;
    out.rowwise() -= shift.transpose();
    out.array().rowwise() /= scale.transpose().array();
    return out;
  }
};

/// Column means and population standard deviations of X; zero-variance
/// columns keep scale 1 so constant or one-hot features pass through.
inline Normalizer fit_normalizer(const PointSet& x) {
  if (x.rows() < 2) throw InputError("fit_normalizer requires at least 2 points");
  Normalizer n;
  n.shift = x.colwise().mean();
  n.scale = Vector(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - n.shift[j]).square().sum() / double(x.rows());
    const double sd = std::sqrt(var);
    n.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return n;
}

/// Radial kernel k(u,v) = phi(d(S(u), S(v))) with optional normalizing map S.
struct KernelSpec {
  Metric metric = Metric::euclidean;
  Activation activation = Activation::exponential;
  std::optional<Normalizer> normalizer;

  PointSet normalized(const PointSet& x) const {
    return normalizer ? normalizer->apply(x) : x;
  }

  double operator()(const Vector& u, const Vector& v) const;
};

inline double distance(const Vector& u, const Vector& v, Metric metric) {
  if (u.size() != v.size() || u.size() < 1)
    throw InputError("distance: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  return detail::row_distance(u.data(), v.data(), u.size(), metric);
}

inline double KernelSpec::operator()(const Vector& u, const Vector& v) const {
  if (!normalizer) return activation_value(activation, distance(u, v, metric));
  PointSet a(1, u.size()), b(1, v.size());
  a.row(0) = u.transpose();
  b.row(0) = v.transpose();
  const PointSet an = normalizer->apply(a), bn = normalizer->apply(b);
  return activation_value(activation,
                          detail::row_distance(an.data(), bn.data(), an.cols(), metric));
}

namespace detail {

/// Gram matrix of two pre-normalized point sets.
inline Matrix gram_pre_normalized(Metric metric, Activation act, const PointSet& z,
                                  const PointSet& x) {
  Matrix g(z.rows(), x.rows());
  const Eigen::Index d = x.cols();
  for (Eigen::Index p = 0; p < z.rows(); ++p) {
    const double* zp = z.data() + p * d;
    for (Eigen::Index n = 0; n < x.rows(); ++n)
      g(p, n) = activation_value(act, row_distance(zp, x.data() + n * d, d, metric));
  }
  return g;
}

/// Symmetric self-Gram with a duplicate-pair count (pairwise distance < 1e-12).
inline Matrix gram_self(Metric metric, Activation act, const PointSet& x, long* duplicates) {
  Matrix g(x.rows(), x.rows());
  const Eigen::Index d = x.cols();
  long dup = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    g(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      const double r = row_distance(x.data() + i * d, x.data() + j * d, d, metric);
      if (r < 1e-12) ++dup;
      const double v = activation_value(act, r);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  if (duplicates) *duplicates = dup;
  return g;
}

/// Accumulates c * dk(u,v)/du into grad, where a = S(u), b = S(v) are the
/// normalized rows and inv_scale is 1/S' (null when no normalizer). The l2
/// derivative at coincident points is taken as 0.
inline void accumulate_kernel_grad(Metric metric, Activation act, const double* a,
                                   const double* b, Eigen::Index d, const double* inv_scale,
                                   double c, double* grad) {
  const double r = row_distance(a, b, d, metric);
  const double w = c * activation_slope(act, r);
  if (w == 0.0) return;
  if (metric == Metric::euclidean) {
    if (r == 0.0) return;  // subgradient convention
    for (Eigen::Index i = 0; i < d; ++i) {
      double g = w * (a[i] - b[i]) / r;
      if (inv_scale) g *= inv_scale[i];
      grad[i] += g;
    }
  } else {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double t = a[i] - b[i];
      if (t == 0.0) continue;
      double g = w * (t > 0.0 ? 1.0 : -1.0);
      if (inv_scale) g *= inv_scale[i];
      grad[i] += g;
    }
  }
}

}  // namespace detail

/// Gram matrix (p,n) -> k(z^p, x^n). Symmetric with unit diagonal when Z = X.
inline Matrix gram(const KernelSpec& spec, const PointSet& z, const PointSet& x) {
  if (z.cols() != x.cols())
    throw InputError("gram: dimension mismatch (" + std::to_string(z.cols()) + " vs " +
                     std::to_string(x.cols()) + ")");
  return detail::gram_pre_normalized(spec.metric, spec.activation, spec.normalized(z),
                                     spec.normalized(x));
}

}  // namespace sk
