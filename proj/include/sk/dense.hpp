#pragma once

#include <Eigen/Cholesky>

#include <string>
#include <utility>

#include "sk/common.hpp"
#include "sk/kernels.hpp"

namespace sk {

namespace detail {

/// Cholesky of K0 + lambda*I with jitter escalation: on failure retry with
/// jitter max(lambda, 1e-12) * 10^j up to 1e-6, then give up.
inline Eigen::LLT<Matrix> factorize_spd(const Matrix& k0, double lambda, double* jitter_used) {
  Matrix k = k0;
  k.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(k);
  double jitter = lambda;
  if (llt.info() != Eigen::Success) {
    jitter = std::max(lambda, 1e-12) * 10.0;
    for (; jitter <= 1e-6; jitter *= 10.0) {
      k = k0;
      k.diagonal().array() += jitter;
      llt.compute(k);
      if (llt.info() == Eigen::Success) break;
    }
    if (llt.info() != Eigen::Success)
      throw NumericalError("kernel matrix factorization failed (final jitter tried " +
                           std::to_string(jitter / 10.0) + ")");
  }
  if (jitter_used) *jitter_used = jitter;
  return llt;
}

}  // namespace detail

/// Dense kernel ridge regressor in the interpolation regime:
/// predict(z) = k(z,X) (k(X,X) + lambda*I)^-1 Y.
class DenseModel {
 public:
  DenseModel() = default;

  DenseModel(KernelSpec spec, PointSet x, PointSet y, double lambda)
      : spec_(std::move(spec)), x_(std::move(x)), y_(std::move(y)), lambda_(lambda) {
    if (x_.rows() < 1) throw InputError("fit_dense: empty training set");
    if (x_.rows() != y_.rows()) throw InputError("fit_dense: X and Y row counts differ");
    if (lambda_ < 0.0) throw InputError("fit_dense: lambda must be >= 0");
    xn_ = spec_.normalized(x_);
    long duplicates = 0;
    const Matrix k0 = detail::gram_self(spec_.metric, spec_.activation, xn_, &duplicates);
    if (duplicates > 0)
      detail::warn(std::to_string(duplicates) +
                   " training point pair(s) closer than 1e-12; relying on Tikhonov jitter");
    llt_ = detail::factorize_spd(k0, lambda_, &jitter_);
    theta_ = llt_.solve(Matrix(y_));
  }

  /// Rebuilds the factorization but adopts previously computed coefficients,
  /// so a reloaded model predicts bit-identically.
  static DenseModel restore(KernelSpec spec, PointSet x, PointSet y, double lambda,
                            Matrix theta) {
    DenseModel m(std::move(spec), std::move(x), std::move(y), lambda);
    if (theta.rows() != m.theta_.rows() || theta.cols() != m.theta_.cols())
      throw InputError("restore: coefficient shape does not match the stored data");
    m.theta_ = std::move(theta);
    return m;
  }

  Eigen::Index train_size() const { return x_.rows(); }
  Eigen::Index feature_dim() const { return x_.cols(); }
  Eigen::Index target_dim() const { return y_.cols(); }
  const KernelSpec& spec() const { return spec_; }
  const PointSet& features() const { return x_; }
  const PointSet& targets() const { return y_; }
  double lambda() const { return lambda_; }
  double jitter() const { return jitter_; }
  const Matrix& coefficients() const { return theta_; }

  PointSet predict(const PointSet& z) const {
    PointSet out(z.rows(), y_.cols());
    out.noalias() = cross_gram(z) * theta_;
    return out;
  }

  /// Cardinal (Lagrange) basis psi(Z) = k(Z,X) K^-1, the row weights that
  /// reproduce predictions as psi(Z) * Y.
  Matrix cardinal_basis(const PointSet& z) const {
    return llt_.solve(cross_gram(z).transpose()).transpose();
  }

  /// Per-target-column RKHS norm sqrt(y^T K^-1 y).
  Vector rkhs_norm() const {
    Vector out(y_.cols());
    for (Eigen::Index c = 0; c < y_.cols(); ++c)
      out[c] = std::sqrt(std::max(0.0, y_.col(c).dot(theta_.col(c))));
    return out;
  }

  /// Power function eps(z) = sqrt(max(0, 1 - k(z,X) K^-1 k(X,z))), the
  /// pointwise error multiplier for unit-norm RKHS functions. Round-off can
  /// push the quadratic form slightly past 1, hence the clamp.
  Vector power_function(const PointSet& z) const {
    const Matrix g = cross_gram(z);
    const Matrix w = llt_.solve(g.transpose());
    Vector out(z.rows());
    for (Eigen::Index p = 0; p < z.rows(); ++p)
      out[p] = std::sqrt(std::max(0.0, 1.0 - g.row(p).dot(w.col(p))));
    return out;
  }

  const Eigen::LLT<Matrix>& factorization() const { return llt_; }
  const PointSet& normalized_features() const { return xn_; }

 private:
  Matrix cross_gram(const PointSet& z) const {
    if (z.cols() != x_.cols())
      throw InputError("predict: query dimension " + std::to_string(z.cols()) +
                       " does not match model dimension " + std::to_string(x_.cols()));
    return detail::gram_pre_normalized(spec_.metric, spec_.activation, spec_.normalized(z), xn_);
  }

  KernelSpec spec_;
  PointSet x_, y_, xn_;
  double lambda_ = 0.0;
  double jitter_ = 0.0;
  Eigen::LLT<Matrix> llt_;
  Matrix theta_;
};

inline DenseModel fit_dense(KernelSpec spec, PointSet x, PointSet y, double lambda) {
  return DenseModel(std::move(spec), std::move(x), std::move(y), lambda);
}

inline PointSet predict_dense(const DenseModel& m, const PointSet& z) { return m.predict(z); }

struct KrrGradients {
  PointSet targets;  // N x Dy
  PointSet features; // N x Dx
  PointSet queries;  // P x Dx
};

/// Vector-Jacobian products of z -> k(Z,X)(k(X,X)+lambda I)^-1 Y against the
/// upstream cotangent, for each of Y, X and Z. Uses
/// d(K^-1) = -K^-1 dK K^-1 for the feature term.
inline KrrGradients krr_gradients(const KernelSpec& spec, const PointSet& x, const PointSet& y,
                                  const PointSet& z, double lambda, const PointSet& upstream) {
  if (x.rows() != y.rows()) throw InputError("krr_gradients: X and Y row counts differ");
  if (z.cols() != x.cols()) throw InputError("krr_gradients: Z and X dimensions differ");
  if (upstream.rows() != z.rows() || upstream.cols() != y.cols())
    throw InputError("krr_gradients: upstream shape must match predictions");

  const Eigen::Index n = x.rows(), p = z.rows(), d = x.cols();
  const PointSet xn = spec.normalized(x);
  const PointSet zn = spec.normalized(z);
  const Matrix k0 = detail::gram_self(spec.metric, spec.activation, xn, nullptr);
  const Eigen::LLT<Matrix> llt = detail::factorize_spd(k0, lambda, nullptr);
  const Matrix g = detail::gram_pre_normalized(spec.metric, spec.activation, zn, xn);

  const Matrix coeff = llt.solve(Matrix(y));                       // A = K^-1 Y
  const Matrix grad_y = llt.solve(g.transpose() * Matrix(upstream)); // B = K^-1 G^T U
  const Matrix gram_cotangent = Matrix(upstream) * coeff.transpose();  // dL/dG, P x N
  const Matrix kmat_cotangent = -(grad_y * coeff.transpose());         // dL/dK, N x N

  Vector inv_scale;
  const double* inv_scale_ptr = nullptr;
  if (spec.normalizer) {
    inv_scale = spec.normalizer->scale.cwiseInverse();
    inv_scale_ptr = inv_scale.data();
  }

  KrrGradients out;
  out.targets = grad_y;
  out.features = PointSet::Zero(n, d);
  out.queries = PointSet::Zero(p, d);

  for (Eigen::Index q = 0; q < p; ++q) {
    const double* zq = zn.data() + q * d;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = gram_cotangent(q, i);
      if (c == 0.0) continue;
      const double* xi = xn.data() + i * d;
      detail::accumulate_kernel_grad(spec.metric, spec.activation, zq, xi, d, inv_scale_ptr, c,
                                     out.queries.data() + q * d);
      detail::accumulate_kernel_grad(spec.metric, spec.activation, xi, zq, d, inv_scale_ptr, c,
                                     out.features.data() + i * d);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = xn.data() + i * d;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = kmat_cotangent(i, j) + kmat_cotangent(j, i);
      if (c == 0.0) continue;
      detail::accumulate_kernel_grad(spec.metric, spec.activation, xi, xn.data() + j * d, d,
                                     inv_scale_ptr, c, out.features.data() + i * d);
    }
  }
  return out;
}

}  // namespace sk
