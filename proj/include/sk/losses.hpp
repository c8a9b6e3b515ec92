#pragma once

#include <cmath>
#include <utility>

#include "sk/common.hpp"

namespace sk {

enum class LossKind { mse, cross_entropy, smooth_l1 };

struct LossSpec {
  LossKind kind = LossKind::mse;
  double gm_weight = 0.0;  // optional Gromov-Monge regularizer weight
};

/// Targets for loss_and_grad: `values` for regression losses, integer
/// `labels` for softmax cross-entropy.
struct LossTargets {
  PointSet values;
  IndexVector labels;

  static LossTargets from_values(PointSet v) { return {std::move(v), {}}; }
  static LossTargets from_labels(IndexVector l) { return {{}, std::move(l)}; }
};

struct LossValue {
  double value = 0.0;
  PointSet grad;  // d loss / d predictions
};

inline LossValue mse_loss(const PointSet& pred, const PointSet& targets) {
  if (pred.rows() != targets.rows() || pred.cols() != targets.cols())
    throw InputError("mse_loss: prediction/target shape mismatch");
  LossValue out;
  out.grad = 2.0 * (pred - targets);
  out.value = (pred - targets).squaredNorm();
  return out;
}

/// Softmax cross-entropy over rows of logits; stable via log-sum-exp.
inline LossValue cross_entropy_loss(const PointSet& logits, const IndexVector& labels) {
  if (logits.rows() != labels.size())
    throw InputError("cross_entropy_loss: one label per prediction row required");
  LossValue out;
  out.grad.resize(logits.rows(), logits.cols());
  for (Eigen::Index p = 0; p < logits.rows(); ++p) {
    const int label = labels[p];
    if (label < 0 || label >= logits.cols())
      throw InputError("cross_entropy_loss: label " + std::to_string(label) +
                       " out of range [0, " + std::to_string(logits.cols()) + ") at row " +
                       std::to_string(p));
    const double peak = logits.row(p).maxCoeff();
    const double lse = peak + std::log((logits.row(p).array() - peak).exp().sum());
    out.value += lse - logits(p, label);
    out.grad.row(p) = (logits.row(p).array() - lse).exp();
    out.grad(p, label) -= 1.0;
  }
  return out;
}

/// Huber-style smooth L1 with transition point 1.
inline LossValue smooth_l1_loss(const PointSet& pred, const PointSet& targets) {
  if (pred.rows() != targets.rows() || pred.cols() != targets.cols())
    throw InputError("smooth_l1_loss: prediction/target shape mismatch");
  constexpr double delta = 1.0;
  LossValue out;
  out.grad.resize(pred.rows(), pred.cols());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double e = pred.reshaped()[i] - targets.reshaped()[i];
    if (std::abs(e) <= delta) {
      out.value += 0.5 * e * e / delta;
      out.grad.reshaped()[i] = e / delta;
    } else {
      out.value += std::abs(e) - 0.5 * delta;
      out.grad.reshaped()[i] = e > 0.0 ? 1.0 : -1.0;
    }
  }
  return out;
}

/// Aggregate loss and its gradient with respect to the predictions — the
/// upstream cotangent fed to krr_gradients.
inline LossValue loss_and_grad(const LossSpec& spec, const PointSet& pred,
                               const LossTargets& targets) {
  switch (spec.kind) {
    case LossKind::mse: return mse_loss(pred, targets.values);
    case LossKind::cross_entropy: return cross_entropy_loss(pred, targets.labels);
    case LossKind::smooth_l1: return smooth_l1_loss(pred, targets.values);
  }
  throw InputError("loss_and_grad: unknown loss kind");
}

}  // namespace sk
