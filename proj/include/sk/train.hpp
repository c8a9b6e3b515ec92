#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "sk/common.hpp"
#include "sk/dense.hpp"
#include "sk/losses.hpp"
#include "sk/optim.hpp"
#include "sk/selection.hpp"
#include "sk/transport.hpp"

namespace sk {

inline PointSet one_hot(const IndexVector& labels, int classes) {
  if (classes < 1) throw InputError("one_hot: class count must be >= 1");
  PointSet out = PointSet::Zero(labels.size(), classes);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw InputError("one_hot: label " + std::to_string(labels[i]) + " out of range [0, " +
                       std::to_string(classes) + ")");
    out(i, labels[i]) = 1.0;
  }
  return out;
}

struct ReadoutConfig {
  bool learn_targets = true;
  bool learn_centers = false;
  int epochs = 0;
  int batch = 64;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double lambda = 1e-9;
  double gm_weight = 0.0;
  LossKind loss = LossKind::cross_entropy;
  int center_count = 0;  // 0 = every training point is a center
  std::uint64_t seed = 0;
};

struct ReadoutResult {
  PointSet centers;   // final theta_x
  PointSet targets;   // final theta_y
  DenseModel model;   // regressor built on the final parameters
  std::vector<double> epoch_loss;  // mean per-sample loss, one entry per epoch
};

/// Minibatch training of the kernel readout z -> k(z, theta_x) K^-1 theta_y.
/// theta_y starts at the one-hot labels, so with 0 epochs the result is the
/// training-free predictor built directly from the data.
inline ReadoutResult train_readout(const KernelSpec& spec, const PointSet& x,
                                   const IndexVector& labels, int classes,
                                   const ReadoutConfig& config) {
  if (x.rows() != labels.size()) throw InputError("train_readout: one label per row required");
  if (classes <= 0) classes = labels.size() > 0 ? labels.maxCoeff() + 1 : 1;

  ReadoutResult out;
  if (config.center_count > 0 && config.center_count < x.rows()) {
    const Selection sel = greedy_select(spec.normalized(x), config.center_count, spec.metric);
    out.centers.resize(config.center_count, x.cols());
    IndexVector center_labels(config.center_count);
    for (int i = 0; i < config.center_count; ++i) {
      out.centers.row(i) = x.row(sel.indices[size_t(i)]);
      center_labels[i] = labels[sel.indices[size_t(i)]];
    }
    out.targets = one_hot(center_labels, classes);
  } else {
    out.centers = x;
    out.targets = one_hot(labels, classes);
  }

  const bool trainable = (config.learn_targets || config.learn_centers) && config.epochs > 0;
  if (trainable) {
    std::vector<PointSet> params;
    params.push_back(out.targets);
    if (config.learn_centers) params.push_back(out.centers);
    AdamConfig adam;
    adam.lr = config.lr;
    adam.weight_decay = config.weight_decay;
    TrainState state = TrainState::make(std::move(params), adam);

    std::mt19937_64 rng(config.seed);
    std::vector<int> order(size_t(x.rows()));
    std::iota(order.begin(), order.end(), 0);
    const int batch_size = std::max(1, std::min<int>(config.batch, int(x.rows())));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_sum = 0.0;
      long seen = 0;
      for (size_t pos = 0; pos < order.size(); pos += size_t(batch_size)) {
        const size_t take = std::min(size_t(batch_size), order.size() - pos);
        PointSet zb(take, x.cols());
        IndexVector lb(take);
        for (size_t i = 0; i < take; ++i) {
          zb.row(Eigen::Index(i)) = x.row(order[pos + i]);
          lb[Eigen::Index(i)] = labels[order[pos + i]];
        }
        const PointSet& theta_y = state.params[0];
        const PointSet& theta_x = config.learn_centers ? state.params[1] : out.centers;

        const DenseModel batch_model(spec, theta_x, theta_y, config.lambda);
        const PointSet pred = batch_model.predict(zb);
        const LossTargets targets = config.loss == LossKind::cross_entropy
                                        ? LossTargets::from_labels(lb)
                                        : LossTargets::from_values(one_hot(lb, classes));
        LossValue loss = loss_and_grad({config.loss, config.gm_weight}, pred, targets);
        if (!std::isfinite(loss.value))
          throw TrainingError("loss diverged at epoch " + std::to_string(epoch));

        const KrrGradients kg =
            krr_gradients(spec, theta_x, theta_y, zb, config.lambda, loss.grad);
        std::vector<PointSet> grads;
        grads.push_back(kg.targets);
        if (config.learn_centers) grads.push_back(kg.features);
        if (config.gm_weight != 0.0) {
          const GromovMonge gm = gromov_monge(theta_x, theta_y);
          loss.value += config.gm_weight * gm.value;
          grads[0] += config.gm_weight * gm.grad_y;
          if (config.learn_centers) grads[1] += config.gm_weight * gm.grad_x;
        }
        adamw_step(state, grads);
        epoch_sum += loss.value;
        seen += long(take);
      }
      out.epoch_loss.push_back(epoch_sum / double(std::max(seen, 1L)));
    }
    out.targets = state.params[0];
    if (config.learn_centers) out.centers = state.params[1];
  }

  out.model = DenseModel(spec, out.centers, out.targets, config.lambda);
  return out;
}

/// Two-layer MLP with a kernel perturbation on the first and final layer:
///   Q(s) = ReLU([ReLU(s th1) + P1(s)] th2) th3 + P3(s)
/// where P1, P3 are dense kernel regressors on learnable centers/targets.
struct HybridModel {
  KernelSpec kernel1;
  KernelSpec kernel3;
  double lambda = 1e-9;
  PointSet theta1;  // S x L
  PointSet theta2;  // L x L
  PointSet theta3;  // L x A
  PointSet x1, y1;  // B x S, B x L
  PointSet x3, y3;  // B x S, B x A
};

struct HybridGradients {
  PointSet theta1, theta2, theta3, x1, y1, x3, y3;
};

namespace detail {

inline PointSet xavier(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / double(rows + cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  PointSet out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.reshaped()[i] = u(rng);
  return out;
}

}  // namespace detail

/// Random affine weights, spread-out kernel centers, zero kernel targets:
/// at initialization the hybrid coincides with the plain MLP.
inline HybridModel init_hybrid(int state_dim, int latent_dim, int action_dim, int centers,
                               std::uint64_t seed, KernelSpec kernel = {}) {
  if (state_dim < 1 || latent_dim < 1 || action_dim < 1 || centers < 1)
    throw InputError("init_hybrid: all dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  HybridModel m;
  m.kernel1 = kernel;
  m.kernel3 = kernel;
  m.theta1 = detail::xavier(state_dim, latent_dim, rng);
  m.theta2 = detail::xavier(latent_dim, latent_dim, rng);
  m.theta3 = detail::xavier(latent_dim, action_dim, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  m.x1.resize(centers, state_dim);
  for (Eigen::Index i = 0; i < m.x1.size(); ++i) m.x1.reshaped()[i] = gauss(rng);
  m.x3.resize(centers, state_dim);
  for (Eigen::Index i = 0; i < m.x3.size(); ++i) m.x3.reshaped()[i] = gauss(rng);
  m.y1 = PointSet::Zero(centers, latent_dim);
  m.y3 = PointSet::Zero(centers, action_dim);
  return m;
}

inline PointSet hybrid_forward(const HybridModel& m, const PointSet& s) {
  if (s.cols() != m.theta1.rows())
    throw InputError("hybrid_forward: state dimension mismatch");
  const DenseModel p1(m.kernel1, m.x1, m.y1, m.lambda);
  const DenseModel p3(m.kernel3, m.x3, m.y3, m.lambda);
  const PointSet h1 = (s * m.theta1).cwiseMax(0.0);
  const PointSet h2 = h1 + p1.predict(s);
  const PointSet h4 = (h2 * m.theta2).cwiseMax(0.0);
  return h4 * m.theta3 + p3.predict(s);
}

/// Reverse-mode gradients of <upstream, Q(s)> for every parameter set.
inline HybridGradients hybrid_backward(const HybridModel& m, const PointSet& s,
                                       const PointSet& upstream,
                                       PointSet* prediction = nullptr) {
  const PointSet h0 = s * m.theta1;
  const PointSet h1 = h0.cwiseMax(0.0);
  const PointSet h2 = h1 + DenseModel(m.kernel1, m.x1, m.y1, m.lambda).predict(s);
  const PointSet h3 = h2 * m.theta2;
  const PointSet h4 = h3.cwiseMax(0.0);
  if (prediction)
    *prediction = h4 * m.theta3 + DenseModel(m.kernel3, m.x3, m.y3, m.lambda).predict(s);

  HybridGradients g;
  g.theta3 = h4.transpose() * upstream;
  const PointSet g4 = upstream * m.theta3.transpose();
  const PointSet g3 = (h3.array() > 0.0).select(g4, 0.0);
  g.theta2 = h2.transpose() * g3;
  const PointSet g2 = g3 * m.theta2.transpose();  // cotangent at h2 = h1 + P1(s)
  g.theta1 = s.transpose() * PointSet((h0.array() > 0.0).select(g2, 0.0));

  const KrrGradients k1 = krr_gradients(m.kernel1, m.x1, m.y1, s, m.lambda, g2);
  g.x1 = k1.features;
  g.y1 = k1.targets;
  const KrrGradients k3 = krr_gradients(m.kernel3, m.x3, m.y3, s, m.lambda, upstream);
  g.x3 = k3.features;
  g.y3 = k3.targets;
  return g;
}

struct HybridTrainConfig {
  LossKind loss = LossKind::smooth_l1;
  int epochs = 10;
  int batch = 64;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  bool train_kernel_params = true;  // false freezes x_i, y_i (plain MLP training)
};

/// AdamW loop over all hybrid parameter sets; returns mean per-sample loss
/// per epoch and leaves the trained parameters in `model`.
inline std::vector<double> train_hybrid(HybridModel& model, const PointSet& states,
                                        const PointSet& targets, const HybridTrainConfig& config) {
  if (states.rows() != targets.rows())
    throw InputError("train_hybrid: states/targets row mismatch");
  if (targets.cols() != model.theta3.cols())
    throw InputError("train_hybrid: target dimension must match action dimension");

  std::vector<PointSet> params{model.theta1, model.theta2, model.theta3};
  if (config.train_kernel_params) {
    params.push_back(model.x1);
    params.push_back(model.y1);
    params.push_back(model.x3);
    params.push_back(model.y3);
  }
  AdamConfig adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;
  TrainState state = TrainState::make(std::move(params), adam);

  std::mt19937_64 rng(config.seed);
  std::vector<int> order(size_t(states.rows()));
  std::iota(order.begin(), order.end(), 0);
  const int batch_size = std::max(1, std::min<int>(config.batch, int(states.rows())));
  std::vector<double> curve;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    long seen = 0;
    for (size_t pos = 0; pos < order.size(); pos += size_t(batch_size)) {
      const size_t take = std::min(size_t(batch_size), order.size() - pos);
      PointSet sb(take, states.cols()), tb(take, targets.cols());
      for (size_t i = 0; i < take; ++i) {
        sb.row(Eigen::Index(i)) = states.row(order[pos + i]);
        tb.row(Eigen::Index(i)) = targets.row(order[pos + i]);
      }
      model.theta1 = state.params[0];
      model.theta2 = state.params[1];
      model.theta3 = state.params[2];
      if (config.train_kernel_params) {
        model.x1 = state.params[3];
        model.y1 = state.params[4];
        model.x3 = state.params[5];
        model.y3 = state.params[6];
      }
      const PointSet pred = hybrid_forward(model, sb);
      const LossValue loss =
          loss_and_grad({config.loss, 0.0}, pred, LossTargets::from_values(tb));
      if (!std::isfinite(loss.value))
        throw TrainingError("loss diverged at epoch " + std::to_string(epoch));
      const HybridGradients hg = hybrid_backward(model, sb, loss.grad);
      std::vector<PointSet> grads{hg.theta1, hg.theta2, hg.theta3};
      if (config.train_kernel_params) {
        grads.push_back(hg.x1);
        grads.push_back(hg.y1);
        grads.push_back(hg.x3);
        grads.push_back(hg.y3);
      }
      adamw_step(state, grads);
      epoch_sum += loss.value;
      seen += long(take);
    }
    curve.push_back(epoch_sum / double(std::max(seen, 1L)));
  }
  model.theta1 = state.params[0];
  model.theta2 = state.params[1];
  model.theta3 = state.params[2];
  if (config.train_kernel_params) {
    model.x1 = state.params[3];
    model.y1 = state.params[4];
    model.x3 = state.params[5];
    model.y3 = state.params[6];
  }
  return curve;
}

}  // namespace sk
