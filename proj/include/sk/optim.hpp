#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sk/common.hpp"

namespace sk {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Parameter tensors plus AdamW moment accumulators and step counter. The
/// state owns the parameters; training loops read them back after stepping.
struct TrainState {
  std::vector<PointSet> params;
  std::vector<PointSet> moment1;
  std::vector<PointSet> moment2;
  long step = 0;
  AdamConfig config;

  static TrainState make(std::vector<PointSet> params, AdamConfig config = {}) {
    TrainState s;
    s.config = config;
    s.moment1.reserve(params.size());
    s.moment2.reserve(params.size());
    for (const PointSet& p : params) {
      s.moment1.push_back(PointSet::Zero(p.rows(), p.cols()));
      s.moment2.push_back(PointSet::Zero(p.rows(), p.cols()));
    }
    s.params = std::move(params);
    return s;
  }
};

/// One AdamW update: decoupled weight decay applied to the parameters first,
/// then the bias-corrected moment step.
inline void adamw_step(TrainState& state, const std::vector<PointSet>& grads) {
  if (grads.size() != state.params.size())
    throw InputError("adamw_step: gradient count does not match parameter count");
  for (size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].rows() != state.params[i].rows() || grads[i].cols() != state.params[i].cols())
      throw InputError("adamw_step: gradient shape mismatch for parameter " + std::to_string(i));
    if (!grads[i].allFinite())
      throw TrainingError("non-finite gradient for parameter " + std::to_string(i) +
                          " at step " + std::to_string(state.step + 1));
  }
  state.step += 1;
  const AdamConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, double(state.step));
  for (size_t i = 0; i < grads.size(); ++i) {
    PointSet& p = state.params[i];
    PointSet& m = state.moment1[i];
    PointSet& v = state.moment2[i];
    if (c.weight_decay != 0.0) p *= (1.0 - c.lr * c.weight_decay);
    m = c.beta1 * m + (1.0 - c.beta1) * grads[i];
    v = c.beta2 * v + (1.0 - c.beta2) * grads[i].cwiseProduct(grads[i]);
    p.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
  }
}

}  // namespace sk
