#pragma once

#include <utility>
#include <vector>

#include "sk/common.hpp"
#include "sk/dense.hpp"
#include "sk/selection.hpp"
#include "sk/sparse.hpp"

namespace sk {

/// Nadaraya-Watson blend of overlapping local models: each query mixes the
/// cells anchored at its J nearest training points, weighted by
/// phi_w(d(z, anchor)) and normalized over the anchors.
struct BlendedModel {
  SparseModel sparse;
  int blend_count = 4;
  Activation weight_activation = Activation::exponential;
};

inline BlendedModel make_blended(SparseModel sparse, int blend_count = 4,
                                 Activation weight_activation = Activation::exponential) {
  if (blend_count < 1) throw InputError("make_blended: blend count must be >= 1");
  if (blend_count > sparse.train_size()) {
    detail::warn("blend count " + std::to_string(blend_count) + " clamped to N = " +
                 std::to_string(sparse.train_size()));
    blend_count = int(sparse.train_size());
  }
  return BlendedModel{std::move(sparse), blend_count, weight_activation};
}

struct BlendInfo {
  std::vector<int> anchors;
  Vector weights;  // non-negative, sums to 1
};

namespace detail {

inline BlendInfo blend_info_normalized(const BlendedModel& m, const double* zn) {
  const KnnResult knn = m.sparse.index().query(zn, m.blend_count);
  BlendInfo info;
  info.anchors = knn.indices;
  info.weights = Vector(Eigen::Index(knn.indices.size()));
  for (Eigen::Index j = 0; j < info.weights.size(); ++j)
    info.weights[j] = activation_value(m.weight_activation, knn.distances[size_t(j)]);
  const double total = info.weights.sum();
  if (total > 0.0 && std::isfinite(total)) {
    info.weights /= total;
  } else {  // all weights underflowed; fall back to the nearest anchor
    info.weights.setZero();
    info.weights[0] = 1.0;
  }
  return info;
}

}  // namespace detail

inline BlendInfo blend_weights(const BlendedModel& m, const Vector& z) {
  const PointSet zn = m.sparse.spec().normalized(PointSet(z.transpose()));
  return detail::blend_info_normalized(m, zn.data());
}

inline PointSet predict_blended(const BlendedModel& m, const PointSet& z) {
  if (z.cols() != m.sparse.feature_dim()) throw InputError("predict_blended: dimension mismatch");
  const PointSet zn = m.sparse.spec().normalized(z);
  const NeighborIndex& index = m.sparse.index();
  PointSet out = PointSet::Zero(z.rows(), m.sparse.target_dim());
  for (Eigen::Index p = 0; p < z.rows(); ++p) {
    const double* zp = zn.data() + p * zn.cols();
    const BlendInfo info = detail::blend_info_normalized(m, zp);
    for (size_t j = 0; j < info.anchors.size(); ++j) {
      if (info.weights[Eigen::Index(j)] == 0.0) continue;
      // The anchor's own cell: the M-NN set of that training point.
      const KnnResult anchor_knn =
          index.query(index.points().data() + Eigen::Index(info.anchors[j]) * index.dim(),
                      m.sparse.bandwidth());
      const auto cell = m.sparse.cell_model(cell_key(anchor_knn.indices));
      const Matrix g = detail::gram_pre_normalized(
          m.sparse.spec().metric, m.sparse.spec().activation,
          Eigen::Map<const PointSet>(zp, 1, zn.cols()), cell->centers);
      out.row(p) += info.weights[Eigen::Index(j)] * (g * cell->coeffs).row(0);
    }
  }
  return out;
}

/// Hierarchical regressor: a coarse dense model on a greedy-selected subset
/// plus a sparse local model on the residuals.
struct HierModel {
  DenseModel coarse;
  SparseModel residual;
  std::vector<int> coarse_indices;
};

inline HierModel fit_hierarchical(const KernelSpec& spec, const PointSet& x, const PointSet& y,
                                  int bandwidth, int coarse_size, double lambda,
                                  size_t cache_capacity = 10000) {
  if (coarse_size < 1 || coarse_size > x.rows())
    throw InputError("fit_hierarchical: coarse size out of range");
  // Select well-spread coarse centers in the kernel's own geometry.
  const PointSet xn = spec.normalized(x);
  const Selection sel = greedy_select(xn, coarse_size, spec.metric);
  PointSet cx(coarse_size, x.cols()), cy(coarse_size, y.cols());
  for (int i = 0; i < coarse_size; ++i) {
    cx.row(i) = x.row(sel.indices[size_t(i)]);
    cy.row(i) = y.row(sel.indices[size_t(i)]);
  }
  DenseModel coarse(spec, std::move(cx), std::move(cy), lambda);
  PointSet residual_targets = y - coarse.predict(x);
  SparseModel residual(spec, x, std::move(residual_targets), bandwidth, lambda, cache_capacity);
  return HierModel{std::move(coarse), std::move(residual), sel.indices};
}

inline PointSet predict_hierarchical(const HierModel& m, const PointSet& z) {
  return m.coarse.predict(z) + m.residual.predict(z);
}

}  // namespace sk
