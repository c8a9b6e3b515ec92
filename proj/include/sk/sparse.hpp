#pragma once

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sk/common.hpp"
#include "sk/dense.hpp"
#include "sk/kernels.hpp"
#include "sk/neighbors.hpp"

namespace sk {

/// One solved tessellation cell: support rows in canonical (sorted-index)
/// order, their factorization and local coefficients.
struct LocalModel {
  std::vector<std::int32_t> ids;
  PointSet centers;  // m x D, normalized coordinates
  Eigen::LLT<Matrix> llt;
  Matrix coeffs;     // m x Dy
};

/// Bounded LRU map CellKey -> LocalModel. Lookups and inserts are
/// mutex-protected; factorization happens outside the lock, so two racing
/// queries may solve the same cell twice but never observe a torn entry.
class CellCache {
 public:
  explicit CellCache(size_t capacity) : state_(std::make_unique<State>()) {
    state_->capacity = std::max<size_t>(capacity, 1);
  }

  template <class Factory>
  std::shared_ptr<const LocalModel> get_or_compute(const CellKey& key, Factory&& make) const {
    State& s = *state_;
    {
      std::lock_guard<std::mutex> lock(s.mutex);
      auto it = s.map.find(key);
      if (it != s.map.end()) {
        s.lru.splice(s.lru.begin(), s.lru, it->second.second);
        ++s.hits;
        return it->second.first;
      }
    }
    std::shared_ptr<const LocalModel> value = make();
    {
      std::lock_guard<std::mutex> lock(s.mutex);
      auto it = s.map.find(key);
      if (it != s.map.end()) {  // lost the race; adopt the existing entry
        s.lru.splice(s.lru.begin(), s.lru, it->second.second);
        ++s.solves;
        return it->second.first;
      }
      s.lru.push_front(key);
      s.map.emplace(key, std::make_pair(value, s.lru.begin()));
      ++s.solves;
      if (s.map.size() > s.capacity) {
        s.map.erase(s.lru.back());
        s.lru.pop_back();
      }
    }
    return value;
  }

  void clear() const {
    State& s = *state_;
    std::lock_guard<std::mutex> lock(s.mutex);
    s.map.clear();
    s.lru.clear();
    s.hits = 0;
    s.solves = 0;
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(state_->mutex);
    return state_->map.size();
  }
  size_t hits() const {
    std::lock_guard<std::mutex> lock(state_->mutex);
    return state_->hits;
  }
  size_t solves() const {
    std::lock_guard<std::mutex> lock(state_->mutex);
    return state_->solves;
  }

 private:
  struct State {
    mutable std::mutex mutex;
    size_t capacity = 0;
    std::list<CellKey> lru;
    std::unordered_map<CellKey, std::pair<std::shared_ptr<const LocalModel>, std::list<CellKey>::iterator>,
                       CellKeyHash>
        map;
    size_t hits = 0;
    size_t solves = 0;
  };

  std::unique_ptr<State> state_;
};

struct SparseStats {
  size_t cache_hits = 0;
  size_t cells_solved = 0;
};

/// Lazy localized KRR: no global solve at build time; each prediction finds
/// the query's M nearest training points and solves that M x M system only.
class SparseModel {
 public:
  SparseModel(KernelSpec spec, PointSet x, PointSet y, int bandwidth, double lambda,
              size_t cache_capacity = 10000)
      : spec_(std::move(spec)),
        x_(std::move(x)),
        y_(std::move(y)),
        lambda_(lambda),
        cache_(cache_capacity) {
    if (x_.rows() < 1) throw InputError("build_sparse: empty training set");
    if (x_.rows() != y_.rows()) throw InputError("build_sparse: X and Y row counts differ");
    if (bandwidth < 1) throw InputError("build_sparse: bandwidth must be >= 1");
    if (bandwidth > x_.rows()) {
      detail::warn("bandwidth " + std::to_string(bandwidth) + " clamped to N = " +
                   std::to_string(x_.rows()));
      bandwidth = int(x_.rows());
    }
    m_ = bandwidth;
    xn_ = spec_.normalized(x_);
    index_.emplace(xn_, spec_.metric);
  }

  Eigen::Index train_size() const { return x_.rows(); }
  Eigen::Index feature_dim() const { return x_.cols(); }
  Eigen::Index target_dim() const { return y_.cols(); }
  int bandwidth() const { return m_; }
  double lambda() const { return lambda_; }
  const KernelSpec& spec() const { return spec_; }
  const PointSet& features() const { return x_; }
  const PointSet& targets() const { return y_; }
  const NeighborIndex& index() const { return *index_; }
  const CellCache& cache() const { return cache_; }
  void clear_cache() const { cache_.clear(); }

  KnnResult neighbors_of(const Vector& z) const {
    return index_->query(spec_normalized_query(z), m_);
  }

  std::shared_ptr<const LocalModel> cell_model(const CellKey& key) const {
    return cache_.get_or_compute(key, [&] { return solve_cell(key); });
  }

  PointSet predict(const PointSet& z) const { return predict_batch(z, 1, nullptr); }

  PointSet predict_batch(const PointSet& z, int threads, SparseStats* stats = nullptr) const {
    if (z.cols() != x_.cols())
      throw InputError("predict_sparse: query dimension " + std::to_string(z.cols()) +
                       " does not match model dimension " + std::to_string(x_.cols()));
    const PointSet zn = spec_.normalized(z);
    PointSet out(z.rows(), y_.cols());
    const size_t hits0 = cache_.hits(), solves0 = cache_.solves();

    auto run = [&](Eigen::Index begin, Eigen::Index end) {
      for (Eigen::Index p = begin; p < end; ++p)
        predict_one(zn.data() + p * zn.cols(), out.row(p));
    };
    threads = std::max(threads, 1);
    if (threads == 1 || z.rows() < 2 * threads) {
      run(0, z.rows());
    } else {
      std::vector<std::thread> pool;
      const Eigen::Index chunk = (z.rows() + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const Eigen::Index begin = t * chunk;
        const Eigen::Index end = std::min<Eigen::Index>(begin + chunk, z.rows());
        if (begin >= end) break;
        pool.emplace_back(run, begin, end);
      }
      for (auto& th : pool) th.join();
    }
    if (stats) {
      stats->cache_hits = cache_.hits() - hits0;
      stats->cells_solved = cache_.solves() - solves0;
    }
    return out;
  }

  /// Local error indicator eps_sigma(z) per Z row, computed from the query's
  /// own cell. Dominates the dense power function pointwise (fewer centers).
  Vector local_error(const PointSet& z) const {
    if (z.cols() != x_.cols()) throw InputError("local_error: dimension mismatch");
    const PointSet zn = spec_.normalized(z);
    Vector out(z.rows());
    for (Eigen::Index p = 0; p < z.rows(); ++p) {
      const double* zp = zn.data() + p * zn.cols();
      const KnnResult knn = index_->query(zp, m_);
      const auto cell = cell_model(cell_key(knn.indices));
      const Matrix g = detail::gram_pre_normalized(
          spec_.metric, spec_.activation,
          Eigen::Map<const PointSet>(zp, 1, zn.cols()), cell->centers);
      const Matrix w = cell->llt.solve(g.transpose());
      out[p] = std::sqrt(std::max(0.0, 1.0 - (g * w)(0, 0)));
    }
    return out;
  }

 private:
  Vector spec_normalized_query(const Vector& z) const {
    if (z.size() != x_.cols()) throw InputError("query dimension mismatch");
    if (!spec_.normalizer) return z;
    PointSet row(1, z.size());
    row.row(0) = z.transpose();
    return spec_.normalizer->apply(row).row(0).transpose();
  }

  std::shared_ptr<const LocalModel> solve_cell(const CellKey& key) const {
    auto cell = std::make_shared<LocalModel>();
    cell->ids = key.ids;
    const Eigen::Index m = Eigen::Index(key.ids.size());
    cell->centers.resize(m, x_.cols());
    Matrix targets(m, y_.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
      cell->centers.row(i) = xn_.row(key.ids[size_t(i)]);
      targets.row(i) = y_.row(key.ids[size_t(i)]);
    }
    const Matrix k0 = detail::gram_self(spec_.metric, spec_.activation, cell->centers, nullptr);
    cell->llt = detail::factorize_spd(k0, lambda_, nullptr);
    cell->coeffs = cell->llt.solve(targets);
    return cell;
  }

  void predict_one(const double* zn, Eigen::Ref<Eigen::Matrix<double, 1, Eigen::Dynamic>> out) const {
    const KnnResult knn = index_->query(zn, m_);
    if (knn.indices.size() == 1) {  // bandwidth 1 is an exact 1-NN lookup
      out = y_.row(knn.indices[0]);
      return;
    }
    const auto cell = cell_model(cell_key(knn.indices));
    const Matrix g = detail::gram_pre_normalized(
        spec_.metric, spec_.activation,
        Eigen::Map<const PointSet>(zn, 1, xn_.cols()), cell->centers);
    out.noalias() = (g * cell->coeffs).row(0);
  }

  KernelSpec spec_;
  PointSet x_, y_, xn_;
  int m_ = 1;
  double lambda_ = 0.0;
  std::optional<NeighborIndex> index_;
  CellCache cache_;
};

inline SparseModel build_sparse(KernelSpec spec, PointSet x, PointSet y, int bandwidth,
                                double lambda, size_t cache_capacity = 10000) {
  return SparseModel(std::move(spec), std::move(x), std::move(y), bandwidth, lambda,
                     cache_capacity);
}

inline PointSet predict_sparse(const SparseModel& m, const PointSet& z) { return m.predict(z); }

inline PointSet predict_sparse_batch(const SparseModel& m, const PointSet& z, int threads,
                                     SparseStats* stats = nullptr) {
  return m.predict_batch(z, threads, stats);
}

inline Vector local_error(const SparseModel& m, const PointSet& z) { return m.local_error(z); }

}  // namespace sk
