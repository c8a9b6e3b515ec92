#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <variant>

#include "sk/common.hpp"
#include "sk/continuous.hpp"
#include "sk/dense.hpp"
#include "sk/sparse.hpp"
#include "sk/train.hpp"

namespace sk {

inline constexpr char kArchiveMagic[8] = {'S', 'K', 'M', 'O', 'D', 'E', 'L', '1'};
inline constexpr std::uint32_t kArchiveVersion = 1;

enum class ModelKind : std::uint8_t {
  dense = 0,
  sparse = 1,
  blended = 2,
  hierarchical = 3,
  hybrid = 4,
};

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::dense: return "dense";
    case ModelKind::sparse: return "sparse";
    case ModelKind::blended: return "blended";
    case ModelKind::hierarchical: return "hierarchical";
    case ModelKind::hybrid: return "hybrid";
  }
  return "?";
}

using AnyModel = std::variant<DenseModel, SparseModel, BlendedModel, HierModel, HybridModel>;

struct ArchiveMeta {
  bool onehot_labels = false;  // targets are one-hot class indicators
};

namespace detail {

// All scalars are encoded little-endian byte by byte, so archives are
// portable across hosts regardless of native endianness.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(char(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(char((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(char((v >> (8 * i)) & 0xff));
  }
  void f64(double d) { u64(std::bit_cast<std::uint64_t>(d)); }
  void matrix(const PointSet& m) {
    u64(std::uint64_t(m.rows()));
    u64(std::uint64_t(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
  void spec(const KernelSpec& s) {
    u8(std::uint8_t(s.metric));
    u8(std::uint8_t(s.activation));
    u8(s.normalizer ? 1 : 0);
    if (s.normalizer) {
      u64(std::uint64_t(s.normalizer->dim()));
      for (Eigen::Index i = 0; i < s.normalizer->dim(); ++i) f64(s.normalizer->shift[i]);
      for (Eigen::Index i = 0; i < s.normalizer->dim(); ++i) f64(s.normalizer->scale[i]);
    }
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}

  std::uint8_t u8() {
    need(1);
    return std::uint8_t(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(data_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(data_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  PointSet matrix() {
    const std::uint64_t rows = u64(), cols = u64();
    if (rows > (1ull << 32) || cols > (1ull << 20) || (rows * cols) > (1ull << 32))
      throw ArchiveError("implausible matrix dimensions in archive");
    PointSet m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
    return m;
  }
  KernelSpec spec() {
    KernelSpec s;
    const std::uint8_t metric = u8(), act = u8(), has_norm = u8();
    if (metric > 1 || act > 1 || has_norm > 1) throw ArchiveError("corrupt kernel spec block");
    s.metric = Metric(metric);
    s.activation = Activation(act);
    if (has_norm) {
      const std::uint64_t d = u64();
      if (d > (1ull << 20)) throw ArchiveError("implausible normalizer dimension");
      Normalizer n;
      n.shift.resize(Eigen::Index(d));
      n.scale.resize(Eigen::Index(d));
      for (Eigen::Index i = 0; i < n.shift.size(); ++i) n.shift[i] = f64();
      for (Eigen::Index i = 0; i < n.scale.size(); ++i) n.scale[i] = f64();
      s.normalizer = std::move(n);
    }
    return s;
  }
  void need(size_t n) const {
    if (pos_ + n > data_.size()) throw ArchiveError("unexpected end of file (truncated archive)");
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  size_t pos_ = 0;
};

}  // namespace detail

inline ModelKind model_kind(const AnyModel& m) {
  return ModelKind(std::uint8_t(m.index()));
}

inline void save_model(const AnyModel& model, const std::string& path, ArchiveMeta meta = {}) {
  detail::ByteWriter w;
  for (char c : kArchiveMagic) w.u8(std::uint8_t(c));
  w.u32(kArchiveVersion);
  w.u8(std::uint8_t(model_kind(model)));
  w.u8(meta.onehot_labels ? 1 : 0);

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DenseModel>) {
          w.spec(m.spec());
          w.f64(m.lambda());
          w.matrix(m.features());
          w.matrix(m.targets());
          w.matrix(PointSet(m.coefficients()));
        } else if constexpr (std::is_same_v<T, SparseModel>) {
          w.spec(m.spec());
          w.f64(m.lambda());
          w.u64(std::uint64_t(m.bandwidth()));
          w.matrix(m.features());
          w.matrix(m.targets());
        } else if constexpr (std::is_same_v<T, BlendedModel>) {
          w.spec(m.sparse.spec());
          w.f64(m.sparse.lambda());
          w.u64(std::uint64_t(m.sparse.bandwidth()));
          w.u64(std::uint64_t(m.blend_count));
          w.u8(std::uint8_t(m.weight_activation));
          w.matrix(m.sparse.features());
          w.matrix(m.sparse.targets());
        } else if constexpr (std::is_same_v<T, HierModel>) {
          w.spec(m.residual.spec());
          w.f64(m.residual.lambda());
          w.u64(std::uint64_t(m.residual.bandwidth()));
          w.u64(std::uint64_t(m.coarse.train_size()));
          w.matrix(m.residual.features());
          // Original targets reconstruct both levels on load.
          w.matrix(PointSet(m.residual.targets() + m.coarse.predict(m.residual.features())));
        } else {
          w.spec(m.kernel1);
          w.spec(m.kernel3);
          w.f64(m.lambda);
          w.matrix(m.theta1);
          w.matrix(m.theta2);
          w.matrix(m.theta3);
          w.matrix(m.x1);
          w.matrix(m.y1);
          w.matrix(m.x3);
          w.matrix(m.y3);
        }
      },
      model);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArchiveError("cannot open file for writing: " + path);
  out.write(w.bytes().data(), std::streamsize(w.bytes().size()));
  if (!out) throw ArchiveError("write failed: " + path);
}

struct LoadedModel {
  AnyModel model;
  ArchiveMeta meta;
};

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("cannot open file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::ByteReader r(std::move(data));

  for (char c : kArchiveMagic)
    if (r.u8() != std::uint8_t(c)) throw ArchiveError("not a model archive (bad magic): " + path);
  const std::uint32_t version = r.u32();
  if (version != kArchiveVersion)
    throw ArchiveError("archive version " + std::to_string(version) +
                       " is not supported (this build reads version " +
                       std::to_string(kArchiveVersion) + ")");
  const std::uint8_t kind = r.u8();
  ArchiveMeta meta;
  meta.onehot_labels = r.u8() != 0;

  switch (ModelKind(kind)) {
    case ModelKind::dense: {
      KernelSpec spec = r.spec();
      const double lambda = r.f64();
      PointSet x = r.matrix(), y = r.matrix(), theta = r.matrix();
      return {DenseModel::restore(std::move(spec), std::move(x), std::move(y), lambda,
                                  Matrix(theta)),
              meta};
    }
    case ModelKind::sparse: {
      KernelSpec spec = r.spec();
      const double lambda = r.f64();
      const auto m = int(r.u64());
      PointSet x = r.matrix(), y = r.matrix();
      return {SparseModel(std::move(spec), std::move(x), std::move(y), m, lambda), meta};
    }
    case ModelKind::blended: {
      KernelSpec spec = r.spec();
      const double lambda = r.f64();
      const auto m = int(r.u64());
      const auto j = int(r.u64());
      const auto act = Activation(r.u8());
      PointSet x = r.matrix(), y = r.matrix();
      return {make_blended(SparseModel(std::move(spec), std::move(x), std::move(y), m, lambda), j,
                           act),
              meta};
    }
    case ModelKind::hierarchical: {
      KernelSpec spec = r.spec();
      const double lambda = r.f64();
      const auto m = int(r.u64());
      const auto n0 = int(r.u64());
      PointSet x = r.matrix(), y = r.matrix();
      return {fit_hierarchical(spec, x, y, m, n0, lambda), meta};
    }
    case ModelKind::hybrid: {
      HybridModel h;
      h.kernel1 = r.spec();
      h.kernel3 = r.spec();
      h.lambda = r.f64();
      h.theta1 = r.matrix();
      h.theta2 = r.matrix();
      h.theta3 = r.matrix();
      h.x1 = r.matrix();
      h.y1 = r.matrix();
      h.x3 = r.matrix();
      h.y3 = r.matrix();
      return {std::move(h), meta};
    }
    default: throw ArchiveError("unknown model kind " + std::to_string(kind));
  }
}

inline PointSet predict_any(const AnyModel& model, const PointSet& z) {
  return std::visit(
      [&](const auto& m) -> PointSet {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DenseModel>) return m.predict(z);
        else if constexpr (std::is_same_v<T, SparseModel>) return m.predict(z);
        else if constexpr (std::is_same_v<T, BlendedModel>) return predict_blended(m, z);
        else if constexpr (std::is_same_v<T, HierModel>) return predict_hierarchical(m, z);
        else return hybrid_forward(m, z);
      },
      model);
}

}  // namespace sk
