#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sk/archive.hpp"
#include "support.hpp"

using namespace sk;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("sk_archive_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

void push_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

void push_f64(std::string& s, double d) { push_u64(s, std::bit_cast<std::uint64_t>(d)); }

}  // namespace

TEST_SUITE_BEGIN("archive");

TEST_CASE("every model kind round-trips with matching predictions") {
  std::mt19937_64 rng(3);
  const PointSet x = test::separated_points(rng, 30, 2);
  const PointSet y = test::random_matrix(rng, 30, 2);
  KernelSpec spec;
  spec.normalizer = fit_normalizer(x);
  const PointSet z = test::random_matrix(rng, 12, 2);

  auto check_roundtrip = [&](const AnyModel& model, const char* name) {
    const std::string path = temp_path(std::string("rt_") + name + ".skm");
    save_model(model, path, ArchiveMeta{true});
    const LoadedModel back = load_model(path);
    CHECK(back.meta.onehot_labels);
    CHECK(model_kind(back.model) == model_kind(model));
    const PointSet a = predict_any(model, z);
    const PointSet b = predict_any(back.model, z);
    INFO(name);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    std::remove(path.c_str());
  };

  check_roundtrip(DenseModel(spec, x, y, 1e-9), "dense");
  check_roundtrip(SparseModel(spec, x, y, 6, 1e-9), "sparse");
  check_roundtrip(make_blended(SparseModel(spec, x, y, 6, 1e-9), 3), "blended");
  check_roundtrip(fit_hierarchical(spec, x, y, 5, 8, 1e-9), "hierarchical");

  HybridModel hybrid = init_hybrid(2, 4, 2, 5, 17);
  hybrid.y1 = test::random_matrix(rng, 5, 4);
  hybrid.y3 = test::random_matrix(rng, 5, 2);
  check_roundtrip(hybrid, "hybrid");
}

TEST_CASE("dense round trip is bit-exact") {
  std::mt19937_64 rng(5);
  const PointSet x = test::separated_points(rng, 10, 2);
  const PointSet y = test::random_matrix(rng, 10, 1);
  const DenseModel m(KernelSpec{}, x, y, 1e-9);
  const std::string path = temp_path("dense_exact.skm");
  save_model(m, path);
  const LoadedModel back = load_model(path);
  const PointSet z = test::random_matrix(rng, 20, 2);
  CHECK((m.predict(z) - predict_any(back.model, z)).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("truncated archives are rejected outright") {
  std::mt19937_64 rng(7);
  const PointSet x = test::separated_points(rng, 8, 2);
  const PointSet y = test::random_matrix(rng, 8, 1);
  const std::string path = temp_path("trunc.skm");
  save_model(SparseModel(KernelSpec{}, x, y, 3, 1e-9), path);
  const std::string full = slurp(path);
  for (size_t keep : {size_t(0), size_t(4), size_t(12), full.size() / 2, full.size() - 1}) {
    spit(path, full.substr(0, keep));
    CHECK_THROWS_AS((void)load_model(path), ArchiveError);
  }
  std::remove(path.c_str());
}

TEST_CASE("version mismatch names both versions") {
  std::mt19937_64 rng(9);
  const PointSet x = test::separated_points(rng, 5, 1);
  const PointSet y = test::random_matrix(rng, 5, 1);
  const std::string path = temp_path("version.skm");
  save_model(DenseModel(KernelSpec{}, x, y, 1e-9), path);
  std::string bytes = slurp(path);
  bytes[8] = 2;  // little-endian u32 version right after the magic
  spit(path, bytes);
  try {
    (void)load_model(path);
    FAIL("expected ArchiveError");
  } catch (const ArchiveError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
  bytes[0] = 'X';
  spit(path, bytes);
  CHECK_THROWS_AS((void)load_model(path), ArchiveError);
  std::remove(path.c_str());
}

TEST_CASE("documented byte layout loads from a hand-built image") {
  // Dense model, no normalizer, exponential/l2 kernel, one training point at
  // 0 with target 3 and lambda 0.25, so theta = 3 / 1.25 = 2.4 exactly.
  std::string bytes = "SKMODEL1";
  bytes += std::string("\x01\x00\x00\x00", 4);  // version 1, little-endian
  bytes += char(0);                             // kind: dense
  bytes += char(0);                             // onehot flag off
  bytes += char(0);                             // metric: euclidean
  bytes += char(0);                             // activation: exponential
  bytes += char(0);                             // no normalizer
  push_f64(bytes, 0.25);                        // lambda
  push_u64(bytes, 1);                           // X rows
  push_u64(bytes, 1);                           // X cols
  push_f64(bytes, 0.0);
  push_u64(bytes, 1);                           // Y rows
  push_u64(bytes, 1);
  push_f64(bytes, 3.0);
  push_u64(bytes, 1);                           // theta rows
  push_u64(bytes, 1);
  push_f64(bytes, 2.4);

  const std::string path = temp_path("layout.skm");
  spit(path, bytes);
  const LoadedModel got = load_model(path);
  REQUIRE(model_kind(got.model) == ModelKind::dense);
  PointSet z(1, 1);
  z << 2.0;
  CHECK(predict_any(got.model, z)(0, 0) == 2.4 * std::exp(-2.0));

  // And the writer must reproduce the image byte for byte.
  save_model(got.model, path);
  CHECK(slurp(path) == bytes);
  std::remove(path.c_str());
}

TEST_SUITE_END();
