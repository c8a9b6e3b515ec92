#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "sk/kernels.hpp"
#include "support.hpp"

using namespace sk;

TEST_SUITE_BEGIN("kernels");

TEST_CASE("distance basics") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 3;
  CHECK(distance(a, b, Metric::euclidean) == 0.0);

  Vector u(2), v(2);
  u << 0, 0;
  v << 3, 4;
  CHECK(distance(u, v, Metric::euclidean) == doctest::Approx(5.0));
  CHECK(distance(u, v, Metric::manhattan) == doctest::Approx(7.0));

  Vector w(3);
  CHECK_THROWS_AS((void)distance(u, w, Metric::euclidean), InputError);
}

TEST_CASE("metric axioms on random triples") {
  std::mt19937_64 rng(7);
  for (Metric metric : {Metric::euclidean, Metric::manhattan}) {
    for (int trial = 0; trial < 50; ++trial) {
      const PointSet p = test::random_matrix(rng, 3, 4);
      const Vector a = p.row(0), b = p.row(1), c = p.row(2);
      const double ab = distance(a, b, metric);
      CHECK(ab >= 0.0);
      CHECK(distance(a, a, metric) == 0.0);
      CHECK(ab == doctest::Approx(distance(b, a, metric)));
      CHECK(ab <= distance(a, c, metric) + distance(c, b, metric) + 1e-12);
    }
  }
}

TEST_CASE("fit_normalizer uses population moments") {
  PointSet x(2, 1);
  x << 0, 2;
  const Normalizer n = fit_normalizer(x);
  CHECK(n.shift[0] == doctest::Approx(1.0));
  CHECK(n.scale[0] == doctest::Approx(1.0));
}

TEST_CASE("fit_normalizer zero-variance fallback") {
  PointSet x(3, 1);
  x << 5, 5, 5;
  const Normalizer n = fit_normalizer(x);
  CHECK(n.shift[0] == doctest::Approx(5.0));
  CHECK(n.scale[0] == 1.0);

  PointSet tiny(1, 1);
  CHECK_THROWS_AS((void)fit_normalizer(tiny), InputError);
}

TEST_CASE("normalizer is idempotent on its fitting set") {
  std::mt19937_64 rng(11);
  PointSet x = test::random_matrix(rng, 100, 3, 2.5);
  x.col(1).array() += 7.0;  // nonzero mean column
  const Normalizer n = fit_normalizer(x);
  for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK(n.scale[j] > 0.0);

  const PointSet z = n.apply(x);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    const double var = (z.col(j).array() - mean).square().sum() / double(z.rows());
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-10);
  }
}

TEST_CASE("gram closed forms") {
  KernelSpec spec;
  PointSet one(1, 2);
  one << 1, 1;
  const Matrix g1 = gram(spec, one, one);
  CHECK(g1.rows() == 1);
  CHECK(g1(0, 0) == doctest::Approx(1.0));

  PointSet z(1, 1), x(1, 1);
  z << 0;
  x << 1;
  CHECK(gram(spec, z, x)(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  PointSet bad(1, 3);
  CHECK_THROWS_AS((void)gram(spec, z, bad), InputError);
}

TEST_CASE("gram symmetry, unit diagonal, positive definiteness") {
  std::mt19937_64 rng(23);
  for (Activation act : {Activation::exponential, Activation::gaussian}) {
    for (Metric metric : {Metric::euclidean, Metric::manhattan}) {
      if (act == Activation::gaussian && metric == Metric::manhattan) continue;
      const PointSet x = test::separated_points(rng, 20, 3);
      KernelSpec spec{metric, act, fit_normalizer(x)};
      const Matrix g = gram(spec, x, x);
      CHECK((g - g.transpose()).norm() == 0.0);
      CHECK((g.diagonal().array() - 1.0).abs().maxCoeff() < 1e-15);
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
      CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    }
  }
}

TEST_CASE("gram eigenvalues strictly positive on a small instance") {
  std::mt19937_64 rng(5);
  const PointSet x = test::separated_points(rng, 5, 3);
  const Matrix g = gram(KernelSpec{}, x, x);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("duplicate detection in self-gram") {
  PointSet x(3, 2);
  x << 0, 0, 0, 0, 1, 1;
  long duplicates = -1;
  (void)detail::gram_self(Metric::euclidean, Activation::exponential, x, &duplicates);
  CHECK(duplicates == 1);
}

TEST_SUITE_END();
