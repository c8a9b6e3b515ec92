#include <doctest.h>

#include <Eigen/LU>

#include <cmath>
#include <random>

#include "sk/dense.hpp"
#include "support.hpp"

using namespace sk;

namespace {

KernelSpec plain_exponential() { return KernelSpec{}; }

}  // namespace

TEST_SUITE_BEGIN("dense");

TEST_CASE("interpolation on a tiny instance") {
  PointSet x(3, 1), y(3, 1);
  x << 0, 1, 2;
  y << 1, 0, 1;
  const DenseModel m(plain_exponential(), x, y, 1e-9);
  const PointSet back = m.predict(x);
  CHECK((back - y).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("single training point has closed-form coefficients") {
  PointSet x(1, 1), y(1, 1);
  x << 0;
  y << 7;
  const double lambda = 0.5;
  const DenseModel m(plain_exponential(), x, y, lambda);
  CHECK(m.coefficients()(0, 0) == doctest::Approx(7.0 / (1.0 + lambda)).epsilon(1e-12));

  const DenseModel tiny(plain_exponential(), x, y, 1e-9);
  CHECK(tiny.coefficients()(0, 0) == doctest::Approx(7.0).epsilon(1e-6));
}

TEST_CASE("normal equations residual vs an independent solver") {
  std::mt19937_64 rng(101);
  const PointSet x = test::separated_points(rng, 20, 3);
  const PointSet y = test::random_matrix(rng, 20, 2);
  KernelSpec spec;
  spec.normalizer = fit_normalizer(x);
  const double lambda = 1e-9;
  const DenseModel m(spec, x, y, lambda);

  Matrix k = gram(spec, x, x);
  k.diagonal().array() += lambda;
  const double residual = (k * m.coefficients() - Matrix(y)).norm() / Matrix(y).norm();
  CHECK(residual < 1e-8);

  // Independent route: full-pivot LU instead of the model's Cholesky.
  const Matrix theta_lu = Eigen::FullPivLU<Matrix>(k).solve(Matrix(y));
  CHECK((theta_lu - m.coefficients()).norm() / theta_lu.norm() < 1e-8);
}

TEST_CASE("predictions reproduce targets and decay in the far field") {
  std::mt19937_64 rng(7);
  const PointSet x = test::separated_points(rng, 12, 1);
  const PointSet y = test::random_matrix(rng, 12, 1);
  const DenseModel m(plain_exponential(), x, y, 1e-9);
  CHECK(test::rel_error(m.predict(x), y) < 1e-5);

  PointSet far(1, 1);
  far << x.col(0).maxCoeff() + 41.0;
  const double bound = 1e-15 * m.coefficients().cwiseAbs().sum();
  CHECK(std::abs(m.predict(far)(0, 0)) <= bound);
}

TEST_CASE("hand-solved 2x2 system") {
  PointSet x(2, 1), y(2, 1), z(1, 1);
  x << 0, 1;
  y << 0, 1;
  z << 0.5;
  const DenseModel m(plain_exponential(), x, y, 0.0);

  // Explicit 2x2 inverse: K = [[1, b], [b, 1]] with b = e^-1.
  const double b = std::exp(-1.0);
  const double a = std::exp(-0.5);
  const double det = 1.0 - b * b;
  const double theta0 = (1.0 * 0.0 - b * 1.0) / det;
  const double theta1 = (1.0 * 1.0 - b * 0.0) / det;
  const double expect = a * (theta0 + theta1);
  CHECK(m.predict(z)(0, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cardinal basis is the identity at the nodes") {
  std::mt19937_64 rng(13);
  const PointSet x = test::separated_points(rng, 15, 2);
  const PointSet y = test::random_matrix(rng, 15, 1);
  const DenseModel m(plain_exponential(), x, y, 0.0);
  const Matrix psi = m.cardinal_basis(x);
  CHECK((psi - Matrix::Identity(15, 15)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("cardinal basis scalar case") {
  PointSet x(1, 1), y(1, 1), z(1, 1);
  x << 0;
  y << 3;
  z << 2;
  const double lambda = 0.25;
  const DenseModel m(plain_exponential(), x, y, lambda);
  CHECK(m.cardinal_basis(z)(0, 0) ==
        doctest::Approx(std::exp(-2.0) / (1.0 + lambda)).epsilon(1e-12));
}

TEST_CASE("cardinal basis contracts predictions") {
  std::mt19937_64 rng(17);
  const PointSet x = test::separated_points(rng, 4, 2);
  const PointSet y = test::random_matrix(rng, 4, 3);
  const PointSet z = test::random_matrix(rng, 6, 2);
  const DenseModel m(plain_exponential(), x, y, 1e-9);
  const PointSet via_basis = m.cardinal_basis(z) * y;
  CHECK(test::rel_error(via_basis, m.predict(z)) < 1e-12);
}

TEST_CASE("rkhs norm basics") {
  std::mt19937_64 rng(19);
  const PointSet x = test::separated_points(rng, 8, 2);

  const DenseModel zero(plain_exponential(), x, PointSet::Zero(8, 2), 1e-9);
  CHECK(zero.rkhs_norm().maxCoeff() == 0.0);

  PointSet one(1, 1), val(1, 1);
  one << 0;
  val << 2;
  const DenseModel scalar(plain_exponential(), one, val, 0.0);
  CHECK(scalar.rkhs_norm()[0] == doctest::Approx(2.0).epsilon(1e-12));

  const PointSet y = test::random_matrix(rng, 8, 1);
  const DenseModel base(plain_exponential(), x, y, 1e-9);
  const DenseModel scaled(plain_exponential(), x, PointSet(-3.0 * y), 1e-9);
  CHECK(scaled.rkhs_norm()[0] == doctest::Approx(3.0 * base.rkhs_norm()[0]).epsilon(1e-10));
}

TEST_CASE("power function vanishes at nodes and saturates far away") {
  std::mt19937_64 rng(23);
  const PointSet x = test::separated_points(rng, 10, 1);
  const PointSet y = test::random_matrix(rng, 10, 1);
  const DenseModel m(plain_exponential(), x, y, 0.0);
  CHECK(m.power_function(x).maxCoeff() < 1e-6);

  PointSet far(1, 1);
  far << x.col(0).maxCoeff() + 45.0;
  CHECK(m.power_function(far)[0] >= 1.0 - 1e-10);

  // Indicator range for normalized kernels.
  const PointSet z = test::random_matrix(rng, 60, 1, 2.0);
  const Vector eps = m.power_function(z);
  CHECK(eps.minCoeff() >= 0.0);
  CHECK(eps.maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("power function midpoint quadratic form") {
  PointSet x(2, 1), y(2, 1), z(1, 1);
  x << 0, 1;
  y << 1, 2;
  z << 0.5;
  const DenseModel m(plain_exponential(), x, y, 0.0);
  const double a = std::exp(-0.5), b = std::exp(-1.0);
  const double quad = 2.0 * a * a / (1.0 + b);  // [a a] K^-1 [a a]^T
  CHECK(m.power_function(z)[0] == doctest::Approx(std::sqrt(1.0 - quad)).epsilon(1e-12));
}

TEST_CASE("power function never increases when a point is added") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet x = test::separated_points(rng, 9, 2);
    const PointSet y = test::random_matrix(rng, 9, 1);
    const DenseModel small(plain_exponential(), x.topRows(8), y.topRows(8), 1e-9);
    const DenseModel big(plain_exponential(), x, y, 1e-9);
    const PointSet z = test::random_matrix(rng, 30, 2);
    const Vector eps_small = small.power_function(z);
    const Vector eps_big = big.power_function(z);
    CHECK((eps_big - eps_small).maxCoeff() < 1e-8);
  }
}

TEST_CASE("pointwise error bound for RKHS functions") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const PointSet pool = test::separated_points(rng, 30, 2);
    const Matrix pool_gram = gram(plain_exponential(), pool, pool);
    const Matrix c = test::random_matrix(rng, 30, 1);
    const double f_norm = std::sqrt((c.transpose() * pool_gram * c)(0, 0));

    const PointSet nodes = pool.topRows(15);
    PointSet f_at_nodes(15, 1);
    f_at_nodes = gram(plain_exponential(), nodes, pool) * c;
    const DenseModel m(plain_exponential(), nodes, f_at_nodes, 1e-9);

    const PointSet z = test::random_matrix(rng, 50, 2);
    const PointSet f_at_z = gram(plain_exponential(), z, pool) * c;
    const PointSet fk_at_z = m.predict(z);
    const Vector eps = m.power_function(z);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      CHECK(std::abs(fk_at_z(i, 0) - f_at_z(i, 0)) <= eps[i] * f_norm + 1e-6);
  }
}

TEST_CASE("permutation equivariance of predictions") {
  std::mt19937_64 rng(37);
  const PointSet x = test::separated_points(rng, 12, 3);
  const PointSet y = test::random_matrix(rng, 12, 2);
  KernelSpec spec;
  spec.normalizer = fit_normalizer(x);
  const PointSet z = test::random_matrix(rng, 5, 3);
  const DenseModel m(spec, x, y, 1e-9);

  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  PointSet xp(12, 3), yp(12, 2);
  for (int i = 0; i < 12; ++i) {
    xp.row(i) = x.row(perm[size_t(i)]);
    yp.row(i) = y.row(perm[size_t(i)]);
  }
  const DenseModel mp(spec, xp, yp, 1e-9);
  CHECK((m.predict(z) - mp.predict(z)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("duplicate points survive via jitter escalation") {
  PointSet x(3, 1), y(3, 1);
  x << 0, 0, 1;  // exact duplicate rows, lambda = 0
  y << 1, 1, 2;
  const DenseModel m(plain_exponential(), x, y, 0.0);
  CHECK(m.jitter() > 0.0);
  CHECK(m.predict(x).allFinite());
}

TEST_CASE("gradients: zero upstream gives zero") {
  std::mt19937_64 rng(41);
  const PointSet x = test::separated_points(rng, 5, 2);
  const PointSet y = test::random_matrix(rng, 5, 2);
  const PointSet z = test::random_matrix(rng, 3, 2);
  const KrrGradients g =
      krr_gradients(plain_exponential(), x, y, z, 1e-9, PointSet::Zero(3, 2));
  CHECK(g.targets.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.features.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.queries.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradients: target gradient is upstream at the nodes") {
  std::mt19937_64 rng(43);
  const PointSet x = test::separated_points(rng, 6, 2);
  const PointSet y = test::random_matrix(rng, 6, 1);
  const PointSet upstream = test::random_matrix(rng, 6, 1);
  const KrrGradients g = krr_gradients(plain_exponential(), x, y, x, 0.0, upstream);
  CHECK(test::rel_error(g.targets, upstream) < 1e-10);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    PointSet x = test::separated_points(rng, 5, 2);
    PointSet y = test::random_matrix(rng, 5, 2);
    PointSet z = test::random_matrix(rng, 3, 2);
    const PointSet upstream = test::random_matrix(rng, 3, 2);
    KernelSpec spec;
    spec.normalizer = fit_normalizer(x);  // fixed map, not refit in the loop
    const double lambda = 1e-9;

    const KrrGradients g = krr_gradients(spec, x, y, z, lambda, upstream);
    auto loss = [&] {
      return (Matrix(upstream).transpose() * Matrix(DenseModel(spec, x, y, lambda).predict(z)))
          .trace();
    };
    CHECK(test::rel_error(g.targets, test::fd_gradient(loss, y)) < 1e-4);
    CHECK(test::rel_error(g.features, test::fd_gradient(loss, x)) < 1e-4);
    CHECK(test::rel_error(g.queries, test::fd_gradient(loss, z)) < 1e-4);
  }
}

TEST_CASE("gradients under the manhattan metric and gaussian activation") {
  std::mt19937_64 rng(53);
  for (auto [metric, act] : {std::pair{Metric::manhattan, Activation::exponential},
                             std::pair{Metric::euclidean, Activation::gaussian}}) {
    PointSet x = test::separated_points(rng, 4, 2);
    PointSet y = test::random_matrix(rng, 4, 1);
    PointSet z = test::random_matrix(rng, 2, 2);
    const PointSet upstream = test::random_matrix(rng, 2, 1);
    const KernelSpec spec{metric, act, std::nullopt};
    const KrrGradients g = krr_gradients(spec, x, y, z, 1e-9, upstream);
    auto loss = [&] {
      return (Matrix(upstream).transpose() * Matrix(DenseModel(spec, x, y, 1e-9).predict(z)))
          .trace();
    };
    CHECK(test::rel_error(g.targets, test::fd_gradient(loss, y)) < 1e-4);
    CHECK(test::rel_error(g.features, test::fd_gradient(loss, x)) < 1e-4);
    CHECK(test::rel_error(g.queries, test::fd_gradient(loss, z)) < 1e-4);
  }
}

TEST_SUITE_END();
