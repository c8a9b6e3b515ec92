// Fits dense and sparse regressors on a toy 1-D problem and prints the
// predictions next to the local error indicator.

#include <cstdio>

#include "sk/continuous.hpp"
#include "sk/datasets.hpp"
#include "sk/dense.hpp"
#include "sk/sparse.hpp"

int main() {
  const sk::RegressionData data = sk::make_sine1d(200, /*seed=*/42);

  sk::KernelSpec spec;
  spec.normalizer = sk::fit_normalizer(data.x);

  const sk::DenseModel dense(spec, data.x, data.y, 1e-9);
  const sk::SparseModel sparse(spec, data.x, data.y, /*bandwidth=*/16, 1e-9);

  sk::PointSet z(9, 1);
  for (int i = 0; i < 9; ++i) z(i, 0) = -4.0 + i;

  const sk::PointSet dense_pred = dense.predict(z);
  const sk::PointSet sparse_pred = sparse.predict(z);
  const sk::Vector eps = sparse.local_error(z);

  std::printf("%8s %12s %12s %12s\n", "z", "dense", "sparse", "eps_local");
  for (int i = 0; i < 9; ++i)
    std::printf("%8.2f %12.5f %12.5f %12.5f\n", z(i, 0), dense_pred(i, 0), sparse_pred(i, 0),
                eps[i]);
  return 0;
}
