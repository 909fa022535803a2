#include "core/conversion.h"

#include "core/bernstein.h"

namespace bernkoop {

Mat conversion_factor(int n) {
  Mat c = Mat::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k)
    for (int j = k; j <= n; ++j) {
      const double sign = ((j - k) % 2 == 0) ? 1.0 : -1.0;
      c(k, j) = sign * binomial(n, j) * binomial(j, k);
    }
  return c;
}

Mat conversion_matrix(const DegreeVector& degree) {
  Mat full = Mat::Ones(1, 1);
  for (int d : degree.degrees) {
    const Mat factor = conversion_factor(d);
    Mat next(full.rows() * factor.rows(), full.cols() * factor.cols());
    for (Eigen::Index i = 0; i < full.rows(); ++i)
      for (Eigen::Index j = 0; j < full.cols(); ++j)
        next.block(i * factor.rows(), j * factor.cols(), factor.rows(), factor.cols()) =
            full(i, j) * factor;
    full = std::move(next);
  }
  return full;
}

Vec monomial_vector(const DegreeVector& degree, const Vec& x) {
  require(static_cast<int>(x.size()) == degree.m(), Status::ShapeError, "point dimension mismatch");
  Vec out{1.0};
  for (int l = 0; l < degree.m(); ++l) {
    const int n = degree.degrees[l];
    Vec powers(n + 1);
    powers[0] = 1.0;
    for (int k = 1; k <= n; ++k) powers[k] = powers[k - 1] * x[l];
    Vec next(out.size() * powers.size());
    std::size_t idx = 0;
    for (double o : out)
      for (double p : powers) next[idx++] = o * p;
    out = std::move(next);
  }
  return out;
}

Vec conversion_solve(const DegreeVector& degree, Vec y) {
  const LatticeGrid grid(degree);
  for (int l = degree.m() - 1; l >= 0; --l) {
    const int n = degree.degrees[l];
    const int e = n + 1;
    const Mat c = conversion_factor(n);
    const std::size_t stride = grid.strides[l];
    const std::size_t block = stride * e;
    const std::size_t nblocks = y.size() / block;
    for (std::size_t b = 0; b < nblocks; ++b)
      for (std::size_t i = 0; i < stride; ++i) {
        const std::size_t base = b * block + i;
        for (int k = e - 1; k >= 0; --k) {
          double acc = y[base + static_cast<std::size_t>(k) * stride];
          for (int j = k + 1; j < e; ++j)
            acc -= c(k, j) * y[base + static_cast<std::size_t>(j) * stride];
          y[base + static_cast<std::size_t>(k) * stride] = acc / c(k, k);
        }
      }
  }
  return y;
}

}  // namespace bernkoop
