#include "core/bernstein.h"

#include <cmath>

namespace bernkoop {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double bernstein_basis(int n, int k, double x) {
  require(n >= 1, Status::DomainError, "basis degree must be >= 1");
  require(k >= 0 && k <= n, Status::DomainError, "basis index out of [0, n]");
  require(x >= 0.0 && x <= 1.0, Status::DomainError, "basis argument outside [0, 1]");
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;
  if (x == 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(log_binomial(n, k) + k * std::log(x) + (n - k) * std::log1p(-x));
}

Vec bernstein_basis_vector(int n, double x) {
  Vec b(n + 1);
  for (int k = 0; k <= n; ++k) b[k] = bernstein_basis(n, k, x);
  return b;
}

Vec bernstein_basis_derivative_vector(int n, double x) {
  Vec d(n + 1, 0.0);
  if (n == 1) {
    d[0] = -1.0;
    d[1] = 1.0;
    return d;
  }
  const Vec lower = bernstein_basis_vector(n - 1, x);
  for (int k = 0; k <= n; ++k) {
    const double left = (k >= 1) ? lower[k - 1] : 0.0;
    const double right = (k <= n - 1) ? lower[k] : 0.0;
    d[k] = n * (left - right);
  }
  return d;
}

Vec bernstein_tensor_vector(const LatticeGrid& grid, const Vec& x) {
  require(static_cast<int>(x.size()) == grid.m(), Status::ShapeError, "point dimension mismatch");
  Vec out{1.0};
  for (int l = 0; l < grid.m(); ++l) {
    const Vec axis = bernstein_basis_vector(grid.degree.degrees[l], x[l]);
    Vec next(out.size() * axis.size());
    std::size_t idx = 0;
    for (double o : out)
      for (double a : axis) next[idx++] = o * a;
    out = std::move(next);
  }
  return out;
}

namespace {

// Contracts the given axis of a lex-ordered tensor against `weights`.
Vec contract_axis(const Vec& data, std::size_t stride, int extent, const Vec& weights) {
  const std::size_t block = stride * extent;
  const std::size_t nblocks = data.size() / block;
  Vec out(nblocks * stride, 0.0);
  for (std::size_t b = 0; b < nblocks; ++b)
    for (int k = 0; k < extent; ++k) {
      const double w = weights[k];
      const std::size_t src = b * block + k * stride;
      const std::size_t dst = b * stride;
      for (std::size_t i = 0; i < stride; ++i) out[dst + i] += w * data[src + i];
    }
  return out;
}

}  // namespace

double eval_bernstein_operator(const Vec& samples, const LatticeGrid& grid, const Vec& x) {
  require(samples.size() == grid.N(), Status::ShapeError, "sample count disagrees with lattice size");
  require(static_cast<int>(x.size()) == grid.m(), Status::ShapeError, "point dimension mismatch");
  Vec data = samples;
  // Last axis has stride 1; collapsing axes back to front keeps strides valid.
  for (int l = grid.m() - 1; l >= 0; --l) {
    const int n = grid.degree.degrees[l];
    data = contract_axis(data, 1, n + 1, bernstein_basis_vector(n, x[l]));
  }
  return data[0];
}

Vec eval_bernstein_gradient(const Vec& samples, const LatticeGrid& grid, const Vec& x) {
  require(samples.size() == grid.N(), Status::ShapeError, "sample count disagrees with lattice size");
  Vec g(grid.m());
  for (int d = 0; d < grid.m(); ++d) {
    Vec data = samples;
    for (int l = grid.m() - 1; l >= 0; --l) {
      const int n = grid.degree.degrees[l];
      const Vec w = (l == d) ? bernstein_basis_derivative_vector(n, x[l])
                             : bernstein_basis_vector(n, x[l]);
      data = contract_axis(data, 1, n + 1, w);
    }
    g[d] = data[0];
  }
  return g;
}

Vec partial_bernstein_operator(const Vec& samples, const LatticeGrid& grid, int axis, double x_axis) {
  require(samples.size() == grid.N(), Status::ShapeError, "sample count disagrees with lattice size");
  require(axis >= 0 && axis < grid.m(), Status::DomainError, "axis out of range");
  const int n = grid.degree.degrees[axis];
  return contract_axis(samples, grid.strides[axis], n + 1, bernstein_basis_vector(n, x_axis));
}

}  // namespace bernkoop
