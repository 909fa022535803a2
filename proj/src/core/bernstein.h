#pragma once

#include "core/grid.h"

namespace bernkoop {

// log(binom(n, k)) via lgamma; exact enough for basis weights at any n used here.
double log_binomial(int n, int k);

// binom(n, k) as a double; exact for results below 2^53.
double binomial(int n, int k);

// b_{n,k}(x) = binom(n,k) x^k (1-x)^{n-k}, evaluated in log space away from the
// endpoints so it stays finite and accurate for n in the hundreds.
double bernstein_basis(int n, int k, double x);

// (b_{n,0}(x), ..., b_{n,n}(x))
Vec bernstein_basis_vector(int n, double x);

// d/dx of each b_{n,k}; uses the degree-reduction identity.
Vec bernstein_basis_derivative_vector(int n, double x);

// Full tensor basis vector B(x), length N, Kronecker order (axis 1 slowest).
Vec bernstein_tensor_vector(const LatticeGrid& grid, const Vec& x);

// B_n(f; x) = sum_j samples_j prod_l b_{n_l, k_l}(x_l), contracted axis by axis.
double eval_bernstein_operator(const Vec& samples, const LatticeGrid& grid, const Vec& x);

// Gradient of the polynomial with Bernstein coefficients `samples` at x.
Vec eval_bernstein_gradient(const Vec& samples, const LatticeGrid& grid, const Vec& x);

// Applies the univariate operator along one axis only, collapsing it; the result
// is indexed by the remaining axes in the same lexicographic order.
Vec partial_bernstein_operator(const Vec& samples, const LatticeGrid& grid, int axis, double x_axis);

}  // namespace bernkoop
