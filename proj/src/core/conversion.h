#pragma once

#include <Eigen/Dense>

#include "core/grid.h"

namespace bernkoop {

using Mat = Eigen::MatrixXd;

// Univariate conversion factor: entry (k, j) = (-1)^(j-k) binom(n, j) binom(j, k),
// upper triangular, so that (b_{n,0}, ..., b_{n,n})^T = C X with X = (1, x, ..., x^n)^T.
Mat conversion_factor(int n);

// Full conversion matrix C = C^(1) (x) ... (x) C^(m); satisfies B(x) = C X(x).
Mat conversion_matrix(const DegreeVector& degree);

// Monomial vector X(x) in Kronecker order.
Vec monomial_vector(const DegreeVector& degree, const Vec& x);

// Solves C z = y per axis by back-substitution on the triangular factors,
// never forming C^{-1}.
Vec conversion_solve(const DegreeVector& degree, Vec y);

}  // namespace bernkoop
