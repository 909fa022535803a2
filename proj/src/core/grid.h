#pragma once

#include <cstddef>

#include "core/common.h"

namespace bernkoop {

// Multi-degree n = (n_1,...,n_m); basis size N = prod(n_l + 1).
struct DegreeVector {
  std::vector<int> degrees;

  DegreeVector() = default;  // empty placeholder, invalid until assigned
  explicit DegreeVector(std::vector<int> n);
  int m() const { return static_cast<int>(degrees.size()); }
  std::size_t N() const;
};

// Regular lattice {(k_1/n_1,...,k_m/n_m)} in lexicographic order with axis 1
// varying slowest, matching the Kronecker-product order of tensor bases.
struct LatticeGrid {
  DegreeVector degree;
  std::vector<std::size_t> strides;  // strides[l] = prod_{p>l}(n_p+1)

  explicit LatticeGrid(DegreeVector d);
  std::size_t N() const { return degree.N(); }
  int m() const { return degree.m(); }

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(const std::vector<int>& k) const;
  Vec point(std::size_t flat) const;

  // gamma[j] is the 0-based position of the monomial x_{j+1} inside X(x).
  std::vector<std::size_t> gamma() const { return strides; }
};

}  // namespace bernkoop
