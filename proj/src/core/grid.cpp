#include "core/grid.h"

#include <limits>

namespace bernkoop {

DegreeVector::DegreeVector(std::vector<int> n) : degrees(std::move(n)) {
  require(!degrees.empty(), Status::ShapeError, "degree vector must be non-empty");
  for (int d : degrees)
    require(d >= 1, Status::DomainError, "every degree must be >= 1");
  std::size_t total = 1;
  for (int d : degrees) {
    std::size_t f = static_cast<std::size_t>(d) + 1;
    require(total <= std::numeric_limits<std::size_t>::max() / f, Status::ShapeError,
            "basis size overflows index range");
    total *= f;
  }
}

std::size_t DegreeVector::N() const {
  std::size_t total = 1;
  for (int d : degrees) total *= static_cast<std::size_t>(d) + 1;
  return total;
}

LatticeGrid::LatticeGrid(DegreeVector d) : degree(std::move(d)) {
  const int m = degree.m();
  strides.assign(m, 1);
  for (int l = m - 2; l >= 0; --l)
    strides[l] = strides[l + 1] * (static_cast<std::size_t>(degree.degrees[l + 1]) + 1);
}

std::vector<int> LatticeGrid::multi_index(std::size_t flat) const {
  require(flat < N(), Status::ShapeError, "flat index out of range");
  std::vector<int> k(m());
  for (int l = 0; l < m(); ++l) {
    k[l] = static_cast<int>(flat / strides[l]);
    flat %= strides[l];
  }
  return k;
}

std::size_t LatticeGrid::flat_index(const std::vector<int>& k) const {
  require(static_cast<int>(k.size()) == m(), Status::ShapeError, "multi-index length mismatch");
  std::size_t flat = 0;
  for (int l = 0; l < m(); ++l) {
    require(k[l] >= 0 && k[l] <= degree.degrees[l], Status::DomainError,
            "multi-index component out of range");
    flat += static_cast<std::size_t>(k[l]) * strides[l];
  }
  return flat;
}

Vec LatticeGrid::point(std::size_t flat) const {
  const auto k = multi_index(flat);
  Vec x(m());
  for (int l = 0; l < m(); ++l)
    x[l] = static_cast<double>(k[l]) / degree.degrees[l];
  return x;
}

}  // namespace bernkoop
