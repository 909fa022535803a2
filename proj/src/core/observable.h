#pragma once

#include <functional>
#include <memory>

#include "core/common.h"

namespace bernkoop {

// Scalar function on the unit box with an optional gradient.
struct Observable {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> gradient;  // empty when unavailable
  std::string label;
  int m = 0;

  bool has_gradient() const { return static_cast<bool>(gradient); }
};

Observable make_observable(std::string label, int m,
                           std::function<double(const Vec&)> eval,
                           std::function<Vec(const Vec&)> gradient = nullptr);

// Parses an arithmetic expression over x1..xm with +, -, *, /, ^, parentheses
// and numeric literals; the gradient comes from forward-mode differentiation
// of the same expression tree.
Observable parse_observable(const std::string& expr, int m);

}  // namespace bernkoop
