#pragma once

#include "core/observable.h"
#include "core/systems.h"

namespace bernkoop {

// Sampled modulus of continuity: a prefix-max profile over distance bins.
// cum[i] is the largest |f(x)-f(y)| seen among sampled pairs with
// ||x-y|| <= i*bin_width, so evaluate() floors its argument to a bin and is a
// lower bound of the true modulus; evaluate_certified() inflates by one bin
// and never evaluates below the sample spacing, where every bin is empty.
struct ModulusEstimate {
  enum class Kind { Full, Partial };
  Kind kind = Kind::Full;
  int axis = -1;  // for Partial
  double bin_width = 0.0;
  Vec cum;             // length nbins+1, cum[0] = 0, nondecreasing
  double diameter = 0.0;   // largest sampled pair distance
  double resolution = 0.0; // sample spacing the profile was built from

  double evaluate(double delta) const;
  double evaluate_certified(double delta) const;
  bool clamps(double delta) const { return delta > diameter; }
};

// Pair scan over a regular grid on the box (m <= 2).
ModulusEstimate estimate_modulus(const Observable& f, const Box& domain,
                                 ModulusEstimate::Kind kind, int resolution, int axis = 0);

// Pair scan over an explicit point set with scalar values.
ModulusEstimate modulus_from_points(const std::vector<Vec>& points, const Vec& values,
                                    int nbins, double resolution_hint);

// Same with vector values (Euclidean difference norms), e.g. gradients.
ModulusEstimate modulus_from_points_vector(const std::vector<Vec>& points,
                                           const std::vector<Vec>& values, int nbins,
                                           double resolution_hint);

struct LipschitzData {
  double full = 0.0;
  Vec partial;              // L^(l) per axis
  double derivative_full = 0.0;  // Lipschitz constant of g' (univariate)
  Vec derivative_partial;   // L^(l) of each partial derivative map d_l g
  bool has_derivative_constants = false;
};

// Secant slopes over nearby sampled pairs (axis-aligned and diagonal neighbor
// offsets); derivative constants come from finite-difference derivatives.
LipschitzData estimate_lipschitz(const std::function<Vec(const Vec&)>& g, int m,
                                 const Box& domain, int resolution,
                                 bool with_derivative_constants = true);

}  // namespace bernkoop
