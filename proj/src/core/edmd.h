#pragma once

#include "core/lattice_map.h"

namespace bernkoop {

// Least-squares approximation with the monomial dictionary: K = U_Y U_X^+,
// pseudoinverse by singular-value truncation.
struct EdmdMatrices {
  DegreeVector degree;
  Mat U_X;
  Mat U_Y;
  Mat K_edmd;
  int rank_used = 0;
  double truncation_tol = 0.0;
};

EdmdMatrices build_edmd(const DataSet& data, const DegreeVector& degree,
                        double truncation_tol = 1e-10);

// Same lift, iterate, extract scheme as the Bernstein predictor.
std::vector<Vec> predict_edmd(const EdmdMatrices& em, const Vec& x0, int steps);

}  // namespace bernkoop
