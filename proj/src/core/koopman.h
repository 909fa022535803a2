#pragma once

#include "core/conversion.h"
#include "core/systems.h"

namespace bernkoop {

// Matrix representations of the Bernstein-approximated composition operator:
// K_bernstein = C * U acts on Bernstein coefficient vectors, K_monomial = U * C
// on monomial coefficient vectors; column j of U is X(phi(x_hat_j)).
struct KoopmanMatrices {
  DegreeVector degree;
  Mat C;
  Mat U;
  Mat K_bernstein;
  Mat K_monomial;
  std::vector<std::size_t> gamma;  // 0-based positions of x_1..x_m inside X
};

// 0-based position of the monomial x_{axis+1} inside X(x).
std::size_t gamma_index(const DegreeVector& degree, int axis);

// U with columns X(phi(x_hat_j)); failures of the map carry the lattice index.
Mat build_sample_matrix(const MapOnBox& map, const LatticeGrid& grid);

KoopmanMatrices build_koopman_matrices(const MapOnBox& map, const DegreeVector& degree);

// Same matrices built from precomputed images phi(x_hat_j) in lattice order.
KoopmanMatrices koopman_from_images(const std::vector<Vec>& images, const DegreeVector& degree);

// Purely linear prediction: lift X(x0) once, then k matrix-vector products;
// entry k-1 of the result is the state after k steps.
std::vector<Vec> predict_trajectory(const KoopmanMatrices& km, const Vec& x0, int steps);

// Nonlinear predictor: re-lift the extracted state every step; intermediate
// states must stay inside the unit box.
std::vector<Vec> predict_trajectory_relift(const KoopmanMatrices& km, const Vec& x0, int steps);

// One-step state prediction straight from the lattice images: component j is
// sum_i b_i(x0) images[i][j], the gamma rows of U applied to B(x0). Avoids the
// conversion matrix entirely, so it stays stable at any degree.
Vec predict_one_step_from_images(const std::vector<Vec>& images, const LatticeGrid& grid,
                                 const Vec& x0);

// Bernstein coefficients of the next operator iterate: c <- K_bernstein^T c.
Vec next_iterate_coefficients(const KoopmanMatrices& km, const Vec& coeffs);

void save_matrix_csv(const std::string& path, const Mat& mat, const DegreeVector& degree,
                     const std::string& basis_tag);
Mat load_matrix_csv(const std::string& path, DegreeVector* degree_out = nullptr,
                    std::string* basis_tag_out = nullptr);

}  // namespace bernkoop
