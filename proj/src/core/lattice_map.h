#pragma once

#include <cstdint>

#include "core/koopman.h"
#include "core/modulus.h"

namespace bernkoop {

// Snapshot pairs (x_j, y_j) with y_j = phi(x_j), in the same coordinates the
// map acts on.
struct DataSet {
  int m = 0;
  std::vector<Vec> x;
  std::vector<Vec> y;

  std::size_t size() const { return x.size(); }
};

DataSet load_dataset_csv(const std::string& path);
void save_dataset_csv(const std::string& path, const DataSet& data);

// Snapshot pairs taken exactly at the lattice nodes, in lattice order.
DataSet generate_lattice_dataset(const MapOnBox& map, const DegreeVector& degree);

// Nodes perturbed by at most jitter cells per axis (jitter < 1/2 keeps the
// band-order heuristic valid), clamped to the unit box, then shuffled.
DataSet generate_jittered_dataset(const MapOnBox& map, const DegreeVector& degree, double jitter,
                                  std::uint64_t seed);

// Single-column file of 1-based data indices in lattice order.
std::vector<std::size_t> load_permutation_csv(const std::string& path, std::size_t n);
void save_permutation_csv(const std::string& path, const std::vector<std::size_t>& perm);

// Pairs lattice vertex j with data point x_{perm[j]} so that the induced
// piecewise-linear map is a homeomorphism: m=1 sorts ascending, m=2 sorts into
// bands by the second coordinate and by the first inside each band, then
// verifies that no two induced lattice-edge images cross.
std::vector<std::size_t> build_assignment(const DataSet& data, const DegreeVector& degree);

// Checks an assignment (built-in or user-supplied): points distinct, lattice
// size matched, m=1 images monotone, m=2 induced edge images non-crossing.
void verify_assignment(const DataSet& data, const DegreeVector& degree,
                       const std::vector<std::size_t>& perm);

// One affine piece of S restricted to a lattice simplex with vertices
// v_0, v_0 + e_{sigma(1)}h_1, ...: S(x) = base_image + A (x - base_point).
struct SimplexPiece {
  std::vector<std::size_t> lattice_vertices;  // flat indices v_0..v_m
  std::vector<int> axis_order;                // sigma, 0-based axes
  Vec base_point;
  Vec base_image;
  Mat A;
  Mat A_inv;
  std::vector<Vec> image_vertices;
};

// Piecewise-linear extension of vertex -> x_{perm[vertex]} over the Kuhn
// (sorted-coordinates) triangulation of the lattice cells. Identity data
// collapses to an exact passthrough, an axis-aligned box rescale to one
// diagonal piece.
struct LatticeMap {
  enum class Kind { Identity, Affine, Simplicial };
  Kind kind = Kind::Identity;
  int m = 0;
  DegreeVector degree;
  std::vector<std::size_t> assignment;
  std::vector<SimplexPiece> pieces;
  Vec affine_offset;
  Vec affine_scale;
};

LatticeMap build_lattice_map(const DataSet& data, const DegreeVector& degree,
                             const std::vector<std::size_t>& assignment);

// S(x)_l = lo_l + (hi_l - lo_l) x_l as a single affine piece.
LatticeMap affine_box_map(const Box& box);

Vec eval_S(const LatticeMap& map, const Vec& x);
Vec eval_S_inverse(const LatticeMap& map, const Vec& y);

// The piece applied as stored, for facet-continuity checks.
Vec eval_piece(const SimplexPiece& piece, const Vec& x);

// L_S as the largest spectral norm over the pieces, per-axis constants as the
// largest column norms.
LipschitzData lipschitz_of_S(const LatticeMap& map);

// Matrices in the pulled-back basis: column j of U is X(S^{-1}(y_{perm[j]})).
KoopmanMatrices build_data_koopman(const DataSet& data, const DegreeVector& degree,
                                   const LatticeMap& map);

// Prediction in pulled-back coordinates, mapped out through S every step.
std::vector<Vec> predict_data_driven(const KoopmanMatrices& km, const LatticeMap& map,
                                     const Vec& x0, int steps, bool relift = false);

}  // namespace bernkoop
