#pragma once

#include <functional>
#include <random>

#include "core/common.h"

namespace bernkoop {

struct Box {
  Vec lo, hi;

  int m() const { return static_cast<int>(lo.size()); }
  static Box unit(int m) { return {Vec(m, 0.0), Vec(m, 1.0)}; }
  double width(int l) const { return hi[l] - lo[l]; }
  Vec to_unit(const Vec& x) const;
  Vec from_unit(const Vec& u) const;
  double diameter() const;
};

struct FlowSpec {
  enum class Kind { ClosedForm, Integrated };
  Kind kind = Kind::ClosedForm;
  std::function<Vec(const Vec&)> vector_field;         // native coordinates
  std::function<Vec(const Vec&, double)> closed_flow;  // native coordinates
  double horizon = 1.0;
  Box native_box;            // domain of the dynamics
  Box image_box;             // box the image is rescaled from (defaults to native_box)
  int rk4_steps_per_unit = 300;
  double box_margin = 0.0;   // tolerated unit-frame overshoot of images
  std::string label;
};

// The time-t map conjugated onto the unit box: domain rescaled from native_box,
// image rescaled from image_box. eval throws EscapeError if integration leaves
// the padded native box and OutOfBox if the final image exceeds the margin.
struct MapOnBox {
  std::function<Vec(const Vec&)> eval;
  std::string label;
  int m = 0;
  double box_margin = 0.0;
};

// Fixed-step fourth-order Runge-Kutta for the time-t map of a vector field.
Vec rk4_flow(const std::function<Vec(const Vec&)>& field, Vec x, double t, int steps,
             const Box* escape_box = nullptr);

FlowSpec builtin_system(const std::string& name);

// Loads a user-defined integrated system from a JSON file with fields
// label, dimension, vector_field (array of expression strings over x1..xm),
// horizon, native_box {lo, hi}, and optional image_box, rk4_steps_per_unit,
// box_margin. Expressions are evaluated in native coordinates.
FlowSpec system_from_config(const std::string& path);

MapOnBox flow_map(const FlowSpec& spec);

MapOnBox map_from_function(std::string label, int m, std::function<Vec(const Vec&)> fn,
                           double box_margin = 0.0);

// Deterministic RNG: the mt19937_64 engine is bit-exact per the standard; the
// uniform and Gaussian mappings are written out here because the standard
// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();   // [0, 1)
  double gaussian();  // standard normal, polar method

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct NoiseResult {
  std::vector<Vec> values;
  double sup_norm = 0.0;  // max over samples of the Euclidean perturbation size
};

// Adds per-component Gaussian noise, clamps to the unit box padded by
// box_margin (clamping only shrinks the perturbation, so the reported sup
// norm stays a valid Delta bound).
NoiseResult add_noise(const std::vector<Vec>& map_values, double sigma, std::uint64_t seed,
                      double box_margin = 0.0);

}  // namespace bernkoop
