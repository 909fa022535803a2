#pragma once

#include <map>

#include "core/koopman.h"
#include "core/modulus.h"

namespace bernkoop {

struct BoundReport {
  std::string theorem_tag;
  int m = 0;
  std::vector<int> degrees;
  int k = 1;
  double value = 0.0;
  bool clamped = false;  // some modulus argument exceeded the sampled diameter
  std::map<std::string, double> constants;

  static std::string csv_header();
  std::string csv_row() const;
};

// Shared precomputation for one (map, observable) pair: sampled image, moduli
// over the image and the domain, Lipschitz data of the map.
struct BoundContext {
  int m = 0;
  int resolution = 0;
  Observable f;
  std::vector<Vec> grid_points;
  std::vector<Vec> image_points;
  Vec f_image_values;
  ModulusEstimate omega_f_image;
  ModulusEstimate omega_f_domain;
  bool has_gradient = false;
  ModulusEstimate omega_gradf_image;  // vector-valued modulus of the gradient
  double sup_grad_image = 0.0;        // sup over the image of ||grad f|| (|f'| for m=1)
  LipschitzData lip;                  // of the map in unit coordinates
  std::string system_label;
  std::string observable_label;
};

// resolution 0 picks the default (256 for m=1, 96 for m=2).
BoundContext make_bound_context(const MapOnBox& map, const Observable& f, int resolution = 0);

BoundReport bound_univariate_continuous(const ModulusEstimate& omega_f_image, double L, int n);
BoundReport bound_univariate_c1(const ModulusEstimate& omega_fprime_image, double L,
                                double L_phiprime, double sup_fprime, int n);
BoundReport bound_multivariate_full(const ModulusEstimate& omega_f_image, double L,
                                    const DegreeVector& degree);
BoundReport bound_multivariate_partial(const ModulusEstimate& omega_f_image, const Vec& L_partial,
                                       const DegreeVector& degree);
BoundReport bound_multivariate_c1(const ModulusEstimate& omega_grad_image, const Vec& L_partial,
                                  const Vec& L_deriv_partial, double sup_grad,
                                  const DegreeVector& degree);

enum class IterVariant { Full, Partial, C1 };

// Sum over iterates j = 0..k-1 of the single-step bound applied to the
// polynomial iterate g_j; g_0 = f uses the context's moduli, so k = 1
// reproduces T3/T4/T5 exactly.
BoundReport bound_iterated(const BoundContext& ctx, const KoopmanMatrices& km, int k,
                           IterVariant variant);

BoundReport bound_iterated_alternative(const ModulusEstimate& omega_f_image, double L,
                                       const DegreeVector& degree, int k);

BoundReport bound_measurement_noise(const ModulusEstimate& omega_f_domain, double noise_sup);

// DataFull / DataPartial: the plain bounds for the composed map phi o S, whose
// constants factor as L_phi*L_S and L_phi*L_S^(l). The identity lattice map
// therefore reduces both to the plain bounds at the same constants.
std::pair<BoundReport, BoundReport> data_driven_bounds(const ModulusEstimate& omega_f_image,
                                                       double L_phi, const LipschitzData& lip_S,
                                                       const DegreeVector& degree);

// sup over a resolution^m grid of |B_n Kf - Kf| via direct operator evaluation.
double measured_sup_error(const MapOnBox& map, const Observable& f, const DegreeVector& degree,
                          int resolution);

// sup over a grid of |((B_n K)^k f)(x) - f(phi^k(x))|.
double measured_sup_error_iterated(const MapOnBox& map, const Observable& f,
                                   const DegreeVector& degree, int k, int resolution);

}  // namespace bernkoop
