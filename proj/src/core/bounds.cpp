#include "core/bounds.h"

#include <cmath>
#include <sstream>

#include "core/bernstein.h"

namespace bernkoop {

std::string BoundReport::csv_header() {
  return "theorem,m,degrees,k,value,clamped,constants";
}

std::string BoundReport::csv_row() const {
  std::ostringstream out;
  out.precision(12);
  out << theorem_tag << ',' << m << ',';
  for (std::size_t l = 0; l < degrees.size(); ++l) out << (l ? "|" : "") << degrees[l];
  out << ',' << k << ',' << value << ',' << (clamped ? 1 : 0) << ',';
  bool first = true;
  for (const auto& [key, val] : constants) {
    out << (first ? "" : ";") << key << '=' << val;
    first = false;
  }
  return out.str();
}

BoundContext make_bound_context(const MapOnBox& map, const Observable& f, int resolution) {
  const int m = map.m;
  require(m >= 1 && m <= 2, Status::CapabilityError, "bound contexts support m <= 2");
  require(f.m == m, Status::ShapeError, "observable dimension disagrees with the map");
  BoundContext ctx;
  ctx.m = m;
  ctx.resolution = resolution > 0 ? resolution : (m == 1 ? 256 : 96);
  ctx.f = f;
  ctx.system_label = map.label;
  ctx.observable_label = f.label;
  const int R = ctx.resolution;
  require(R >= 16, Status::DomainError, "resolution must be >= 16");

  const Box unit = Box::unit(m);
  if (m == 1) {
    for (int i = 0; i < R; ++i) ctx.grid_points.push_back({static_cast<double>(i) / (R - 1)});
  } else {
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < R; ++j)
        ctx.grid_points.push_back(
            {static_cast<double>(i) / (R - 1), static_cast<double>(j) / (R - 1)});
  }

  ctx.image_points.reserve(ctx.grid_points.size());
  for (const Vec& x : ctx.grid_points) ctx.image_points.push_back(map.eval(x));

  ctx.f_image_values.resize(ctx.image_points.size());
  for (std::size_t i = 0; i < ctx.image_points.size(); ++i)
    ctx.f_image_values[i] = f.eval(ctx.image_points[i]);

  const int nbins = 2 * (R - 1);
  const double spacing = 1.0 / (R - 1);
  ctx.omega_f_image = modulus_from_points(ctx.image_points, ctx.f_image_values, nbins, spacing);
  ctx.omega_f_domain = estimate_modulus(f, unit, ModulusEstimate::Kind::Full, R);
  ctx.lip = estimate_lipschitz(map.eval, m, unit, R, true);

  if (f.has_gradient()) {
    ctx.has_gradient = true;
    std::vector<Vec> grads(ctx.image_points.size());
    for (std::size_t i = 0; i < ctx.image_points.size(); ++i) {
      grads[i] = f.gradient(ctx.image_points[i]);
      double norm2 = 0.0;
      for (double gl : grads[i]) norm2 += gl * gl;
      ctx.sup_grad_image = std::max(ctx.sup_grad_image, std::sqrt(norm2));
    }
    ctx.omega_gradf_image = modulus_from_points_vector(ctx.image_points, grads, nbins, spacing);
  }
  return ctx;
}

BoundReport bound_univariate_continuous(const ModulusEstimate& omega_f_image, double L, int n) {
  require(n >= 1, Status::DomainError, "degree must be >= 1");
  const double arg = L / std::sqrt(static_cast<double>(n));
  const double omega = omega_f_image.evaluate_certified(arg);
  BoundReport r;
  r.theorem_tag = "T1";
  r.m = 1;
  r.degrees = {n};
  r.value = 1.5 * omega;
  r.clamped = omega_f_image.clamps(arg);
  r.constants = {{"L", L}, {"arg", arg}, {"omega", omega}};
  return r;
}

BoundReport bound_univariate_c1(const ModulusEstimate& omega_fprime_image, double L,
                                double L_phiprime, double sup_fprime, int n) {
  require(n >= 1, Status::DomainError, "degree must be >= 1");
  const double rn = std::sqrt(static_cast<double>(n));
  const double arg = L / (2.0 * rn);
  const double omega = omega_fprime_image.evaluate_certified(arg);
  BoundReport r;
  r.theorem_tag = "T2";
  r.m = 1;
  r.degrees = {n};
  r.value = (L * omega + sup_fprime * L_phiprime / (2.0 * rn)) / rn;
  r.clamped = omega_fprime_image.clamps(arg);
  r.constants = {{"L", L},
                 {"L_phiprime", L_phiprime},
                 {"sup_fprime", sup_fprime},
                 {"arg", arg},
                 {"omega_fprime", omega}};
  return r;
}

BoundReport bound_multivariate_full(const ModulusEstimate& omega_f_image, double L,
                                    const DegreeVector& degree) {
  double inv = 0.0;
  for (int n : degree.degrees) inv += 1.0 / n;
  const double arg = L * std::sqrt(inv);
  const double omega = omega_f_image.evaluate_certified(arg);
  BoundReport r;
  r.theorem_tag = "T3";
  r.m = degree.m();
  r.degrees = degree.degrees;
  r.value = 1.5 * omega;
  r.clamped = omega_f_image.clamps(arg);
  r.constants = {{"L", L}, {"arg", arg}, {"omega", omega}};
  return r;
}

BoundReport bound_multivariate_partial(const ModulusEstimate& omega_f_image, const Vec& L_partial,
                                       const DegreeVector& degree) {
  require(static_cast<int>(L_partial.size()) == degree.m(), Status::ShapeError,
          "partial constants count disagrees with dimension");
  BoundReport r;
  r.theorem_tag = "T4";
  r.m = degree.m();
  r.degrees = degree.degrees;
  double sum = 0.0;
  for (int l = 0; l < degree.m(); ++l) {
    const double arg = L_partial[l] / std::sqrt(static_cast<double>(degree.degrees[l]));
    sum += omega_f_image.evaluate_certified(arg);
    r.clamped = r.clamped || omega_f_image.clamps(arg);
    r.constants["L" + std::to_string(l + 1)] = L_partial[l];
    r.constants["arg" + std::to_string(l + 1)] = arg;
  }
  r.value = 1.5 * sum;
  return r;
}

BoundReport bound_multivariate_c1(const ModulusEstimate& omega_grad_image, const Vec& L_partial,
                                  const Vec& L_deriv_partial, double sup_grad,
                                  const DegreeVector& degree) {
  require(static_cast<int>(L_partial.size()) == degree.m(), Status::ShapeError,
          "partial constants count disagrees with dimension");
  require(static_cast<int>(L_deriv_partial.size()) == degree.m(), Status::ShapeError,
          "derivative constants count disagrees with dimension");
  BoundReport r;
  r.theorem_tag = "T5";
  r.m = degree.m();
  r.degrees = degree.degrees;
  double sum = 0.0;
  for (int l = 0; l < degree.m(); ++l) {
    const double rn = std::sqrt(static_cast<double>(degree.degrees[l]));
    const double arg = L_partial[l] / (2.0 * rn);
    const double omega = omega_grad_image.evaluate_certified(arg);
    sum += (L_partial[l] * omega + sup_grad * L_deriv_partial[l] / (2.0 * rn)) / rn;
    r.clamped = r.clamped || omega_grad_image.clamps(arg);
    r.constants["L" + std::to_string(l + 1)] = L_partial[l];
    r.constants["Ld" + std::to_string(l + 1)] = L_deriv_partial[l];
  }
  r.constants["sup_grad"] = sup_grad;
  r.value = sum;
  return r;
}

namespace {

// phi(x_hat_j) recovered from the gamma rows of U.
std::vector<Vec> node_images(const KoopmanMatrices& km) {
  const std::size_t N = km.degree.N();
  std::vector<Vec> out(N, Vec(km.degree.m()));
  for (std::size_t j = 0; j < N; ++j)
    for (int l = 0; l < km.degree.m(); ++l)
      out[j][l] = km.U(static_cast<Eigen::Index>(km.gamma[l]), static_cast<Eigen::Index>(j));
  return out;
}

}  // namespace

BoundReport bound_iterated(const BoundContext& ctx, const KoopmanMatrices& km, int k,
                           IterVariant variant) {
  require(k >= 1, Status::DomainError, "iterate count must be >= 1");
  require(km.degree.m() == ctx.m, Status::ShapeError, "matrix dimension disagrees with context");
  if (variant == IterVariant::C1) {
    require(ctx.has_gradient, Status::CapabilityError, "smooth iterated bound needs a gradient");
    require(ctx.lip.has_derivative_constants, Status::CapabilityError,
            "smooth iterated bound needs derivative constants");
  }
  const DegreeVector& degree = km.degree;
  const LatticeGrid grid(degree);
  const int m = ctx.m;
  const int nbins = 2 * (ctx.resolution - 1);
  const double spacing = 1.0 / (ctx.resolution - 1);

  double inv = 0.0;
  for (int n : degree.degrees) inv += 1.0 / n;
  const double full_arg = ctx.lip.full * std::sqrt(inv);

  BoundReport r;
  r.theorem_tag =
      variant == IterVariant::Full ? "T6a" : (variant == IterVariant::Partial ? "T6b" : "T6c");
  r.m = m;
  r.degrees = degree.degrees;
  r.k = k;

  // Telescoping over the iterates: step j contributes the one-step bound for
  // g_j = (B K)^j f. g_0 = f reuses the context's moduli so k = 1 reproduces
  // the one-step bound exactly; later iterates are polynomials with Bernstein
  // coefficients c_1[i] = f(phi(x_hat_i)), c_{j+1} = K_bernstein^T c_j.
  Vec coeffs;
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    ModulusEstimate local;
    const ModulusEstimate* omega = nullptr;
    double supg = ctx.sup_grad_image;
    if (j == 0) {
      omega = variant == IterVariant::C1 ? &ctx.omega_gradf_image : &ctx.omega_f_image;
    } else {
      if (j == 1) {
        const std::vector<Vec> imgs = node_images(km);
        coeffs.resize(imgs.size());
        for (std::size_t i = 0; i < imgs.size(); ++i) coeffs[i] = ctx.f.eval(imgs[i]);
      } else {
        coeffs = next_iterate_coefficients(km, coeffs);
      }
      if (variant == IterVariant::C1) {
        supg = 0.0;
        std::vector<Vec> grads(ctx.image_points.size());
        for (std::size_t i = 0; i < ctx.image_points.size(); ++i) {
          grads[i] = eval_bernstein_gradient(coeffs, grid, ctx.image_points[i]);
          double norm2 = 0.0;
          for (double gl : grads[i]) norm2 += gl * gl;
          supg = std::max(supg, std::sqrt(norm2));
        }
        local = modulus_from_points_vector(ctx.image_points, grads, nbins, spacing);
      } else {
        Vec vals(ctx.image_points.size());
        for (std::size_t i = 0; i < ctx.image_points.size(); ++i)
          vals[i] = eval_bernstein_operator(coeffs, grid, ctx.image_points[i]);
        local = modulus_from_points(ctx.image_points, vals, nbins, spacing);
      }
      omega = &local;
    }

    double term = 0.0;
    switch (variant) {
      case IterVariant::Full:
        term = 1.5 * omega->evaluate_certified(full_arg);
        r.clamped = r.clamped || omega->clamps(full_arg);
        break;
      case IterVariant::Partial:
        for (int l = 0; l < m; ++l) {
          const double arg = ctx.lip.partial[l] / std::sqrt(static_cast<double>(degree.degrees[l]));
          term += 1.5 * omega->evaluate_certified(arg);
          r.clamped = r.clamped || omega->clamps(arg);
        }
        break;
      case IterVariant::C1:
        for (int l = 0; l < m; ++l) {
          const double rn = std::sqrt(static_cast<double>(degree.degrees[l]));
          const double arg = ctx.lip.partial[l] / (2.0 * rn);
          term += (ctx.lip.partial[l] * omega->evaluate_certified(arg) +
                   supg * ctx.lip.derivative_partial[l] / (2.0 * rn)) /
                  rn;
          r.clamped = r.clamped || omega->clamps(arg);
        }
        break;
    }
    total += term;
    r.constants["term" + std::to_string(j + 1)] = term;
  }
  r.value = total;
  r.constants["L"] = ctx.lip.full;
  return r;
}

BoundReport bound_iterated_alternative(const ModulusEstimate& omega_f_image, double L,
                                       const DegreeVector& degree, int k) {
  require(k >= 1, Status::DomainError, "iterate count must be >= 1");
  double inv = 0.0;
  for (int n : degree.degrees) inv += 1.0 / n;
  const double delta = std::sqrt(inv);
  BoundReport r;
  r.theorem_tag = "AppA";
  r.m = degree.m();
  r.degrees = degree.degrees;
  r.k = k;
  double sum = 0.0;
  double Lpow = 1.0;
  for (int l = 1; l <= k; ++l) {
    Lpow *= L;
    const double arg = Lpow * delta;
    sum += std::pow(4.0, k - l) * omega_f_image.evaluate_certified(arg);
    r.clamped = r.clamped || omega_f_image.clamps(arg);
  }
  r.value = 1.5 * sum;
  r.constants = {{"L", L}, {"delta", delta}};
  return r;
}

BoundReport bound_measurement_noise(const ModulusEstimate& omega_f_domain, double noise_sup) {
  require(noise_sup >= 0.0, Status::DomainError, "noise sup must be >= 0");
  BoundReport r;
  r.theorem_tag = "MeasNoise";
  r.value = noise_sup == 0.0 ? 0.0 : omega_f_domain.evaluate_certified(noise_sup);
  r.clamped = noise_sup > 0.0 && omega_f_domain.clamps(noise_sup);
  r.constants = {{"noise_sup", noise_sup}};
  return r;
}

std::pair<BoundReport, BoundReport> data_driven_bounds(const ModulusEstimate& omega_f_image,
                                                       double L_phi, const LipschitzData& lip_S,
                                                       const DegreeVector& degree) {
  require(static_cast<int>(lip_S.partial.size()) == degree.m(), Status::ShapeError,
          "lattice map constants disagree with dimension");
  BoundReport full = bound_multivariate_full(omega_f_image, L_phi * lip_S.full, degree);
  full.theorem_tag = "DataFull";
  full.constants["L_S"] = lip_S.full;
  full.constants["L_phi"] = L_phi;

  Vec scaled(degree.m());
  for (int l = 0; l < degree.m(); ++l) scaled[l] = L_phi * lip_S.partial[l];
  BoundReport part = bound_multivariate_partial(omega_f_image, scaled, degree);
  part.theorem_tag = "DataPartial";
  part.constants["L_phi"] = L_phi;
  return {full, part};
}

double measured_sup_error(const MapOnBox& map, const Observable& f, const DegreeVector& degree,
                          int resolution) {
  require(resolution >= 2, Status::DomainError, "resolution must be >= 2");
  const LatticeGrid grid(degree);
  Vec samples(grid.N());
  for (std::size_t j = 0; j < grid.N(); ++j) samples[j] = f.eval(map.eval(grid.point(j)));
  const int m = degree.m();
  double sup = 0.0;
  const auto probe = [&](const Vec& x) {
    const double approx = eval_bernstein_operator(samples, grid, x);
    sup = std::max(sup, std::abs(approx - f.eval(map.eval(x))));
  };
  if (m == 1) {
    for (int i = 0; i < resolution; ++i) probe({static_cast<double>(i) / (resolution - 1)});
  } else {
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j)
        probe({static_cast<double>(i) / (resolution - 1),
               static_cast<double>(j) / (resolution - 1)});
  }
  return sup;
}

double measured_sup_error_iterated(const MapOnBox& map, const Observable& f,
                                   const DegreeVector& degree, int k, int resolution) {
  require(k >= 1, Status::DomainError, "iterate count must be >= 1");
  require(resolution >= 2, Status::DomainError, "resolution must be >= 2");
  const KoopmanMatrices km = build_koopman_matrices(map, degree);
  const LatticeGrid grid(degree);
  const std::vector<Vec> imgs = node_images(km);
  Vec coeffs(imgs.size());
  for (std::size_t j = 0; j < imgs.size(); ++j) coeffs[j] = f.eval(imgs[j]);
  for (int j = 1; j < k; ++j) coeffs = next_iterate_coefficients(km, coeffs);

  const int m = degree.m();
  double sup = 0.0;
  const auto probe = [&](const Vec& x) {
    Vec y = x;
    for (int step = 0; step < k; ++step) y = map.eval(y);
    const double approx = eval_bernstein_operator(coeffs, grid, x);
    sup = std::max(sup, std::abs(approx - f.eval(y)));
  };
  if (m == 1) {
    for (int i = 0; i < resolution; ++i) probe({static_cast<double>(i) / (resolution - 1)});
  } else {
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j)
        probe({static_cast<double>(i) / (resolution - 1),
               static_cast<double>(j) / (resolution - 1)});
  }
  return sup;
}

}  // namespace bernkoop
