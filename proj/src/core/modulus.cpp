#include "core/modulus.h"

#include <algorithm>
#include <cmath>

namespace bernkoop {

namespace {

std::vector<Vec> box_grid(const Box& domain, int resolution) {
  const int m = domain.m();
  require(m >= 1 && m <= 2, Status::CapabilityError, "grid pair scans support m <= 2");
  require(resolution >= 16, Status::DomainError, "resolution must be >= 16 per axis");
  std::vector<Vec> pts;
  if (m == 1) {
    pts.reserve(resolution);
    for (int i = 0; i < resolution; ++i) {
      const double t = static_cast<double>(i) / (resolution - 1);
      pts.push_back({domain.lo[0] + t * domain.width(0)});
    }
  } else {
    pts.reserve(static_cast<std::size_t>(resolution) * resolution);
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j) {
        const double a = static_cast<double>(i) / (resolution - 1);
        const double b = static_cast<double>(j) / (resolution - 1);
        pts.push_back({domain.lo[0] + a * domain.width(0), domain.lo[1] + b * domain.width(1)});
      }
  }
  return pts;
}

ModulusEstimate profile_from_pairs(const std::vector<Vec>& points,
                                   const std::function<double(std::size_t, std::size_t)>& diff,
                                   int nbins, double resolution_hint) {
  const std::size_t M = points.size();
  require(M >= 2, Status::ShapeError, "need at least two points for a modulus profile");
  require(nbins >= 8, Status::DomainError, "too few bins for a modulus profile");
  const int dim = static_cast<int>(points[0].size());

  double dmax = 0.0;
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = a + 1; b < M; ++b) {
      double d2 = 0.0;
      for (int l = 0; l < dim; ++l) {
        const double t = points[a][l] - points[b][l];
        d2 += t * t;
      }
      dmax = std::max(dmax, d2);
    }
  dmax = std::sqrt(dmax);
  require(dmax > 0.0, Status::DegenerateError, "all sampled points coincide");

  ModulusEstimate est;
  est.bin_width = dmax / nbins;
  est.cum.assign(static_cast<std::size_t>(nbins) + 1, 0.0);
  est.diameter = dmax;
  est.resolution = resolution_hint;

  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = a + 1; b < M; ++b) {
      double d2 = 0.0;
      for (int l = 0; l < dim; ++l) {
        const double t = points[a][l] - points[b][l];
        d2 += t * t;
      }
      const double d = std::sqrt(d2);
      // pairs with distance in ((i-1)h, i h] land in cum[i]
      std::size_t bin = static_cast<std::size_t>(std::ceil(d / est.bin_width - 1e-12));
      bin = std::min(bin, static_cast<std::size_t>(nbins));
      const double v = diff(a, b);
      if (v > est.cum[bin]) est.cum[bin] = v;
    }
  for (std::size_t i = 1; i < est.cum.size(); ++i)
    est.cum[i] = std::max(est.cum[i], est.cum[i - 1]);
  return est;
}

}  // namespace

double ModulusEstimate::evaluate(double delta) const {
  require(delta > 0.0, Status::DomainError, "modulus argument must be positive");
  const double clamped = std::min(delta, diameter);
  std::size_t i = static_cast<std::size_t>(std::floor(clamped / bin_width + 1e-12));
  i = std::min(i, cum.size() - 1);
  return cum[i];
}

double ModulusEstimate::evaluate_certified(double delta) const {
  require(delta > 0.0, Status::DomainError, "modulus argument must be positive");
  // Arguments below the sample spacing would land in bins no pair can reach;
  // certify at the spacing instead so the result stays an upper estimate.
  const double clamped = std::min(std::max(delta, resolution), diameter);
  std::size_t i = static_cast<std::size_t>(std::floor(clamped / bin_width + 1e-12)) + 1;
  i = std::min(i, cum.size() - 1);
  return cum[i];
}

ModulusEstimate estimate_modulus(const Observable& f, const Box& domain,
                                 ModulusEstimate::Kind kind, int resolution, int axis) {
  const int m = domain.m();
  if (kind == ModulusEstimate::Kind::Full) {
    const std::vector<Vec> pts = box_grid(domain, resolution);
    Vec vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f.eval(pts[i]);
    double min_spacing = domain.width(0) / (resolution - 1);
    for (int l = 1; l < m; ++l) min_spacing = std::min(min_spacing, domain.width(l) / (resolution - 1));
    const int nbins = std::max(8, static_cast<int>(std::ceil(domain.diameter() / (0.5 * min_spacing))));
    ModulusEstimate est = profile_from_pairs(
        pts, [&](std::size_t a, std::size_t b) { return std::abs(vals[a] - vals[b]); }, nbins,
        min_spacing);
    est.kind = ModulusEstimate::Kind::Full;
    return est;
  }

  require(axis >= 0 && axis < m, Status::DomainError, "partial modulus axis out of range");
  require(m >= 1 && m <= 2, Status::CapabilityError, "grid pair scans support m <= 2");
  require(resolution >= 16, Status::DomainError, "resolution must be >= 16 per axis");
  // Same-line pairs have exact distances that are multiples of the spacing.
  const double spacing = domain.width(axis) / (resolution - 1);
  ModulusEstimate est;
  est.kind = ModulusEstimate::Kind::Partial;
  est.axis = axis;
  est.bin_width = spacing;
  est.cum.assign(resolution, 0.0);
  est.diameter = domain.width(axis);
  est.resolution = spacing;
  const int lines = (m == 1) ? 1 : resolution;
  Vec line_vals(resolution);
  for (int line = 0; line < lines; ++line) {
    for (int i = 0; i < resolution; ++i) {
      Vec x(m);
      x[axis] = domain.lo[axis] + spacing * i;
      if (m == 2) {
        const int other = 1 - axis;
        x[other] = domain.lo[other] + domain.width(other) * line / (resolution - 1);
      }
      line_vals[i] = f.eval(x);
    }
    for (int i = 0; i < resolution; ++i)
      for (int j = i + 1; j < resolution; ++j) {
        const std::size_t bin = static_cast<std::size_t>(j - i);
        const double v = std::abs(line_vals[i] - line_vals[j]);
        if (v > est.cum[bin]) est.cum[bin] = v;
      }
  }
  for (std::size_t i = 1; i < est.cum.size(); ++i) est.cum[i] = std::max(est.cum[i], est.cum[i - 1]);
  return est;
}

ModulusEstimate modulus_from_points(const std::vector<Vec>& points, const Vec& values, int nbins,
                                    double resolution_hint) {
  require(points.size() == values.size(), Status::ShapeError, "points/values length mismatch");
  ModulusEstimate est = profile_from_pairs(
      points, [&](std::size_t a, std::size_t b) { return std::abs(values[a] - values[b]); }, nbins,
      resolution_hint);
  est.kind = ModulusEstimate::Kind::Full;
  return est;
}

ModulusEstimate modulus_from_points_vector(const std::vector<Vec>& points,
                                           const std::vector<Vec>& values, int nbins,
                                           double resolution_hint) {
  require(points.size() == values.size(), Status::ShapeError, "points/values length mismatch");
  ModulusEstimate est = profile_from_pairs(
      points,
      [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t l = 0; l < values[a].size(); ++l) {
          const double t = values[a][l] - values[b][l];
          s += t * t;
        }
        return std::sqrt(s);
      },
      nbins, resolution_hint);
  est.kind = ModulusEstimate::Kind::Full;
  return est;
}

LipschitzData estimate_lipschitz(const std::function<Vec(const Vec&)>& g, int m, const Box& domain,
                                 int resolution, bool with_derivative_constants) {
  const std::vector<Vec> pts = box_grid(domain, resolution);
  std::vector<Vec> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = g(pts[i]);
  const int p = static_cast<int>(vals[0].size());

  const auto secant = [&](std::size_t a, std::size_t b) {
    double dv2 = 0.0, dx2 = 0.0;
    for (int l = 0; l < p; ++l) {
      const double t = vals[a][l] - vals[b][l];
      dv2 += t * t;
    }
    for (int l = 0; l < m; ++l) {
      const double t = pts[a][l] - pts[b][l];
      dx2 += t * t;
    }
    return std::sqrt(dv2 / dx2);
  };

  LipschitzData lip;
  lip.partial.assign(m, 0.0);
  if (m == 1) {
    for (int i = 0; i + 1 < resolution; ++i)
      lip.full = std::max(lip.full, secant(i, i + 1));
    lip.partial[0] = lip.full;
  } else {
    const auto at = [&](int i, int j) { return static_cast<std::size_t>(i) * resolution + j; };
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j) {
        if (i + 1 < resolution)
          lip.partial[0] = std::max(lip.partial[0], secant(at(i, j), at(i + 1, j)));
        if (j + 1 < resolution)
          lip.partial[1] = std::max(lip.partial[1], secant(at(i, j), at(i, j + 1)));
        if (i + 1 < resolution && j + 1 < resolution)
          lip.full = std::max(lip.full, secant(at(i, j), at(i + 1, j + 1)));
        if (i + 1 < resolution && j >= 1)
          lip.full = std::max(lip.full, secant(at(i, j), at(i + 1, j - 1)));
      }
    lip.full = std::max({lip.full, lip.partial[0], lip.partial[1]});
  }

  if (with_derivative_constants) {
    // Central finite-difference derivative fields, then the same secant scan.
    lip.derivative_partial.assign(m, 0.0);
    const double h = 1e-5;
    for (int axis = 0; axis < m; ++axis) {
      auto dg = [&](const Vec& x) {
        Vec xa = x, xb = x;
        xa[axis] = std::min(domain.hi[axis], x[axis] + h);
        xb[axis] = std::max(domain.lo[axis], x[axis] - h);
        const Vec ga = g(xa), gb = g(xb);
        Vec d(p);
        for (int l = 0; l < p; ++l) d[l] = (ga[l] - gb[l]) / (xa[axis] - xb[axis]);
        return d;
      };
      // coarser grid: each derivative sample costs two g evaluations
      const int dres = std::max(16, resolution / 2);
      const LipschitzData inner = estimate_lipschitz(dg, m, domain, dres, false);
      lip.derivative_partial[axis] = inner.full;
    }
    if (m == 1) lip.derivative_full = lip.derivative_partial[0];
    lip.has_derivative_constants = true;
  }
  return lip;
}

}  // namespace bernkoop
