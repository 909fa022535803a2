#include "core/systems.h"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "core/observable.h"

namespace bernkoop {

Vec Box::to_unit(const Vec& x) const {
  Vec u(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) u[l] = (x[l] - lo[l]) / (hi[l] - lo[l]);
  return u;
}

Vec Box::from_unit(const Vec& u) const {
  Vec x(u.size());
  for (std::size_t l = 0; l < u.size(); ++l) x[l] = lo[l] + u[l] * (hi[l] - lo[l]);
  return x;
}

double Box::diameter() const {
  double s = 0.0;
  for (int l = 0; l < m(); ++l) s += width(l) * width(l);
  return std::sqrt(s);
}

Vec rk4_flow(const std::function<Vec(const Vec&)>& field, Vec x, double t, int steps,
             const Box* escape_box) {
  const int m = static_cast<int>(x.size());
  const double h = t / steps;
  Vec k1, k2, k3, k4, tmp(m);
  for (int s = 0; s < steps; ++s) {
    k1 = field(x);
    for (int l = 0; l < m; ++l) tmp[l] = x[l] + 0.5 * h * k1[l];
    k2 = field(tmp);
    for (int l = 0; l < m; ++l) tmp[l] = x[l] + 0.5 * h * k2[l];
    k3 = field(tmp);
    for (int l = 0; l < m; ++l) tmp[l] = x[l] + h * k3[l];
    k4 = field(tmp);
    for (int l = 0; l < m; ++l)
      x[l] += (h / 6.0) * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);
    if (escape_box) {
      for (int l = 0; l < m; ++l)
        require(x[l] >= escape_box->lo[l] && x[l] <= escape_box->hi[l], Status::EscapeError,
                "trajectory left the integration box at step " + std::to_string(s + 1));
    }
  }
  return x;
}

FlowSpec builtin_system(const std::string& name) {
  FlowSpec s;
  s.label = name;
  if (name == "van_der_pol") {
    s.kind = FlowSpec::Kind::Integrated;
    s.vector_field = [](const Vec& x) {
      return Vec{x[1], 0.5 * (1.0 - x[0] * x[0]) * x[1] - x[0]};
    };
    s.horizon = 0.3;
    s.native_box = {{-3.0, -3.0}, {3.0, 3.0}};
    s.image_box = s.native_box;
    // The t=0.3 flow pushes corner regions to about 1.08 in unit coordinates;
    // the margin admits those images instead of failing the build.
    s.box_margin = 0.15;
    return s;
  }
  if (name == "scalar_logistic") {
    s.kind = FlowSpec::Kind::ClosedForm;
    s.closed_flow = [](const Vec& x, double t) {
      const double et = std::exp(t);
      return Vec{x[0] / (et + x[0] * (et - 1.0))};
    };
    s.vector_field = [](const Vec& x) { return Vec{-x[0] * (1.0 + x[0])}; };
    s.horizon = 1.0;
    s.native_box = {{0.0}, {1.0}};
    s.image_box = s.native_box;
    return s;
  }
  if (name == "product_decay_2d") {
    s.kind = FlowSpec::Kind::ClosedForm;
    s.closed_flow = [](const Vec& x, double t) {
      return Vec{std::exp(t) * x[0] * (t * x[1] + 1.0), x[1] / (1.0 + t * x[1])};
    };
    s.horizon = 1.0;
    s.native_box = Box::unit(2);
    // The first image component reaches 2e at t=1; errors are studied on the
    // unit box, so the image is rescaled from its own bounding box.
    s.image_box = {{0.0, 0.0}, {2.0 * std::exp(1.0), 0.5}};
    return s;
  }
  if (name == "lotka_volterra") {
    s.kind = FlowSpec::Kind::Integrated;
    s.vector_field = [](const Vec& x) {
      return Vec{1.5 * x[0] * (1.0 - x[0]) - x[0] * x[1],
                 1.5 * x[1] * (1.0 - x[1]) - x[0] * x[1]};
    };
    s.horizon = 1.0;
    s.native_box = Box::unit(2);
    s.image_box = s.native_box;
    return s;
  }
  throw Error(Status::ConfigError, "unknown builtin system: " + name);
}

FlowSpec system_from_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Status::IoError, "cannot open system config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw Error(Status::ConfigError, "bad JSON in " + path + ": " + e.what());
  }
  try {
    FlowSpec s;
    s.kind = FlowSpec::Kind::Integrated;
    const int m = doc.at("dimension").get<int>();
    require(m >= 1, Status::ConfigError, "dimension must be >= 1");
    s.label = doc.value("label", std::string("user_system"));
    const auto exprs = doc.at("vector_field").get<std::vector<std::string>>();
    require(static_cast<int>(exprs.size()) == m, Status::ConfigError,
            "vector_field needs one expression per dimension");
    std::vector<Observable> components;
    components.reserve(exprs.size());
    for (const auto& e : exprs) components.push_back(parse_observable(e, m));
    s.vector_field = [components](const Vec& x) {
      Vec f(components.size());
      for (std::size_t l = 0; l < components.size(); ++l) f[l] = components[l].eval(x);
      return f;
    };
    s.horizon = doc.at("horizon").get<double>();
    require(s.horizon > 0.0, Status::ConfigError, "horizon must be > 0");
    const auto read_box = [m](const nlohmann::json& b) {
      Box box{b.at("lo").get<Vec>(), b.at("hi").get<Vec>()};
      require(box.m() == m && static_cast<int>(box.hi.size()) == m, Status::ConfigError,
              "box arrays must have one entry per dimension");
      for (int l = 0; l < m; ++l)
        require(box.lo[l] < box.hi[l], Status::ConfigError, "box has a degenerate axis");
      return box;
    };
    s.native_box = read_box(doc.at("native_box"));
    s.image_box = doc.contains("image_box") ? read_box(doc.at("image_box")) : s.native_box;
    s.rk4_steps_per_unit = doc.value("rk4_steps_per_unit", s.rk4_steps_per_unit);
    require(s.rk4_steps_per_unit >= 1, Status::ConfigError, "rk4_steps_per_unit must be >= 1");
    s.box_margin = doc.value("box_margin", 0.0);
    require(s.box_margin >= 0.0, Status::ConfigError, "box_margin must be >= 0");
    return s;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Status::ConfigError, "bad system config " + path + ": " + e.what());
  }
}

MapOnBox flow_map(const FlowSpec& spec) {
  const int m = spec.native_box.m();
  require(m >= 1, Status::ShapeError, "flow spec has no box");
  if (spec.kind == FlowSpec::Kind::ClosedForm)
    require(static_cast<bool>(spec.closed_flow), Status::ConfigError,
            "closed-form spec lacks a closed flow");
  else
    require(static_cast<bool>(spec.vector_field), Status::ConfigError,
            "integrated spec lacks a vector field");

  // Integration may wander a bit outside the native box before time t.
  Box padded = spec.native_box;
  for (int l = 0; l < m; ++l) {
    const double pad = 0.25 * spec.native_box.width(l);
    padded.lo[l] -= pad;
    padded.hi[l] += pad;
  }

  FlowSpec local = spec;
  Box image_box = spec.image_box.m() == m ? spec.image_box : spec.native_box;
  MapOnBox map;
  map.label = spec.label;
  map.m = m;
  map.box_margin = spec.box_margin;
  map.eval = [local, padded, image_box, m](const Vec& u) {
    require(static_cast<int>(u.size()) == m, Status::ShapeError, "point dimension mismatch");
    const Vec x = local.native_box.from_unit(u);
    Vec y;
    if (local.kind == FlowSpec::Kind::ClosedForm) {
      y = local.closed_flow(x, local.horizon);
    } else {
      const int steps =
          std::max(1, static_cast<int>(std::ceil(local.rk4_steps_per_unit * local.horizon)));
      y = rk4_flow(local.vector_field, x, local.horizon, steps, &padded);
    }
    Vec v = image_box.to_unit(y);
    for (int l = 0; l < m; ++l)
      require(v[l] >= -local.box_margin && v[l] <= 1.0 + local.box_margin, Status::OutOfBox,
              "map image leaves the unit box beyond the margin on axis " + std::to_string(l + 1));
    return v;
  };
  return map;
}

MapOnBox map_from_function(std::string label, int m, std::function<Vec(const Vec&)> fn,
                           double box_margin) {
  MapOnBox map;
  map.label = std::move(label);
  map.m = m;
  map.box_margin = box_margin;
  map.eval = std::move(fn);
  return map;
}

double Rng::uniform() {
  return (engine_() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

NoiseResult add_noise(const std::vector<Vec>& map_values, double sigma, std::uint64_t seed,
                      double box_margin) {
  require(sigma >= 0.0, Status::DomainError, "sigma must be >= 0");
  require(box_margin >= 0.0, Status::DomainError, "box margin must be >= 0");
  NoiseResult out;
  out.values = map_values;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& y : out.values) {
    double norm2 = 0.0;
    for (double& c : y) {
      const double clean = c;
      double noisy = c + sigma * rng.gaussian();
      noisy = std::min(1.0 + box_margin, std::max(-box_margin, noisy));
      norm2 += (noisy - clean) * (noisy - clean);
      c = noisy;
    }
    out.sup_norm = std::max(out.sup_norm, std::sqrt(norm2));
  }
  return out;
}

}  // namespace bernkoop
