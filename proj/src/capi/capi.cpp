#include "bernkoop/bernkoop.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/bernstein.h"
#include "core/bounds.h"
#include "core/edmd.h"
#include "core/lattice_map.h"
#include "core/observable.h"
#include "core/systems.h"

using namespace bernkoop;

struct bk_system {
  FlowSpec spec;
  MapOnBox map;
};

struct bk_observable {
  Observable f;
};

struct bk_koopman {
  KoopmanMatrices km;
};

struct bk_dataset {
  DataSet data;
};

struct bk_lattice {
  LatticeMap map;
};

struct bk_edmd {
  EdmdMatrices em;
};

struct bk_bounds {
  MapOnBox map;
  Observable f;
  BoundContext ctx;
};

namespace {

thread_local std::string t_last_error;

template <typename Fn>
int guarded(Fn&& fn) noexcept {
  try {
    fn();
    t_last_error.clear();
    return BK_OK;
  } catch (const Error& e) {
    t_last_error = e.what();
    return static_cast<int>(e.status);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return BK_UNKNOWN_ERROR;
  } catch (...) {
    t_last_error = "unknown failure";
    return BK_UNKNOWN_ERROR;
  }
}

void check_arg(const void* p, const char* what) {
  require(p != nullptr, Status::ConfigError, std::string("null ") + what);
}

DegreeVector to_degree(const int* degree, size_t m) {
  check_arg(degree, "degree array");
  require(m >= 1, Status::ShapeError, "dimension must be >= 1");
  return DegreeVector{std::vector<int>(degree, degree + m)};
}

Vec to_vec(const double* p, int m, const char* what) {
  check_arg(p, what);
  return Vec(p, p + m);
}

void copy_out(const Vec& v, double* out) {
  std::copy(v.begin(), v.end(), out);
}

void copy_constants(const BoundReport& r, char* buf, size_t len) {
  if (buf == nullptr || len == 0) return;
  std::string s;
  for (const auto& [name, value] : r.constants) {
    if (!s.empty()) s += ';';
    s += name + '=' + std::to_string(value);
  }
  const size_t n = std::min(len - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

void fill_result(const BoundReport& r, bk_bound_result* out, char* buf, size_t len) {
  check_arg(out, "result pointer");
  out->value = r.value;
  out->clamped = r.clamped ? 1 : 0;
  copy_constants(r, buf, len);
}

// Lattice-node images phi(x_hat_j) recovered from the coordinate rows of U.
std::vector<Vec> node_images(const KoopmanMatrices& km) {
  const int m = km.degree.m();
  std::vector<Vec> images(static_cast<size_t>(km.U.cols()), Vec(m));
  for (size_t j = 0; j < images.size(); ++j)
    for (int l = 0; l < m; ++l)
      images[j][l] = km.U(static_cast<Eigen::Index>(km.gamma[l]), static_cast<Eigen::Index>(j));
  return images;
}

}  // namespace

extern "C" {

const char* bk_last_error(void) { return t_last_error.c_str(); }

const char* bk_status_name(int status) {
  switch (status) {
    case BK_OK: return "ok";
    case BK_DOMAIN_ERROR: return "domain_error";
    case BK_SHAPE_ERROR: return "shape_error";
    case BK_OUT_OF_BOX: return "out_of_box";
    case BK_ESCAPE_ERROR: return "escape_error";
    case BK_ASSIGNMENT_ERROR: return "assignment_error";
    case BK_OUT_OF_HULL: return "out_of_hull";
    case BK_DEGENERATE_ERROR: return "degenerate_error";
    case BK_CONFIG_ERROR: return "config_error";
    case BK_CAPABILITY_ERROR: return "capability_error";
    case BK_IO_ERROR: return "io_error";
    case BK_RANK_ERROR: return "rank_error";
    default: return "unknown_error";
  }
}

int bk_system_builtin(const char* name, bk_system** out) {
  return guarded([&] {
    check_arg(name, "system name");
    check_arg(out, "out pointer");
    auto s = std::make_unique<bk_system>();
    s->spec = builtin_system(name);
    s->map = flow_map(s->spec);
    *out = s.release();
  });
}

int bk_system_from_config(const char* path, bk_system** out) {
  return guarded([&] {
    check_arg(path, "config path");
    check_arg(out, "out pointer");
    auto s = std::make_unique<bk_system>();
    s->spec = system_from_config(path);
    s->map = flow_map(s->spec);
    *out = s.release();
  });
}

int bk_system_dim(const bk_system* s) { return s ? s->map.m : 0; }

int bk_system_label(const bk_system* s, char* buf, size_t len) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(buf, "buffer");
    require(len >= 1, Status::ConfigError, "zero-length buffer");
    const size_t n = std::min(len - 1, s->map.label.size());
    std::memcpy(buf, s->map.label.data(), n);
    buf[n] = '\0';
  });
}

int bk_system_eval(const bk_system* s, const double* x, double* y) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(y, "output");
    copy_out(s->map.eval(to_vec(x, s->map.m, "point")), y);
  });
}

int bk_system_to_unit(const bk_system* s, const double* native, double* unit) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(unit, "output");
    copy_out(s->spec.native_box.to_unit(to_vec(native, s->map.m, "point")), unit);
  });
}

int bk_system_from_unit(const bk_system* s, const double* unit, double* native) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(native, "output");
    copy_out(s->spec.native_box.from_unit(to_vec(unit, s->map.m, "point")), native);
  });
}

void bk_system_free(bk_system* s) { delete s; }

int bk_noisy_one_step_error(const bk_system* s, const int* degree, size_t m,
                            const double* x0, double sigma, uint64_t seed,
                            double* err_out) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(err_out, "output");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == s->map.m, Status::ShapeError, "degree dimension mismatch");
    const LatticeGrid grid(deg);
    const DataSet data = generate_lattice_dataset(s->map, deg);
    const NoiseResult noisy = add_noise(data.y, sigma, seed, s->map.box_margin);
    const Vec x = to_vec(x0, s->map.m, "x0");
    const Vec pred = predict_one_step_from_images(noisy.values, grid, x);
    const Vec truth = s->map.eval(x);
    double e2 = 0.0;
    for (int l = 0; l < s->map.m; ++l) e2 += (pred[l] - truth[l]) * (pred[l] - truth[l]);
    *err_out = std::sqrt(e2);
  });
}

int bk_observable_parse(const char* expr, int m, bk_observable** out) {
  return guarded([&] {
    check_arg(expr, "expression");
    check_arg(out, "out pointer");
    auto f = std::make_unique<bk_observable>();
    f->f = parse_observable(expr, m);
    *out = f.release();
  });
}

int bk_observable_eval(const bk_observable* f, const double* x, double* out) {
  return guarded([&] {
    check_arg(f, "observable");
    check_arg(out, "output");
    *out = f->f.eval(to_vec(x, f->f.m, "point"));
  });
}

void bk_observable_free(bk_observable* f) { delete f; }

int bk_koopman_build(const bk_system* s, const int* degree, size_t m, bk_koopman** out) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(out, "out pointer");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == s->map.m, Status::ShapeError, "degree dimension mismatch");
    auto k = std::make_unique<bk_koopman>();
    k->km = build_koopman_matrices(s->map, deg);
    *out = k.release();
  });
}

int bk_koopman_dim(const bk_koopman* k) { return k ? k->km.degree.m() : 0; }

int bk_koopman_save_csv(const bk_koopman* k, const char* path, int basis) {
  return guarded([&] {
    check_arg(k, "matrices");
    check_arg(path, "path");
    require(basis == 0 || basis == 1, Status::ConfigError, "basis must be 0 or 1");
    save_matrix_csv(path, basis == 0 ? k->km.K_bernstein : k->km.K_monomial, k->km.degree,
                    basis == 0 ? "bernstein" : "monomial");
  });
}

int bk_koopman_predict(const bk_koopman* k, const double* x0, int steps, int relift,
                       double* traj) {
  return guarded([&] {
    check_arg(k, "matrices");
    check_arg(traj, "trajectory output");
    const int m = k->km.degree.m();
    const Vec x = to_vec(x0, m, "x0");
    const auto states =
        relift ? predict_trajectory_relift(k->km, x, steps) : predict_trajectory(k->km, x, steps);
    for (size_t i = 0; i < states.size(); ++i) copy_out(states[i], traj + i * m);
  });
}

int bk_koopman_apply(const bk_koopman* k, const bk_observable* f, const double* x, double* out) {
  return guarded([&] {
    check_arg(k, "matrices");
    check_arg(f, "observable");
    check_arg(out, "output");
    const int m = k->km.degree.m();
    require(f->f.m == m, Status::ShapeError, "observable dimension mismatch");
    const auto images = node_images(k->km);
    Vec coeffs(images.size());
    for (size_t j = 0; j < images.size(); ++j) coeffs[j] = f->f.eval(images[j]);
    const LatticeGrid grid(k->km.degree);
    *out = eval_bernstein_operator(coeffs, grid, to_vec(x, m, "point"));
  });
}

void bk_koopman_free(bk_koopman* k) { delete k; }

int bk_dataset_generate_lattice(const bk_system* s, const int* degree, size_t m,
                                bk_dataset** out) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(out, "out pointer");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == s->map.m, Status::ShapeError, "degree dimension mismatch");
    auto d = std::make_unique<bk_dataset>();
    d->data = generate_lattice_dataset(s->map, deg);
    *out = d.release();
  });
}

int bk_dataset_generate_jittered(const bk_system* s, const int* degree, size_t m, double jitter,
                                 uint64_t seed, bk_dataset** out) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(out, "out pointer");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == s->map.m, Status::ShapeError, "degree dimension mismatch");
    auto d = std::make_unique<bk_dataset>();
    d->data = generate_jittered_dataset(s->map, deg, jitter, seed);
    *out = d.release();
  });
}

int bk_dataset_load_csv(const char* path, bk_dataset** out) {
  return guarded([&] {
    check_arg(path, "path");
    check_arg(out, "out pointer");
    auto d = std::make_unique<bk_dataset>();
    d->data = load_dataset_csv(path);
    *out = d.release();
  });
}

int bk_dataset_save_csv(const bk_dataset* d, const char* path) {
  return guarded([&] {
    check_arg(d, "dataset");
    check_arg(path, "path");
    save_dataset_csv(path, d->data);
  });
}

int bk_dataset_dim(const bk_dataset* d) { return d ? d->data.m : 0; }

int bk_dataset_size(const bk_dataset* d, size_t* n_out) {
  return guarded([&] {
    check_arg(d, "dataset");
    check_arg(n_out, "output");
    *n_out = d->data.size();
  });
}

int bk_dataset_get(const bk_dataset* d, size_t idx, double* x, double* y) {
  return guarded([&] {
    check_arg(d, "dataset");
    check_arg(x, "x output");
    check_arg(y, "y output");
    require(idx < d->data.size(), Status::DomainError, "pair index out of range");
    copy_out(d->data.x[idx], x);
    copy_out(d->data.y[idx], y);
  });
}

int bk_dataset_add_noise(bk_dataset* d, double sigma, uint64_t seed, double* sup_out) {
  return guarded([&] {
    check_arg(d, "dataset");
    NoiseResult r = add_noise(d->data.y, sigma, seed);
    d->data.y = std::move(r.values);
    if (sup_out) *sup_out = r.sup_norm;
  });
}

void bk_dataset_free(bk_dataset* d) { delete d; }

int bk_lattice_build(const bk_dataset* d, const int* degree, size_t m, bk_lattice** out) {
  return guarded([&] {
    check_arg(d, "dataset");
    check_arg(out, "out pointer");
    const DegreeVector deg = to_degree(degree, m);
    const auto perm = build_assignment(d->data, deg);
    auto S = std::make_unique<bk_lattice>();
    S->map = build_lattice_map(d->data, deg, perm);
    *out = S.release();
  });
}

int bk_lattice_build_perm(const bk_dataset* d, const int* degree, size_t m, const int* perm,
                          bk_lattice** out) {
  return guarded([&] {
    check_arg(d, "dataset");
    check_arg(perm, "permutation");
    check_arg(out, "out pointer");
    const DegreeVector deg = to_degree(degree, m);
    std::vector<std::size_t> p(static_cast<size_t>(deg.N()));
    for (size_t j = 0; j < p.size(); ++j) {
      require(perm[j] >= 0 && static_cast<size_t>(perm[j]) < d->data.size(), Status::ConfigError,
              "permutation entry out of range");
      p[j] = static_cast<std::size_t>(perm[j]);
    }
    verify_assignment(d->data, deg, p);
    auto S = std::make_unique<bk_lattice>();
    S->map = build_lattice_map(d->data, deg, p);
    *out = S.release();
  });
}

int bk_permutation_load_csv(const char* path, size_t n, int* perm) {
  return guarded([&] {
    check_arg(path, "path");
    check_arg(perm, "output");
    const auto p = load_permutation_csv(path, n);
    for (size_t j = 0; j < n; ++j) perm[j] = static_cast<int>(p[j]);
  });
}

int bk_lattice_kind(const bk_lattice* S) {
  return S ? static_cast<int>(S->map.kind) : -1;
}

int bk_lattice_eval(const bk_lattice* S, const double* x, double* y) {
  return guarded([&] {
    check_arg(S, "lattice map");
    check_arg(y, "output");
    copy_out(eval_S(S->map, to_vec(x, S->map.m, "point")), y);
  });
}

int bk_lattice_eval_inverse(const bk_lattice* S, const double* y, double* x) {
  return guarded([&] {
    check_arg(S, "lattice map");
    check_arg(x, "output");
    copy_out(eval_S_inverse(S->map, to_vec(y, S->map.m, "point")), x);
  });
}

int bk_lattice_lipschitz(const bk_lattice* S, double* full, double* partial) {
  return guarded([&] {
    check_arg(S, "lattice map");
    const LipschitzData lip = lipschitz_of_S(S->map);
    if (full) *full = lip.full;
    if (partial) std::copy(lip.partial.begin(), lip.partial.end(), partial);
  });
}

void bk_lattice_free(bk_lattice* S) { delete S; }

int bk_data_koopman_build(const bk_dataset* d, const int* degree, size_t m, const bk_lattice* S,
                          bk_koopman** out) {
  return guarded([&] {
    check_arg(d, "dataset");
    check_arg(S, "lattice map");
    check_arg(out, "out pointer");
    const DegreeVector deg = to_degree(degree, m);
    auto k = std::make_unique<bk_koopman>();
    k->km = build_data_koopman(d->data, deg, S->map);
    *out = k.release();
  });
}

int bk_data_predict(const bk_koopman* k, const bk_lattice* S, const double* x0, int steps,
                    int relift, double* traj) {
  return guarded([&] {
    check_arg(k, "matrices");
    check_arg(S, "lattice map");
    check_arg(traj, "trajectory output");
    const int m = k->km.degree.m();
    const auto states =
        predict_data_driven(k->km, S->map, to_vec(x0, m, "x0"), steps, relift != 0);
    for (size_t i = 0; i < states.size(); ++i) copy_out(states[i], traj + i * m);
  });
}

int bk_edmd_build(const bk_dataset* d, const int* degree, size_t m, double truncation_tol,
                  bk_edmd** out) {
  return guarded([&] {
    check_arg(d, "dataset");
    check_arg(out, "out pointer");
    const DegreeVector deg = to_degree(degree, m);
    auto e = std::make_unique<bk_edmd>();
    e->em = build_edmd(d->data, deg, truncation_tol > 0.0 ? truncation_tol : 1e-10);
    *out = e.release();
  });
}

int bk_edmd_rank(const bk_edmd* e) { return e ? e->em.rank_used : 0; }

int bk_edmd_predict(const bk_edmd* e, const double* x0, int steps, double* traj) {
  return guarded([&] {
    check_arg(e, "matrices");
    check_arg(traj, "trajectory output");
    const int m = e->em.degree.m();
    const auto states = predict_edmd(e->em, to_vec(x0, m, "x0"), steps);
    for (size_t i = 0; i < states.size(); ++i) copy_out(states[i], traj + i * m);
  });
}

void bk_edmd_free(bk_edmd* e) { delete e; }

int bk_bounds_create(const bk_system* s, const bk_observable* f, int resolution, bk_bounds** out) {
  return guarded([&] {
    check_arg(s, "system");
    check_arg(f, "observable");
    check_arg(out, "out pointer");
    require(f->f.m == s->map.m, Status::ShapeError, "observable dimension mismatch");
    auto b = std::make_unique<bk_bounds>();
    b->map = s->map;
    b->f = f->f;
    b->ctx = make_bound_context(s->map, f->f, resolution);
    *out = b.release();
  });
}

int bk_bound_single(bk_bounds* ctx, const char* tag, const int* degree, size_t m,
                    bk_bound_result* out, char* constants_buf, size_t constants_len) {
  return guarded([&] {
    check_arg(ctx, "bound context");
    check_arg(tag, "tag");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == ctx->ctx.m, Status::ShapeError, "degree dimension mismatch");
    const std::string t = tag;
    BoundReport r;
    if (t == "T1") {
      require(ctx->ctx.m == 1, Status::ShapeError, "T1 needs a one-dimensional system");
      r = bound_univariate_continuous(ctx->ctx.omega_f_image, ctx->ctx.lip.full, deg.degrees[0]);
    } else if (t == "T2") {
      require(ctx->ctx.m == 1, Status::ShapeError, "T2 needs a one-dimensional system");
      require(ctx->ctx.has_gradient, Status::CapabilityError, "T2 needs an observable gradient");
      r = bound_univariate_c1(ctx->ctx.omega_gradf_image, ctx->ctx.lip.full,
                              ctx->ctx.lip.derivative_full, ctx->ctx.sup_grad_image,
                              deg.degrees[0]);
    } else if (t == "T3") {
      r = bound_multivariate_full(ctx->ctx.omega_f_image, ctx->ctx.lip.full, deg);
    } else if (t == "T4") {
      r = bound_multivariate_partial(ctx->ctx.omega_f_image, ctx->ctx.lip.partial, deg);
    } else if (t == "T5") {
      require(ctx->ctx.has_gradient, Status::CapabilityError, "T5 needs an observable gradient");
      r = bound_multivariate_c1(ctx->ctx.omega_gradf_image, ctx->ctx.lip.partial,
                                ctx->ctx.lip.derivative_partial, ctx->ctx.sup_grad_image, deg);
    } else {
      throw Error(Status::ConfigError, "unknown bound tag " + t);
    }
    fill_result(r, out, constants_buf, constants_len);
  });
}

int bk_bound_iterated(bk_bounds* ctx, const char* tag, const bk_koopman* k_matrices, int k,
                      bk_bound_result* out, char* constants_buf, size_t constants_len) {
  return guarded([&] {
    check_arg(ctx, "bound context");
    check_arg(tag, "tag");
    check_arg(k_matrices, "matrices");
    const std::string t = tag;
    IterVariant variant;
    if (t == "T6a")
      variant = IterVariant::Full;
    else if (t == "T6b")
      variant = IterVariant::Partial;
    else if (t == "T6c")
      variant = IterVariant::C1;
    else
      throw Error(Status::ConfigError, "unknown iterated bound tag " + t);
    const BoundReport r = bound_iterated(ctx->ctx, k_matrices->km, k, variant);
    fill_result(r, out, constants_buf, constants_len);
  });
}

int bk_bound_alternative(bk_bounds* ctx, const int* degree, size_t m, int k, bk_bound_result* out,
                         char* constants_buf, size_t constants_len) {
  return guarded([&] {
    check_arg(ctx, "bound context");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == ctx->ctx.m, Status::ShapeError, "degree dimension mismatch");
    const BoundReport r = bound_iterated_alternative(ctx->ctx.omega_f_image, ctx->ctx.lip.full,
                                                     deg, k);
    fill_result(r, out, constants_buf, constants_len);
  });
}

int bk_bound_noise(bk_bounds* ctx, double noise_sup, bk_bound_result* out, char* constants_buf,
                   size_t constants_len) {
  return guarded([&] {
    check_arg(ctx, "bound context");
    const BoundReport r = bound_measurement_noise(ctx->ctx.omega_f_domain, noise_sup);
    fill_result(r, out, constants_buf, constants_len);
  });
}

int bk_bound_data(bk_bounds* ctx, const bk_lattice* S, const int* degree, size_t m,
                  bk_bound_result* full_out, bk_bound_result* partial_out, char* constants_buf,
                  size_t constants_len) {
  return guarded([&] {
    check_arg(ctx, "bound context");
    check_arg(S, "lattice map");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == ctx->ctx.m, Status::ShapeError, "degree dimension mismatch");
    const auto [full, part] = data_driven_bounds(ctx->ctx.omega_f_image, ctx->ctx.lip.full,
                                                 lipschitz_of_S(S->map), deg);
    fill_result(full, full_out, constants_buf, constants_len);
    check_arg(partial_out, "result pointer");
    partial_out->value = part.value;
    partial_out->clamped = part.clamped ? 1 : 0;
  });
}

int bk_bounds_measured(bk_bounds* ctx, const int* degree, size_t m, int k, double* err_out) {
  return guarded([&] {
    check_arg(ctx, "bound context");
    check_arg(err_out, "output");
    const DegreeVector deg = to_degree(degree, m);
    require(deg.m() == ctx->ctx.m, Status::ShapeError, "degree dimension mismatch");
    *err_out = k <= 1 ? measured_sup_error(ctx->map, ctx->f, deg, ctx->ctx.resolution)
                      : measured_sup_error_iterated(ctx->map, ctx->f, deg, k, ctx->ctx.resolution);
  });
}

void bk_bounds_free(bk_bounds* ctx) { delete ctx; }

}  // extern "C"
