#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "bernkoop/bernkoop.h"

namespace {

double dist2(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

void write_file(const char* path, const char* text) {
  std::FILE* fp = std::fopen(path, "w");
  REQUIRE(fp != nullptr);
  std::fputs(text, fp);
  std::fclose(fp);
}

struct SystemHandle {
  bk_system* s = nullptr;
  explicit SystemHandle(const char* name) { REQUIRE(bk_system_builtin(name, &s) == BK_OK); }
  ~SystemHandle() { bk_system_free(s); }
};

}  // namespace

TEST_CASE("status names are stable strings") {
  CHECK(std::string(bk_status_name(BK_OK)) == "ok");
  CHECK(std::string(bk_status_name(BK_SHAPE_ERROR)) == "shape_error");
  CHECK(std::string(bk_status_name(BK_OUT_OF_HULL)) == "out_of_hull");
  CHECK(std::string(bk_status_name(BK_RANK_ERROR)) == "rank_error");
  CHECK(std::string(bk_status_name(99)) == "unknown_error");
  CHECK(std::string(bk_status_name(-5)) == "unknown_error");
}

TEST_CASE("failures set the thread-local message and successes clear it") {
  bk_system* s = nullptr;
  CHECK(bk_system_builtin("no_such_system", &s) == BK_CONFIG_ERROR);
  CHECK(std::strlen(bk_last_error()) > 0);
  REQUIRE(bk_system_builtin("van_der_pol", &s) == BK_OK);
  CHECK(std::strlen(bk_last_error()) == 0);
  bk_system_free(s);
}

TEST_CASE("null arguments and null handles are rejected without crashing") {
  CHECK(bk_system_builtin(nullptr, nullptr) == BK_CONFIG_ERROR);
  CHECK(bk_system_dim(nullptr) == 0);
  CHECK(bk_koopman_dim(nullptr) == 0);
  CHECK(bk_lattice_kind(nullptr) == -1);
  CHECK(bk_edmd_rank(nullptr) == 0);
  double y[2];
  CHECK(bk_system_eval(nullptr, y, y) == BK_CONFIG_ERROR);
  bk_system_free(nullptr);
  bk_observable_free(nullptr);
  bk_koopman_free(nullptr);
  bk_dataset_free(nullptr);
  bk_lattice_free(nullptr);
  bk_edmd_free(nullptr);
  bk_bounds_free(nullptr);
}

TEST_CASE("system handles expose dimension, label, and frame conversion") {
  SystemHandle vdp("van_der_pol");
  CHECK(bk_system_dim(vdp.s) == 2);
  char label[64];
  REQUIRE(bk_system_label(vdp.s, label, sizeof label) == BK_OK);
  CHECK(std::string(label) == "van_der_pol");
  char tiny[4];
  REQUIRE(bk_system_label(vdp.s, tiny, sizeof tiny) == BK_OK);
  CHECK(std::string(tiny) == "van");

  const double native[2] = {0.0, 0.0};
  double unit[2], back[2];
  REQUIRE(bk_system_to_unit(vdp.s, native, unit) == BK_OK);
  CHECK(unit[0] == doctest::Approx(0.5));
  CHECK(unit[1] == doctest::Approx(0.5));
  REQUIRE(bk_system_from_unit(vdp.s, unit, back) == BK_OK);
  CHECK(back[0] == doctest::Approx(0.0));
  CHECK(back[1] == doctest::Approx(0.0));
}

TEST_CASE("one-step prediction through the matrices lands near the true image") {
  SystemHandle vdp("van_der_pol");
  const int degree[2] = {10, 10};
  bk_koopman* k = nullptr;
  REQUIRE(bk_koopman_build(vdp.s, degree, 2, &k) == BK_OK);
  CHECK(bk_koopman_dim(k) == 2);

  const double x0[2] = {0.4, 0.0};
  double truth[2], traj[2];
  REQUIRE(bk_system_eval(vdp.s, x0, truth) == BK_OK);
  REQUIRE(bk_koopman_predict(k, x0, 1, 0, traj) == BK_OK);
  const double err = dist2(traj, truth);
  CHECK(err > 0.0145);
  CHECK(err < 0.058);

  double traj_relift[2];
  REQUIRE(bk_koopman_predict(k, x0, 1, 1, traj_relift) == BK_OK);
  CHECK(std::abs(traj_relift[0] - traj[0]) < 1e-12);
  CHECK(std::abs(traj_relift[1] - traj[1]) < 1e-12);

  CHECK(bk_koopman_predict(k, x0, 0, 0, traj) == BK_DOMAIN_ERROR);
  bk_koopman_free(k);
}

TEST_CASE("applying a coordinate observable matches the predicted coordinate") {
  SystemHandle vdp("van_der_pol");
  const int degree[2] = {8, 8};
  bk_koopman* k = nullptr;
  REQUIRE(bk_koopman_build(vdp.s, degree, 2, &k) == BK_OK);
  bk_observable* f = nullptr;
  REQUIRE(bk_observable_parse("x1", 2, &f) == BK_OK);

  const double x[2] = {0.3, 0.6};
  double traj[2], applied;
  REQUIRE(bk_koopman_predict(k, x, 1, 0, traj) == BK_OK);
  REQUIRE(bk_koopman_apply(k, f, x, &applied) == BK_OK);
  CHECK(std::abs(applied - traj[0]) < 1e-8);

  bk_observable_free(f);
  bk_koopman_free(k);
}

TEST_CASE("matrix export writes a tagged header") {
  SystemHandle log("scalar_logistic");
  const int degree[1] = {4};
  bk_koopman* k = nullptr;
  REQUIRE(bk_koopman_build(log.s, degree, 1, &k) == BK_OK);
  const char* path = "capi_tmp_matrix.csv";
  REQUIRE(bk_koopman_save_csv(k, path, 0) == BK_OK);
  CHECK(bk_koopman_save_csv(k, path, 2) == BK_CONFIG_ERROR);
  std::FILE* fp = std::fopen(path, "r");
  REQUIRE(fp != nullptr);
  char line[256];
  REQUIRE(std::fgets(line, sizeof line, fp) != nullptr);
  std::fclose(fp);
  std::remove(path);
  CHECK(line[0] == '#');
  CHECK(std::strstr(line, "bernstein") != nullptr);
  bk_koopman_free(k);
}

TEST_CASE("datasets generate, iterate, save, load, and perturb deterministically") {
  SystemHandle vdp("van_der_pol");
  const int degree[2] = {6, 6};
  bk_dataset* d = nullptr;
  REQUIRE(bk_dataset_generate_lattice(vdp.s, degree, 2, &d) == BK_OK);
  CHECK(bk_dataset_dim(d) == 2);
  size_t n = 0;
  REQUIRE(bk_dataset_size(d, &n) == BK_OK);
  CHECK(n == 49);

  double x[2], y[2], truth[2];
  REQUIRE(bk_dataset_get(d, 0, x, y) == BK_OK);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.0);
  REQUIRE(bk_system_eval(vdp.s, x, truth) == BK_OK);
  CHECK(y[0] == truth[0]);
  CHECK(y[1] == truth[1]);
  CHECK(bk_dataset_get(d, n, x, y) == BK_DOMAIN_ERROR);

  const char* path = "capi_tmp_dataset.csv";
  REQUIRE(bk_dataset_save_csv(d, path) == BK_OK);
  bk_dataset* loaded = nullptr;
  REQUIRE(bk_dataset_load_csv(path, &loaded) == BK_OK);
  std::remove(path);
  double lx[2], ly[2];
  REQUIRE(bk_dataset_get(loaded, 17, lx, ly) == BK_OK);
  REQUIRE(bk_dataset_get(d, 17, x, y) == BK_OK);
  CHECK(lx[0] == x[0]);
  CHECK(ly[1] == y[1]);
  bk_dataset_free(loaded);

  double sup1 = 0.0, sup2 = 0.0;
  REQUIRE(bk_dataset_add_noise(d, 0.01, 7, &sup1) == BK_OK);
  CHECK(sup1 > 0.0);
  bk_dataset* d2 = nullptr;
  REQUIRE(bk_dataset_generate_lattice(vdp.s, degree, 2, &d2) == BK_OK);
  REQUIRE(bk_dataset_add_noise(d2, 0.01, 7, &sup2) == BK_OK);
  CHECK(sup1 == sup2);
  REQUIRE(bk_dataset_get(d, 3, x, y) == BK_OK);
  REQUIRE(bk_dataset_get(d2, 3, lx, ly) == BK_OK);
  CHECK(y[0] == ly[0]);
  CHECK(y[1] == ly[1]);
  bk_dataset_free(d2);
  bk_dataset_free(d);
}

TEST_CASE("lattice maps build from data and invert within the image") {
  SystemHandle vdp("van_der_pol");
  const int degree[2] = {4, 4};
  bk_dataset* lattice = nullptr;
  REQUIRE(bk_dataset_generate_lattice(vdp.s, degree, 2, &lattice) == BK_OK);
  bk_lattice* S_id = nullptr;
  REQUIRE(bk_lattice_build(lattice, degree, 2, &S_id) == BK_OK);
  CHECK(bk_lattice_kind(S_id) == 0);
  bk_lattice_free(S_id);
  bk_dataset_free(lattice);

  bk_dataset* jittered = nullptr;
  REQUIRE(bk_dataset_generate_jittered(vdp.s, degree, 2, 0.3, 2, &jittered) == BK_OK);
  bk_lattice* S = nullptr;
  REQUIRE(bk_lattice_build(jittered, degree, 2, &S) == BK_OK);
  CHECK(bk_lattice_kind(S) == 2);

  const double x[2] = {0.42, 0.77};
  double y[2], back[2];
  REQUIRE(bk_lattice_eval(S, x, y) == BK_OK);
  REQUIRE(bk_lattice_eval_inverse(S, y, back) == BK_OK);
  CHECK(std::abs(back[0] - x[0]) < 1e-9);
  CHECK(std::abs(back[1] - x[1]) < 1e-9);

  const double outside[2] = {1.5, 0.5};
  CHECK(bk_lattice_eval_inverse(S, outside, back) == BK_OUT_OF_HULL);

  double full = 0.0, partial[2] = {0.0, 0.0};
  REQUIRE(bk_lattice_lipschitz(S, &full, partial) == BK_OK);
  CHECK(full >= 1.0);
  CHECK(partial[0] > 0.0);
  CHECK(partial[1] > 0.0);
  CHECK(full >= partial[0] - 1e-12);
  CHECK(full >= partial[1] - 1e-12);

  bk_lattice_free(S);
  bk_dataset_free(jittered);
}

TEST_CASE("explicit permutations are validated and loadable from CSV") {
  SystemHandle log("scalar_logistic");
  const int degree[1] = {2};
  bk_dataset* d = nullptr;
  REQUIRE(bk_dataset_generate_lattice(log.s, degree, 1, &d) == BK_OK);

  const int good[3] = {0, 1, 2};
  bk_lattice* S = nullptr;
  REQUIRE(bk_lattice_build_perm(d, degree, 1, good, &S) == BK_OK);
  bk_lattice_free(S);

  const int crossing[3] = {0, 2, 1};
  CHECK(bk_lattice_build_perm(d, degree, 1, crossing, &S) == BK_ASSIGNMENT_ERROR);
  const int out_of_range[3] = {0, 1, 5};
  CHECK(bk_lattice_build_perm(d, degree, 1, out_of_range, &S) == BK_CONFIG_ERROR);

  const char* path = "capi_tmp_perm.csv";
  write_file(path, "2\n1\n3\n");
  int perm[3];
  REQUIRE(bk_permutation_load_csv(path, 3, perm) == BK_OK);
  std::remove(path);
  CHECK(perm[0] == 1);
  CHECK(perm[1] == 0);
  CHECK(perm[2] == 2);

  bk_dataset_free(d);
}

TEST_CASE("the data-driven operator predicts through the lattice geometry") {
  SystemHandle log("scalar_logistic");
  const int degree[1] = {8};

  // On exact lattice data the pipeline reduces to the model-based one.
  bk_dataset* lattice = nullptr;
  REQUIRE(bk_dataset_generate_lattice(log.s, degree, 1, &lattice) == BK_OK);
  bk_lattice* S_id = nullptr;
  REQUIRE(bk_lattice_build(lattice, degree, 1, &S_id) == BK_OK);
  bk_koopman* from_data = nullptr;
  REQUIRE(bk_data_koopman_build(lattice, degree, 1, S_id, &from_data) == BK_OK);
  bk_koopman* from_model = nullptr;
  REQUIRE(bk_koopman_build(log.s, degree, 1, &from_model) == BK_OK);
  const double x0[1] = {0.3};
  double a[3], b[3];
  REQUIRE(bk_data_predict(from_data, S_id, x0, 3, 0, a) == BK_OK);
  REQUIRE(bk_koopman_predict(from_model, x0, 3, 0, b) == BK_OK);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-14);
  bk_koopman_free(from_model);
  bk_koopman_free(from_data);
  bk_lattice_free(S_id);
  bk_dataset_free(lattice);

  // Scattered data goes through a genuine piecewise-linear change of frame.
  bk_dataset* jittered = nullptr;
  REQUIRE(bk_dataset_generate_jittered(log.s, degree, 1, 0.3, 3, &jittered) == BK_OK);
  bk_lattice* S = nullptr;
  REQUIRE(bk_lattice_build(jittered, degree, 1, &S) == BK_OK);
  bk_koopman* k = nullptr;
  REQUIRE(bk_data_koopman_build(jittered, degree, 1, S, &k) == BK_OK);
  for (int relift = 0; relift <= 1; ++relift) {
    double traj[2];
    REQUIRE(bk_data_predict(k, S, x0, 2, relift, traj) == BK_OK);
    double state[1] = {x0[0]}, image[1];
    for (int i = 0; i < 2; ++i) {
      REQUIRE(bk_system_eval(log.s, state, image) == BK_OK);
      CHECK(std::abs(traj[i] - image[0]) < 0.1);
      state[0] = image[0];
    }
  }
  bk_koopman_free(k);
  bk_lattice_free(S);
  bk_dataset_free(jittered);
}

TEST_CASE("the least-squares baseline interpolates full-rank snapshots") {
  SystemHandle log("scalar_logistic");
  const int degree[1] = {6};
  bk_dataset* d = nullptr;
  REQUIRE(bk_dataset_generate_lattice(log.s, degree, 1, &d) == BK_OK);
  bk_edmd* e = nullptr;
  REQUIRE(bk_edmd_build(d, degree, 1, 0.0, &e) == BK_OK);
  CHECK(bk_edmd_rank(e) == 7);

  const double x0[1] = {0.5};
  double traj[1], truth[1];
  REQUIRE(bk_edmd_predict(e, x0, 1, traj) == BK_OK);
  REQUIRE(bk_system_eval(log.s, x0, truth) == BK_OK);
  CHECK(std::abs(traj[0] - truth[0]) < 1e-3);
  bk_edmd_free(e);

  CHECK(bk_edmd_build(d, degree, 1, 1.0, &e) == BK_DOMAIN_ERROR);
  bk_dataset_free(d);
}

TEST_CASE("bound values order correctly and report their ingredients") {
  SystemHandle log("scalar_logistic");
  bk_observable* f = nullptr;
  REQUIRE(bk_observable_parse("x1^2 / 2", 1, &f) == BK_OK);
  double fx = 0.0;
  const double probe[1] = {0.6};
  REQUIRE(bk_observable_eval(f, probe, &fx) == BK_OK);
  CHECK(fx == doctest::Approx(0.18));

  bk_bounds* ctx = nullptr;
  REQUIRE(bk_bounds_create(log.s, f, 0, &ctx) == BK_OK);

  const int n100[1] = {100};
  bk_bound_result t1, t2, t3;
  char constants[512];
  REQUIRE(bk_bound_single(ctx, "T1", n100, 1, &t1, constants, sizeof constants) == BK_OK);
  CHECK(t1.value > 0.010);
  CHECK(t1.value < 0.013);
  CHECK(std::strstr(constants, "L=") != nullptr);
  REQUIRE(bk_bound_single(ctx, "T2", n100, 1, &t2, nullptr, 0) == BK_OK);
  CHECK(t2.value < t1.value);
  REQUIRE(bk_bound_single(ctx, "T3", n100, 1, &t3, nullptr, 0) == BK_OK);
  CHECK(t3.value == t1.value);
  CHECK(bk_bound_single(ctx, "T9", n100, 1, &t1, nullptr, 0) == BK_CONFIG_ERROR);

  double measured = 0.0;
  REQUIRE(bk_bounds_measured(ctx, n100, 1, 1, &measured) == BK_OK);
  CHECK(measured > 0.0);
  CHECK(measured <= t2.value);

  const int n12[1] = {12};
  bk_koopman* k = nullptr;
  REQUIRE(bk_koopman_build(log.s, n12, 1, &k) == BK_OK);
  bk_bound_result t6, alt;
  REQUIRE(bk_bound_iterated(ctx, "T6a", k, 2, &t6, nullptr, 0) == BK_OK);
  CHECK(t6.value > 0.0);
  REQUIRE(bk_bound_alternative(ctx, n12, 1, 2, &alt, nullptr, 0) == BK_OK);
  CHECK(alt.value >= t6.value - 1e-12);
  CHECK(bk_bound_iterated(ctx, "T7", k, 2, &t6, nullptr, 0) == BK_CONFIG_ERROR);
  bk_koopman_free(k);

  bk_bound_result noise;
  REQUIRE(bk_bound_noise(ctx, 0.0, &noise, nullptr, 0) == BK_OK);
  CHECK(noise.value == 0.0);
  REQUIRE(bk_bound_noise(ctx, 0.01, &noise, nullptr, 0) == BK_OK);
  CHECK(noise.value > 0.0);

  const int n8[1] = {8};
  bk_dataset* jittered = nullptr;
  REQUIRE(bk_dataset_generate_jittered(log.s, n8, 1, 0.3, 3, &jittered) == BK_OK);
  bk_lattice* S = nullptr;
  REQUIRE(bk_lattice_build(jittered, n8, 1, &S) == BK_OK);
  bk_bound_result dfull, dpart;
  REQUIRE(bk_bound_data(ctx, S, n8, 1, &dfull, &dpart, nullptr, 0) == BK_OK);
  CHECK(dfull.value > 0.0);
  CHECK(dfull.value == doctest::Approx(dpart.value).epsilon(1e-12));
  bk_lattice_free(S);
  bk_dataset_free(jittered);

  bk_bounds_free(ctx);
  bk_observable_free(f);
}

TEST_CASE("bad dimensions and tags surface as shape or config errors") {
  SystemHandle vdp("van_der_pol");
  const int d1[1] = {5};
  bk_koopman* k = nullptr;
  CHECK(bk_koopman_build(vdp.s, d1, 1, &k) == BK_SHAPE_ERROR);

  bk_observable* f = nullptr;
  CHECK(bk_observable_parse("x1 + x3", 2, &f) == BK_CONFIG_ERROR);
  CHECK(bk_observable_parse("x1 + ", 2, &f) == BK_CONFIG_ERROR);
  REQUIRE(bk_observable_parse("x1 + x2", 2, &f) == BK_OK);

  bk_bounds* ctx = nullptr;
  REQUIRE(bk_bounds_create(vdp.s, f, 60, &ctx) == BK_OK);
  bk_bound_result r;
  const int d2[2] = {6, 6};
  CHECK(bk_bound_single(ctx, "T1", d2, 2, &r, nullptr, 0) == BK_SHAPE_ERROR);
  REQUIRE(bk_bound_single(ctx, "T4", d2, 2, &r, nullptr, 0) == BK_OK);
  CHECK(r.value > 0.0);
  bk_bounds_free(ctx);
  bk_observable_free(f);
}

TEST_CASE("config files define systems and report their own errors") {
  const char* path = "capi_tmp_system.json";
  write_file(path,
             "{\n"
             "  \"label\": \"config_logistic\",\n"
             "  \"dimension\": 1,\n"
             "  \"vector_field\": [\"0 - x1 * (1 + x1)\"],\n"
             "  \"horizon\": 1.0,\n"
             "  \"native_box\": {\"lo\": [0.0], \"hi\": [1.0]}\n"
             "}\n");
  bk_system* s = nullptr;
  REQUIRE(bk_system_from_config(path, &s) == BK_OK);
  std::remove(path);
  CHECK(bk_system_dim(s) == 1);
  char label[64];
  REQUIRE(bk_system_label(s, label, sizeof label) == BK_OK);
  CHECK(std::string(label) == "config_logistic");

  SystemHandle log("scalar_logistic");
  const double x[1] = {0.4};
  double y_cfg[1], y_ref[1];
  REQUIRE(bk_system_eval(s, x, y_cfg) == BK_OK);
  REQUIRE(bk_system_eval(log.s, x, y_ref) == BK_OK);
  CHECK(std::abs(y_cfg[0] - y_ref[0]) < 1e-8);
  bk_system_free(s);

  CHECK(bk_system_from_config("capi_tmp_missing.json", &s) == BK_IO_ERROR);
  write_file(path, "{ not json");
  CHECK(bk_system_from_config(path, &s) == BK_CONFIG_ERROR);
  std::remove(path);
}

TEST_CASE("the one-call noisy error helper is deterministic and calibrated") {
  SystemHandle vdp("van_der_pol");
  const int degree[2] = {10, 10};
  const double x0[2] = {0.4, 0.0};

  double clean = 0.0;
  REQUIRE(bk_noisy_one_step_error(vdp.s, degree, 2, x0, 0.0, 1, &clean) == BK_OK);
  CHECK(clean > 0.02);
  CHECK(clean < 0.04);

  double e1 = 0.0, e2 = 0.0;
  REQUIRE(bk_noisy_one_step_error(vdp.s, degree, 2, x0, 0.001, 5, &e1) == BK_OK);
  REQUIRE(bk_noisy_one_step_error(vdp.s, degree, 2, x0, 0.001, 5, &e2) == BK_OK);
  CHECK(e1 == e2);
  CHECK(e1 > 0.01);
  CHECK(e1 < 0.06);

  CHECK(bk_noisy_one_step_error(vdp.s, degree, 2, x0, -0.1, 1, &e1) == BK_DOMAIN_ERROR);
}
