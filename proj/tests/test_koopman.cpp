#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "core/bernstein.h"
#include "core/koopman.h"

using namespace bernkoop;

namespace {

MapOnBox identity_map(int m) {
  return map_from_function("identity", m, [](const Vec& x) { return x; });
}

MapOnBox constant_map(int m, Vec c) {
  return map_from_function("constant", m, [c](const Vec&) { return c; });
}

double logistic_exact(double x) {
  const double e = std::exp(1.0);
  return x / (e + x * (e - 1.0));
}

Vec random_unit_point(Rng& rng, int m) {
  Vec x(m);
  for (double& c : x) c = rng.uniform();
  return x;
}

}  // namespace

TEST_CASE("sample matrix for the identity map at degree one") {
  const DegreeVector degree{{1}};
  const LatticeGrid grid(degree);
  const Mat U = build_sample_matrix(identity_map(1), grid);
  // Columns are X(0) = (1,0) and X(1) = (1,1).
  CHECK(U(0, 0) == doctest::Approx(1.0));
  CHECK(U(1, 0) == doctest::Approx(0.0));
  CHECK(U(0, 1) == doctest::Approx(1.0));
  CHECK(U(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("sample matrix columns for a constant map all equal the lifted image") {
  const DegreeVector degree{{2}};
  const LatticeGrid grid(degree);
  const Mat U = build_sample_matrix(constant_map(1, Vec{0.3}), grid);
  for (int j = 0; j < 3; ++j) {
    CHECK(U(0, j) == doctest::Approx(1.0));
    CHECK(U(1, j) == doctest::Approx(0.3));
    CHECK(U(2, j) == doctest::Approx(0.09));
  }
}

TEST_CASE("sample matrix for the squaring map lifts each node image") {
  const DegreeVector degree{{2}};
  const LatticeGrid grid(degree);
  const MapOnBox square = map_from_function("square", 1, [](const Vec& x) {
    return Vec{x[0] * x[0]};
  });
  const Mat U = build_sample_matrix(square, grid);
  const double images[3] = {0.0, 0.25, 1.0};
  for (int j = 0; j < 3; ++j) {
    CHECK(U(0, j) == doctest::Approx(1.0));
    CHECK(U(1, j) == doctest::Approx(images[j]));
    CHECK(U(2, j) == doctest::Approx(images[j] * images[j]));
  }
}

TEST_CASE("coordinate positions inside the lifted vector") {
  const DegreeVector d2{{10, 10}};
  CHECK(gamma_index(d2, 0) == 11);
  CHECK(gamma_index(d2, 1) == 1);
  const DegreeVector d1{{7}};
  CHECK(gamma_index(d1, 0) == 1);
  const DegreeVector d3{{2, 2, 2}};
  CHECK(gamma_index(d3, 0) == 9);
  CHECK(gamma_index(d3, 1) == 3);
  CHECK(gamma_index(d3, 2) == 1);

  const auto km = build_koopman_matrices(identity_map(2), DegreeVector{{3, 4}});
  CHECK(km.gamma.size() == 2);
  CHECK(km.gamma[0] == 5);
  CHECK(km.gamma[1] == 1);
}

TEST_CASE("coefficient-basis matrix has nonnegative columns summing to one") {
  const FlowSpec spec = builtin_system("scalar_logistic");
  const MapOnBox map = flow_map(spec);
  const auto km = build_koopman_matrices(map, DegreeVector{{8}});
  for (int j = 0; j < km.K_bernstein.cols(); ++j) {
    double sum = 0.0;
    for (int i = 0; i < km.K_bernstein.rows(); ++i) {
      CHECK(km.K_bernstein(i, j) >= -1e-12);
      sum += km.K_bernstein(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("matrix application agrees with direct operator evaluation") {
  Rng rng(201);
  const FlowSpec spec1 = builtin_system("scalar_logistic");
  const MapOnBox map1 = flow_map(spec1);
  const FlowSpec spec2 = builtin_system("van_der_pol");
  const MapOnBox map2 = flow_map(spec2);

  for (int which = 0; which < 2; ++which) {
    const MapOnBox& map = which == 0 ? map1 : map2;
    const DegreeVector degree = which == 0 ? DegreeVector{{6}} : DegreeVector{{4, 5}};
    const LatticeGrid grid(degree);
    const auto km = build_koopman_matrices(map, degree);
    for (int trial = 0; trial < 10; ++trial) {
      Vec a(degree.N());
      for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
      // Direct route: sample f(phi(node)) and evaluate the operator.
      Vec samples(grid.N());
      for (std::size_t j = 0; j < grid.N(); ++j) {
        const Vec y = map.eval(grid.point(j));
        const Vec Xy = monomial_vector(degree, y);
        double s = 0.0;
        for (std::size_t i = 0; i < Xy.size(); ++i) s += a[i] * Xy[i];
        samples[j] = s;
      }
      // Matrix route: push the coefficients through the monomial-basis matrix.
      Vec b(degree.N(), 0.0);
      for (std::size_t i = 0; i < degree.N(); ++i)
        for (std::size_t j = 0; j < degree.N(); ++j)
          b[j] += km.K_monomial(i, j) * a[i];
      for (int q = 0; q < 5; ++q) {
        const Vec x = random_unit_point(rng, degree.m());
        const double direct = eval_bernstein_operator(samples, grid, x);
        const Vec Xx = monomial_vector(degree, x);
        double viamat = 0.0;
        for (std::size_t i = 0; i < Xx.size(); ++i) viamat += b[i] * Xx[i];
        CHECK(std::abs(direct - viamat) < 1e-9);
      }
    }
  }
}

TEST_CASE("basis change conjugates the two matrix representations") {
  const FlowSpec spec = builtin_system("van_der_pol");
  const auto km = build_koopman_matrices(flow_map(spec), DegreeVector{{6, 5}});
  // Both products equal C * U * C entrywise.
  const Mat lhs = km.C * km.K_monomial;
  const Mat rhs = km.K_bernstein * km.C;
  const double scale = rhs.cwiseAbs().maxCoeff();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, scale));
}

TEST_CASE("linear predictor is exact for identity and constant maps") {
  Rng rng(202);
  const auto km_id = build_koopman_matrices(identity_map(2), DegreeVector{{5, 4}});
  const Vec c{0.35, 0.6};
  const auto km_const = build_koopman_matrices(constant_map(2, c), DegreeVector{{5, 4}});
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x0 = random_unit_point(rng, 2);
    const auto traj_id = predict_trajectory(km_id, x0, 4);
    REQUIRE(traj_id.size() == 4);
    for (const Vec& state : traj_id)
      for (int l = 0; l < 2; ++l) CHECK(std::abs(state[l] - x0[l]) < 1e-9);
    const auto traj_const = predict_trajectory(km_const, x0, 4);
    for (const Vec& state : traj_const)
      for (int l = 0; l < 2; ++l) CHECK(std::abs(state[l] - c[l]) < 1e-9);
  }
}

TEST_CASE("one-step prediction tracks the closed-form scalar flow") {
  const FlowSpec spec = builtin_system("scalar_logistic");
  const auto km = build_koopman_matrices(flow_map(spec), DegreeVector{{20}});
  const auto traj = predict_trajectory(km, Vec{0.5}, 1);
  CHECK(std::abs(traj[0][0] - logistic_exact(0.5)) < 0.025);
}

TEST_CASE("relifted predictor matches the linear one after a single step") {
  Rng rng(203);
  const FlowSpec spec = builtin_system("van_der_pol");
  const auto km = build_koopman_matrices(flow_map(spec), DegreeVector{{8, 8}});
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x0 = random_unit_point(rng, 2);
    const auto lin = predict_trajectory(km, x0, 1);
    const auto relift = predict_trajectory_relift(km, x0, 1);
    for (int l = 0; l < 2; ++l) CHECK(std::abs(lin[0][l] - relift[0][l]) < 1e-12);
  }
}

TEST_CASE("relifted predictor stays near the iterated closed-form flow") {
  const FlowSpec spec = builtin_system("scalar_logistic");
  const auto km = build_koopman_matrices(flow_map(spec), DegreeVector{{20}});
  const auto traj = predict_trajectory_relift(km, Vec{0.5}, 3);
  double truth = 0.5;
  for (int k = 0; k < 3; ++k) {
    truth = logistic_exact(truth);
    CHECK(std::abs(traj[k][0] - truth) < 0.03);
  }
}

TEST_CASE("planar oscillator one-step error sits at its published scale") {
  const FlowSpec spec = builtin_system("van_der_pol");
  const MapOnBox map = flow_map(spec);
  const auto km = build_koopman_matrices(map, DegreeVector{{10, 10}});
  const Vec x0{0.4, 0.0};
  const auto traj = predict_trajectory(km, x0, 1);
  const Vec truth = map.eval(x0);
  double err = 0.0;
  for (int l = 0; l < 2; ++l) err += (traj[0][l] - truth[l]) * (traj[0][l] - truth[l]);
  err = std::sqrt(err);
  CHECK(err > 0.0290 / 2.0);
  CHECK(err < 0.0290 * 2.0);
}

TEST_CASE("one-step error shrinks as the degree doubles") {
  const FlowSpec spec = builtin_system("scalar_logistic");
  const MapOnBox map = flow_map(spec);
  // Matrix route: stable while the basis conversion stays well conditioned.
  double prev = -1.0;
  for (int n : {5, 10, 20}) {
    const auto km = build_koopman_matrices(map, DegreeVector{{n}});
    double worst = 0.0;
    for (int i = 0; i <= 50; ++i) {
      const double x = i / 50.0;
      const auto traj = predict_trajectory(km, Vec{x}, 1);
      worst = std::max(worst, std::abs(traj[0][0] - logistic_exact(x)));
    }
    if (prev >= 0.0) CHECK(worst <= prev * 1.1);
    prev = worst;
  }
  // Image route: no conversion matrix, so the decay continues at high degree.
  prev = -1.0;
  for (int n : {10, 20, 40, 80}) {
    const DegreeVector degree{{n}};
    const LatticeGrid grid(degree);
    std::vector<Vec> images(grid.N());
    for (std::size_t j = 0; j < grid.N(); ++j) images[j] = map.eval(grid.point(j));
    double worst = 0.0;
    for (int i = 0; i <= 50; ++i) {
      const double x = i / 50.0;
      const Vec pred = predict_one_step_from_images(images, grid, Vec{x});
      worst = std::max(worst, std::abs(pred[0] - logistic_exact(x)));
    }
    if (prev >= 0.0) CHECK(worst <= prev * 1.1);
    prev = worst;
  }
}

TEST_CASE("matrix file round trip preserves entries, degree, and basis tag") {
  const FlowSpec spec = builtin_system("van_der_pol");
  const auto km = build_koopman_matrices(flow_map(spec), DegreeVector{{3, 4}});
  const std::string path = "test_koopman_roundtrip.csv";
  save_matrix_csv(path, km.K_bernstein, km.degree, "bernstein");
  DegreeVector degree_out;
  std::string tag_out;
  const Mat back = load_matrix_csv(path, &degree_out, &tag_out);
  std::remove(path.c_str());
  CHECK(tag_out == "bernstein");
  REQUIRE(degree_out.degrees == km.degree.degrees);
  REQUIRE(back.rows() == km.K_bernstein.rows());
  REQUIRE(back.cols() == km.K_bernstein.cols());
  CHECK((back - km.K_bernstein).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("image-based one-step prediction agrees with the matrix route") {
  Rng rng(204);
  const FlowSpec spec = builtin_system("van_der_pol");
  const MapOnBox map = flow_map(spec);
  const DegreeVector degree{{6, 6}};
  const LatticeGrid grid(degree);
  std::vector<Vec> images(grid.N());
  for (std::size_t j = 0; j < grid.N(); ++j) images[j] = map.eval(grid.point(j));
  const auto km = build_koopman_matrices(map, degree);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x0 = random_unit_point(rng, 2);
    const Vec direct = predict_one_step_from_images(images, grid, x0);
    const auto traj = predict_trajectory(km, x0, 1);
    for (int l = 0; l < 2; ++l) CHECK(std::abs(direct[l] - traj[0][l]) < 1e-8);
  }
}

TEST_CASE("coefficient iteration preserves constant observables") {
  const FlowSpec spec = builtin_system("van_der_pol");
  const auto km = build_koopman_matrices(flow_map(spec), DegreeVector{{5, 5}});
  Vec coeffs(km.degree.N(), 0.8);
  for (int k = 0; k < 3; ++k) {
    coeffs = next_iterate_coefficients(km, coeffs);
    for (double v : coeffs) CHECK(v == doctest::Approx(0.8).epsilon(1e-9));
  }
}

TEST_CASE("predictors validate their inputs") {
  const auto km = build_koopman_matrices(identity_map(2), DegreeVector{{3, 3}});
  CHECK_THROWS_AS(predict_trajectory(km, Vec{0.5}, 3), Error);
  CHECK_THROWS_AS(predict_trajectory(km, Vec{0.5, 0.5}, 0), Error);
  CHECK_THROWS_AS(next_iterate_coefficients(km, Vec(5, 1.0)), Error);
}
