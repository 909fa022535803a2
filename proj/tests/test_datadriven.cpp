#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "core/lattice_map.h"

using namespace bernkoop;

namespace {

MapOnBox identity_map(int m) {
  return map_from_function("identity", m, [](const Vec& x) { return x; });
}

DataSet three_point_line() {
  DataSet data;
  data.m = 1;
  data.x = {{0.0}, {0.3}, {1.0}};
  data.y = data.x;
  return data;
}

LatticeMap three_point_map() {
  const DataSet data = three_point_line();
  const DegreeVector degree{{2}};
  return build_lattice_map(data, degree, build_assignment(data, degree));
}

}  // namespace

TEST_CASE("piecewise line through three points evaluates and inverts") {
  const LatticeMap S = three_point_map();
  CHECK(S.kind == LatticeMap::Kind::Simplicial);
  // Nodes 0, 0.5, 1 map to 0, 0.3, 1; the left piece has slope 0.6.
  CHECK(eval_S(S, Vec{0.25})[0] == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(eval_S(S, Vec{0.5})[0] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(eval_S(S, Vec{0.75})[0] == doctest::Approx(0.65).epsilon(1e-14));
  CHECK(eval_S_inverse(S, Vec{0.15})[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(eval_S_inverse(S, Vec{0.65})[0] == doctest::Approx(0.75).epsilon(1e-12));
  const LipschitzData lip = lipschitz_of_S(S);
  CHECK(lip.full == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(lip.partial[0] == doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("lattice data collapses to the identity map") {
  const DegreeVector degree{{3, 3}};
  const DataSet data = generate_lattice_dataset(identity_map(2), degree);
  const auto perm = build_assignment(data, degree);
  const LatticeMap S = build_lattice_map(data, degree, perm);
  CHECK(S.kind == LatticeMap::Kind::Identity);
  const Vec x{0.37, 0.81};
  const Vec y = eval_S(S, x);
  CHECK(y[0] == x[0]);
  CHECK(y[1] == x[1]);
  const Vec back = eval_S_inverse(S, y);
  CHECK(back[0] == x[0]);
  CHECK(back[1] == x[1]);
  const LipschitzData lip = lipschitz_of_S(S);
  CHECK(lip.full == 1.0);
  CHECK(lip.partial[0] == 1.0);
  CHECK(lip.partial[1] == 1.0);
}

TEST_CASE("every lattice vertex maps to its assigned data point") {
  const DegreeVector degree{{4, 4}};
  const DataSet data = generate_jittered_dataset(identity_map(2), degree, 0.3, 2);
  const auto perm = build_assignment(data, degree);
  verify_assignment(data, degree, perm);
  const LatticeMap S = build_lattice_map(data, degree, perm);
  const LatticeGrid grid(degree);
  for (std::size_t j = 0; j < grid.N(); ++j) {
    const Vec image = eval_S(S, grid.point(j));
    const Vec& target = data.x[perm[j]];
    for (int l = 0; l < 2; ++l) CHECK(std::abs(image[l] - target[l]) < 1e-12);
  }
}

TEST_CASE("the two pieces of each cell agree on their shared diagonal") {
  const DegreeVector degree{{4, 4}};
  const DataSet data = generate_jittered_dataset(identity_map(2), degree, 0.3, 7);
  const auto perm = build_assignment(data, degree);
  const LatticeMap S = build_lattice_map(data, degree, perm);
  REQUIRE(S.pieces.size() == 32);
  int checked = 0;
  for (std::size_t c = 0; c + 1 < S.pieces.size(); c += 2) {
    const SimplexPiece& a = S.pieces[c];
    const SimplexPiece& b = S.pieces[c + 1];
    REQUIRE(a.lattice_vertices.front() == b.lattice_vertices.front());
    REQUIRE(a.lattice_vertices.back() == b.lattice_vertices.back());
    for (int q = 0; q <= 12; ++q) {
      const double t = q / 12.0;
      Vec x = a.base_point;
      x[0] += t * 0.25;
      x[1] += t * 0.25;
      const Vec va = eval_piece(a, x);
      const Vec vb = eval_piece(b, x);
      for (int l = 0; l < 2; ++l) CHECK(std::abs(va[l] - vb[l]) < 1e-10);
      ++checked;
    }
  }
  CHECK(checked >= 200);
}

TEST_CASE("map and inverse round-trip random interior points") {
  const DegreeVector degree{{4, 4}};
  const DataSet data = generate_jittered_dataset(identity_map(2), degree, 0.3, 11);
  const auto perm = build_assignment(data, degree);
  const LatticeMap S = build_lattice_map(data, degree, perm);
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x{0.02 + 0.96 * rng.uniform(), 0.02 + 0.96 * rng.uniform()};
    const Vec back = eval_S_inverse(S, eval_S(S, x));
    CHECK(std::abs(back[0] - x[0]) < 1e-9);
    CHECK(std::abs(back[1] - x[1]) < 1e-9);
  }
}

TEST_CASE("assignment verification rejects order violations") {
  const DataSet line = three_point_line();
  const DegreeVector d1{{2}};
  CHECK_THROWS_AS(verify_assignment(line, d1, {0, 2, 1}), Error);
  try {
    verify_assignment(line, d1, {0, 2, 1});
  } catch (const Error& e) {
    CHECK(e.status == Status::AssignmentError);
  }

  DataSet square;
  square.m = 2;
  square.x = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}};
  square.y = square.x;
  const DegreeVector d2{{1, 1}};
  verify_assignment(square, d2, {0, 1, 2, 3});
  // Sending one diagonal onto the other makes two cell edges cross.
  CHECK_THROWS_AS(verify_assignment(square, d2, {0, 3, 2, 1}), Error);
}

TEST_CASE("duplicate data points cannot form an assignment") {
  DataSet dup;
  dup.m = 1;
  dup.x = {{0.0}, {0.3}, {0.3}};
  dup.y = dup.x;
  CHECK_THROWS_AS(build_assignment(dup, DegreeVector{{2}}), Error);
}

TEST_CASE("collapsed image simplices are reported as degenerate") {
  const DataSet data = three_point_line();
  try {
    build_lattice_map(data, DegreeVector{{2}}, {0, 1, 1});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.status == Status::DegenerateError);
  }
}

TEST_CASE("points outside the image hull are rejected by name") {
  const LatticeMap S = three_point_map();
  try {
    eval_S_inverse(S, Vec{1.5});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.status == Status::OutOfHull);
    CHECK(std::string(e.what()).find("outside the image") != std::string::npos);
  }
}

TEST_CASE("box rescale is a single affine piece with the box widths as constants") {
  const LatticeMap unit = affine_box_map(Box::unit(2));
  const Vec x{0.3, 0.7};
  const Vec y = unit.kind == LatticeMap::Kind::Identity ? x : eval_S(unit, x);
  CHECK(y[0] == doctest::Approx(x[0]));
  CHECK(y[1] == doctest::Approx(x[1]));

  const LatticeMap wide = affine_box_map(Box{{-3.0, -3.0}, {3.0, 3.0}});
  const Vec mid = eval_S(wide, Vec{0.5, 0.5});
  CHECK(mid[0] == doctest::Approx(0.0));
  CHECK(mid[1] == doctest::Approx(0.0));
  const Vec back = eval_S_inverse(wide, Vec{0.0, 0.0});
  CHECK(back[0] == doctest::Approx(0.5));
  CHECK(back[1] == doctest::Approx(0.5));
  const LipschitzData lip = lipschitz_of_S(wide);
  CHECK(lip.full == doctest::Approx(6.0));
  CHECK(lip.partial[0] == doctest::Approx(6.0));
  CHECK(lip.partial[1] == doctest::Approx(6.0));
  CHECK_THROWS_AS(affine_box_map(Box{{0.0}, {0.0}}), Error);
}

TEST_CASE("clustered samples stretch the map more than uniform ones") {
  DataSet uniform;
  uniform.m = 1;
  uniform.x = {{0.0}, {0.25}, {0.5}, {0.75}, {1.0}};
  uniform.y = uniform.x;
  DataSet clustered;
  clustered.m = 1;
  clustered.x = {{0.0}, {0.1}, {0.2}, {0.3}, {1.0}};
  clustered.y = clustered.x;
  const DegreeVector degree{{4}};
  const LatticeMap Su =
      build_lattice_map(uniform, degree, build_assignment(uniform, degree));
  const LatticeMap Sc =
      build_lattice_map(clustered, degree, build_assignment(clustered, degree));
  const double Lu = lipschitz_of_S(Su).full;
  const double Lc = lipschitz_of_S(Sc).full;
  CHECK(Lu == doctest::Approx(1.0));
  CHECK(Lc == doctest::Approx(2.8).epsilon(1e-12));
  CHECK(Lc > Lu);
}

TEST_CASE("dataset files round-trip exactly") {
  const DegreeVector degree{{3, 3}};
  const DataSet data = generate_jittered_dataset(identity_map(2), degree, 0.25, 5);
  const std::string path = "test_dataset_roundtrip.csv";
  save_dataset_csv(path, data);
  const DataSet back = load_dataset_csv(path);
  std::remove(path.c_str());
  REQUIRE(back.m == data.m);
  REQUIRE(back.size() == data.size());
  for (std::size_t j = 0; j < data.size(); ++j)
    for (int l = 0; l < 2; ++l) {
      CHECK(back.x[j][l] == data.x[j][l]);
      CHECK(back.y[j][l] == data.y[j][l]);
    }
}

TEST_CASE("permutation files are one-based single columns") {
  const std::vector<std::size_t> perm{2, 0, 1, 3};
  const std::string path = "test_perm_roundtrip.csv";
  save_permutation_csv(path, perm);
  const auto back = load_permutation_csv(path, 4);
  CHECK(back == perm);
  CHECK_THROWS_AS(load_permutation_csv(path, 5), Error);
  std::remove(path.c_str());
}

TEST_CASE("jitter preserves boundary faces and corners") {
  const DegreeVector degree{{4, 4}};
  const DataSet data = generate_jittered_dataset(identity_map(2), degree, 0.3, 3);
  REQUIRE(data.size() == 25);
  int lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 0, corners = 0;
  for (const Vec& x : data.x) {
    if (x[0] == 0.0) ++lo0;
    if (x[0] == 1.0) ++hi0;
    if (x[1] == 0.0) ++lo1;
    if (x[1] == 1.0) ++hi1;
    if ((x[0] == 0.0 || x[0] == 1.0) && (x[1] == 0.0 || x[1] == 1.0)) ++corners;
  }
  CHECK(lo0 == 5);
  CHECK(hi0 == 5);
  CHECK(lo1 == 5);
  CHECK(hi1 == 5);
  CHECK(corners == 4);
  CHECK_THROWS_AS(generate_jittered_dataset(identity_map(2), degree, 0.5, 3), Error);
}

TEST_CASE("lattice snapshots rebuild the model-based matrices entrywise") {
  const MapOnBox map = flow_map(builtin_system("lotka_volterra"));
  const DegreeVector degree{{5, 5}};
  const DataSet data = generate_lattice_dataset(map, degree);
  const auto perm = build_assignment(data, degree);
  const LatticeMap S = build_lattice_map(data, degree, perm);
  REQUIRE(S.kind == LatticeMap::Kind::Identity);
  const KoopmanMatrices from_data = build_data_koopman(data, degree, S);
  const KoopmanMatrices from_model = build_koopman_matrices(map, degree);
  CHECK((from_data.U - from_model.U).cwiseAbs().maxCoeff() == 0.0);
  CHECK((from_data.K_bernstein - from_model.K_bernstein).cwiseAbs().maxCoeff() == 0.0);
  CHECK((from_data.K_monomial - from_model.K_monomial).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("static dynamics stay put through the data-driven predictor") {
  const DegreeVector degree{{4, 4}};
  DataSet data = generate_jittered_dataset(identity_map(2), degree, 0.3, 9);
  const auto perm = build_assignment(data, degree);
  const LatticeMap S = build_lattice_map(data, degree, perm);
  const KoopmanMatrices km = build_data_koopman(data, degree, S);
  const Vec x0{0.42, 0.58};
  for (bool relift : {false, true}) {
    const auto traj = predict_data_driven(km, S, x0, 3, relift);
    REQUIRE(traj.size() == 3);
    for (const Vec& state : traj)
      for (int l = 0; l < 2; ++l) CHECK(std::abs(state[l] - x0[l]) < 1e-9);
  }
}

TEST_CASE("shape mismatches are rejected up front") {
  const DegreeVector degree{{3, 3}};
  DataSet data = generate_lattice_dataset(identity_map(2), degree);
  data.x.pop_back();
  data.y.pop_back();
  CHECK_THROWS_AS(build_assignment(data, degree), Error);
  CHECK_THROWS_AS(build_lattice_map(data, degree, std::vector<std::size_t>(16, 0)), Error);
  const LatticeMap S = three_point_map();
  CHECK_THROWS_AS(eval_S(S, Vec{0.5, 0.5}), Error);
  CHECK_THROWS_AS(build_data_koopman(generate_lattice_dataset(identity_map(2), degree),
                                     DegreeVector{{3, 3}}, S),
                  Error);
}
