#include "core/koopman.h"

#include <fstream>
#include <sstream>

#include "core/bernstein.h"

namespace bernkoop {

std::size_t gamma_index(const DegreeVector& degree, int axis) {
  require(axis >= 0 && axis < degree.m(), Status::DomainError, "axis out of range");
  const LatticeGrid grid(degree);
  return grid.strides[axis];
}

Mat build_sample_matrix(const MapOnBox& map, const LatticeGrid& grid) {
  require(map.m == grid.m(), Status::ShapeError, "map and grid dimensions disagree");
  const std::size_t N = grid.N();
  Mat U(N, N);
  for (std::size_t j = 0; j < N; ++j) {
    Vec img;
    try {
      img = map.eval(grid.point(j));
    } catch (const Error& e) {
      throw Error(e.status, std::string(e.what()) + " (lattice point " + std::to_string(j + 1) + ")");
    }
    const Vec col = monomial_vector(grid.degree, img);
    for (std::size_t i = 0; i < N; ++i) U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return U;
}

namespace {

KoopmanMatrices assemble(Mat U, const DegreeVector& degree) {
  KoopmanMatrices km{degree, conversion_matrix(degree), std::move(U), {}, {}, {}};
  km.K_bernstein = km.C * km.U;
  km.K_monomial = km.U * km.C;
  const LatticeGrid grid(degree);
  km.gamma = grid.gamma();
  return km;
}

}  // namespace

KoopmanMatrices build_koopman_matrices(const MapOnBox& map, const DegreeVector& degree) {
  const LatticeGrid grid(degree);
  return assemble(build_sample_matrix(map, grid), degree);
}

KoopmanMatrices koopman_from_images(const std::vector<Vec>& images, const DegreeVector& degree) {
  const LatticeGrid grid(degree);
  require(images.size() == grid.N(), Status::ShapeError, "image count disagrees with lattice size");
  const std::size_t N = grid.N();
  Mat U(N, N);
  for (std::size_t j = 0; j < N; ++j) {
    const Vec col = monomial_vector(degree, images[j]);
    for (std::size_t i = 0; i < N; ++i) U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return assemble(std::move(U), degree);
}

std::vector<Vec> predict_trajectory(const KoopmanMatrices& km, const Vec& x0, int steps) {
  require(steps >= 1, Status::DomainError, "steps must be >= 1");
  const int m = km.degree.m();
  require(static_cast<int>(x0.size()) == m, Status::ShapeError, "state dimension mismatch");
  const Vec lift = monomial_vector(km.degree, x0);
  Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(lift.data(), static_cast<Eigen::Index>(lift.size()));
  std::vector<Vec> out;
  out.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    z = km.K_monomial * z;
    Vec state(m);
    for (int j = 0; j < m; ++j) state[j] = z(static_cast<Eigen::Index>(km.gamma[j]));
    out.push_back(std::move(state));
  }
  return out;
}

std::vector<Vec> predict_trajectory_relift(const KoopmanMatrices& km, const Vec& x0, int steps) {
  require(steps >= 1, Status::DomainError, "steps must be >= 1");
  const int m = km.degree.m();
  require(static_cast<int>(x0.size()) == m, Status::ShapeError, "state dimension mismatch");
  Vec state = x0;
  std::vector<Vec> out;
  out.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    for (int j = 0; j < m; ++j)
      require(state[j] >= 0.0 && state[j] <= 1.0, Status::EscapeError,
              "relift state left the unit box at step " + std::to_string(k));
    const Vec lift = monomial_vector(km.degree, state);
    const Eigen::VectorXd z =
        km.K_monomial * Eigen::Map<const Eigen::VectorXd>(lift.data(), static_cast<Eigen::Index>(lift.size()));
    for (int j = 0; j < m; ++j) state[j] = z(static_cast<Eigen::Index>(km.gamma[j]));
    out.push_back(state);
  }
  return out;
}

Vec predict_one_step_from_images(const std::vector<Vec>& images, const LatticeGrid& grid,
                                 const Vec& x0) {
  require(images.size() == grid.N(), Status::ShapeError, "image count disagrees with lattice size");
  const Vec b = bernstein_tensor_vector(grid, x0);
  Vec state(grid.m(), 0.0);
  for (std::size_t i = 0; i < images.size(); ++i)
    for (int j = 0; j < grid.m(); ++j) state[j] += b[i] * images[i][j];
  return state;
}

Vec next_iterate_coefficients(const KoopmanMatrices& km, const Vec& coeffs) {
  require(coeffs.size() == km.degree.N(), Status::ShapeError, "coefficient length mismatch");
  const Eigen::VectorXd c =
      km.K_bernstein.transpose() *
      Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  return Vec(c.data(), c.data() + c.size());
}

void save_matrix_csv(const std::string& path, const Mat& mat, const DegreeVector& degree,
                     const std::string& basis_tag) {
  std::ofstream out(path);
  require(out.good(), Status::IoError, "cannot open " + path + " for writing");
  out << "# m=" << degree.m() << " degrees=";
  for (int l = 0; l < degree.m(); ++l) out << (l ? "," : "") << degree.degrees[l];
  out << " basis=" << basis_tag << " rows=" << mat.rows() << " cols=" << mat.cols() << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) out << (j ? "," : "") << mat(i, j);
    out << "\n";
  }
  require(out.good(), Status::IoError, "write failure on " + path);
}

Mat load_matrix_csv(const std::string& path, DegreeVector* degree_out, std::string* basis_tag_out) {
  std::ifstream in(path);
  require(in.good(), Status::IoError, "cannot open " + path);
  std::string header;
  std::getline(in, header);
  require(header.rfind("# m=", 0) == 0, Status::IoError, "missing matrix header in " + path);
  std::vector<int> degrees;
  std::string basis;
  Eigen::Index rows = 0, cols = 0;
  {
    std::istringstream hs(header.substr(1));
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("degrees=", 0) == 0) {
        std::istringstream ds(tok.substr(8));
        std::string d;
        while (std::getline(ds, d, ',')) degrees.push_back(std::stoi(d));
      } else if (tok.rfind("basis=", 0) == 0) {
        basis = tok.substr(6);
      } else if (tok.rfind("rows=", 0) == 0) {
        rows = std::stol(tok.substr(5));
      } else if (tok.rfind("cols=", 0) == 0) {
        cols = std::stol(tok.substr(5));
      }
    }
  }
  require(rows > 0 && cols > 0 && !degrees.empty(), Status::IoError, "malformed matrix header");
  Mat mat(rows, cols);
  std::string line;
  for (Eigen::Index i = 0; i < rows; ++i) {
    require(static_cast<bool>(std::getline(in, line)), Status::IoError, "truncated matrix file");
    std::istringstream ls(line);
    std::string cell;
    for (Eigen::Index j = 0; j < cols; ++j) {
      require(static_cast<bool>(std::getline(ls, cell, ',')), Status::IoError, "short row in matrix file");
      mat(i, j) = std::stod(cell);
    }
  }
  if (degree_out) *degree_out = DegreeVector(degrees);
  if (basis_tag_out) *basis_tag_out = basis;
  return mat;
}

}  // namespace bernkoop
