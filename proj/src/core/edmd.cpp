#include "core/edmd.h"

#include <Eigen/SVD>

namespace bernkoop {

EdmdMatrices build_edmd(const DataSet& data, const DegreeVector& degree, double truncation_tol) {
  require(data.m == degree.m(), Status::ShapeError, "data dimension disagrees with degree");
  require(data.size() == degree.N(), Status::ShapeError,
          "need " + std::to_string(degree.N()) + " pairs for this degree, got " +
              std::to_string(data.size()));
  require(truncation_tol > 0.0 && truncation_tol < 1.0, Status::DomainError,
          "truncation tolerance must lie in (0, 1)");
  const auto N = static_cast<Eigen::Index>(degree.N());

  EdmdMatrices em;
  em.degree = degree;
  em.truncation_tol = truncation_tol;
  em.U_X.resize(N, N);
  em.U_Y.resize(N, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const Vec cx = monomial_vector(degree, data.x[static_cast<std::size_t>(j)]);
    const Vec cy = monomial_vector(degree, data.y[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < N; ++i) {
      em.U_X(i, j) = cx[static_cast<std::size_t>(i)];
      em.U_Y(i, j) = cy[static_cast<std::size_t>(i)];
    }
  }

  Eigen::BDCSVD<Mat> svd(em.U_X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = truncation_tol * sv(0);
  Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) {
      inv_sv(i) = 1.0 / sv(i);
      ++rank;
    }
  require(rank > 0, Status::RankError, "all singular values fall below the truncation tolerance");
  em.rank_used = rank;
  const Mat pinv = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  em.K_edmd = em.U_Y * pinv;
  return em;
}

std::vector<Vec> predict_edmd(const EdmdMatrices& em, const Vec& x0, int steps) {
  require(steps >= 1, Status::DomainError, "steps must be >= 1");
  const int m = em.degree.m();
  require(static_cast<int>(x0.size()) == m, Status::ShapeError, "state dimension mismatch");
  const LatticeGrid grid(em.degree);
  const std::vector<std::size_t> gamma = grid.gamma();
  const Vec lift = monomial_vector(em.degree, x0);
  Eigen::VectorXd z =
      Eigen::Map<const Eigen::VectorXd>(lift.data(), static_cast<Eigen::Index>(lift.size()));
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    z = em.K_edmd * z;
    Vec state(m);
    for (int j = 0; j < m; ++j) state[j] = z(static_cast<Eigen::Index>(gamma[j]));
    out.push_back(std::move(state));
  }
  return out;
}

}  // namespace bernkoop
