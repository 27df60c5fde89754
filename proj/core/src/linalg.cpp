#include "aeds/linalg.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>

namespace aeds {

double svd_cutoff(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * sigma_max * 1e-10;
}

Eigen::MatrixXd nullspace(const Eigen::MatrixXd& a) {
  const Eigen::Index cols = a.cols();
  if (cols == 0) return Eigen::MatrixXd(0, 0);
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double tau = svd_cutoff(a.rows(), cols, smax);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tau && smax > 0.0) ++rank;
  }
  Eigen::MatrixXd basis = svd.matrixV().rightCols(cols - rank);
  // Fix the sign of each vector (largest-magnitude entry positive) so the
  // output does not depend on SVD sign conventions.
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index imax = 0;
    basis.col(j).cwiseAbs().maxCoeff(&imax);
    if (basis(imax, j) < 0.0) basis.col(j) *= -1.0;
  }
  return basis;
}

LeastSquares least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  LeastSquares out;
  if (a.cols() == 0) {
    out.x = Eigen::VectorXd(0);
    out.residual = b.norm();
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double tau = svd_cutoff(a.rows(), a.cols(), smax);
  Eigen::VectorXd ub = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tau && smax > 0.0) {
      ub(i) /= s(i);
      ++out.rank;
    } else {
      ub(i) = 0.0;
    }
  }
  out.x = svd.matrixV() * ub;
  out.residual = (a * out.x - b).norm();
  return out;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double tau = svd_cutoff(a.rows(), a.cols(), smax);
  Eigen::VectorXd inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) inv(i) = (s(i) > tau && smax > 0.0) ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

std::size_t exact_rank(const std::vector<std::vector<double>>& rows) {
  using boost::multiprecision::cpp_rational;
  if (rows.empty()) return 0;
  const std::size_t ncols = rows.front().size();
  std::vector<std::vector<cpp_rational>> m;
  for (const auto& r : rows) {
    std::vector<cpp_rational> row;
    for (double v : r) row.emplace_back(v);  // exact conversion of the binary value
    m.push_back(std::move(row));
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < ncols && rank < m.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      if (m[r][col] == 0) continue;
      const cpp_rational f = m[r][col] / m[rank][col];
      for (std::size_t c = col; c < ncols; ++c) m[r][c] -= f * m[rank][c];
    }
    ++rank;
  }
  return rank;
}

}  // namespace aeds
