#ifndef AEDS_LINALG_HPP
#define AEDS_LINALG_HPP

// Dense linear algebra helpers shared by the membership test, the multiplier
// search and the cohomology computation.

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace aeds {

/// Singular values below max(rows, cols) * sigma_max * 1e-10 count as zero.
double svd_cutoff(Eigen::Index rows, Eigen::Index cols, double sigma_max);

/// Orthonormal basis of the null space (one column per vector).
Eigen::MatrixXd nullspace(const Eigen::MatrixXd& a);

struct LeastSquares {
  Eigen::VectorXd x;
  double residual = 0.0;  // |A x - b|_2
  Eigen::Index rank = 0;
};

/// Minimum-norm least-squares solution with the same cutoff.
LeastSquares least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Moore-Penrose pseudo-inverse with the same cutoff.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a);

/// Rank computed in exact rational arithmetic (entries are converted exactly
/// from their binary floating-point values).
std::size_t exact_rank(const std::vector<std::vector<double>>& rows);

}  // namespace aeds

#endif  // AEDS_LINALG_HPP
