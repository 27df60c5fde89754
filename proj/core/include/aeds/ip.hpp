#ifndef AEDS_IP_HPP
#define AEDS_IP_HPP

// The invariant inverse problem on a Lie group G of dimension n, reduced to
// R x g with coordinates (t, w1..wn) and a reduced vector field
// gamma = d/dt + gamma^i d/dw^i.
//
// The IP algebroid has rank 2n+1 with basis (T0, e_1..e_n, W_1..W_n):
//   rho(T0) = d/dt, rho(e_i) = w^k C^j_ki d/dw^j, rho(W_i) = d/dw^i,
//   [e_i, e_j] = C^k_ij e_k, [e_i, W_j] = C^k_ij W_k, all others zero.
// The adapted basis is Gamma0 = T0 + w^j e_j + gamma^j W_j,
// H_i = e_i - lambda_i^j W_j, W_i, with duals Gamma^0, Theta^i, Psi^i.

#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "aeds/algebroid.hpp"
#include "aeds/report.hpp"
#include "aeds/sampling.hpp"

namespace aeds {

/// C[i][j][k] = C^k_ij.
using StructureConstants = std::vector<std::vector<std::vector<double>>>;

/// Throws InvalidStructureConstants unless C is n x n x n, antisymmetric in
/// (i, j) and satisfies the Jacobi identity to 1e-12.
void check_structure_constants(const StructureConstants& C);

/// Coordinate names used for the reduced space: t, w1, ..., wn.
Chart ip_chart(std::size_t n);

struct IpData {
  std::size_t n = 0;
  StructureConstants C;
  Chart chart;
  std::vector<Expr> gamma;
  ExprMatrix lambda;  // lambda[i][j] = lambda_i^j
  ExprMatrix psi;     // psi[i][j] = psi_i^j
  ExprMatrix phi;     // phi[i][j] = phi_i^j
  ExprCube lambda3;   // lambda3[i][j][k] = lambda^k_ij = d lambda_i^k / dw^j
  ExprCube r;         // r[i][j][k] = r^k_ij
  Algebroid algebroid;
  BasisChange adapted;  // new basis (Gamma0, H_1..H_n, W_1..W_n)

  std::size_t T0() const noexcept { return 0; }
  std::size_t e(std::size_t i) const noexcept { return 1 + i; }
  std::size_t W(std::size_t i) const noexcept { return 1 + n + i; }

  const Expr& w(std::size_t i) const;
  /// gamma(f) = df/dt + gamma^i df/dw^i
  Expr gamma_apply(const Expr& f) const;

  Section Gamma0() const { return adapted.section(0); }
  Section H(std::size_t i) const { return adapted.section(1 + i); }
  Section Wsec(std::size_t i) const { return Section::basis(algebroid, W(i)); }
  Form Gamma0_dual() const { return adapted.dual(0); }
  Form Theta(std::size_t i) const { return adapted.dual(1 + i); }
  Form Psi(std::size_t i) const { return adapted.dual(1 + n + i); }

  std::vector<Expr> wvars;
};

/// gamma expressions are over ip_chart(n).
IpData build_ip(std::size_t n, StructureConstants C, std::vector<Expr> gamma);

/// Structure constants from a sparse list (i, j, k, value) with 0-based
/// indices; the (j, i) entry receives the negative.
StructureConstants structure_constants(std::size_t n,
                                       const std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>>& entries);

/// Generic brackets of the adapted basis against the closed-form table.
Report bracket_table_checks(const IpData& ip, const SampleSpec& spec);

/// Generic d(Psi^i), d(Theta^j) against their closed-form expansions.
Report dual_derivative_checks(const IpData& ip, const SampleSpec& spec);

/// k[i][j] over ip.chart.
using Multiplier = ExprMatrix;

/// Families "symmetry", "gamma(k)", "phi", "dk/dw", the informational
/// "redundant-1" and "redundant-2", and the lower bound "det".
Report helmholtz_residuals(const IpData& ip, const Multiplier& k, const SampleSpec& spec);

/// symbolic determinant by cofactor expansion
Expr determinant(const ExprMatrix& m);

/// Omega = k_ij Psi^i ^ Theta^j
Form omega_form(const IpData& ip, const Multiplier& k);

/// The four conditions on Omega. Each dOmega family carries the name of the
/// matching helmholtz family in its detail field ("" for the redundant ones).
Report two_form_checks(const IpData& ip, const Multiplier& k, const SampleSpec& spec);

struct ExtendedSection {
  ExprMatrix s;  // s[i][j]
  ExprCube P;    // P[i][j][l]
  ExprCube Q;    // Q[i][j][l]
};

/// The construction from a multiplier used in the converse direction:
/// P_ijl = -ds_ij/dw^l, Q_ijl = -(psi_l^k ds_ij/dw^k + 1/2(...)).
ExtendedSection extended_from_multiplier(const IpData& ip, const Multiplier& k);

/// phi- and curvature-contraction families over a basis of symmetric s.
Report sigma_precondition(const IpData& ip, const SampleSpec& spec);

/// Families "(a)", "(b)", "(c)", "P symmetry", "Q symmetry" and lower bound
/// "det s". Throws PreconditionFailed when sigma_precondition fails.
Report sigma_residual(const IpData& ip, const ExtendedSection& ext, const SampleSpec& spec);

/// V_j = gamma(dl/dw^j) - C^k_ij (dl/dw^k) w^i
std::vector<Expr> euler_poincare_residual(const IpData& ip, const Expr& l);
Multiplier hessian(const IpData& ip, const Expr& l);

struct MuNu {
  ExprMatrix mu;         // mu[i][j], functions of t
  std::vector<Expr> nu;  // nu[i], functions of t
  Family affine;         // second w-derivatives of V
};

/// Throws NotAffine when some V_i is not affine in w over the samples.
MuNu extract_mu_nu(const IpData& ip, const Expr& l, const SampleSpec& spec);

struct CohomologyProblem {
  StructureConstants C;
  ExprMatrix mu;         // over a chart with the single coordinate t
  std::vector<Expr> nu;
};

/// Rows (i<j), columns k: d[(ij)][k] = C^k_ij.
std::vector<std::vector<double>> d_matrix(const StructureConstants& C);

struct CohomologyResult {
  Report report;
  std::size_t d_rank = 0;
  std::vector<Expr> theta_p;  // particular solution of mu = d theta
};

/// Families "mu antisymmetry", "coh-1", "coh-2", "H2", "H1". Sampling runs
/// over t with the box taken from spec (default [-1, 1]).
CohomologyResult cohomology_obstruction(const CohomologyProblem& prob, const SampleSpec& spec);

}  // namespace aeds

#endif  // AEDS_IP_HPP
