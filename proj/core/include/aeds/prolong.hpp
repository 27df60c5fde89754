#ifndef AEDS_PROLONG_HPP
#define AEDS_PROLONG_HPP

// Prolongation of an algebroid A over a product bundle M x N -> M.
//
// The prolonged algebroid lives over the chart (x^i, y^mu). Its basis is
// {e_a (base part), E_mu (fiber part)}, with the base indices first. With
// the trivial connection, rho(e_a) = rho^i_a d/dx^i, rho(E_mu) = d/dy^mu,
// [e_a, e_b] = L^c_{ab} e_c and all other basis brackets vanish. With a
// connection A^mu_i the base part is lifted horizontally through
// h_i = d/dx^i + A^mu_i d/dy^mu and acquires curvature terms.

#include <optional>
#include <string>
#include <vector>

#include "aeds/algebroid.hpp"

namespace aeds {

struct Curvature {
  ExprCube K;  // K[mu][i][j] = h_i(A^mu_j) - h_j(A^mu_i)
  ExprCube M;  // M[mu][a][b] = rho^i_a rho^j_b K^mu_{ij}
  ExprCube N;  // N[nu][a][mu] = -rho^i_a dA^nu_i/dy^mu
};

struct ProlongedAlgebroid {
  Algebroid base;
  Algebroid total;
  Chart fiber;
  /// Connection coefficients A^mu_i (coeff[mu][i]); empty for the trivial case.
  ExprMatrix connection;

  std::size_t base_rank() const noexcept { return base.rank(); }
  std::size_t fiber_dim() const noexcept { return fiber.dim(); }
  /// Index of E_mu in the total basis.
  std::size_t fiber_index(std::size_t mu) const noexcept { return base.rank() + mu; }
};

/// Default labels: base labels as given, fiber labels "E_<coord>".
ProlongedAlgebroid prolong_trivial(const Algebroid& base, const Chart& fiber,
                                   std::vector<std::string> fiber_labels = {});

Curvature curvature(const Algebroid& base, const Chart& fiber, const ExprMatrix& connection);

ProlongedAlgebroid prolong_connection(const Algebroid& base, const Chart& fiber, const ExprMatrix& connection,
                                      std::vector<std::string> fiber_labels = {});

/// A section x -> (x, ybar(x)) of the product bundle.
struct BundleSection {
  std::vector<Expr> ybar;  // one expression over the base chart per fiber coordinate
};

/// Pullback I* of a form on the prolongation to a form on the base algebroid.
Form pullback(const ProlongedAlgebroid& p, const BundleSection& i, const Form& w);

/// y -> ybar(x) inside a coefficient.
Expr restrict_to(const ProlongedAlgebroid& p, const BundleSection& i, const Expr& f);

}  // namespace aeds

#endif  // AEDS_PROLONG_HPP
