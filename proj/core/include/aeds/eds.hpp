#ifndef AEDS_EDS_HPP
#define AEDS_EDS_HPP

// Exterior differential systems on algebroids: ideal membership, the
// differential-ideal test, integral-manifold residuals along a section of a
// prolongation, and the dependency condition.

#include <string>
#include <vector>

#include "aeds/algebroid.hpp"
#include "aeds/prolong.hpp"
#include "aeds/report.hpp"
#include "aeds/sampling.hpp"

namespace aeds {

struct IdealSpec {
  Algebroid algebroid;
  std::vector<Form> generators;
  std::vector<std::string> names;  // defaults to g1, g2, ...

  IdealSpec(Algebroid alg, std::vector<Form> gens, std::vector<std::string> names = {});
  std::size_t size() const noexcept { return generators.size(); }
};

/// Pointwise span test: at each sample point, is eta a combination of
/// beta ^ g_k with beta ranging over basis monomials of complementary
/// degree? The sweep covers the seeded samples plus the box center and, for
/// charts of dimension at most 6, the box corners.
Family ideal_membership(const IdealSpec& ideal, const Form& eta, const SampleSpec& spec, std::string name = "member");

/// One family per generator: d(g_k) tested for membership in the algebraic ideal.
Report is_differential_ideal(const IdealSpec& ideal, const SampleSpec& spec);

/// Residuals theta^k_a + rho^i_a dybar^mu/dx^i varpi^k_mu along the section,
/// one family per generator, sampled over the base chart. Generators must be
/// 1-forms on p.total.
Report integral_residual(const ProlongedAlgebroid& p, const IdealSpec& ideal, const BundleSection& i,
                         const SampleSpec& spec);

/// The same residual fields as symbolic expressions, indexed [k][a].
std::vector<std::vector<Expr>> integral_fields(const ProlongedAlgebroid& p, const IdealSpec& ideal,
                                               const BundleSection& i);

/// Dependency residuals for each generator and each pair a < b.
Report dependency_residual(const ProlongedAlgebroid& p, const IdealSpec& ideal, const BundleSection& i,
                           const SampleSpec& spec);

std::vector<std::vector<Expr>> dependency_fields(const ProlongedAlgebroid& p, const IdealSpec& ideal,
                                                 const BundleSection& i);

/// Sample points used by ideal_membership (seeded samples, center, corners).
std::vector<std::vector<double>> membership_points(const Chart& chart, const SampleSpec& spec);

}  // namespace aeds

#endif  // AEDS_EDS_HPP
