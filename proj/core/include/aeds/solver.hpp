#ifndef AEDS_SOLVER_HPP
#define AEDS_SOLVER_HPP

// Polynomial-ansatz search for reduced multipliers.
//
// k is symmetric by construction: the unknowns are the coefficients of each
// monomial in (t, w1..wn) of total degree <= d, for each entry k_ab, a <= b.
// The gamma(k), phi and dk/dw conditions are linear in k and are collocated
// at sample points; the null space of the resulting matrix is then searched
// for a candidate with nonvanishing determinant.

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "aeds/ip.hpp"

namespace aeds {

struct Ansatz {
  std::size_t n = 0;
  std::size_t degree = 0;
  std::vector<std::vector<int>> monomials;  // exponents over (t, w1..wn), graded-lex
  std::vector<std::pair<std::size_t, std::size_t>> entries;  // (a, b) with a <= b

  std::size_t unknowns() const noexcept { return entries.size() * monomials.size(); }
  /// Column index of (entry e, monomial m).
  std::size_t column(std::size_t e, std::size_t m) const noexcept { return e * monomials.size() + m; }
  Expr monomial(std::size_t m, const Chart& chart) const;
  /// k built from a coefficient vector of length unknowns().
  Multiplier multiplier(const std::vector<double>& coeffs, const Chart& chart) const;
};

Ansatz make_ansatz(std::size_t n, std::size_t degree);

struct RowTag {
  std::string family;
  std::vector<std::size_t> indices;
  std::size_t point = 0;
};

struct CollocationSystem {
  Eigen::MatrixXd matrix;
  std::vector<RowTag> tags;
  std::vector<std::vector<double>> points;
};

/// Sample count is 4x the unknown count, capped so that no family exceeds
/// 4096 rows; at least spec.count points are used when that cap allows it.
CollocationSystem build_collocation(const IpData& ip, const Ansatz& ansatz, const SampleSpec& spec);

struct MultiplierCandidate {
  std::size_t degree = 0;
  std::vector<double> coefficients;
  Multiplier k;
  Report report;  // helmholtz_residuals over a fresh seed
  double min_det = 0.0;
  bool structured = false;  // a null-space basis vector or the diagonal sum
};

struct DegreeSummary {
  std::size_t degree = 0;
  std::size_t unknowns = 0;
  std::size_t rows = 0;
  std::size_t nullity = 0;
  std::size_t trials = 0;
  std::size_t verified = 0;  // trials passing the four conditions, singular or not
  std::size_t found = 0;
  double best_min_det = 0.0;
};

struct SearchOptions {
  std::size_t max_degree = 2;
  std::size_t trials = 32;          // random combinations per degree
  std::size_t max_candidates = 4;   // kept per degree
};

inline constexpr const char* kVerdictFound = "found";
inline constexpr const char* kVerdictSingular = "nullspace nonempty but all singular";
inline constexpr const char* kVerdictEmpty = "empty nullspace";
inline constexpr const char* kVerdictUnverified = "nullspace candidates failed verification";

struct SearchResult {
  std::string verdict;
  /// Per degree: structured candidates in trial order, then random
  /// combinations by decreasing min |det|.
  std::vector<MultiplierCandidate> candidates;
  std::vector<DegreeSummary> degrees;
  double best_min_det = 0.0;  // over all trials passing the four conditions
  bool found() const noexcept { return !candidates.empty(); }
};

SearchResult search_multiplier(const IpData& ip, const SearchOptions& options, const SampleSpec& spec);

}  // namespace aeds

#endif  // AEDS_SOLVER_HPP
