#ifndef AEDS_ALGEBROID_HPP
#define AEDS_ALGEBROID_HPP

// Lie algebroids in a local basis: anchor rho^i_a, structure functions
// L^c_{ab} with [e_a, e_b] = L^c_{ab} e_c, and the exterior calculus of
// algebroid forms.
//
// Forms are stored sparsely: a degree-q form maps each strictly increasing
// index tuple (a bitmask over basis indices) to its coefficient. Evaluation
// follows the determinant convention, so (e^1 ^ e^2)(e_1, e_2) = 1 and the
// coefficient at an increasing tuple I equals the form evaluated on the
// basis sections listed in I.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aeds/expr.hpp"
#include "aeds/report.hpp"
#include "aeds/sampling.hpp"

namespace aeds {

class Form;

using ExprMatrix = std::vector<std::vector<Expr>>;
using ExprCube = std::vector<std::vector<std::vector<Expr>>>;

class Algebroid {
 public:
  /// anchor[a][i] = rho^i_a; structure[a][b][c] = L^c_{ab}.
  Algebroid(Chart chart, std::size_t rank, ExprMatrix anchor, ExprCube structure,
            std::vector<std::string> basis_names = {});

  const Chart& chart() const noexcept;
  std::size_t dim() const noexcept { return chart().dim(); }
  std::size_t rank() const noexcept;
  const Expr& anchor(std::size_t a, std::size_t i) const;
  /// L^c_{ab}
  const Expr& structure(std::size_t a, std::size_t b, std::size_t c) const;
  const std::string& basis_name(std::size_t a) const;
  const std::vector<std::string>& basis_names() const noexcept;
  std::optional<std::size_t> basis_index(std::string_view name) const noexcept;

  /// rho(e_a)(f) = rho^i_a df/dx^i
  Expr anchor_apply(std::size_t a, const Expr& f) const;

  /// Identity comparison: copies of one algebroid compare equal.
  friend bool same(const Algebroid& a, const Algebroid& b) noexcept { return a.impl_ == b.impl_; }

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
  friend Form exterior_derivative(const Algebroid&, const Form&);
};

class Section {
 public:
  Section(Algebroid alg, std::vector<Expr> components);
  static Section basis(const Algebroid& alg, std::size_t a);
  static Section zero(const Algebroid& alg);

  const Algebroid& algebroid() const noexcept { return alg_; }
  const std::vector<Expr>& components() const noexcept { return comps_; }
  const Expr& operator[](std::size_t a) const { return comps_.at(a); }

  /// rho(sigma)(f)
  Expr apply(const Expr& f) const;

  friend Section operator+(const Section& a, const Section& b);
  friend Section operator-(const Section& a, const Section& b);
  friend Section operator*(const Expr& f, const Section& s);

 private:
  Algebroid alg_;
  std::vector<Expr> comps_;
};

using Mask = std::uint64_t;

std::vector<std::size_t> mask_indices(Mask m);
Mask indices_mask(std::span<const std::size_t> increasing);

class Form {
 public:
  /// The zero form of the given degree.
  Form(Algebroid alg, std::size_t degree);

  static Form function(const Algebroid& alg, const Expr& f);
  /// e^a
  static Form basis(const Algebroid& alg, std::size_t a);
  /// coeff * e^{i1} ^ ... ^ e^{iq} for any index order (zero on repeats).
  static Form monomial(const Algebroid& alg, std::span<const std::size_t> indices, const Expr& coeff);

  const Algebroid& algebroid() const noexcept { return alg_; }
  std::size_t degree() const noexcept { return degree_; }
  const std::map<Mask, Expr>& terms() const noexcept { return terms_; }

  Expr coefficient(Mask m) const;
  Expr coefficient(std::span<const std::size_t> increasing) const { return coefficient(indices_mask(increasing)); }
  /// Degree-0 value.
  Expr scalar() const { return coefficient(Mask{0}); }

  /// Adds c to the coefficient at m (dropping zeros).
  void accumulate(Mask m, const Expr& c);
  bool empty() const noexcept { return terms_.empty(); }
  /// Coefficients listed in key order, including none for absent keys.
  std::vector<Expr> coefficients() const;

  friend Form operator+(const Form& a, const Form& b);
  friend Form operator-(const Form& a, const Form& b);
  friend Form operator-(const Form& a);
  friend Form operator*(const Expr& f, const Form& w);
  friend Form operator*(const Form& w, const Expr& f) { return f * w; }

 private:
  Algebroid alg_;
  std::size_t degree_;
  std::map<Mask, Expr> terms_;
};

Form wedge(const Form& a, const Form& b);
Section bracket(const Section& a, const Section& b);
Form exterior_derivative(const Algebroid& alg, const Form& w);
inline Form exterior_derivative(const Form& w) { return exterior_derivative(w.algebroid(), w); }
Form interior_product(const Section& s, const Form& w);
Form lie_derivative(const Section& s, const Form& w);

/// Symbolic w(s_1, ..., s_q).
Expr apply_form(const Form& w, std::span<const Section> sections);
double eval_form(const Form& w, std::span<const Section> sections, const Point& point);

Report validate(const Algebroid& alg, const SampleSpec& spec);

/// Change to a new local basis b_a = rows[a][c] e_c. Symbolic inversion is
/// available when the matrix is triangular with nonzero constant diagonal;
/// otherwise transforms are done numerically per point.
class BasisChange {
 public:
  BasisChange(Algebroid alg, ExprMatrix rows, std::vector<std::string> names = {});

  const Algebroid& algebroid() const noexcept { return alg_; }
  std::size_t rank() const noexcept { return rows_.size(); }
  const std::string& name(std::size_t a) const { return names_.at(a); }
  bool symbolic() const noexcept { return !dual_.empty(); }

  /// b_a in the original basis.
  const Section& section(std::size_t a) const { return sections_.at(a); }
  /// b^a in the original basis (dual to the b_c). Requires symbolic().
  const Form& dual(std::size_t a) const;

  /// Components of s in the new basis. Requires symbolic().
  std::vector<Expr> components(const Section& s) const;
  /// Components of s in the new basis at a point (numeric inversion).
  std::vector<double> components_at(const Section& s, const Point& p) const;
  /// Coefficient of w at the increasing new-basis tuple m: w(b_{a1}, ...).
  Expr coefficient(const Form& w, Mask m) const;
  /// All new-basis coefficients of w.
  std::map<Mask, Expr> coefficients(const Form& w) const;

 private:
  Algebroid alg_;
  ExprMatrix rows_;
  std::vector<std::string> names_;
  std::vector<Section> sections_;
  std::vector<Form> dual_;
};

}  // namespace aeds

#endif  // AEDS_ALGEBROID_HPP
