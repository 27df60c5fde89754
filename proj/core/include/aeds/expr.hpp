#ifndef AEDS_EXPR_HPP
#define AEDS_EXPR_HPP

// Symbolic scalar fields on a coordinate chart.
//
// An Expr is an immutable tree. The arithmetic operators and the free
// functions exp/log/sin/cos/sqrt/pow build canonical trees directly (flattened
// sums and products, folded constants, collected like terms). parse() keeps
// the raw shape of the input; simplify() canonicalizes any tree.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aeds {

enum class Op : std::uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  Exp,
  Log,
  Sin,
  Cos,
  Sqrt,
};

struct Node;

class Expr {
 public:
  /// The constant 0.
  Expr();
  Expr(double value);  // NOLINT(google-explicit-constructor): numeric literals in formulas
  Expr(int value) : Expr(static_cast<double>(value)) {}

  static Expr constant(double value);
  static Expr variable(std::string name);

  // Non-canonicalizing constructors; the parser uses these so that parse()
  // reflects the input text.
  static Expr raw(Op op, std::vector<Expr> args);
  static Expr raw_pow(Expr base, int exponent);

  Op op() const noexcept;
  double value() const noexcept;
  const std::string& name() const noexcept;
  int exponent() const noexcept;
  std::span<const Expr> args() const noexcept;
  std::size_t hash() const noexcept;
  /// True when the tree is already in the form simplify() produces.
  bool canonical() const noexcept;

  bool is_const() const noexcept { return op() == Op::Const; }
  bool is_const(double v) const noexcept { return is_const() && value() == v; }
  bool is_zero() const noexcept { return is_const(0.0); }

  /// Number of nodes in the tree.
  std::size_t size() const noexcept;

  friend bool operator==(const Expr& a, const Expr& b) noexcept;
  friend std::strong_ordering operator<=>(const Expr& a, const Expr& b) noexcept;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend struct NodeFactory;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

Expr pow(const Expr& base, int exponent);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr sqrt(const Expr& e);

/// Canonical sum / product of many operands.
Expr sum(std::span<const Expr> terms);
Expr product(std::span<const Expr> factors);

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Ordered coordinate names with optional sampling boxes.
class Chart {
 public:
  Chart() = default;
  explicit Chart(std::vector<std::string> names);
  Chart(std::vector<std::string> names, std::vector<std::optional<Interval>> boxes);

  std::size_t dim() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const noexcept;
  bool contains(std::string_view name) const noexcept { return index_of(name).has_value(); }
  const std::optional<Interval>& box(std::size_t i) const { return boxes_.at(i); }
  void set_box(std::string_view name, Interval box);

  /// Concatenation; names must stay unique.
  Chart extended(const Chart& other) const;

  friend bool operator==(const Chart&, const Chart&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::optional<Interval>> boxes_;
};

using Point = std::map<std::string, double, std::less<>>;

Expr parse(std::string_view src, const Chart& chart);

/// Exact partial derivative, returned in canonical form.
Expr differentiate(const Expr& e, std::string_view var);
/// As above, rejecting variables outside the chart.
Expr differentiate(const Expr& e, std::string_view var, const Chart& chart);

Expr simplify(const Expr& e);
/// Distributes products over sums and expands positive integer powers of sums.
Expr expand(const Expr& e);
Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements);

double evaluate(const Expr& e, const Point& point);

std::string to_string(const Expr& e);
std::set<std::string> free_variables(const Expr& e);

/// Flattened top-level additive terms (through Add, Sub and Neg).
std::vector<Expr> additive_terms(const Expr& e);

}  // namespace aeds

#endif  // AEDS_EXPR_HPP
