#include "aeds/expr.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>
#include <utility>

#include "aeds/errors.hpp"

namespace aeds {

struct Node {
  Op op = Op::Const;
  bool canonical = true;
  int exponent = 0;
  double value = 0.0;
  std::string name;
  std::vector<Expr> args;
  std::size_t hash = 0;
  std::size_t size = 1;
};

namespace {

constexpr std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

int op_rank(Op op) {
  switch (op) {
    case Op::Const: return 0;
    case Op::Var: return 1;
    case Op::Pow: return 2;
    case Op::Mul: return 3;
    case Op::Add: return 4;
    case Op::Exp: return 5;
    case Op::Log: return 6;
    case Op::Sin: return 7;
    case Op::Cos: return 8;
    case Op::Sqrt: return 9;
    case Op::Sub: return 10;
    case Op::Div: return 11;
    case Op::Neg: return 12;
  }
  return 13;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sqrt: return "sqrt";
    default: return "?";
  }
}

}  // namespace

struct NodeFactory {
  static Expr make(Node n) {
    std::size_t h = mix(0, static_cast<std::size_t>(n.op));
    switch (n.op) {
      case Op::Const:
        h = mix(h, std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(n.value)));
        break;
      case Op::Var:
        h = mix(h, std::hash<std::string>{}(n.name));
        break;
      default:
        break;
    }
    if (n.op == Op::Pow) h = mix(h, static_cast<std::size_t>(n.exponent + 1000003));
    std::size_t size = 1;
    for (const auto& a : n.args) {
      h = mix(h, a.hash());
      size += a.size();
    }
    n.hash = h;
    n.size = size;
    return Expr(std::make_shared<const Node>(std::move(n)));
  }
  static const Node& node(const Expr& e) { return *e.node_; }
  static const void* id(const Expr& e) { return e.node_.get(); }
};

namespace {

Expr make_node(Op op, std::vector<Expr> args, bool canonical, int exponent = 0) {
  Node n;
  n.op = op;
  n.args = std::move(args);
  n.exponent = exponent;
  n.canonical = canonical;
  if (canonical) {
    for (const auto& a : n.args) {
      if (!a.canonical()) {
        n.canonical = false;
        break;
      }
    }
  }
  return NodeFactory::make(std::move(n));
}

Expr make_const(double v) {
  Node n;
  n.op = Op::Const;
  n.value = (v == 0.0) ? 0.0 : v;  // drop negative zero
  return NodeFactory::make(std::move(n));
}

// ---------------------------------------------------------------------------
// Canonical products.

struct Factor {
  Expr base;
  long exponent;
};

void flatten_factor(const Expr& t, long k, double& coef, std::vector<Factor>& out) {
  switch (t.op()) {
    case Op::Const: {
      const double v = t.value();
      if (v == 0.0 && k < 0) {
        out.push_back({t, k});
      } else {
        coef *= std::pow(v, static_cast<double>(k));
      }
      return;
    }
    case Op::Mul:
      for (const auto& a : t.args()) flatten_factor(a, k, coef, out);
      return;
    case Op::Pow:
      flatten_factor(t.args()[0], k * t.exponent(), coef, out);
      return;
    case Op::Neg:
      if (k % 2 != 0) coef = -coef;
      flatten_factor(t.args()[0], k, coef, out);
      return;
    case Op::Div:
      flatten_factor(t.args()[0], k, coef, out);
      flatten_factor(t.args()[1], -k, coef, out);
      return;
    default:
      out.push_back({t, k});
      return;
  }
}

Expr make_add(std::vector<Expr> terms);

Expr build_product(double coef, std::vector<Factor> fs) {
  if (coef == 0.0) return make_const(0.0);
  std::stable_sort(fs.begin(), fs.end(),
                   [](const Factor& a, const Factor& b) { return a.base < b.base; });
  std::vector<Factor> merged;
  for (auto& f : fs) {
    if (!merged.empty() && merged.back().base == f.base) {
      merged.back().exponent += f.exponent;
    } else {
      merged.push_back(std::move(f));
    }
  }
  std::vector<Expr> factors;
  if (coef != 1.0) factors.push_back(make_const(coef));
  for (auto& f : merged) {
    if (f.exponent == 0) continue;
    if (f.base.is_const()) {
      // 0^negative: kept as an explicit (undefined) power.
      factors.push_back(make_node(Op::Pow, {f.base}, true, static_cast<int>(f.exponent)));
    } else if (f.exponent == 1) {
      factors.push_back(f.base);
    } else {
      factors.push_back(make_node(Op::Pow, {f.base}, true, static_cast<int>(f.exponent)));
    }
  }
  const std::size_t nonconst = factors.size() - (coef != 1.0 ? 1 : 0);
  if (nonconst == 0) return make_const(coef);
  if (factors.size() == 1) return factors[0];
  return make_node(Op::Mul, std::move(factors), true);
}

Expr make_mul(std::span<const Expr> factors) {
  double coef = 1.0;
  std::vector<Factor> fs;
  for (const auto& f : factors) flatten_factor(f, 1, coef, fs);
  return build_product(coef, std::move(fs));
}

Expr make_pow(const Expr& base, long k) {
  if (k == 0) return make_const(1.0);
  double coef = 1.0;
  std::vector<Factor> fs;
  flatten_factor(base, k, coef, fs);
  return build_product(coef, std::move(fs));
}

// ---------------------------------------------------------------------------
// Canonical sums.

struct Term {
  Expr body;
  double coef;
};

void flatten_term(const Expr& t, double sign, double& constant, std::vector<Term>& out) {
  switch (t.op()) {
    case Op::Const:
      constant += sign * t.value();
      return;
    case Op::Add:
      for (const auto& a : t.args()) flatten_term(a, sign, constant, out);
      return;
    case Op::Sub:
      flatten_term(t.args()[0], sign, constant, out);
      flatten_term(t.args()[1], -sign, constant, out);
      return;
    case Op::Neg:
      flatten_term(t.args()[0], -sign, constant, out);
      return;
    case Op::Mul:
      if (t.canonical() && t.args()[0].is_const()) {
        const auto rest = t.args().subspan(1);
        if (rest.size() == 1 && rest[0].op() == Op::Add) {
          // c*(a + b) is distributed inside sums so that like terms meet.
          flatten_term(rest[0], sign * t.args()[0].value(), constant, out);
          return;
        }
        Expr body = rest.size() == 1 ? rest[0] : make_node(Op::Mul, {rest.begin(), rest.end()}, true);
        out.push_back({std::move(body), sign * t.args()[0].value()});
        return;
      }
      if (!t.canonical()) {
        // Canonicalize so numeric coefficients are visible.
        const Expr c = make_mul(t.args());
        if (c.op() != Op::Mul || c.canonical()) {
          flatten_term(c, sign, constant, out);
          return;
        }
      }
      out.push_back({t, sign});
      return;
    default:
      out.push_back({t, sign});
      return;
  }
}

Expr make_add(std::vector<Expr> terms) {
  double constant = 0.0;
  std::vector<Term> items;
  for (const auto& t : terms) flatten_term(t, 1.0, constant, items);
  std::stable_sort(items.begin(), items.end(),
                   [](const Term& a, const Term& b) { return a.body < b.body; });
  std::vector<Term> merged;
  for (auto& it : items) {
    if (!merged.empty() && merged.back().body == it.body) {
      merged.back().coef += it.coef;
    } else {
      merged.push_back(std::move(it));
    }
  }
  std::vector<Expr> out;
  if (constant != 0.0) out.push_back(make_const(constant));
  for (auto& m : merged) {
    if (m.coef == 0.0) continue;
    if (m.coef == 1.0) {
      out.push_back(m.body);
    } else {
      std::vector<Expr> fs{make_const(m.coef)};
      if (m.body.op() == Op::Mul && m.body.canonical()) {
        fs.insert(fs.end(), m.body.args().begin(), m.body.args().end());
        out.push_back(make_node(Op::Mul, std::move(fs), true));
      } else if (m.body.op() == Op::Add && m.body.canonical()) {
        // Cannot happen for flattened input, but keep the sum distributed.
        out.push_back(make_mul(std::vector<Expr>{make_const(m.coef), m.body}));
      } else {
        fs.push_back(m.body);
        out.push_back(make_node(Op::Mul, std::move(fs), true));
      }
    }
  }
  if (out.empty()) return make_const(0.0);
  if (out.size() == 1) return out[0];
  return make_node(Op::Add, std::move(out), true);
}

// ---------------------------------------------------------------------------

Expr make_fn(Op op, const Expr& a) {
  if (a.is_const()) {
    const double v = a.value();
    switch (op) {
      case Op::Exp:
        if (v == 0.0) return make_const(1.0);
        if (std::isfinite(std::exp(v))) return make_const(std::exp(v));
        break;
      case Op::Log:
        if (v == 1.0) return make_const(0.0);
        if (v > 0.0) return make_const(std::log(v));
        break;
      case Op::Sin:
        return make_const(std::sin(v));
      case Op::Cos:
        return make_const(std::cos(v));
      case Op::Sqrt:
        if (v >= 0.0) return make_const(std::sqrt(v));
        break;
      default:
        break;
    }
  }
  return make_node(op, {a}, true);
}

std::strong_ordering compare_nodes(const Expr& a, const Expr& b) noexcept {
  if (NodeFactory::id(a) == NodeFactory::id(b)) return std::strong_ordering::equal;
  const int ra = op_rank(a.op());
  const int rb = op_rank(b.op());
  if (ra != rb) return ra <=> rb;
  switch (a.op()) {
    case Op::Const: {
      const double x = a.value();
      const double y = b.value();
      if (x < y) return std::strong_ordering::less;
      if (x > y) return std::strong_ordering::greater;
      const auto bx = std::bit_cast<std::uint64_t>(x);
      const auto by = std::bit_cast<std::uint64_t>(y);
      return bx <=> by;
    }
    case Op::Var:
      return a.name().compare(b.name()) <=> 0;
    case Op::Pow: {
      auto c = compare_nodes(a.args()[0], b.args()[0]);
      if (c != 0) return c;
      return a.exponent() <=> b.exponent();
    }
    default:
      break;
  }
  const auto xa = a.args();
  const auto xb = b.args();
  const std::size_t n = std::min(xa.size(), xb.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto c = compare_nodes(xa[i], xb[i]);
    if (c != 0) return c;
  }
  return xa.size() <=> xb.size();
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr members.

Expr::Expr() : Expr(make_const(0.0)) {}
Expr::Expr(double value) : Expr(make_const(value)) {}

Expr Expr::constant(double value) { return make_const(value); }

Expr Expr::variable(std::string name) {
  Node n;
  n.op = Op::Var;
  n.name = std::move(name);
  return NodeFactory::make(std::move(n));
}

Expr Expr::raw(Op op, std::vector<Expr> args) { return make_node(op, std::move(args), false); }

Expr Expr::raw_pow(Expr base, int exponent) {
  return make_node(Op::Pow, {std::move(base)}, false, exponent);
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
const std::string& Expr::name() const noexcept { return node_->name; }
int Expr::exponent() const noexcept { return node_->exponent; }
std::span<const Expr> Expr::args() const noexcept { return node_->args; }
std::size_t Expr::hash() const noexcept { return node_->hash; }
bool Expr::canonical() const noexcept { return node_->canonical; }
std::size_t Expr::size() const noexcept { return node_->size; }

bool operator==(const Expr& a, const Expr& b) noexcept {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare_nodes(a, b) == 0;
}

std::strong_ordering operator<=>(const Expr& a, const Expr& b) noexcept { return compare_nodes(a, b); }

Expr operator+(const Expr& a, const Expr& b) {
  if (b.is_zero() && a.canonical()) return a;
  if (a.is_zero() && b.canonical()) return b;
  return make_add({a, b});
}
Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero() && a.canonical()) return a;
  return make_add({a, make_mul(std::vector<Expr>{make_const(-1.0), b})});
}
Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return make_const(0.0);
  if (a.is_const(1.0) && b.canonical()) return b;
  if (b.is_const(1.0) && a.canonical()) return a;
  return make_mul(std::vector<Expr>{a, b});
}
Expr operator/(const Expr& a, const Expr& b) {
  return make_mul(std::vector<Expr>{a, make_pow(b, -1)});
}
Expr operator-(const Expr& a) { return make_mul(std::vector<Expr>{make_const(-1.0), a}); }
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr pow(const Expr& base, int exponent) { return make_pow(base, exponent); }
Expr exp(const Expr& e) { return make_fn(Op::Exp, e); }
Expr log(const Expr& e) { return make_fn(Op::Log, e); }
Expr sin(const Expr& e) { return make_fn(Op::Sin, e); }
Expr cos(const Expr& e) { return make_fn(Op::Cos, e); }
Expr sqrt(const Expr& e) { return make_fn(Op::Sqrt, e); }

Expr sum(std::span<const Expr> terms) { return make_add({terms.begin(), terms.end()}); }
Expr product(std::span<const Expr> factors) { return make_mul(factors); }

// ---------------------------------------------------------------------------
// Chart.

Chart::Chart(std::vector<std::string> names) : Chart(std::move(names), {}) {}

Chart::Chart(std::vector<std::string> names, std::vector<std::optional<Interval>> boxes)
    : names_(std::move(names)), boxes_(std::move(boxes)) {
  boxes_.resize(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw NameCollision("duplicate coordinate '" + names_[i] + "'");
    }
    if (boxes_[i] && !(boxes_[i]->lo < boxes_[i]->hi)) {
      throw ShapeMismatch("empty sampling box for coordinate '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> Chart::index_of(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

void Chart::set_box(std::string_view name, Interval box) {
  const auto i = index_of(name);
  if (!i) throw UnknownVariable(std::string(name));
  if (!(box.lo < box.hi)) throw ShapeMismatch("empty sampling box for coordinate '" + std::string(name) + "'");
  boxes_[*i] = box;
}

Chart Chart::extended(const Chart& other) const {
  auto names = names_;
  auto boxes = boxes_;
  names.insert(names.end(), other.names_.begin(), other.names_.end());
  boxes.insert(boxes.end(), other.boxes_.begin(), other.boxes_.end());
  return Chart(std::move(names), std::move(boxes));
}

// ---------------------------------------------------------------------------
// Parser.

namespace {

class Parser {
 public:
  Parser(std::string_view src, const Chart& chart) : src_(src), chart_(chart) {}

  Expr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "empty expression");
    Expr e = expression();
    skip_ws();
    if (pos_ < src_.size()) throw SyntaxError(pos_, std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::raw(Op::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = Expr::raw(Op::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::raw(Op::Mul, {lhs, factor()});
      } else if (accept('/')) {
        lhs = Expr::raw(Op::Div, {lhs, factor()});
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    if (accept('-')) return Expr::raw(Op::Neg, {factor()});
    if (accept('+')) return factor();
    return power();
  }

  Expr power() {
    Expr base = atom();
    skip_ws();
    if (!accept('^')) return base;
    const std::size_t at = pos_;
    const Expr ex = simplify(factor());
    if (!ex.is_const()) throw NonIntegerExponent("exponent at position " + std::to_string(at) + " is not a constant integer");
    const double v = ex.value();
    if (v != std::floor(v) || std::abs(v) > 1e6) {
      throw NonIntegerExponent("exponent at position " + std::to_string(at) + " is not an integer");
    }
    return Expr::raw_pow(base, static_cast<int>(v));
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "expected a number, name or '('");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto* first = src_.data() + start;
    const auto* last = src_.data() + pos_;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw SyntaxError(start, "malformed number");
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id(src_.substr(start, pos_ - start));
    static const std::pair<const char*, Op> functions[] = {
        {"exp", Op::Exp}, {"log", Op::Log}, {"sin", Op::Sin}, {"cos", Op::Cos}, {"sqrt", Op::Sqrt}};
    for (const auto& [fname, op] : functions) {
      if (id == fname) {
        if (!accept('(')) throw SyntaxError(pos_, "expected '(' after " + id);
        Expr arg = expression();
        if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
        return Expr::raw(op, {arg});
      }
    }
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') throw SyntaxError(start, "unknown function '" + id + "'");
    if (!chart_.contains(id)) throw UnknownVariable(id);
    return Expr::variable(id);
  }

  std::string_view src_;
  const Chart& chart_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view src, const Chart& chart) { return Parser(src, chart).run(); }

// ---------------------------------------------------------------------------
// Simplify / differentiate / expand / substitute.

Expr simplify(const Expr& e) {
  if (e.canonical()) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) args.push_back(simplify(a));
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return make_add({Expr::raw(e.op(), std::move(args))});
    case Op::Neg:
      return make_mul(std::vector<Expr>{make_const(-1.0), args[0]});
    case Op::Mul:
      return make_mul(args);
    case Op::Div:
      return make_mul(std::vector<Expr>{args[0], make_pow(args[1], -1)});
    case Op::Pow:
      return make_pow(args[0], e.exponent());
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt:
      return make_fn(e.op(), args[0]);
    default:
      return e;
  }
}

namespace {

class Differentiator {
 public:
  explicit Differentiator(std::string_view var) : var_(var) {}

  Expr d(const Expr& e) {
    if (e.op() == Op::Const) return make_const(0.0);
    if (e.op() == Op::Var) return make_const(e.name() == var_ ? 1.0 : 0.0);
    const auto key = NodeFactory::id(e);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(key, r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    const auto a = e.args();
    switch (e.op()) {
      case Op::Add: {
        std::vector<Expr> terms;
        for (const auto& t : a) {
          Expr dt = d(t);
          if (!dt.is_zero()) terms.push_back(std::move(dt));
        }
        return make_add(std::move(terms));
      }
      case Op::Sub:
        return d(a[0]) - d(a[1]);
      case Op::Neg:
        return -d(a[0]);
      case Op::Mul: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < a.size(); ++i) {
          Expr di = d(a[i]);
          if (di.is_zero()) continue;
          std::vector<Expr> fs;
          fs.reserve(a.size());
          for (std::size_t j = 0; j < a.size(); ++j) fs.push_back(j == i ? di : a[j]);
          terms.push_back(make_mul(fs));
        }
        return make_add(std::move(terms));
      }
      case Op::Div: {
        const Expr& num = a[0];
        const Expr& den = a[1];
        return d(num) * make_pow(den, -1) - num * d(den) * make_pow(den, -2);
      }
      case Op::Pow: {
        const Expr db = d(a[0]);
        if (db.is_zero()) return make_const(0.0);
        const int k = e.exponent();
        return make_mul(std::vector<Expr>{make_const(k), make_pow(a[0], k - 1), db});
      }
      case Op::Exp:
        return simplify(e) * d(a[0]);
      case Op::Log:
        return d(a[0]) * make_pow(a[0], -1);
      case Op::Sin:
        return make_fn(Op::Cos, simplify(a[0])) * d(a[0]);
      case Op::Cos:
        return -(make_fn(Op::Sin, simplify(a[0])) * d(a[0]));
      case Op::Sqrt:
        return make_mul(std::vector<Expr>{make_const(0.5), d(a[0]), make_pow(simplify(e), -1)});
      default:
        return make_const(0.0);
    }
  }

  std::string_view var_;
  std::unordered_map<const void*, Expr> memo_;
};

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) { return simplify(Differentiator(var).d(e)); }

Expr differentiate(const Expr& e, std::string_view var, const Chart& chart) {
  if (!chart.contains(var)) throw UnknownVariable(std::string(var));
  return differentiate(e, var);
}

namespace {

constexpr int kMaxExpandPower = 12;

Expr expand_canonical(const Expr& e);

Expr expand_product(std::span<const Expr> factors) {
  std::vector<Expr> acc{make_const(1.0)};
  for (const auto& f : factors) {
    std::vector<Expr> pieces;
    if (f.op() == Op::Add) {
      pieces.assign(f.args().begin(), f.args().end());
    } else {
      pieces.push_back(f);
    }
    std::vector<Expr> next;
    next.reserve(acc.size() * pieces.size());
    for (const auto& x : acc) {
      for (const auto& y : pieces) next.push_back(make_mul(std::vector<Expr>{x, y}));
    }
    // Re-collect after every factor to keep intermediate sums small.
    Expr collected = make_add(std::move(next));
    if (collected.op() == Op::Add) {
      acc.assign(collected.args().begin(), collected.args().end());
    } else {
      acc = {collected};
    }
  }
  return make_add(std::move(acc));
}

Expr expand_canonical(const Expr& e) {
  switch (e.op()) {
    case Op::Add: {
      std::vector<Expr> terms;
      for (const auto& t : e.args()) terms.push_back(expand_canonical(t));
      return make_add(std::move(terms));
    }
    case Op::Mul: {
      std::vector<Expr> fs;
      for (const auto& f : e.args()) {
        Expr x = expand_canonical(f);
        if (x.op() == Op::Mul) {
          fs.insert(fs.end(), x.args().begin(), x.args().end());
        } else {
          fs.push_back(std::move(x));
        }
      }
      return expand_product(fs);
    }
    case Op::Pow: {
      const Expr b = expand_canonical(e.args()[0]);
      const int k = e.exponent();
      if (b.op() == Op::Add && k > 0 && k <= kMaxExpandPower) {
        std::vector<Expr> copies(static_cast<std::size_t>(k), b);
        return expand_product(copies);
      }
      return make_pow(b, k);
    }
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt:
      return make_fn(e.op(), expand_canonical(e.args()[0]));
    default:
      return e;
  }
}

}  // namespace

Expr expand(const Expr& e) { return expand_canonical(simplify(e)); }

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements) {
  switch (e.op()) {
    case Op::Const:
      return e;
    case Op::Var: {
      auto it = replacements.find(e.name());
      return it == replacements.end() ? e : simplify(it->second);
    }
    default:
      break;
  }
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) args.push_back(substitute(a, replacements));
  switch (e.op()) {
    case Op::Add:
      return make_add(std::move(args));
    case Op::Sub:
      return args[0] - args[1];
    case Op::Neg:
      return -args[0];
    case Op::Mul:
      return make_mul(args);
    case Op::Div:
      return args[0] / args[1];
    case Op::Pow:
      return make_pow(args[0], e.exponent());
    default:
      return make_fn(e.op(), args[0]);
  }
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

double eval_node(const Expr& e, const Point& point) {
  const auto a = e.args();
  switch (e.op()) {
    case Op::Const:
      return e.value();
    case Op::Var: {
      auto it = point.find(e.name());
      if (it == point.end()) throw MissingCoordinate(e.name());
      return it->second;
    }
    case Op::Add: {
      double s = 0.0;
      for (const auto& t : a) s += eval_node(t, point);
      return s;
    }
    case Op::Sub:
      return eval_node(a[0], point) - eval_node(a[1], point);
    case Op::Neg:
      return -eval_node(a[0], point);
    case Op::Mul: {
      double p = 1.0;
      for (const auto& t : a) p *= eval_node(t, point);
      return p;
    }
    case Op::Div: {
      const double num = eval_node(a[0], point);
      const double den = eval_node(a[1], point);
      if (den == 0.0) throw EvalError("division by zero in " + to_string(e));
      return num / den;
    }
    case Op::Pow: {
      const double b = eval_node(a[0], point);
      const int k = e.exponent();
      if (b == 0.0 && k < 0) throw EvalError("division by zero in " + to_string(e));
      return std::pow(b, k);
    }
    case Op::Exp:
      return std::exp(eval_node(a[0], point));
    case Op::Log: {
      const double v = eval_node(a[0], point);
      if (!(v > 0.0)) throw EvalError("log of nonpositive value in " + to_string(e));
      return std::log(v);
    }
    case Op::Sin:
      return std::sin(eval_node(a[0], point));
    case Op::Cos:
      return std::cos(eval_node(a[0], point));
    case Op::Sqrt: {
      const double v = eval_node(a[0], point);
      if (v < 0.0) throw EvalError("sqrt of negative value in " + to_string(e));
      return std::sqrt(v);
    }
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expr& e, const Point& point) {
  const double v = eval_node(e, point);
  if (!std::isfinite(v)) throw EvalError("non-finite value of " + to_string(e));
  return v;
}

// ---------------------------------------------------------------------------
// Printing.

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// 1: sum, 2: product / unary minus, 3: power, 4: atom
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Const:
      return e.value() < 0.0 ? 2 : 4;
    case Op::Var:
      return 4;
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
      if (e.canonical() && e.args()[0].is_const() && e.args()[0].value() < 0.0) return 2;
      return 2;
    case Op::Div:
    case Op::Neg:
      return 2;
    case Op::Pow:
      return e.exponent() < 0 ? 2 : 3;
    default:
      return 4;
  }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

bool is_negative_term(const Expr& t) {
  if (t.is_const()) return t.value() < 0.0;
  if (t.op() == Op::Mul && t.args()[0].is_const()) return t.args()[0].value() < 0.0;
  return false;
}

void print_canonical_mul(const Expr& e, std::string& out) {
  double coef = 1.0;
  std::vector<Expr> num;
  std::vector<Expr> den;
  for (const auto& f : e.args()) {
    if (f.is_const()) {
      coef *= f.value();
    } else if (f.op() == Op::Pow && f.exponent() < 0) {
      den.push_back(f.exponent() == -1 ? f.args()[0] : make_pow(f.args()[0], -f.exponent()));
    } else {
      num.push_back(f);
    }
  }
  std::string s;
  if (coef == -1.0 && !num.empty()) {
    s += '-';
  } else if (coef != 1.0 || num.empty()) {
    s += format_number(coef);
    if (!num.empty()) s += '*';
  }
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (i) s += '*';
    print_wrapped(num[i], 3, s);
  }
  if (!den.empty()) {
    s += '/';
    if (den.size() == 1) {
      print_wrapped(den[0], 3, s);
    } else {
      s += '(';
      for (std::size_t i = 0; i < den.size(); ++i) {
        if (i) s += '*';
        print_wrapped(den[i], 3, s);
      }
      s += ')';
    }
  }
  out += s;
}

void print(const Expr& e, std::string& out) {
  const auto a = e.args();
  switch (e.op()) {
    case Op::Const:
      out += format_number(e.value());
      return;
    case Op::Var:
      out += e.name();
      return;
    case Op::Add:
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i == 0) {
          print_wrapped(a[i], 1, out);
        } else if (is_negative_term(a[i])) {
          out += " - ";
          print_wrapped(-a[i], 2, out);
        } else {
          out += " + ";
          print_wrapped(a[i], 2, out);
        }
      }
      return;
    case Op::Sub:
      print_wrapped(a[0], 1, out);
      out += " - ";
      print_wrapped(a[1], 2, out);
      return;
    case Op::Neg:
      out += '-';
      print_wrapped(a[0], 3, out);
      return;
    case Op::Mul:
      if (e.canonical()) {
        print_canonical_mul(e, out);
        return;
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) out += '*';
        print_wrapped(a[i], 3, out);
      }
      return;
    case Op::Div:
      print_wrapped(a[0], 2, out);
      out += '/';
      print_wrapped(a[1], 3, out);
      return;
    case Op::Pow:
      if (e.canonical() && e.exponent() < 0) {
        out += "1/";
        if (e.exponent() == -1) {
          print_wrapped(a[0], 3, out);
        } else {
          print_wrapped(make_pow(a[0], -e.exponent()), 3, out);
        }
        return;
      }
      print_wrapped(a[0], 4, out);
      out += '^';
      if (e.exponent() < 0) {
        out += '(' + std::to_string(e.exponent()) + ')';
      } else {
        out += std::to_string(e.exponent());
      }
      return;
    default:
      out += function_name(e.op());
      out += '(';
      print(a[0], out);
      out += ')';
      return;
  }
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::Var) {
    out.insert(e.name());
    return;
  }
  for (const auto& a : e.args()) collect_vars(a, out);
}

void collect_terms(const Expr& e, std::vector<Expr>& out) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      for (const auto& a : e.args()) collect_terms(a, out);
      return;
    case Op::Neg:
      collect_terms(e.args()[0], out);
      return;
    default:
      out.push_back(e);
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

std::vector<Expr> additive_terms(const Expr& e) {
  std::vector<Expr> out;
  collect_terms(e, out);
  return out;
}

}  // namespace aeds
