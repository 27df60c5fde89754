#include "aeds/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "aeds/errors.hpp"

namespace aeds {

void SampleSpec::check() const {
  if (count == 0) throw ShapeMismatch("sample count must be at least 1");
  if (!(tol_abs > 0.0) || !(tol_rel > 0.0)) throw ShapeMismatch("tolerances must be positive");
  for (const auto& [name, b] : box) {
    if (!(b.lo < b.hi)) throw ShapeMismatch("empty sampling box for '" + name + "'");
  }
}

Interval effective_box(const Chart& chart, const SampleSpec& spec, std::size_t i) {
  if (auto it = spec.box.find(chart.name(i)); it != spec.box.end()) return it->second;
  if (chart.box(i)) return *chart.box(i);
  return Interval{};
}

std::vector<std::vector<double>> sample_points(const Chart& chart, const SampleSpec& spec) {
  spec.check();
  std::vector<Interval> boxes;
  for (std::size_t i = 0; i < chart.dim(); ++i) boxes.push_back(effective_box(chart, spec, i));
  SplitMix64 rng(spec.seed);
  std::vector<std::vector<double>> out(spec.count, std::vector<double>(chart.dim()));
  for (auto& p : out) {
    for (std::size_t i = 0; i < chart.dim(); ++i) p[i] = boxes[i].lo + rng.uniform() * (boxes[i].hi - boxes[i].lo);
  }
  return out;
}

Point to_point(const Chart& chart, std::span<const double> x) {
  Point p;
  for (std::size_t i = 0; i < chart.dim(); ++i) p.emplace(chart.name(i), x[i]);
  return p;
}

std::vector<std::pair<std::string, double>> labelled(const Chart& chart, std::span<const double> x) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < chart.dim(); ++i) out.emplace_back(chart.name(i), x[i]);
  return out;
}

// ---------------------------------------------------------------------------

CompiledExpr::CompiledExpr(const Expr& e, const Chart& chart) { emit(simplify(e), chart, 1); }

void CompiledExpr::emit(const Expr& e, const Chart& chart, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  Instr in{e.op()};
  switch (e.op()) {
    case Op::Const:
      in.value = e.value();
      break;
    case Op::Var: {
      const auto i = chart.index_of(e.name());
      if (!i) throw UnknownVariable(e.name());
      in.count = static_cast<std::uint32_t>(*i);
      break;
    }
    case Op::Pow:
      emit(e.args()[0], chart, depth);
      in.exponent = e.exponent();
      break;
    default: {
      std::size_t k = 0;
      for (const auto& a : e.args()) emit(a, chart, depth + k++);
      in.count = static_cast<std::uint32_t>(e.args().size());
      break;
    }
  }
  code_.push_back(in);
}

double CompiledExpr::operator()(std::span<const double> x) const {
  std::array<double, 64> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_depth_ + 1 > small.size()) {
    big.resize(max_depth_ + 1);
    stack = big.data();
  }
  std::size_t sp = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::Const:
        stack[sp++] = in.value;
        break;
      case Op::Var:
        stack[sp++] = x[in.count];
        break;
      case Op::Add: {
        double s = 0.0;
        for (std::uint32_t k = 0; k < in.count; ++k) s += stack[sp - in.count + k];
        sp -= in.count;
        stack[sp++] = s;
        break;
      }
      case Op::Mul: {
        double p = 1.0;
        for (std::uint32_t k = 0; k < in.count; ++k) p *= stack[sp - in.count + k];
        sp -= in.count;
        stack[sp++] = p;
        break;
      }
      case Op::Sub:
        stack[sp - 2] -= stack[sp - 1];
        --sp;
        break;
      case Op::Div:
        if (stack[sp - 1] == 0.0) throw EvalError("division by zero");
        stack[sp - 2] /= stack[sp - 1];
        --sp;
        break;
      case Op::Neg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Op::Pow: {
        const double b = stack[sp - 1];
        if (b == 0.0 && in.exponent < 0) throw EvalError("division by zero");
        if (in.exponent == 2) {
          stack[sp - 1] = b * b;
        } else if (in.exponent == -1) {
          stack[sp - 1] = 1.0 / b;
        } else {
          stack[sp - 1] = std::pow(b, in.exponent);
        }
        break;
      }
      case Op::Exp:
        stack[sp - 1] = std::exp(stack[sp - 1]);
        break;
      case Op::Log:
        if (!(stack[sp - 1] > 0.0)) throw EvalError("log of nonpositive value");
        stack[sp - 1] = std::log(stack[sp - 1]);
        break;
      case Op::Sin:
        stack[sp - 1] = std::sin(stack[sp - 1]);
        break;
      case Op::Cos:
        stack[sp - 1] = std::cos(stack[sp - 1]);
        break;
      case Op::Sqrt:
        if (stack[sp - 1] < 0.0) throw EvalError("sqrt of negative value");
        stack[sp - 1] = std::sqrt(stack[sp - 1]);
        break;
    }
  }
  const double v = sp ? stack[sp - 1] : 0.0;
  if (!std::isfinite(v)) throw EvalError("non-finite value");
  return v;
}

CompiledResidual::CompiledResidual(const Expr& e, const Chart& chart) {
  const Expr s = simplify(e);
  if (s.is_zero()) return;
  for (const auto& t : additive_terms(s)) terms_.emplace_back(t, chart);
}

CompiledResidual::Value CompiledResidual::operator()(std::span<const double> x) const {
  double v = 0.0;
  double scale = 0.0;
  for (const auto& t : terms_) {
    const double tv = t(x);
    v += tv;
    scale = std::max(scale, std::abs(tv));
  }
  return {v, scale};
}

namespace {

[[noreturn]] void rethrow_at(const EvalError& err, const Chart& chart, std::span<const double> x) {
  std::ostringstream os;
  os << err.what() << " at sample point (";
  for (std::size_t i = 0; i < chart.dim(); ++i) os << (i ? ", " : "") << chart.name(i) << "=" << x[i];
  os << ")";
  throw EvalError(os.str());
}

}  // namespace

ZeroTest is_zero(const Expr& e, const SampleSpec& spec, const Chart& chart) {
  Sweep sweep(chart, spec);
  const Family f = sweep.residual("zero", e);
  return ZeroTest{f.pass, f.value, f.worst_point};
}

// ---------------------------------------------------------------------------

Sweep::Sweep(Chart chart, SampleSpec spec) : chart_(std::move(chart)), spec_(std::move(spec)) {
  points_ = sample_points(chart_, spec_);
}

Sweep::Sweep(Chart chart, SampleSpec spec, std::vector<std::vector<double>> points)
    : chart_(std::move(chart)), spec_(std::move(spec)), points_(std::move(points)) {
  spec_.check();
}

Family Sweep::residual(std::string name, std::span<const Expr> exprs) const {
  Family fam;
  fam.name = std::move(name);
  fam.kind = FamilyKind::MaxAbs;
  std::vector<CompiledResidual> compiled;
  std::vector<std::size_t> index;
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    CompiledResidual c(exprs[k], chart_);
    if (c.trivially_zero()) continue;
    compiled.push_back(std::move(c));
    index.push_back(k);
  }
  if (compiled.empty()) return fam;
  double worst = -1.0;
  std::size_t worst_entry = 0;
  const std::vector<double>* worst_x = nullptr;
  for (const auto& x : points_) {
    for (std::size_t k = 0; k < compiled.size(); ++k) {
      CompiledResidual::Value v{};
      try {
        v = compiled[k](x);
      } catch (const EvalError& err) {
        rethrow_at(err, chart_, x);
      }
      const double a = std::abs(v.value);
      if (a > spec_.tol_abs + spec_.tol_rel * v.scale) fam.pass = false;
      if (a > worst) {
        worst = a;
        worst_entry = index[k];
        worst_x = &x;
      }
    }
  }
  fam.value = worst;
  if (worst_x) fam.worst_point = labelled(chart_, *worst_x);
  if (exprs.size() > 1) fam.detail = "worst entry " + std::to_string(worst_entry);
  return fam;
}

Family Sweep::min_abs(std::string name, const Expr& e) const {
  Family fam;
  fam.name = std::move(name);
  fam.kind = FamilyKind::LowerBound;
  const CompiledExpr c(e, chart_);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : points_) {
    double v = 0.0;
    try {
      v = std::abs(c(x));
    } catch (const EvalError& err) {
      rethrow_at(err, chart_, x);
    }
    if (v < best) {
      best = v;
      fam.worst_point = labelled(chart_, x);
    }
  }
  fam.value = best;
  fam.pass = best > spec_.tol_abs;
  return fam;
}

}  // namespace aeds
