#ifndef AEDS_SAMPLING_HPP
#define AEDS_SAMPLING_HPP

// Numeric zero testing by seeded sampling.
//
// Points are drawn from a SplitMix64 stream: for each point in turn, one
// 64-bit output per chart coordinate in declaration order, mapped to the
// coordinate's box as lo + u*(hi - lo) with u = (x >> 11) * 2^-53.
// Box priority: SampleSpec override, then the chart's box, then [-1, 1].

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aeds/expr.hpp"
#include "aeds/report.hpp"

namespace aeds {

struct SampleSpec {
  std::uint64_t seed = 0;
  std::size_t count = 64;
  std::map<std::string, Interval, std::less<>> box;
  double tol_abs = 1e-9;
  double tol_rel = 1e-7;

  /// Throws ShapeMismatch when count is zero, a tolerance is not positive or
  /// a box is empty.
  void check() const;
  SampleSpec with_seed(std::uint64_t s) const {
    SampleSpec out = *this;
    out.seed = s;
    return out;
  }
};

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Uniform double in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

Interval effective_box(const Chart& chart, const SampleSpec& spec, std::size_t i);

/// spec.count points, each a vector in chart order.
std::vector<std::vector<double>> sample_points(const Chart& chart, const SampleSpec& spec);

Point to_point(const Chart& chart, std::span<const double> x);
std::vector<std::pair<std::string, double>> labelled(const Chart& chart, std::span<const double> x);

/// Postfix program bound to chart indices; evaluation matches evaluate().
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const Chart& chart);
  double operator()(std::span<const double> x) const;

 private:
  struct Instr {
    Op op;
    std::uint32_t count = 0;  // operand count for Add/Mul; variable index for Var
    int exponent = 0;
    double value = 0.0;
  };
  void emit(const Expr& e, const Chart& chart, std::size_t depth);
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

/// An expression compiled term by term so that the sum and the largest term
/// magnitude come out of one pass.
class CompiledResidual {
 public:
  CompiledResidual() = default;
  CompiledResidual(const Expr& e, const Chart& chart);
  struct Value {
    double value;
    double scale;
  };
  Value operator()(std::span<const double> x) const;
  bool trivially_zero() const noexcept { return terms_.empty(); }

 private:
  std::vector<CompiledExpr> terms_;
};

struct ZeroTest {
  bool zero = true;
  double residual = 0.0;
  std::vector<std::pair<std::string, double>> worst_point;
};

/// |e(p)| <= tol_abs + tol_rel * scale(p) at every sample point, where
/// scale(p) is the largest magnitude among e's top-level additive terms.
ZeroTest is_zero(const Expr& e, const SampleSpec& spec, const Chart& chart);

/// A fixed sample grid reused for many residual families.
class Sweep {
 public:
  Sweep(Chart chart, SampleSpec spec);
  Sweep(Chart chart, SampleSpec spec, std::vector<std::vector<double>> points);

  const Chart& chart() const noexcept { return chart_; }
  const SampleSpec& spec() const noexcept { return spec_; }
  const std::vector<std::vector<double>>& points() const noexcept { return points_; }

  /// Max-abs family over all expressions; passes iff each one is_zero.
  Family residual(std::string name, std::span<const Expr> exprs) const;
  Family residual(std::string name, const Expr& e) const { return residual(std::move(name), std::span<const Expr>(&e, 1)); }
  /// Lower-bound family: min |e| over the grid; passes iff it exceeds tol_abs.
  Family min_abs(std::string name, const Expr& e) const;

 private:
  Chart chart_;
  SampleSpec spec_;
  std::vector<std::vector<double>> points_;
};

}  // namespace aeds

#endif  // AEDS_SAMPLING_HPP
