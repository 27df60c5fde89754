#ifndef AEDS_ODESIM_HPP
#define AEDS_ODESIM_HPP

// Fixed-step classical Runge-Kutta integration of expression-defined fields.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aeds/expr.hpp"
#include "aeds/report.hpp"

namespace aeds {

/// chart = (time, state_1, ..., state_m); one right-hand side per state.
class OdeSystem {
 public:
  OdeSystem(Chart chart, std::vector<Expr> rhs);

  const Chart& chart() const noexcept { return chart_; }
  const std::vector<Expr>& rhs() const noexcept { return rhs_; }
  std::size_t states() const noexcept { return rhs_.size(); }
  const std::string& time_name() const { return chart_.name(0); }

 private:
  Chart chart_;
  std::vector<Expr> rhs_;
};

struct Trajectory {
  double h = 0.0;
  std::vector<double> t;
  std::vector<std::vector<double>> x;
};

/// The final step is shortened to land on t1. Throws EvalError (with t) on a
/// domain violation or a non-finite state.
Trajectory rk4(const OdeSystem& sys, std::span<const double> x0, double t0, double t1, double h);

struct ClosedFormError {
  std::vector<double> max_error;  // per state
  std::vector<double> worst_t;
  double max() const noexcept;
};

/// exact[i] is an expression in the single variable `time`.
ClosedFormError compare_closed_form(const Trajectory& traj, std::span<const Expr> exact, const std::string& time = "t");

/// One family per state, "error(name)", passing when below tol.
Report closed_form_report(const ClosedFormError& err, const std::vector<std::string>& names, double tol);

}  // namespace aeds

#endif  // AEDS_ODESIM_HPP
