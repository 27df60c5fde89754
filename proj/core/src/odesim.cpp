#include "aeds/odesim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aeds/errors.hpp"
#include "aeds/sampling.hpp"

namespace aeds {

OdeSystem::OdeSystem(Chart chart, std::vector<Expr> rhs) : chart_(std::move(chart)), rhs_(std::move(rhs)) {
  if (chart_.dim() == 0) throw ShapeMismatch("an ODE chart needs a time coordinate");
  if (rhs_.size() + 1 != chart_.dim()) {
    throw ShapeMismatch("expected " + std::to_string(chart_.dim() - 1) + " right-hand sides, got " +
                        std::to_string(rhs_.size()));
  }
  for (const auto& e : rhs_) {
    for (const auto& v : free_variables(e)) {
      if (!chart_.contains(v)) throw UnknownVariable(v);
    }
  }
}

Trajectory rk4(const OdeSystem& sys, std::span<const double> x0, double t0, double t1, double h) {
  if (!(h > 0.0)) throw ShapeMismatch("step size must be positive");
  if (!(t1 > t0)) throw ShapeMismatch("t1 must exceed t0");
  const std::size_t m = sys.states();
  if (x0.size() != m) throw ShapeMismatch("initial state needs " + std::to_string(m) + " entries");
  std::vector<CompiledExpr> f;
  for (const auto& e : sys.rhs()) f.emplace_back(e, sys.chart());

  std::vector<double> arg(m + 1);
  const auto field = [&](double t, const std::vector<double>& x, std::vector<double>& out) {
    arg[0] = t;
    std::copy(x.begin(), x.end(), arg.begin() + 1);
    try {
      for (std::size_t i = 0; i < m; ++i) out[i] = f[i](arg);
    } catch (const EvalError& err) {
      std::ostringstream os;
      os << err.what() << " at " << sys.time_name() << " = " << t;
      throw EvalError(os.str());
    }
  };

  Trajectory traj;
  traj.h = h;
  std::vector<double> x(x0.begin(), x0.end());
  traj.t.push_back(t0);
  traj.x.push_back(x);
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / h - 1e-9));
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * h;
    const double step = s + 1 == steps ? t1 - t : h;
    field(t, x, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * step * k1[i];
    field(t + 0.5 * step, tmp, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * step * k2[i];
    field(t + 0.5 * step, tmp, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + step * k3[i];
    field(t + step, tmp, k4);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(x[i])) {
        std::ostringstream os;
        os << "state " << sys.chart().name(1 + i) << " blew up at " << sys.time_name() << " = " << t + step;
        throw EvalError(os.str());
      }
    }
    traj.t.push_back(s + 1 == steps ? t1 : t + step);
    traj.x.push_back(x);
  }
  return traj;
}

double ClosedFormError::max() const noexcept {
  double m = 0.0;
  for (double e : max_error) m = std::max(m, e);
  return m;
}

ClosedFormError compare_closed_form(const Trajectory& traj, std::span<const Expr> exact, const std::string& time) {
  const std::size_t m = traj.x.empty() ? exact.size() : traj.x.front().size();
  if (exact.size() != m) throw ShapeMismatch("one closed form per state required");
  const Chart chart({time});
  std::vector<CompiledExpr> f;
  for (const auto& e : exact) f.emplace_back(e, chart);
  ClosedFormError out;
  out.max_error.assign(m, 0.0);
  out.worst_t.assign(m, traj.t.empty() ? 0.0 : traj.t.front());
  for (std::size_t s = 0; s < traj.t.size(); ++s) {
    const double t = traj.t[s];
    for (std::size_t i = 0; i < m; ++i) {
      const double err = std::abs(traj.x[s][i] - f[i](std::span<const double>(&t, 1)));
      if (err > out.max_error[i]) {
        out.max_error[i] = err;
        out.worst_t[i] = t;
      }
    }
  }
  return out;
}

Report closed_form_report(const ClosedFormError& err, const std::vector<std::string>& names, double tol) {
  if (names.size() != err.max_error.size()) throw ShapeMismatch("one name per state required");
  Report rep;
  rep.title = "trajectory against closed form";
  for (std::size_t i = 0; i < names.size(); ++i) {
    Family f;
    f.name = "error(" + names[i] + ")";
    f.value = err.max_error[i];
    f.pass = err.max_error[i] <= tol;
    f.worst_point = {{"t", err.worst_t[i]}};
    rep.add(std::move(f));
  }
  return rep;
}

}  // namespace aeds
