#include <doctest.h>

#include <cmath>

#include "aeds/errors.hpp"
#include "aeds/odesim.hpp"

using namespace aeds;

namespace {

OdeSystem system(const std::vector<std::string>& names, const std::vector<std::string>& rhs) {
  const Chart chart(names);
  std::vector<Expr> f;
  for (const auto& s : rhs) f.push_back(parse(s, chart));
  return OdeSystem(chart, f);
}

std::vector<Expr> of_t(const std::vector<std::string>& src) {
  const Chart c({"t"});
  std::vector<Expr> out;
  for (const auto& s : src) out.push_back(parse(s, c));
  return out;
}

double exp_error(double h) {
  const auto traj = rk4(system({"t", "r"}, {"r"}), std::vector<double>{1.0}, 0.0, 1.0, h);
  return compare_closed_form(traj, of_t({"exp(t)"})).max();
}

}  // namespace

TEST_CASE("constant field") {
  const auto traj = rk4(system({"t", "x"}, {"0"}), std::vector<double>{2.5}, 0.0, 1.0, 0.1);
  for (const auto& x : traj.x) CHECK(x[0] == 2.5);
  CHECK(traj.t.back() == 1.0);
}

TEST_CASE("grid with a shortened final step") {
  const auto traj = rk4(system({"t", "x"}, {"1"}), std::vector<double>{0.0}, 0.0, 1.0, 0.3);
  REQUIRE(traj.t.size() == 5);
  CHECK(traj.t[3] == doctest::Approx(0.9));
  CHECK(traj.t[4] == 1.0);
  CHECK(traj.x[4][0] == doctest::Approx(1.0).epsilon(1e-14));
  // A step dividing the interval gives no extra point.
  CHECK(rk4(system({"t", "x"}, {"1"}), std::vector<double>{0.0}, 0.0, 1.0, 0.25).t.size() == 5);
}

TEST_CASE("exponential growth") {
  const auto traj = rk4(system({"t", "r"}, {"r"}), std::vector<double>{1.0}, 0.0, 1.0, 1e-3);
  CHECK(std::abs(traj.x.back()[0] - std::exp(1.0)) < 1e-8);
}

TEST_CASE("reconstruction equation") {
  const auto traj = rk4(system({"t", "eps"}, {"-exp(2*t)"}), std::vector<double>{0.0}, 0.0, 1.0, 1e-3);
  CHECK(std::abs(traj.x.back()[0] - 0.5 * (1.0 - std::exp(2.0))) < 1e-6);
}

TEST_CASE("fourth-order convergence") {
  const double e1 = exp_error(0.1);
  const double e2 = exp_error(0.05);
  const double ratio = e1 / e2;
  INFO("ratio " << ratio);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("polar radial system") {
  const double r0 = 1.2;
  const double th0 = 0.4;
  const auto traj = rk4(system({"t", "r", "theta"}, {"r", "-r^2"}), std::vector<double>{r0, th0}, 0.0, 1.0, 1e-3);
  const auto exact = of_t({"1.2*exp(t)", "0.4 + 0.5*1.44*(1 - exp(2*t))"});
  const auto err = compare_closed_form(traj, exact);
  CHECK(err.max() < 1e-6);
  const Report rep = closed_form_report(err, {"r", "theta"}, 1e-6);
  CHECK(rep.pass());
  CHECK(rep.families.size() == 2);
}

TEST_CASE("cartesian radial system") {
  const double r0 = 1.2;
  const double th0 = 0.4;
  const auto traj = rk4(system({"t", "x", "y"}, {"x + y*(x^2 + y^2)", "y - x*(x^2 + y^2)"}),
                        std::vector<double>{r0 * std::cos(th0), r0 * std::sin(th0)}, 0.0, 1.0, 1e-3);
  const auto exact = of_t({"1.2*exp(t)*cos(0.4 + 0.72*(1 - exp(2*t)))", "1.2*exp(t)*sin(0.4 + 0.72*(1 - exp(2*t)))"});
  CHECK(compare_closed_form(traj, exact).max() < 1e-5);
}

TEST_CASE("reconstruction consistency") {
  // Direct polar integration against the horizontal lift (r0 e^t, theta0)
  // moved by the group element eps(t) from the reconstruction equation.
  const double r0 = 0.8;
  const double th0 = -0.3;
  const double h = 1e-2;
  const auto direct = rk4(system({"t", "r", "theta"}, {"r", "-r^2"}), std::vector<double>{r0, th0}, 0.0, 1.0, h);
  const auto reduced = rk4(system({"t", "r"}, {"r"}), std::vector<double>{r0}, 0.0, 1.0, h);
  const auto recon = rk4(system({"t", "eps"}, {"-0.64*exp(2*t)"}), std::vector<double>{0.0}, 0.0, 1.0, h);
  const auto e_direct = compare_closed_form(direct, of_t({"0.8*exp(t)", "-0.3 + 0.32*(1 - exp(2*t))"}));
  const auto e_reduced = compare_closed_form(reduced, of_t({"0.8*exp(t)"}));
  const auto e_recon = compare_closed_form(recon, of_t({"0.32*(1 - exp(2*t))"}));
  REQUIRE(direct.t.size() == recon.t.size());
  double dr = 0.0;
  double dth = 0.0;
  for (std::size_t s = 0; s < direct.t.size(); ++s) {
    dr = std::max(dr, std::abs(direct.x[s][0] - reduced.x[s][0]));
    dth = std::max(dth, std::abs(direct.x[s][1] - (th0 + recon.x[s][0])));
  }
  CHECK(dr <= 2.0 * (e_direct.max_error[0] + e_reduced.max_error[0]) + 1e-15);
  CHECK(dth <= 2.0 * (e_direct.max_error[1] + e_recon.max_error[0]) + 1e-15);
  CHECK(e_direct.max() > 0.0);
}

TEST_CASE("integration errors") {
  const auto sys = system({"t", "x"}, {"x^2"});
  CHECK_THROWS_AS(rk4(sys, std::vector<double>{1.0}, 0.0, 1.0, 0.0), ShapeMismatch);
  CHECK_THROWS_AS(rk4(sys, std::vector<double>{1.0}, 1.0, 0.0, 0.1), ShapeMismatch);
  CHECK_THROWS_AS(rk4(sys, std::vector<double>{1.0, 2.0}, 0.0, 1.0, 0.1), ShapeMismatch);
  // x' = x^2 from x(0) = 1 blows up at t = 1.
  CHECK_THROWS_AS(rk4(sys, std::vector<double>{1.0}, 0.0, 2.0, 1e-3), EvalError);
  CHECK_THROWS_AS(rk4(system({"t", "x"}, {"log(x)"}), std::vector<double>{-1.0}, 0.0, 1.0, 0.1), EvalError);
  try {
    rk4(system({"t", "x"}, {"log(x)"}), std::vector<double>{-1.0}, 0.5, 1.0, 0.1);
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("t = 0.5") != std::string::npos);
  }
  CHECK_THROWS_AS(OdeSystem(Chart({"t", "x"}), {}), ShapeMismatch);
  CHECK_THROWS_AS(compare_closed_form(rk4(sys, std::vector<double>{0.0}, 0.0, 1.0, 0.5), of_t({"0", "1"})),
                  ShapeMismatch);
}
