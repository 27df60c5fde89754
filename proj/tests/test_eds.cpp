#include <doctest.h>

#include "aeds/eds.hpp"
#include "aeds/errors.hpp"
#include "fixtures.hpp"
#include "test_util.hpp"

using namespace aeds;

namespace {

struct Semilinear {
  ProlongedAlgebroid p;
  Form theta;
  Expr c;
};

// a u_x + b u_y = c(x, y, u) as theta = E^u - c e^w.
Semilinear semilinear(const std::string& a, const std::string& b, const std::string& c) {
  const Algebroid base = fx::make_algebroid(Chart({"x", "y"}), {{a, b}}, {}, {"w"});
  auto p = prolong_trivial(base, Chart({"u"}));
  const Expr ce = parse(c, p.total.chart());
  const Form theta = Form::basis(p.total, 1) - Form::basis(p.total, 0) * ce;
  return {p, theta, ce};
}

// Reduced radial system: base T R (t) plus the so(2) direction, fiber r.
ProlongedAlgebroid radial() {
  const Algebroid base = fx::make_algebroid(Chart({"t"}), {{"1"}, {"0"}}, {}, {"e_t", "e_theta"});
  Chart r({"r"});
  r.set_box("r", {0.5, 2.0});
  return prolong_trivial(base, r);
}

Form radial_generator(const ProlongedAlgebroid& p) {
  return Form::basis(p.total, 2) - Form::basis(p.total, 0) * Expr::variable("r");
}

// h * (E^u - X_a(f) e^a): an exact Pfaffian equation with solution u = f + const.
Form exact_generator(const ProlongedAlgebroid& p, const Expr& f, const Expr& h) {
  Form g = Form::basis(p.total, p.fiber_index(0));
  for (std::size_t a = 0; a < p.base_rank(); ++a) g = g - Form::basis(p.total, a) * p.base.anchor_apply(a, f);
  return g * h;
}

Form nonzero_form(SplitMix64& rng, const Algebroid& alg, std::size_t q) {
  for (;;) {
    Form w = fx::random_form(rng, alg, q);
    if (!w.empty()) return w;
  }
}

}  // namespace

TEST_CASE("semilinear ideal closes under d") {
  const auto s = semilinear("1", "2", "u^2*x + sin(y)*u");
  const Form dtheta = exterior_derivative(s.theta);
  const Expr cu = differentiate(s.c, "u");
  const Form rhs = wedge(Form::basis(s.p.total, 0) * cu, s.theta);
  for (const auto& [m, coeff] : (dtheta - rhs).terms()) CHECK(expand(coeff) == Expr(0));
  const Sweep sweep(s.p.total.chart(), SampleSpec{});
  CHECK(fx::form_zero(sweep, "d theta", dtheta - rhs).pass);
  // e^w ^ theta has coefficient 1 on (w, E_u)
  const Form ew_theta = wedge(Form::basis(s.p.total, 0), s.theta);
  CHECK(ew_theta.coefficient(Mask{3}) == Expr(1));
}

TEST_CASE("membership") {
  const auto s = semilinear("1", "2", "x*u + u^3");
  const IdealSpec ideal(s.p.total, {s.theta});
  const SampleSpec spec;
  const Expr cu = differentiate(s.c, "u");
  const Family in = ideal_membership(ideal, wedge(Form::basis(s.p.total, 0) * cu, s.theta), spec);
  CHECK(in.pass);
  CHECK(in.value < 1e-9);
  const Family out = ideal_membership(ideal, Form::basis(s.p.total, 0), spec);
  CHECK_FALSE(out.pass);
  CHECK(out.value > 0.1);
  CHECK_FALSE(out.worst_point.empty());
  // Degree below every generator: only zero is a member.
  CHECK_FALSE(ideal_membership(ideal, Form::function(s.p.total, Expr(1)), spec).pass);
  CHECK(ideal_membership(ideal, Form(s.p.total, 0), spec).pass);
  CHECK(ideal_membership(ideal, s.theta * Expr::variable("x"), spec).pass);
}

TEST_CASE("membership is closed under wedge") {
  SplitMix64 rng(99);
  const SampleSpec spec;
  const Algebroid alg = fx::frame_r3();
  const IdealSpec ideal(alg, {nonzero_form(rng, alg, 1), nonzero_form(rng, alg, 1)});
  for (int trial = 0; trial < 6; ++trial) {
    const Form gamma = fx::random_form(rng, alg, 1);
    const Form eta = wedge(gamma, ideal.generators[trial % 2]);
    const Form beta = fx::random_form(rng, alg, 1);
    CHECK(ideal_membership(ideal, eta, spec).pass);
    CHECK(ideal_membership(ideal, wedge(beta, eta), spec).pass);
  }
}

TEST_CASE("differential ideal verdicts") {
  const SampleSpec spec;
  {
    const auto s = semilinear("1", "2", "x*u + u^3");
    const Report r = is_differential_ideal(IdealSpec(s.p.total, {s.theta}, {"theta"}), spec);
    CHECK(r.pass());
    CHECK(r.find("d(theta)") != nullptr);
  }
  {
    const auto p = radial();
    CHECK(is_differential_ideal(IdealSpec(p.total, {radial_generator(p)}), spec).pass());
  }
  {
    // d(x dy) = dx ^ dy, not a multiple of x dy where x vanishes.
    const Algebroid T = fx::tangent_r2();
    const IdealSpec ideal(T, {Form::basis(T, 1) * Expr::variable("x")});
    const Report r = is_differential_ideal(ideal, spec);
    CHECK_FALSE(r.pass());
    const Family* f = r.find("d(g1)");
    REQUIRE(f != nullptr);
    CHECK(f->worst_point.front().second == doctest::Approx(0.0));
    // Away from x = 0 it is a member.
    SampleSpec away = spec;
    away.box["x"] = {0.5, 1.0};
    CHECK(is_differential_ideal(ideal, away).pass());
  }
  {
    // Pointwise rank-deficient generator pairs on a non-holonomic frame.
    const Algebroid alg = fx::frame_r3();
    CHECK_FALSE(is_differential_ideal(IdealSpec(alg, {Form::basis(alg, 0)}), spec).pass());
    CHECK(is_differential_ideal(IdealSpec(alg, {Form::basis(alg, 2)}), spec).pass());
  }
}

TEST_CASE("membership sweep includes center and corners") {
  const Chart c({"x", "y"});
  SampleSpec spec;
  spec.count = 5;
  const auto pts = membership_points(c, spec);
  CHECK(pts.size() == 5 + 1 + 4);
  CHECK(pts[5] == std::vector<double>{0.0, 0.0});
  CHECK(pts.back() == std::vector<double>{1.0, 1.0});
}

TEST_CASE("ideal construction errors") {
  const Algebroid T = fx::tangent_r2();
  CHECK_THROWS_AS(IdealSpec(T, {Form::basis(fx::tangent_r2(), 0)}), AlgebroidMismatch);
  CHECK_THROWS_AS(IdealSpec(T, {Form(T, 1)}), ShapeMismatch);
  CHECK_THROWS_AS(IdealSpec(T, {Form::basis(T, 0)}, {"a", "b"}), ShapeMismatch);
  const auto s = semilinear("1", "2", "0");
  const IdealSpec two(s.p.total, {wedge(Form::basis(s.p.total, 0), s.theta)});
  CHECK_THROWS_AS(integral_residual(s.p, two, {{Expr(0)}}, SampleSpec{}), DegreeError);
  const IdealSpec one(s.p.total, {s.theta});
  CHECK_THROWS_AS(integral_residual(s.p, one, {{}}, SampleSpec{}), ShapeMismatch);
}

TEST_CASE("integral manifolds from characteristics") {
  const SampleSpec spec;
  {
    // u_x + 2 u_y = 0: u constant along (1, 2).
    const auto s = semilinear("1", "2", "0");
    const IdealSpec ideal(s.p.total, {s.theta});
    const BundleSection i{{parse("sin(y - 2*x)", s.p.base.chart())}};
    const Report r = integral_residual(s.p, ideal, i, spec);
    CHECK(r.pass());
    CHECK(r.families.front().value < 1e-12);
    const BundleSection wrong{{parse("sin(y - x)", s.p.base.chart())}};
    CHECK_FALSE(integral_residual(s.p, ideal, wrong, spec).pass());
  }
  {
    // u_x + 2 u_y = u: u = g(y - 2x) e^x.
    const auto s = semilinear("1", "2", "u");
    const IdealSpec ideal(s.p.total, {s.theta});
    const BundleSection i{{parse("cos(y - 2*x)*exp(x)", s.p.base.chart())}};
    CHECK(integral_residual(s.p, ideal, i, spec).pass());
    CHECK(dependency_residual(s.p, ideal, i, spec).pass());
  }
  {
    const auto p = radial();
    const IdealSpec ideal(p.total, {radial_generator(p)});
    SampleSpec unit = spec;
    unit.box["t"] = {0.0, 1.0};
    const BundleSection i{{parse("1.5*exp(t)", p.base.chart())}};
    const Report r = integral_residual(p, ideal, i, unit);
    CHECK(r.pass());
    CHECK(r.families.front().value < 1e-9);
    CHECK(dependency_residual(p, ideal, i, unit).pass());
  }
}

TEST_CASE("integral residual agrees with the pullback") {
  SplitMix64 rng(5);
  const SampleSpec spec;
  const Chart u({"u"});
  std::vector<ProlongedAlgebroid> ps{prolong_trivial(fx::frame_r3(), u), prolong_trivial(fx::so3_action(), u)};
  {
    const Algebroid base = fx::frame_r3();
    const Chart ext = base.chart().extended(u);
    ps.push_back(prolong_connection(base, u, {{parse("u*y", ext), parse("x - u^2", ext), Expr(0)}}));
  }
  for (const auto& p : ps) {
    const Sweep sweep(p.base.chart(), spec);
    for (int trial = 0; trial < 4; ++trial) {
      const IdealSpec ideal(p.total, {nonzero_form(rng, p.total, 1), nonzero_form(rng, p.total, 1)});
      const BundleSection i{{fx::random_poly(rng, p.base.chart(), 2)}};
      const auto fields = integral_fields(p, ideal, i);
      for (std::size_t k = 0; k < ideal.size(); ++k) {
        const Form pb = pullback(p, i, ideal.generators[k]);
        std::vector<Expr> diff;
        for (std::size_t a = 0; a < p.base_rank(); ++a) diff.push_back(fields[k][a] - pb.coefficient(Mask{1} << a));
        CHECK(sweep.residual("agree", diff).pass);
      }
    }
  }
}

TEST_CASE("dependency condition") {
  const SampleSpec spec;
  {
    // dz + x dy over T R^2 with fiber z: d(...) = dx ^ dy is outside the ideal,
    // and the dependency residual is -1 for every section.
    const auto p = prolong_trivial(fx::tangent_r2(), Chart({"z"}));
    const Form g = Form::basis(p.total, 2) + Form::basis(p.total, 1) * Expr::variable("x");
    const IdealSpec ideal(p.total, {g});
    CHECK_FALSE(is_differential_ideal(ideal, spec).pass());
    for (const char* zbar : {"0", "x*y", "sin(x) + y^3"}) {
      const auto fields = dependency_fields(p, ideal, {{parse(zbar, p.base.chart())}});
      REQUIRE(fields.size() == 1);
      REQUIRE(fields[0].size() == 1);
      CHECK(expand(fields[0][0]) == Expr(-1));
    }
  }
  {
    // Dependency residual equals the bracket combination of integral residuals:
    // dep_ab = -(X_a F_b - X_b F_a - L^c_ab F_c).
    SplitMix64 rng(17);
    const auto p = prolong_trivial(fx::frame_r3(), Chart({"u"}));
    const Sweep sweep(p.base.chart(), spec);
    for (int trial = 0; trial < 4; ++trial) {
      const IdealSpec ideal(p.total, {nonzero_form(rng, p.total, 1)});
      const BundleSection i{{fx::random_poly(rng, p.base.chart(), 2)}};
      const auto F = integral_fields(p, ideal, i)[0];
      const auto D = dependency_fields(p, ideal, i)[0];
      const Algebroid& A = p.base;
      std::size_t k = 0;
      std::vector<Expr> diff;
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = a + 1; b < 3; ++b, ++k) {
          std::vector<Expr> terms{D[k], A.anchor_apply(a, F[b]), -A.anchor_apply(b, F[a])};
          for (std::size_t c = 0; c < 3; ++c) terms.push_back(-(A.structure(a, b, c) * F[c]));
          diff.push_back(sum(terms));
        }
      }
      CHECK(sweep.residual("dep identity", diff).pass);
    }
  }
}

TEST_CASE("differential ideal and integral manifold imply dependency") {
  SplitMix64 rng(31);
  const SampleSpec spec;
  const Chart u({"u"});
  for (const Algebroid& base : {fx::tangent_r2(), fx::frame_r3(), fx::so3_action()}) {
    const auto p = prolong_trivial(base, u);
    for (int trial = 0; trial < 4; ++trial) {
      const Expr f = fx::random_poly(rng, base.chart(), 3);
      const Expr h = Expr(1) + Expr::variable("u") * Expr::variable("u");
      const IdealSpec ideal(p.total, {exact_generator(p, f, h)});
      const BundleSection i{{f + Expr(0.5)}};
      const bool closed = is_differential_ideal(ideal, spec).pass();
      const bool integral = integral_residual(p, ideal, i, spec).pass();
      CHECK(closed);
      CHECK(integral);
      if (closed && integral) CHECK(dependency_residual(p, ideal, i, spec).pass());
    }
  }
}
