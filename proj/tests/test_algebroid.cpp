#include <doctest.h>

#include "aeds/algebroid.hpp"
#include "aeds/errors.hpp"
#include "fixtures.hpp"
#include "test_util.hpp"

using namespace aeds;

namespace {

using fx::intrinsic_d;

// (L_s w)(s1..sq) = rho(s)(w(s1..sq)) - sum_i w(s1, .., [s, s_i], .., sq)
Expr intrinsic_lie(const Section& s, const Form& w, const std::vector<Section>& args) {
  std::vector<Expr> terms{s.apply(apply_form(w, args))};
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto mod = args;
    mod[i] = bracket(s, args[i]);
    terms.push_back(-apply_form(w, mod));
  }
  return sum(terms);
}

std::vector<Algebroid> samples() {
  return {fx::tangent_r2(), fx::so3_action(), fx::frame_r3(),
          fx::make_algebroid(Chart({"x", "y"}), {{"1", "2"}}, {}, {"w"})};
}

}  // namespace

TEST_CASE("validate") {
  const SampleSpec spec;
  for (const auto& alg : samples()) {
    const Report r = validate(alg, spec);
    CHECK(r.pass());
    CHECK(r.value("antisymmetry") == 0.0);
    CHECK(r.value("anchor compatibility") < 1e-12);
    CHECK(r.value("jacobi") < 1e-12);
  }
  const auto bad = fx::make_algebroid(Chart({"x"}), {{"1"}, {"0"}}, {});
  ExprCube L(2, ExprMatrix(2, std::vector<Expr>(2, Expr(0))));
  L[0][1][0] = 1;
  L[1][0][0] = 1;
  const Algebroid sym(Chart({"x"}), 2, {{Expr(1)}, {Expr(0)}}, L);
  const Report r = validate(sym, spec);
  CHECK_FALSE(r.pass());
  CHECK_FALSE(r.find("antisymmetry")->pass);
  CHECK(r.value("antisymmetry") == 2.0);
  // A wrong sign on a structure function breaks compatibility and is caught.
  const auto wrong = fx::make_algebroid(Chart({"x", "y", "z"}), {{"0", "-z", "y"}, {"z", "0", "-x"}, {"-y", "x", "0"}},
                                        {{0, 1, 2, "1"}, {1, 2, 0, "1"}, {2, 0, 1, "1"}});
  CHECK_FALSE(validate(wrong, spec).find("anchor compatibility")->pass);
  // Jacobi failure without anchor: a rank-3 bundle of Lie-algebra type with bad constants.
  const auto nonjac = fx::make_algebroid(Chart({"x"}), {{"0"}, {"0"}, {"0"}},
                                         {{0, 1, 1, "1"}, {1, 2, 0, "1"}, {0, 2, 2, "1"}});
  CHECK_FALSE(validate(nonjac, spec).find("jacobi")->pass);
}

TEST_CASE("wedge") {
  const auto alg = fx::tangent_r2();
  const Form w = wedge(Form::basis(alg, 0), Form::basis(alg, 1));
  CHECK(w.degree() == 2);
  CHECK(w.coefficient(Mask{3}) == Expr(1));
  CHECK(wedge(Form::basis(alg, 1), Form::basis(alg, 0)).coefficient(Mask{3}) == Expr(-1));
  SplitMix64 rng(3);
  for (const auto& a : samples()) {
    for (int t = 0; t < 10; ++t) {
      const Form one = fx::random_form(rng, a, 1);
      CHECK(wedge(one, one).empty());
      for (std::size_t q = 0; q <= a.rank(); ++q) {
        for (std::size_t p = 0; p + q <= a.rank(); ++p) {
          const Form x = fx::random_form(rng, a, q);
          const Form y = fx::random_form(rng, a, p);
          const Form lhs = wedge(x, y);
          const Form rhs = wedge(y, x);
          const Form diff = ((q * p) % 2) ? lhs + rhs : lhs - rhs;
          CHECK(diff.empty());
        }
      }
    }
  }
  CHECK_THROWS_AS(wedge(Form::basis(alg, 0), Form::basis(fx::tangent_r2(), 0)), AlgebroidMismatch);
}

TEST_CASE("bracket") {
  for (const auto& alg : samples()) {
    const std::size_t r = alg.rank();
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t b = 0; b < r; ++b) {
        const Section s = bracket(Section::basis(alg, a), Section::basis(alg, b));
        for (std::size_t c = 0; c < r; ++c) CHECK(expand(s[c] - alg.structure(a, b, c)) == Expr(0));
      }
    }
  }
  SplitMix64 rng(5);
  const SampleSpec spec;
  for (const auto& alg : samples()) {
    const Sweep sweep(alg.chart(), spec);
    for (int t = 0; t < 5; ++t) {
      const Section s1 = fx::random_section(rng, alg);
      const Section s2 = fx::random_section(rng, alg);
      const Section ss = bracket(s1, s1);
      for (const auto& c : ss.components()) CHECK(sweep.residual("self", c).pass);
      // rho([s1,s2]) = [rho(s1), rho(s2)] on coordinate functions.
      const Section b = bracket(s1, s2);
      for (const auto& x : alg.chart().names()) {
        const Expr f = Expr::variable(x);
        const Expr lhs = b.apply(f);
        const Expr rhs = s1.apply(s2.apply(f)) - s2.apply(s1.apply(f));
        CHECK(sweep.residual("anchor", lhs - rhs).pass);
      }
    }
  }
}

TEST_CASE("exterior derivative: coordinate form against the intrinsic formula") {
  SplitMix64 rng(17);
  const SampleSpec spec;
  for (const auto& alg : samples()) {
    const Sweep sweep(alg.chart(), spec);
    for (std::size_t q = 0; q < alg.rank(); ++q) {
      for (int t = 0; t < 3; ++t) {
        const Form w = fx::random_form(rng, alg, q);
        const Form dw = exterior_derivative(w);
        CHECK(dw.degree() == q + 1);
        std::vector<Section> args;
        for (std::size_t k = 0; k <= q; ++k) args.push_back(fx::random_section(rng, alg));
        const Family f = sweep.residual("intrinsic", apply_form(dw, args) - intrinsic_d(w, args));
        CHECK_MESSAGE(f.pass, f.value);
        // delta^2 = 0
        CHECK(fx::form_zero(sweep, "dd", exterior_derivative(dw)).pass);
      }
    }
  }
}

TEST_CASE("exterior derivative: basic values") {
  const auto alg = fx::tangent_r2();
  const Form dx = exterior_derivative(Form::function(alg, Expr::variable("x")));
  CHECK(dx.coefficient(Mask{1}) == Expr(1));
  CHECK(dx.terms().size() == 1);
  for (std::size_t a = 0; a < alg.rank(); ++a) CHECK(exterior_derivative(Form::basis(alg, a)).empty());
  const auto so3 = fx::so3_action();
  // d e^3 = -L^3_{12} e^1 ^ e^2 = e^1 ^ e^2
  CHECK(exterior_derivative(Form::basis(so3, 2)).coefficient(Mask{3}) == Expr(1));
  // top degree
  CHECK(exterior_derivative(Form::monomial(alg, std::vector<std::size_t>{0, 1}, Expr(1))).empty());
}

TEST_CASE("antiderivation") {
  SplitMix64 rng(23);
  const SampleSpec spec;
  for (const auto& alg : samples()) {
    const Sweep sweep(alg.chart(), spec);
    for (std::size_t q = 0; q <= alg.rank(); ++q) {
      for (std::size_t p = 0; p + q <= alg.rank(); ++p) {
        const Form a = fx::random_form(rng, alg, q);
        const Form b = fx::random_form(rng, alg, p);
        const Form lhs = exterior_derivative(wedge(a, b));
        const Form rhs = wedge(exterior_derivative(a), b) +
                         ((q % 2) ? -wedge(a, exterior_derivative(b)) : wedge(a, exterior_derivative(b)));
        CHECK(fx::form_zero(sweep, "leibniz", lhs - rhs).pass);
      }
    }
  }
}

TEST_CASE("interior product and Lie derivative") {
  const auto alg = fx::tangent_r2();
  CHECK_THROWS_AS(interior_product(Section::basis(alg, 0), Form::function(alg, Expr(1))), DegreeZero);
  const Form w = wedge(Form::basis(alg, 0), Form::basis(alg, 1));
  const std::vector<Section> e{Section::basis(alg, 0), Section::basis(alg, 1)};
  CHECK(apply_form(w, e) == Expr(1));
  CHECK(eval_form(w, e, {{"x", 0.3}, {"y", 0.1}}) == 1.0);
  CHECK_THROWS_AS(apply_form(w, std::vector<Section>{e[0]}), ArityMismatch);
  CHECK(interior_product(e[0], w).coefficient(Mask{2}) == Expr(1));
  CHECK(interior_product(e[1], w).coefficient(Mask{1}) == Expr(-1));
  // L_s f for constant s and f
  CHECK(lie_derivative(e[0], Form::function(alg, Expr(3))).scalar() == Expr(0));

  SplitMix64 rng(31);
  const SampleSpec spec;
  for (const auto& a : samples()) {
    const Sweep sweep(a.chart(), spec);
    for (std::size_t q = 0; q <= a.rank(); ++q) {
      const Form f = fx::random_form(rng, a, q);
      const Section s = fx::random_section(rng, a);
      const Form lw = lie_derivative(s, f);
      CHECK(lw.degree() == q);
      std::vector<Section> args;
      for (std::size_t k = 0; k < q; ++k) args.push_back(fx::random_section(rng, a));
      CHECK(sweep.residual("cartan", apply_form(lw, args) - intrinsic_lie(s, f, args)).pass);
      if (q == 3) {
        const std::vector<Section> rep{args[0], args[0], args[1]};
        CHECK(sweep.residual("alt", apply_form(f, rep)).pass);
      }
    }
  }
}

TEST_CASE("basis change") {
  const auto alg = fx::frame_r3();
  const Chart& c = alg.chart();
  const Expr x = Expr::variable("x");
  // b1 = e1 + x e2 + y^2 e3, b2 = e2 - x e3, b3 = e3
  const BasisChange bc(alg, {{Expr(1), x, pow(Expr::variable("y"), 2)}, {Expr(0), Expr(1), -x}, {Expr(0), Expr(0), Expr(1)}},
                       {"b1", "b2", "b3"});
  REQUIRE(bc.symbolic());
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const Section one[] = {bc.section(b)};
      CHECK(apply_form(bc.dual(a), one) == Expr(a == b ? 1 : 0));
    }
  }
  SplitMix64 rng(41);
  const Section s = fx::random_section(rng, alg);
  const auto comps = bc.components(s);
  Section back = Section::zero(alg);
  for (std::size_t a = 0; a < 3; ++a) back = back + comps[a] * bc.section(a);
  const Sweep sweep(c, SampleSpec{});
  for (std::size_t a = 0; a < 3; ++a) CHECK(sweep.residual("back", back[a] - s[a]).pass);
  const Point p{{"x", 0.2}, {"y", -0.7}, {"z", 0.4}};
  const auto num = bc.components_at(s, p);
  for (std::size_t a = 0; a < 3; ++a) CHECK(num[a] == doctest::Approx(evaluate(comps[a], p)));
  // Coefficients of a form in the new basis equal its evaluation on new basis sections.
  const Form w = fx::random_form(rng, alg, 2);
  const auto nc = bc.coefficients(w);
  Form rebuilt(alg, 2);
  for (const auto& [m, coeff] : nc) {
    const auto idx = mask_indices(m);
    rebuilt = rebuilt + coeff * wedge(bc.dual(idx[0]), bc.dual(idx[1]));
  }
  CHECK(fx::form_zero(sweep, "rebuilt", rebuilt - w).pass);
}
