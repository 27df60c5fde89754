#ifndef AEDS_TEST_FIXTURES_HPP
#define AEDS_TEST_FIXTURES_HPP

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "aeds/algebroid.hpp"
#include "aeds/sampling.hpp"

namespace fx {

using namespace aeds;

struct Bracket {
  std::size_t a, b, c;
  std::string expr;  // L^c_{ab}; the (b,a) entry gets the negative
};

inline Algebroid make_algebroid(const Chart& chart, const std::vector<std::vector<std::string>>& anchor,
                                const std::vector<Bracket>& brackets, std::vector<std::string> names = {}) {
  const std::size_t r = anchor.size();
  ExprMatrix rho(r, std::vector<Expr>(chart.dim(), Expr(0)));
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t i = 0; i < chart.dim(); ++i) rho[a][i] = parse(anchor[a][i], chart);
  }
  ExprCube L(r, ExprMatrix(r, std::vector<Expr>(r, Expr(0))));
  for (const auto& br : brackets) {
    const Expr e = parse(br.expr, chart);
    L[br.a][br.b][br.c] = L[br.a][br.b][br.c] + e;
    L[br.b][br.a][br.c] = L[br.b][br.a][br.c] - e;
  }
  return Algebroid(chart, r, rho, L, std::move(names));
}

inline Algebroid tangent_r2() {
  return make_algebroid(Chart({"x", "y"}), {{"1", "0"}, {"0", "1"}}, {}, {"dx", "dy"});
}

// Infinitesimal rotations of R^3: X1 = y dz - z dy, X2 = z dx - x dz, X3 = x dy - y dx,
// with [X1, X2] = -X3 and cyclic.
inline Algebroid so3_action() {
  return make_algebroid(Chart({"x", "y", "z"}), {{"0", "-z", "y"}, {"z", "0", "-x"}, {"-y", "x", "0"}},
                        {{0, 1, 2, "-1"}, {1, 2, 0, "-1"}, {2, 0, 1, "-1"}});
}

// A non-holonomic frame of T R^3: e1 = dx, e2 = (1+x^2) dy, e3 = dz + y dx.
inline Algebroid frame_r3() {
  return make_algebroid(Chart({"x", "y", "z"}), {{"1", "0", "0"}, {"0", "1 + x^2", "0"}, {"y", "0", "1"}},
                        {{0, 1, 1, "2*x/(1+x^2)"}, {1, 2, 0, "1 + x^2"}, {1, 2, 1, "-2*x*y/(1+x^2)"}});
}

inline Expr random_poly(SplitMix64& rng, const Chart& chart, int degree) {
  std::vector<Expr> terms;
  const int nterms = 1 + static_cast<int>(rng.next() % 4);
  for (int t = 0; t < nterms; ++t) {
    Expr m = Expr(static_cast<double>(static_cast<int>(rng.next() % 7) - 3));
    const int deg = static_cast<int>(rng.next() % static_cast<std::uint64_t>(degree + 1));
    for (int k = 0; k < deg; ++k) m = m * Expr::variable(chart.name(rng.next() % chart.dim()));
    terms.push_back(m);
  }
  return sum(terms);
}

inline Form random_form(SplitMix64& rng, const Algebroid& alg, std::size_t q, int degree = 2) {
  Form w(alg, q);
  const std::size_t r = alg.rank();
  if (q > r) return w;
  const int nterms = 1 + static_cast<int>(rng.next() % 3);
  for (int t = 0; t < nterms; ++t) {
    std::vector<std::size_t> idx;
    Mask m = 0;
    while (idx.size() < q) {
      const std::size_t a = rng.next() % r;
      if (m & (Mask{1} << a)) continue;
      m |= Mask{1} << a;
      idx.push_back(a);
    }
    w = w + Form::monomial(alg, idx, random_poly(rng, alg.chart(), degree));
  }
  return w;
}

inline Section random_section(SplitMix64& rng, const Algebroid& alg, int degree = 1) {
  std::vector<Expr> c;
  for (std::size_t a = 0; a < alg.rank(); ++a) c.push_back(random_poly(rng, alg.chart(), degree));
  return Section(alg, c);
}

// Intrinsic formula:
// dw(s0..sq) = sum_i (-1)^i rho(s_i) w(..^s_i..) + sum_{i<j} (-1)^{i+j} w([s_i,s_j], ..^s_i..^s_j..)
inline Expr intrinsic_d(const Form& w, const std::vector<Section>& s) {
  std::vector<Expr> terms;
  const std::size_t q = s.size();
  for (std::size_t i = 0; i < q; ++i) {
    std::vector<Section> rest;
    for (std::size_t k = 0; k < q; ++k) {
      if (k != i) rest.push_back(s[k]);
    }
    const Expr v = s[i].apply(apply_form(w, rest));
    terms.push_back((i % 2) ? -v : v);
  }
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = i + 1; j < q; ++j) {
      std::vector<Section> args{bracket(s[i], s[j])};
      for (std::size_t k = 0; k < q; ++k) {
        if (k != i && k != j) args.push_back(s[k]);
      }
      const Expr v = apply_form(w, args);
      terms.push_back(((i + j) % 2) ? -v : v);
    }
  }
  return sum(terms);
}

/// Every coefficient of w vanishes over the sweep.
inline Family form_zero(const Sweep& sweep, const std::string& name, const Form& w) {
  const auto cs = w.coefficients();
  return sweep.residual(name, cs);
}

}  // namespace fx

#endif  // AEDS_TEST_FIXTURES_HPP
