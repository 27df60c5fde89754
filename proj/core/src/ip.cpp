#include "aeds/ip.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aeds/errors.hpp"
#include "aeds/linalg.hpp"

namespace aeds {

namespace {

Expr num(double v) { return Expr(v); }

Expr half(const Expr& e) { return Expr(0.5) * e; }

std::string idx(std::initializer_list<std::size_t> is) {
  std::string s;
  for (auto i : is) s += std::to_string(i + 1);
  return s;
}

ExprMatrix square(std::size_t n) { return ExprMatrix(n, std::vector<Expr>(n, Expr(0))); }
ExprCube cube(std::size_t n) { return ExprCube(n, square(n)); }

void require_square(const ExprMatrix& m, std::size_t n, const char* what) {
  if (m.size() != n) throw ShapeMismatch(std::string(what) + " needs " + std::to_string(n) + " rows");
  for (const auto& row : m) {
    if (row.size() != n) throw ShapeMismatch(std::string(what) + " needs " + std::to_string(n) + " columns");
  }
}

void require_cube(const ExprCube& c, std::size_t n, const char* what) {
  if (c.size() != n) throw ShapeMismatch(std::string(what) + " needs shape n^3");
  for (const auto& m : c) require_square(m, n, what);
}

Family named(Family f, std::string detail) {
  f.detail = std::move(detail);
  return f;
}

}  // namespace

void check_structure_constants(const StructureConstants& C) {
  const std::size_t n = C.size();
  for (const auto& a : C) {
    if (a.size() != n) throw InvalidStructureConstants("structure constants must be n x n x n");
    for (const auto& b : a) {
      if (b.size() != n) throw InvalidStructureConstants("structure constants must be n x n x n");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (C[i][j][k] != -C[j][i][k]) {
          throw InvalidStructureConstants("C^" + std::to_string(k + 1) + "_" + idx({i, j}) + " is not antisymmetric");
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t m = 0; m < n; ++m) {
          double s = 0.0;
          for (std::size_t l = 0; l < n; ++l) {
            s += C[i][l][m] * C[j][k][l] + C[j][l][m] * C[k][i][l] + C[k][l][m] * C[i][j][l];
          }
          if (std::abs(s) > 1e-12) {
            throw InvalidStructureConstants("Jacobi identity fails for (" + idx({i, j, k}) + ") in component " +
                                            std::to_string(m + 1));
          }
        }
      }
    }
  }
}

StructureConstants structure_constants(
    std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>>& entries) {
  StructureConstants C(n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
  for (const auto& [i, j, k, v] : entries) {
    if (i >= n || j >= n || k >= n) throw ShapeMismatch("structure constant index out of range");
    C[i][j][k] += v;
    C[j][i][k] -= v;
  }
  return C;
}

Chart ip_chart(std::size_t n) {
  std::vector<std::string> names{"t"};
  for (std::size_t i = 0; i < n; ++i) names.push_back("w" + std::to_string(i + 1));
  return Chart(names);
}

const Expr& IpData::w(std::size_t i) const { return wvars.at(i); }

Expr IpData::gamma_apply(const Expr& f) const {
  std::vector<Expr> terms{differentiate(f, "t")};
  for (std::size_t i = 0; i < n; ++i) {
    if (gamma[i].is_zero()) continue;
    terms.push_back(gamma[i] * differentiate(f, chart.name(1 + i)));
  }
  return sum(terms);
}

IpData build_ip(std::size_t n, StructureConstants C, std::vector<Expr> gamma) {
  if (C.size() != n) throw InvalidStructureConstants("structure constants must be n x n x n");
  check_structure_constants(C);
  if (gamma.size() != n) throw ShapeMismatch("gamma needs " + std::to_string(n) + " components");
  const Chart chart = ip_chart(n);
  for (const auto& g : gamma) {
    for (const auto& v : free_variables(g)) {
      if (!chart.contains(v)) throw UnknownVariable(v + " (in gamma)");
    }
  }
  std::vector<Expr> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(Expr::variable(chart.name(1 + i)));
  const auto dw = [&](const Expr& f, std::size_t i) { return differentiate(f, chart.name(1 + i)); };
  const auto gamma_apply = [&](const Expr& f) {
    std::vector<Expr> terms{differentiate(f, "t")};
    for (std::size_t i = 0; i < n; ++i) terms.push_back(gamma[i] * dw(f, i));
    return sum(terms);
  };
  // A^j_i = w^k C^j_ki
  ExprMatrix A = square(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < n; ++k) {
        if (C[k][i][j] != 0.0) terms.push_back(num(C[k][i][j]) * w[k]);
      }
      A[i][j] = sum(terms);
    }
  }
  ExprMatrix lambda = square(n), psi = square(n), phi = square(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Expr dg = dw(gamma[j], i);
      lambda[i][j] = simplify(half(A[i][j] - dg));
      psi[i][j] = simplify(half(A[i][j] + dg));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          if (C[k][i][l] != 0.0) terms.push_back(-(num(C[k][i][l]) * w[k] * dw(gamma[j], l)));
        }
        if (C[i][k][j] != 0.0) terms.push_back(-(num(C[i][k][j]) * gamma[k]));
        terms.push_back(-(lambda[i][k] * lambda[k][j]));
      }
      terms.push_back(-gamma_apply(lambda[i][j]));
      phi[i][j] = simplify(sum(terms));
    }
  }
  ExprCube lambda3 = cube(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) lambda3[i][j][k] = simplify(dw(lambda[i][k], j));
    }
  }
  ExprCube r = cube(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<Expr> terms;
        for (std::size_t m = 0; m < n; ++m) {
          terms.push_back(A[j][m] * lambda3[i][m][k]);
          terms.push_back(-(A[i][m] * lambda3[j][m][k]));
        }
        for (std::size_t l = 0; l < n; ++l) {
          terms.push_back(lambda[i][l] * lambda3[j][l][k]);
          terms.push_back(-(lambda[j][l] * lambda3[i][l][k]));
          if (C[i][j][l] != 0.0) terms.push_back(num(C[i][j][l]) * lambda[l][k]);
          if (C[j][l][k] != 0.0) terms.push_back(lambda[i][l] * num(C[j][l][k]));
          if (C[i][l][k] != 0.0) terms.push_back(-(lambda[j][l] * num(C[i][l][k])));
        }
        r[i][j][k] = simplify(sum(terms));
      }
    }
  }

  // The algebroid in the basis (T0, e_i, W_i).
  const std::size_t rank = 2 * n + 1;
  ExprMatrix anchor(rank, std::vector<Expr>(n + 1, Expr(0)));
  anchor[0][0] = Expr(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) anchor[1 + i][1 + j] = A[i][j];
    anchor[1 + n + i][1 + i] = Expr(1);
  }
  ExprCube L(rank, ExprMatrix(rank, std::vector<Expr>(rank, Expr(0))));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (C[i][j][k] == 0.0) continue;
        L[1 + i][1 + j][1 + k] = num(C[i][j][k]);
        L[1 + i][1 + n + j][1 + n + k] = num(C[i][j][k]);
        L[1 + n + j][1 + i][1 + n + k] = num(-C[i][j][k]);
      }
    }
  }
  std::vector<std::string> names{"T0"};
  for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) names.push_back("W" + std::to_string(i + 1));
  Algebroid alg(chart, rank, std::move(anchor), std::move(L), names);

  ExprMatrix rows(rank, std::vector<Expr>(rank, Expr(0)));
  rows[0][0] = Expr(1);
  for (std::size_t j = 0; j < n; ++j) {
    rows[0][1 + j] = w[j];
    rows[0][1 + n + j] = gamma[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    rows[1 + i][1 + i] = Expr(1);
    for (std::size_t j = 0; j < n; ++j) rows[1 + i][1 + n + j] = -lambda[i][j];
    rows[1 + n + i][1 + n + i] = Expr(1);
  }
  std::vector<std::string> adapted_names{"Gamma0"};
  for (std::size_t i = 0; i < n; ++i) adapted_names.push_back("H" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) adapted_names.push_back("W" + std::to_string(i + 1));
  BasisChange adapted(alg, std::move(rows), std::move(adapted_names));

  return IpData{n,       std::move(C), chart,          std::move(gamma), std::move(lambda), std::move(psi),
                std::move(phi), std::move(lambda3), std::move(r), alg, std::move(adapted), std::move(w)};
}

Report bracket_table_checks(const IpData& ip, const SampleSpec& spec) {
  const std::size_t n = ip.n;
  const Sweep sweep(ip.chart, spec);
  const auto diff = [](const Section& a, const Section& b) {
    std::vector<Expr> out;
    for (std::size_t c = 0; c < a.components().size(); ++c) out.push_back(a[c] - b[c]);
    return out;
  };
  const auto comb = [&](const std::vector<std::pair<Expr, Section>>& terms) {
    Section s = Section::zero(ip.algebroid);
    for (const auto& [c, sec] : terms) s = s + c * sec;
    return s;
  };
  std::vector<Expr> gw, gh, hw, hh, ranti;
  const Section G = ip.Gamma0();
  for (std::size_t i = 0; i < n; ++i) {
    {
      std::vector<std::pair<Expr, Section>> t{{Expr(-1), ip.H(i)}};
      for (std::size_t j = 0; j < n; ++j) t.emplace_back(ip.lambda[i][j], ip.Wsec(j));
      for (auto& e : diff(bracket(G, ip.Wsec(i)), comb(t))) gw.push_back(std::move(e));
    }
    {
      std::vector<std::pair<Expr, Section>> t;
      for (std::size_t j = 0; j < n; ++j) {
        t.emplace_back(ip.lambda[i][j], ip.H(j));
        t.emplace_back(ip.phi[i][j], ip.Wsec(j));
      }
      for (auto& e : diff(bracket(G, ip.H(i)), comb(t))) gh.push_back(std::move(e));
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::pair<Expr, Section>> t;
      for (std::size_t k = 0; k < n; ++k) t.emplace_back(num(ip.C[i][j][k]) + ip.lambda3[i][j][k], ip.Wsec(k));
      for (auto& e : diff(bracket(ip.H(i), ip.Wsec(j)), comb(t))) hw.push_back(std::move(e));
      std::vector<std::pair<Expr, Section>> u;
      for (std::size_t k = 0; k < n; ++k) {
        u.emplace_back(num(ip.C[i][j][k]), ip.H(k));
        u.emplace_back(ip.r[i][j][k], ip.Wsec(k));
      }
      for (auto& e : diff(bracket(ip.H(i), ip.H(j)), comb(u))) hh.push_back(std::move(e));
      for (std::size_t k = 0; k < n; ++k) ranti.push_back(ip.r[i][j][k] + ip.r[j][i][k]);
    }
  }
  Report rep;
  rep.title = "IP algebroid bracket table";
  rep.add(sweep.residual("[Gamma0,W]", gw));
  rep.add(sweep.residual("[Gamma0,H]", gh));
  rep.add(sweep.residual("[H,W]", hw));
  rep.add(sweep.residual("[H,H]", hh));
  rep.add(sweep.residual("r antisymmetry", ranti));
  return rep;
}

Report dual_derivative_checks(const IpData& ip, const SampleSpec& spec) {
  const std::size_t n = ip.n;
  const Sweep sweep(ip.chart, spec);
  const Form G = ip.Gamma0_dual();
  std::vector<Expr> dpsi, dtheta;
  for (std::size_t i = 0; i < n; ++i) {
    Form want(ip.algebroid, 2);
    for (std::size_t k = 0; k < n; ++k) {
      want = want - wedge(ip.phi[k][i] * G, ip.Theta(k)) - wedge(ip.lambda[k][i] * G, ip.Psi(k));
      for (std::size_t l = 0; l < n; ++l) {
        want = want - wedge(half(ip.r[k][l][i]) * ip.Theta(k), ip.Theta(l)) -
               wedge((num(ip.C[k][l][i]) + ip.lambda3[k][l][i]) * ip.Theta(k), ip.Psi(l));
      }
    }
    for (auto& e : (exterior_derivative(ip.Psi(i)) - want).coefficients()) dpsi.push_back(std::move(e));
    Form want_t = wedge(G, ip.Psi(i));
    for (std::size_t k = 0; k < n; ++k) {
      want_t = want_t - wedge(ip.lambda[k][i] * G, ip.Theta(k));
      for (std::size_t l = 0; l < n; ++l) {
        if (ip.C[k][l][i] != 0.0) want_t = want_t - wedge(num(0.5 * ip.C[k][l][i]) * ip.Theta(k), ip.Theta(l));
      }
    }
    for (auto& e : (exterior_derivative(ip.Theta(i)) - want_t).coefficients()) dtheta.push_back(std::move(e));
  }
  Report rep;
  rep.title = "exterior derivatives of the adapted coframe";
  rep.add(sweep.residual("d(Psi)", dpsi));
  rep.add(sweep.residual("d(Theta)", dtheta));
  return rep;
}

Expr determinant(const ExprMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) return Expr(1);
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  std::vector<Expr> terms;
  for (std::size_t j = 0; j < n; ++j) {
    if (m[0][j].is_zero()) continue;
    ExprMatrix minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Expr> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != j) row.push_back(m[i][c]);
      }
      minor.push_back(std::move(row));
    }
    const Expr t = m[0][j] * determinant(minor);
    terms.push_back(j % 2 ? -t : t);
  }
  return sum(terms);
}

Report helmholtz_residuals(const IpData& ip, const Multiplier& k, const SampleSpec& spec) {
  const std::size_t n = ip.n;
  require_square(k, n, "multiplier");
  for (const auto& row : k) {
    for (const auto& e : row) {
      for (const auto& v : free_variables(e)) {
        if (!ip.chart.contains(v)) throw UnknownVariable(v + " (in multiplier)");
      }
    }
  }
  const Sweep sweep(ip.chart, spec);
  const auto dw = [&](const Expr& f, std::size_t i) { return differentiate(f, ip.chart.name(1 + i)); };
  std::vector<Expr> sym, gk, ph, dk, red1, red2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i < j) sym.push_back(k[i][j] - k[j][i]);
      std::vector<Expr> t{ip.gamma_apply(k[i][j])};
      for (std::size_t m = 0; m < n; ++m) {
        t.push_back(-(k[m][j] * ip.lambda[i][m]));
        t.push_back(-(k[i][m] * ip.lambda[j][m]));
      }
      gk.push_back(sum(t));
      if (i < j) {
        std::vector<Expr> p;
        for (std::size_t m = 0; m < n; ++m) {
          p.push_back(k[m][i] * ip.phi[j][m]);
          p.push_back(-(k[m][j] * ip.phi[i][m]));
        }
        ph.push_back(sum(p));
        for (std::size_t m = 0; m < n; ++m) dk.push_back(dw(k[j][m], i) - dw(k[i][m], j));
      }
    }
  }
  // Redundant conditions: from dOmega(W, H, H) and dOmega(H, H, H).
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t l = 0; l < n; ++l) {
        std::vector<Expr> t;
        for (std::size_t m = 0; m < n; ++m) {
          t.push_back(ip.psi[l][m] * dw(k[i][j], m));
          t.push_back(-(ip.psi[j][m] * dw(k[i][l], m)));
          std::vector<Expr> h;
          h.push_back(k[m][i] * num(ip.C[j][l][m]));
          h.push_back(k[m][j] * num(ip.C[i][l][m]));
          h.push_back(-(k[m][l] * dw(dw(ip.gamma[m], i), j)));
          h.push_back(-(k[i][m] * num(ip.C[l][j][m])));
          h.push_back(-(k[m][l] * num(ip.C[i][j][m])));
          h.push_back(k[m][j] * dw(dw(ip.gamma[m], i), l));
          t.push_back(half(sum(h)));
        }
        red1.push_back(sum(t));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t m = j + 1; m < n; ++m) {
        std::vector<Expr> t;
        for (std::size_t l = 0; l < n; ++l) {
          t.push_back(ip.r[i][j][l] * k[l][m]);
          t.push_back(ip.r[j][m][l] * k[l][i]);
          t.push_back(ip.r[m][i][l] * k[l][j]);
        }
        red2.push_back(sum(t));
      }
    }
  }
  Report rep;
  rep.title = "reduced Helmholtz conditions";
  rep.add(sweep.residual("symmetry", sym));
  rep.add(sweep.residual("gamma(k)", gk));
  rep.add(sweep.residual("phi", ph));
  rep.add(sweep.residual("dk/dw", dk));
  Family r1 = sweep.residual("redundant-1", red1);
  r1.informational = true;
  rep.add(std::move(r1));
  Family r2 = sweep.residual("redundant-2", red2);
  r2.informational = true;
  rep.add(std::move(r2));
  rep.add(named(sweep.min_abs("det", determinant(k)), "min |det k| over the sample box only"));
  return rep;
}

Form omega_form(const IpData& ip, const Multiplier& k) {
  require_square(k, ip.n, "multiplier");
  Form out(ip.algebroid, 2);
  for (std::size_t i = 0; i < ip.n; ++i) {
    for (std::size_t j = 0; j < ip.n; ++j) {
      if (k[i][j].is_zero()) continue;
      out = out + wedge(k[i][j] * ip.Psi(i), ip.Theta(j));
    }
  }
  return out;
}

Report two_form_checks(const IpData& ip, const Multiplier& k, const SampleSpec& spec) {
  const std::size_t n = ip.n;
  const Sweep sweep(ip.chart, spec);
  const Form omega = omega_form(ip, k);
  const Section G = ip.Gamma0();
  std::vector<Section> Ws, Hs;
  for (std::size_t i = 0; i < n; ++i) {
    Ws.push_back(ip.Wsec(i));
    Hs.push_back(ip.H(i));
  }
  Report rep;
  rep.title = "two-form conditions";

  // (1) Omega^n evaluated on (W_1..W_n, H_1..H_n).
  Form top = omega;
  for (std::size_t p = 1; p < n; ++p) top = wedge(top, omega);
  std::vector<Section> frame = Ws;
  frame.insert(frame.end(), Hs.begin(), Hs.end());
  rep.add(named(sweep.min_abs("maximal rank", apply_form(top, frame)),
                "min |Omega^n(W_1..W_n, H_1..H_n)| over the sample box only"));

  // (2) Omega(W_i, W_j)
  std::vector<Expr> ww;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::vector<Section> args{Ws[i], Ws[j]};
      ww.push_back(apply_form(omega, args));
    }
  }
  rep.add(sweep.residual("Omega(W,W)", ww));

  // (3) Gamma0 contraction
  rep.add(sweep.residual("iota(Gamma0)Omega", interior_product(G, omega).coefficients()));

  // (4) dOmega on every triple type of the adapted basis
  const Form d = exterior_derivative(omega);
  const auto eval3 = [&](const Section& a, const Section& b, const Section& c) {
    const std::vector<Section> args{a, b, c};
    return apply_form(d, args);
  };
  std::vector<Expr> gww, gwh, ghh, wwh, www, whh, hhh;
  std::vector<Expr> closed;
  const auto dw = [&](const Expr& f, std::size_t i) { return differentiate(f, ip.chart.name(1 + i)); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Expr v_gwh = eval3(G, Ws[i], Hs[j]);
      gwh.push_back(v_gwh);
      std::vector<Expr> t{ip.gamma_apply(k[i][j])};
      for (std::size_t m = 0; m < n; ++m) {
        t.push_back(-(k[m][j] * ip.lambda[i][m]));
        t.push_back(-(k[i][m] * ip.lambda[j][m]));
      }
      closed.push_back(v_gwh - sum(t));
      if (i < j) {
        const Expr v_gww = eval3(G, Ws[i], Ws[j]);
        gww.push_back(v_gww);
        closed.push_back(v_gww - (k[i][j] - k[j][i]));
        const Expr v_ghh = eval3(G, Hs[i], Hs[j]);
        ghh.push_back(v_ghh);
        std::vector<Expr> p;
        for (std::size_t m = 0; m < n; ++m) {
          p.push_back(k[m][i] * ip.phi[j][m]);
          p.push_back(-(k[m][j] * ip.phi[i][m]));
        }
        closed.push_back(v_ghh - sum(p));
        for (std::size_t m = 0; m < n; ++m) {
          const Expr v_wwh = eval3(Ws[i], Ws[j], Hs[m]);
          wwh.push_back(v_wwh);
          closed.push_back(v_wwh - (dw(k[j][m], i) - dw(k[i][m], j)));
          whh.push_back(eval3(Ws[m], Hs[i], Hs[j]));
          for (std::size_t l = j + 1; l < n; ++l) {
            if (m == 0) {
              www.push_back(eval3(Ws[i], Ws[j], Ws[l]));
              hhh.push_back(eval3(Hs[i], Hs[j], Hs[l]));
            }
          }
        }
      }
    }
  }
  rep.add(named(sweep.residual("dOmega(Gamma0,W,W)", gww), "symmetry"));
  rep.add(named(sweep.residual("dOmega(Gamma0,W,H)", gwh), "gamma(k)"));
  rep.add(named(sweep.residual("dOmega(Gamma0,H,H)", ghh), "phi"));
  rep.add(named(sweep.residual("dOmega(W,W,H)", wwh), "dk/dw"));
  rep.add(named(sweep.residual("dOmega(W,W,W)", www), ""));
  rep.add(named(sweep.residual("dOmega(W,H,H)", whh), ""));
  rep.add(named(sweep.residual("dOmega(H,H,H)", hhh), ""));
  rep.add(named(sweep.residual("dOmega closed forms", closed), "generic dOmega against the component formulas"));
  return rep;
}

ExtendedSection extended_from_multiplier(const IpData& ip, const Multiplier& k) {
  const std::size_t n = ip.n;
  require_square(k, n, "multiplier");
  const auto dw = [&](const Expr& f, std::size_t i) { return differentiate(f, ip.chart.name(1 + i)); };
  ExtendedSection ext{k, cube(n), cube(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t l = 0; l < n; ++l) {
        ext.P[i][j][l] = simplify(-dw(k[i][j], l));
        std::vector<Expr> t;
        for (std::size_t m = 0; m < n; ++m) {
          t.push_back(ip.psi[l][m] * dw(k[i][j], m));
          std::vector<Expr> h{k[m][i] * num(ip.C[j][l][m]), k[m][j] * num(ip.C[i][l][m]),
                              -(k[m][l] * dw(dw(ip.gamma[m], i), j))};
          t.push_back(half(sum(h)));
        }
        ext.Q[i][j][l] = simplify(-sum(t));
      }
    }
  }
  return ext;
}

Report sigma_precondition(const IpData& ip, const SampleSpec& spec) {
  const std::size_t n = ip.n;
  const Sweep sweep(ip.chart, spec);
  std::vector<Expr> ph, curv;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const auto s = [&](std::size_t i, std::size_t j) {
        return ((i == a && j == b) || (i == b && j == a)) ? 1.0 : 0.0;
      };
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          std::vector<Expr> t;
          for (std::size_t k = 0; k < n; ++k) {
            if (s(i, k) != 0.0) t.push_back(ip.phi[j][k]);
            if (s(j, k) != 0.0) t.push_back(-ip.phi[i][k]);
          }
          ph.push_back(sum(t));
          for (std::size_t k = j + 1; k < n; ++k) {
            std::vector<Expr> c;
            for (std::size_t l = 0; l < n; ++l) {
              if (s(i, l) != 0.0) c.push_back(ip.r[j][k][l]);
              if (s(j, l) != 0.0) c.push_back(ip.r[k][i][l]);
              if (s(k, l) != 0.0) c.push_back(ip.r[i][j][l]);
            }
            curv.push_back(sum(c));
          }
        }
      }
    }
  }
  Report rep;
  rep.title = "differential-ideal precondition for the sigma system";
  rep.add(named(sweep.residual("phi condition", ph), "s_ik phi_j^k - s_jk phi_i^k for every symmetric s"));
  rep.add(named(sweep.residual("curvature condition", curv), "cyclic s_il r^l_jk for every symmetric s"));
  return rep;
}

Report sigma_residual(const IpData& ip, const ExtendedSection& ext, const SampleSpec& spec) {
  const std::size_t n = ip.n;
  require_square(ext.s, n, "s");
  require_cube(ext.P, n, "P");
  require_cube(ext.Q, n, "Q");
  Report pre = sigma_precondition(ip, spec);
  if (!pre.pass()) throw PreconditionFailed("the sigma forms do not generate a differential ideal", std::move(pre));
  const Sweep sweep(ip.chart, spec);
  const auto dw = [&](const Expr& f, std::size_t i) { return differentiate(f, ip.chart.name(1 + i)); };
  const auto& s = ext.s;
  std::vector<Expr> fa, fb, fc, ssym, psym, qsym;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i < j) ssym.push_back(s[i][j] - s[j][i]);
      std::vector<Expr> a{ip.gamma_apply(s[i][j])};
      for (std::size_t k = 0; k < n; ++k) {
        a.push_back(-(s[k][i] * ip.lambda[j][k]));
        a.push_back(-(s[k][j] * ip.lambda[i][k]));
      }
      fa.push_back(sum(a));
      for (std::size_t l = 0; l < n; ++l) {
        fb.push_back(ext.P[i][j][l] + dw(s[i][j], l));
        std::vector<Expr> c{ext.Q[i][j][l]};
        for (std::size_t k = 0; k < n; ++k) {
          c.push_back(ip.psi[l][k] * dw(s[i][j], k));
          std::vector<Expr> h{s[k][i] * num(ip.C[j][l][k]), s[k][j] * num(ip.C[i][l][k]),
                              -(s[k][l] * dw(dw(ip.gamma[k], i), j))};
          c.push_back(half(sum(h)));
        }
        fc.push_back(sum(c));
        std::array<std::size_t, 3> sorted{i, j, l};
        std::sort(sorted.begin(), sorted.end());
        psym.push_back(ext.P[i][j][l] - ext.P[sorted[0]][sorted[1]][sorted[2]]);
        qsym.push_back(ext.Q[i][j][l] - ext.Q[sorted[0]][sorted[1]][sorted[2]]);
      }
    }
  }
  Report rep;
  rep.title = "sigma system along the section";
  for (const auto& f : pre.families) {
    Family g = f;
    g.informational = true;
    rep.add(std::move(g));
  }
  rep.add(sweep.residual("(a)", fa));
  rep.add(sweep.residual("(b)", fb));
  rep.add(sweep.residual("(c)", fc));
  rep.add(sweep.residual("s symmetry", ssym));
  rep.add(sweep.residual("P symmetry", psym));
  rep.add(sweep.residual("Q symmetry", qsym));
  rep.add(named(sweep.min_abs("det s", determinant(s)), "min |det s| over the sample box only"));
  return rep;
}

std::vector<Expr> euler_poincare_residual(const IpData& ip, const Expr& l) {
  const std::size_t n = ip.n;
  std::vector<Expr> dl;
  for (std::size_t j = 0; j < n; ++j) dl.push_back(differentiate(l, ip.chart.name(1 + j)));
  std::vector<Expr> V;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Expr> t{ip.gamma_apply(dl[j])};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        if (ip.C[i][j][k] != 0.0) t.push_back(-(num(ip.C[i][j][k]) * dl[k] * ip.w(i)));
      }
    }
    V.push_back(simplify(sum(t)));
  }
  return V;
}

Multiplier hessian(const IpData& ip, const Expr& l) {
  Multiplier k = square(ip.n);
  for (std::size_t i = 0; i < ip.n; ++i) {
    for (std::size_t j = 0; j < ip.n; ++j) {
      k[i][j] = simplify(differentiate(differentiate(l, ip.chart.name(1 + i)), ip.chart.name(1 + j)));
    }
  }
  return k;
}

MuNu extract_mu_nu(const IpData& ip, const Expr& l, const SampleSpec& spec) {
  const std::size_t n = ip.n;
  const auto V = euler_poincare_residual(ip, l);
  std::vector<Expr> second;
  for (const auto& v : V) {
    for (std::size_t j = 0; j < n; ++j) {
      const Expr dj = differentiate(v, ip.chart.name(1 + j));
      for (std::size_t k = j; k < n; ++k) second.push_back(differentiate(dj, ip.chart.name(1 + k)));
    }
  }
  const Sweep sweep(ip.chart, spec);
  Family affine = sweep.residual("affine in w", second);
  if (!affine.pass) {
    std::ostringstream os;
    for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << "V" << i + 1 << " = " << to_string(V[i]);
    throw NotAffine(affine.value, os.str());
  }
  std::map<std::string, Expr, std::less<>> origin;
  for (std::size_t i = 0; i < n; ++i) origin.emplace(ip.chart.name(1 + i), Expr(0));
  MuNu out{square(n), {}, std::move(affine)};
  for (std::size_t i = 0; i < n; ++i) {
    out.nu.push_back(simplify(substitute(V[i], origin)));
    for (std::size_t j = 0; j < n; ++j) {
      out.mu[j][i] = simplify(substitute(differentiate(V[i], ip.chart.name(1 + j)), origin));
    }
  }
  return out;
}

std::vector<std::vector<double>> d_matrix(const StructureConstants& C) {
  const std::size_t n = C.size();
  std::vector<std::vector<double>> d;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(C[i][j]);
  }
  return d;
}

CohomologyResult cohomology_obstruction(const CohomologyProblem& prob, const SampleSpec& spec) {
  check_structure_constants(prob.C);
  const std::size_t n = prob.C.size();
  require_square(prob.mu, n, "mu");
  if (prob.nu.size() != n) throw ShapeMismatch("nu needs " + std::to_string(n) + " components");
  const Chart chart({"t"});
  for (const auto& row : prob.mu) {
    for (const auto& e : row) {
      for (const auto& v : free_variables(e)) {
        if (!chart.contains(v)) throw UnknownVariable(v + " (mu depends on t only)");
      }
    }
  }
  for (const auto& e : prob.nu) {
    for (const auto& v : free_variables(e)) {
      if (!chart.contains(v)) throw UnknownVariable(v + " (nu depends on t only)");
    }
  }
  const Sweep sweep(chart, spec);
  const auto& C = prob.C;
  const auto& mu = prob.mu;
  const auto& nu = prob.nu;
  std::vector<Expr> anti, coh1, coh2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      anti.push_back(mu[i][j] + mu[j][i]);
      if (i == j) continue;
      std::vector<Expr> t{differentiate(mu[i][j], "t")};
      for (std::size_t l = 0; l < n; ++l) {
        if (C[i][j][l] != 0.0) t.push_back(num(C[i][j][l]) * nu[l]);
      }
      coh1.push_back(sum(t));
      for (std::size_t k = j + 1; k < n; ++k) {
        std::vector<Expr> c;
        for (std::size_t l = 0; l < n; ++l) {
          if (C[j][k][l] != 0.0) c.push_back(mu[i][l] * num(C[j][k][l]));
          if (C[k][i][l] != 0.0) c.push_back(mu[j][l] * num(C[k][i][l]));
          if (C[i][j][l] != 0.0) c.push_back(mu[k][l] * num(C[i][j][l]));
        }
        coh2.push_back(sum(c));
      }
    }
  }
  CohomologyResult out;
  Report& rep = out.report;
  rep.title = "cohomology obstruction";
  rep.add(sweep.residual("mu antisymmetry", anti));
  rep.add(sweep.residual("coh-1", coh1));
  rep.add(sweep.residual("coh-2", coh2));

  const auto d = d_matrix(C);
  out.d_rank = exact_rank(d);
  rep.metric("d rank", static_cast<double>(out.d_rank));
  // theta_p = d^+ mu, symbolic because d is constant.
  const std::size_t pairs = d.size();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pairs), static_cast<Eigen::Index>(n));
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t k = 0; k < n; ++k) D(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = d[p][k];
  }
  const Eigen::MatrixXd Dp = pairs ? pseudo_inverse(D) : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 0);
  std::vector<Expr> mu_vec;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) mu_vec.push_back(mu[i][j]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Expr> t;
    for (std::size_t p = 0; p < pairs; ++p) {
      const double c = Dp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
      if (std::abs(c) > 1e-14) t.push_back(num(c) * mu_vec[p]);
    }
    out.theta_p.push_back(simplify(sum(t)));
  }
  std::vector<Expr> h2, h1;
  for (std::size_t p = 0, i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      std::vector<Expr> t{mu[i][j]};
      std::vector<Expr> x;
      for (std::size_t k = 0; k < n; ++k) {
        if (C[i][j][k] == 0.0) continue;
        t.push_back(-(num(C[i][j][k]) * out.theta_p[k]));
        x.push_back(num(C[i][j][k]) * (nu[k] + differentiate(out.theta_p[k], "t")));
      }
      h2.push_back(sum(t));
      h1.push_back(sum(x));
    }
  }
  rep.add(named(sweep.residual("H2", h2), "mu = d theta solvable at every t sample"));
  rep.add(named(sweep.residual("H1", h1), "nu + d(theta_p)/dt annihilates [g, g] at every t sample"));
  std::ostringstream th;
  for (std::size_t k = 0; k < n; ++k) th << (k ? ", " : "") << "theta" << k + 1 << " = " << to_string(out.theta_p[k]);
  rep.note("theta_p", th.str());
  const bool h2ok = rep.find("H2")->pass;
  const bool h1ok = rep.find("H1")->pass;
  rep.note("verdict", h2ok && h1ok ? "invariant Lagrangian obstruction vanishes"
                                   : (!h2ok ? "H2 class does not vanish" : "H1 class does not vanish"));
  return out;
}

}  // namespace aeds
