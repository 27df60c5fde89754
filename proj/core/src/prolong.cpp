#include "aeds/prolong.hpp"

#include "aeds/errors.hpp"

namespace aeds {

namespace {

std::vector<std::string> labels_for(const Chart& fiber, std::vector<std::string> labels) {
  if (labels.empty()) {
    for (const auto& y : fiber.names()) labels.push_back("E_" + y);
  }
  if (labels.size() != fiber.dim()) throw ShapeMismatch("one label per fiber coordinate required");
  return labels;
}

void check_fiber(const Algebroid& base, const Chart& fiber) {
  for (const auto& y : fiber.names()) {
    if (base.chart().contains(y)) throw NameCollision("fiber coordinate '" + y + "' is already a base coordinate");
  }
}

ExprCube zero_cube(std::size_t r) { return ExprCube(r, ExprMatrix(r, std::vector<Expr>(r, Expr(0)))); }

}  // namespace

ProlongedAlgebroid prolong_trivial(const Algebroid& base, const Chart& fiber, std::vector<std::string> fiber_labels) {
  check_fiber(base, fiber);
  const Chart chart = base.chart().extended(fiber);
  const std::size_t rb = base.rank();
  const std::size_t m = fiber.dim();
  const std::size_t n = base.dim();
  const std::size_t r = rb + m;
  ExprMatrix anchor(r, std::vector<Expr>(n + m, Expr(0)));
  for (std::size_t a = 0; a < rb; ++a) {
    for (std::size_t i = 0; i < n; ++i) anchor[a][i] = base.anchor(a, i);
  }
  for (std::size_t mu = 0; mu < m; ++mu) anchor[rb + mu][n + mu] = Expr(1);
  ExprCube L = zero_cube(r);
  for (std::size_t a = 0; a < rb; ++a) {
    for (std::size_t b = 0; b < rb; ++b) {
      for (std::size_t c = 0; c < rb; ++c) L[a][b][c] = base.structure(a, b, c);
    }
  }
  auto names = base.basis_names();
  for (auto& l : labels_for(fiber, std::move(fiber_labels))) names.push_back(std::move(l));
  return ProlongedAlgebroid{base, Algebroid(chart, r, std::move(anchor), std::move(L), std::move(names)), fiber, {}};
}

Curvature curvature(const Algebroid& base, const Chart& fiber, const ExprMatrix& connection) {
  const std::size_t n = base.dim();
  const std::size_t m = fiber.dim();
  const std::size_t rb = base.rank();
  if (connection.size() != m) throw ShapeMismatch("connection needs one row per fiber coordinate");
  for (const auto& row : connection) {
    if (row.size() != n) throw ShapeMismatch("connection rows need one entry per base coordinate");
  }
  const Chart chart = base.chart().extended(fiber);
  for (const auto& row : connection) {
    for (const auto& e : row) {
      for (const auto& v : free_variables(e)) {
        if (!chart.contains(v)) throw UnknownVariable(v + " (in connection)");
      }
    }
  }
  // h_i(f) = df/dx^i + A^mu_i df/dy^mu
  const auto h = [&](std::size_t i, const Expr& f) {
    std::vector<Expr> terms{differentiate(f, base.chart().name(i))};
    for (std::size_t mu = 0; mu < m; ++mu) terms.push_back(connection[mu][i] * differentiate(f, fiber.name(mu)));
    return sum(terms);
  };
  Curvature c;
  c.K.assign(m, ExprMatrix(n, std::vector<Expr>(n, Expr(0))));
  for (std::size_t mu = 0; mu < m; ++mu) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) c.K[mu][i][j] = h(i, connection[mu][j]) - h(j, connection[mu][i]);
    }
  }
  c.M.assign(m, ExprMatrix(rb, std::vector<Expr>(rb, Expr(0))));
  for (std::size_t mu = 0; mu < m; ++mu) {
    for (std::size_t a = 0; a < rb; ++a) {
      for (std::size_t b = 0; b < rb; ++b) {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (base.anchor(a, i).is_zero() || base.anchor(b, j).is_zero()) continue;
            terms.push_back(base.anchor(a, i) * base.anchor(b, j) * c.K[mu][i][j]);
          }
        }
        c.M[mu][a][b] = sum(terms);
      }
    }
  }
  c.N.assign(m, ExprMatrix(rb, std::vector<Expr>(m, Expr(0))));
  for (std::size_t nu = 0; nu < m; ++nu) {
    for (std::size_t a = 0; a < rb; ++a) {
      for (std::size_t mu = 0; mu < m; ++mu) {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < n; ++i) {
          terms.push_back(-(base.anchor(a, i) * differentiate(connection[nu][i], fiber.name(mu))));
        }
        c.N[nu][a][mu] = sum(terms);
      }
    }
  }
  return c;
}

ProlongedAlgebroid prolong_connection(const Algebroid& base, const Chart& fiber, const ExprMatrix& connection,
                                      std::vector<std::string> fiber_labels) {
  check_fiber(base, fiber);
  const Curvature curv = curvature(base, fiber, connection);
  const Chart chart = base.chart().extended(fiber);
  const std::size_t rb = base.rank();
  const std::size_t m = fiber.dim();
  const std::size_t n = base.dim();
  const std::size_t r = rb + m;
  ExprMatrix anchor(r, std::vector<Expr>(n + m, Expr(0)));
  for (std::size_t a = 0; a < rb; ++a) {
    for (std::size_t i = 0; i < n; ++i) anchor[a][i] = base.anchor(a, i);
    for (std::size_t mu = 0; mu < m; ++mu) {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < n; ++i) terms.push_back(base.anchor(a, i) * connection[mu][i]);
      anchor[a][n + mu] = sum(terms);
    }
  }
  for (std::size_t mu = 0; mu < m; ++mu) anchor[rb + mu][n + mu] = Expr(1);
  ExprCube L = zero_cube(r);
  for (std::size_t a = 0; a < rb; ++a) {
    for (std::size_t b = 0; b < rb; ++b) {
      for (std::size_t c = 0; c < rb; ++c) L[a][b][c] = base.structure(a, b, c);
      for (std::size_t mu = 0; mu < m; ++mu) L[a][b][rb + mu] = curv.M[mu][a][b];
    }
    for (std::size_t mu = 0; mu < m; ++mu) {
      for (std::size_t nu = 0; nu < m; ++nu) {
        L[a][rb + mu][rb + nu] = curv.N[nu][a][mu];
        L[rb + mu][a][rb + nu] = -curv.N[nu][a][mu];
      }
    }
  }
  auto names = base.basis_names();
  for (auto& l : labels_for(fiber, std::move(fiber_labels))) names.push_back(std::move(l));
  ExprMatrix conn = connection;
  for (auto& row : conn) {
    for (auto& e : row) e = simplify(e);
  }
  return ProlongedAlgebroid{base, Algebroid(chart, r, std::move(anchor), std::move(L), std::move(names)), fiber,
                            std::move(conn)};
}

Expr restrict_to(const ProlongedAlgebroid& p, const BundleSection& i, const Expr& f) {
  if (i.ybar.size() != p.fiber_dim()) throw ShapeMismatch("section needs one expression per fiber coordinate");
  std::map<std::string, Expr, std::less<>> sub;
  for (std::size_t mu = 0; mu < p.fiber_dim(); ++mu) sub.emplace(p.fiber.name(mu), i.ybar[mu]);
  return substitute(f, sub);
}

Form pullback(const ProlongedAlgebroid& p, const BundleSection& i, const Form& w) {
  if (!same(w.algebroid(), p.total)) throw AlgebroidMismatch();
  if (i.ybar.size() != p.fiber_dim()) throw ShapeMismatch("section needs one expression per fiber coordinate");
  for (const auto& y : i.ybar) {
    for (const auto& v : free_variables(y)) {
      if (!p.base.chart().contains(v)) throw UnknownVariable(v + " (section must depend on base coordinates only)");
    }
  }
  const Algebroid& A = p.base;
  const std::size_t rb = A.rank();
  const std::size_t n = A.dim();
  // Pullbacks of the total dual basis.
  std::vector<Form> pulled;
  for (std::size_t a = 0; a < rb; ++a) pulled.push_back(Form::basis(A, a));
  for (std::size_t mu = 0; mu < p.fiber_dim(); ++mu) {
    Form f(A, 1);
    for (std::size_t a = 0; a < rb; ++a) {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < n; ++k) {
        if (A.anchor(a, k).is_zero()) continue;
        Expr slope = differentiate(i.ybar[mu], A.chart().name(k));
        if (!p.connection.empty()) slope = slope - restrict_to(p, i, p.connection[mu][k]);
        terms.push_back(A.anchor(a, k) * slope);
      }
      f.accumulate(Mask{1} << a, sum(terms));
    }
    pulled.push_back(std::move(f));
  }
  Form out(A, w.degree());
  for (const auto& [m, c] : w.terms()) {
    Form term = Form::function(A, restrict_to(p, i, c));
    for (auto idx : mask_indices(m)) term = wedge(term, pulled[idx]);
    out = out + term;
  }
  return out;
}

}  // namespace aeds
