#include "aeds/eds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "aeds/errors.hpp"
#include "aeds/linalg.hpp"

namespace aeds {

namespace {

std::vector<Mask> masks_of_degree(std::size_t r, std::size_t q) {
  std::vector<Mask> out;
  if (q > r) return out;
  if (r == 64 && q == 64) return {~Mask{0}};
  const Mask limit = Mask{1} << r;
  for (Mask m = 0; m < limit; ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) == q) out.push_back(m);
  }
  return out;
}

void require_degree_one(const IdealSpec& ideal) {
  for (std::size_t k = 0; k < ideal.size(); ++k) {
    if (ideal.generators[k].degree() != 1) {
      throw DegreeError("generator '" + ideal.names[k] + "' has degree " +
                        std::to_string(ideal.generators[k].degree()) + "; 1-forms required");
    }
  }
}

// Trivial-basis components (theta_a, varpi_mu) of a generator on a prolongation.
struct Split {
  std::vector<Expr> theta;
  std::vector<Expr> varpi;
};

Split split_generator(const ProlongedAlgebroid& p, const Form& g) {
  const std::size_t rb = p.base_rank();
  const std::size_t m = p.fiber_dim();
  Split s;
  for (std::size_t a = 0; a < rb; ++a) s.theta.push_back(g.coefficient(Mask{1} << a));
  for (std::size_t mu = 0; mu < m; ++mu) s.varpi.push_back(g.coefficient(Mask{1} << p.fiber_index(mu)));
  if (!p.connection.empty()) {
    // E^mu(hat) = E^mu - rho^i_a A^mu_i e^a
    for (std::size_t a = 0; a < rb; ++a) {
      std::vector<Expr> terms{s.theta[a]};
      for (std::size_t mu = 0; mu < m; ++mu) {
        for (std::size_t i = 0; i < p.base.dim(); ++i) {
          if (p.base.anchor(a, i).is_zero() || p.connection[mu][i].is_zero()) continue;
          terms.push_back(-(s.varpi[mu] * p.base.anchor(a, i) * p.connection[mu][i]));
        }
      }
      s.theta[a] = sum(terms);
    }
  }
  return s;
}

}  // namespace

IdealSpec::IdealSpec(Algebroid alg, std::vector<Form> gens, std::vector<std::string> nm)
    : algebroid(std::move(alg)), generators(std::move(gens)), names(std::move(nm)) {
  if (names.empty()) {
    for (std::size_t k = 0; k < generators.size(); ++k) names.push_back("g" + std::to_string(k + 1));
  }
  if (names.size() != generators.size()) throw ShapeMismatch("one name per generator required");
  for (std::size_t k = 0; k < generators.size(); ++k) {
    if (!same(generators[k].algebroid(), algebroid)) throw AlgebroidMismatch();
    if (generators[k].empty()) throw ShapeMismatch("generator '" + names[k] + "' is zero");
  }
}

std::vector<std::vector<double>> membership_points(const Chart& chart, const SampleSpec& spec) {
  auto pts = sample_points(chart, spec);
  const std::size_t n = chart.dim();
  std::vector<Interval> box;
  for (std::size_t i = 0; i < n; ++i) box.push_back(effective_box(chart, spec, i));
  std::vector<double> center(n);
  for (std::size_t i = 0; i < n; ++i) center[i] = 0.5 * (box[i].lo + box[i].hi);
  pts.push_back(center);
  if (n <= 6) {
    for (std::size_t c = 0; c < (std::size_t{1} << n); ++c) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = (c >> i) & 1 ? box[i].hi : box[i].lo;
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

Family ideal_membership(const IdealSpec& ideal, const Form& eta, const SampleSpec& spec, std::string name) {
  if (!same(eta.algebroid(), ideal.algebroid)) throw AlgebroidMismatch();
  const Algebroid& alg = ideal.algebroid;
  const Chart& chart = alg.chart();
  const std::size_t r = alg.rank();
  const std::size_t q = eta.degree();
  const auto rows = masks_of_degree(r, q);
  std::map<Mask, std::size_t> row_of;
  for (std::size_t i = 0; i < rows.size(); ++i) row_of.emplace(rows[i], i);

  // Columns: beta ^ g_k, compiled coefficientwise.
  struct Column {
    std::vector<std::pair<std::size_t, CompiledExpr>> entries;
  };
  std::vector<Column> cols;
  for (const auto& g : ideal.generators) {
    if (g.degree() > q) continue;
    for (Mask beta : masks_of_degree(r, q - g.degree())) {
      const auto idx = mask_indices(beta);
      const Form w = wedge(Form::monomial(alg, idx, Expr(1)), g);
      if (w.empty()) continue;
      Column c;
      for (const auto& [m, coeff] : w.terms()) c.entries.emplace_back(row_of.at(m), CompiledExpr(coeff, chart));
      cols.push_back(std::move(c));
    }
  }
  std::vector<std::pair<std::size_t, CompiledExpr>> rhs;
  for (const auto& [m, coeff] : eta.terms()) rhs.emplace_back(row_of.at(m), CompiledExpr(coeff, chart));

  Family fam;
  fam.name = std::move(name);
  double worst = -1.0;
  for (const auto& x : membership_points(chart, spec)) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
    try {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        for (const auto& [i, c] : cols[j].entries) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c(x);
      }
      for (const auto& [i, c] : rhs) b(static_cast<Eigen::Index>(i)) = c(x);
    } catch (const EvalError& err) {
      std::ostringstream os;
      os << err.what() << " at sample point (";
      for (std::size_t i = 0; i < chart.dim(); ++i) os << (i ? ", " : "") << chart.name(i) << "=" << x[i];
      os << ")";
      throw EvalError(os.str());
    }
    const double res = least_squares(A, b).residual;
    const double scale = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
    if (res > spec.tol_abs + spec.tol_rel * scale) fam.pass = false;
    if (res > worst) {
      worst = res;
      fam.worst_point = labelled(chart, x);
    }
  }
  fam.value = std::max(worst, 0.0);
  return fam;
}

Report is_differential_ideal(const IdealSpec& ideal, const SampleSpec& spec) {
  Report rep;
  rep.title = "differential ideal";
  for (std::size_t k = 0; k < ideal.size(); ++k) {
    const Form dg = exterior_derivative(ideal.generators[k]);
    rep.add(ideal_membership(ideal, dg, spec, "d(" + ideal.names[k] + ")"));
  }
  const Chart& c = ideal.algebroid.chart();
  std::ostringstream box;
  for (std::size_t i = 0; i < c.dim(); ++i) {
    const Interval b = effective_box(c, spec, i);
    box << (i ? ", " : "") << c.name(i) << " in [" << b.lo << ", " << b.hi << "]";
  }
  rep.note("box", box.str());
  return rep;
}

std::vector<std::vector<Expr>> integral_fields(const ProlongedAlgebroid& p, const IdealSpec& ideal,
                                               const BundleSection& i) {
  if (!same(ideal.algebroid, p.total)) throw AlgebroidMismatch();
  require_degree_one(ideal);
  if (i.ybar.size() != p.fiber_dim()) throw ShapeMismatch("section needs one expression per fiber coordinate");
  const Algebroid& A = p.base;
  std::vector<std::vector<Expr>> out;
  for (const auto& g : ideal.generators) {
    const Split s = split_generator(p, g);
    std::vector<Expr> row;
    for (std::size_t a = 0; a < A.rank(); ++a) {
      std::vector<Expr> terms{restrict_to(p, i, s.theta[a])};
      for (std::size_t mu = 0; mu < p.fiber_dim(); ++mu) {
        if (s.varpi[mu].is_zero()) continue;
        terms.push_back(A.anchor_apply(a, i.ybar[mu]) * restrict_to(p, i, s.varpi[mu]));
      }
      row.push_back(sum(terms));
    }
    out.push_back(std::move(row));
  }
  return out;
}

Report integral_residual(const ProlongedAlgebroid& p, const IdealSpec& ideal, const BundleSection& i,
                         const SampleSpec& spec) {
  const auto fields = integral_fields(p, ideal, i);
  Report rep;
  rep.title = "integral manifold";
  const Sweep sweep(p.base.chart(), spec);
  for (std::size_t k = 0; k < fields.size(); ++k) rep.add(sweep.residual("I*(" + ideal.names[k] + ")", fields[k]));
  return rep;
}

std::vector<std::vector<Expr>> dependency_fields(const ProlongedAlgebroid& p, const IdealSpec& ideal,
                                                 const BundleSection& i) {
  if (!same(ideal.algebroid, p.total)) throw AlgebroidMismatch();
  require_degree_one(ideal);
  if (i.ybar.size() != p.fiber_dim()) throw ShapeMismatch("section needs one expression per fiber coordinate");
  const Algebroid& A = p.base;
  const std::size_t rb = A.rank();
  const std::size_t m = p.fiber_dim();
  // X_a(ybar^mu)
  std::vector<std::vector<Expr>> xy(rb, std::vector<Expr>(m));
  for (std::size_t a = 0; a < rb; ++a) {
    for (std::size_t mu = 0; mu < m; ++mu) xy[a][mu] = A.anchor_apply(a, i.ybar[mu]);
  }
  // Y_a(f) = X_a(f) + X_a(ybar^nu) df/dy^nu, then y -> ybar.
  const auto Y = [&](std::size_t a, const Expr& f) {
    std::vector<Expr> terms{A.anchor_apply(a, f)};
    for (std::size_t nu = 0; nu < m; ++nu) terms.push_back(xy[a][nu] * differentiate(f, p.fiber.name(nu)));
    return restrict_to(p, i, sum(terms));
  };
  std::vector<std::vector<Expr>> out;
  for (const auto& g : ideal.generators) {
    const Split s = split_generator(p, g);
    std::vector<Expr> row;
    for (std::size_t a = 0; a < rb; ++a) {
      for (std::size_t b = a + 1; b < rb; ++b) {
        std::vector<Expr> terms{-Y(a, s.theta[b]), Y(b, s.theta[a])};
        for (std::size_t mu = 0; mu < m; ++mu) {
          terms.push_back(-(xy[b][mu] * Y(a, s.varpi[mu])));
          terms.push_back(xy[a][mu] * Y(b, s.varpi[mu]));
        }
        for (std::size_t c = 0; c < rb; ++c) {
          if (A.structure(a, b, c).is_zero()) continue;
          terms.push_back(A.structure(a, b, c) * restrict_to(p, i, s.theta[c]));
        }
        row.push_back(sum(terms));
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

Report dependency_residual(const ProlongedAlgebroid& p, const IdealSpec& ideal, const BundleSection& i,
                           const SampleSpec& spec) {
  const auto fields = dependency_fields(p, ideal, i);
  Report rep;
  rep.title = "dependency condition";
  const Sweep sweep(p.base.chart(), spec);
  for (std::size_t k = 0; k < fields.size(); ++k) rep.add(sweep.residual("dep(" + ideal.names[k] + ")", fields[k]));
  return rep;
}

}  // namespace aeds
