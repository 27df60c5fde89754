#include "aeds/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "aeds/errors.hpp"
#include "aeds/linalg.hpp"
#include "aeds/sampling.hpp"

namespace aeds {

namespace {

constexpr std::size_t kMaxRowsPerFamily = 4096;
constexpr double kCoefficientClean = 1e-12;
constexpr double kPivotTol = 1e-9;

void exponents_of_degree(std::size_t vars, int total, std::vector<int>& cur, std::size_t pos,
                         std::vector<std::vector<int>>& out) {
  if (pos + 1 == vars) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int e = total; e >= 0; --e) {
    cur[pos] = e;
    exponents_of_degree(vars, total - e, cur, pos + 1, out);
  }
}

// One linear condition instance, evaluated on k.
struct Condition {
  std::string family;
  std::vector<std::size_t> indices;
  std::function<Expr(const Multiplier&)> eval;
};

std::vector<Condition> conditions(const IpData& ip) {
  const std::size_t n = ip.n;
  std::vector<Condition> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      out.push_back({"gamma(k)", {i, j}, [&ip, i, j, n](const Multiplier& k) {
                       std::vector<Expr> t{ip.gamma_apply(k[i][j])};
                       for (std::size_t m = 0; m < n; ++m) {
                         if (!k[m][j].is_zero()) t.push_back(-(k[m][j] * ip.lambda[i][m]));
                         if (!k[i][m].is_zero()) t.push_back(-(k[i][m] * ip.lambda[j][m]));
                       }
                       return sum(t);
                     }});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.push_back({"phi", {i, j}, [&ip, i, j, n](const Multiplier& k) {
                       std::vector<Expr> t;
                       for (std::size_t m = 0; m < n; ++m) {
                         if (!k[m][i].is_zero()) t.push_back(k[m][i] * ip.phi[j][m]);
                         if (!k[m][j].is_zero()) t.push_back(-(k[m][j] * ip.phi[i][m]));
                       }
                       return sum(t);
                     }});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t l = 0; l < n; ++l) {
        out.push_back({"dk/dw", {i, j, l}, [&ip, i, j, l](const Multiplier& k) {
                         return differentiate(k[j][l], ip.chart.name(1 + i)) - differentiate(k[i][l], ip.chart.name(1 + j));
                       }});
      }
    }
  }
  return out;
}

// Reduced row echelon form of the rows of b (one basis vector per row).
std::vector<std::vector<double>> rref(Eigen::MatrixXd b) {
  const Eigen::Index rows = b.rows();
  const Eigen::Index cols = b.cols();
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index piv = r;
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      if (std::abs(b(i, c)) > std::abs(b(piv, c))) piv = i;
    }
    if (std::abs(b(piv, c)) < kPivotTol) continue;
    b.row(r).swap(b.row(piv));
    b.row(r) /= b(r, c);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != r) b.row(i) -= b(i, c) * b.row(r);
    }
    ++r;
  }
  std::vector<std::vector<double>> out(static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(cols)));
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = b(i, c);
  }
  return out;
}

std::vector<double> normalized(std::vector<double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return v;
  for (double& x : v) {
    x /= m;
    if (std::abs(x) < kCoefficientClean) x = 0.0;
  }
  return v;
}

std::size_t first_nonzero(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) return i;
  }
  return v.size();
}

}  // namespace

Expr Ansatz::monomial(std::size_t m, const Chart& chart) const {
  std::vector<Expr> f;
  for (std::size_t v = 0; v < monomials[m].size(); ++v) {
    if (monomials[m][v] > 0) f.push_back(pow(Expr::variable(chart.name(v)), monomials[m][v]));
  }
  return f.empty() ? Expr(1) : product(f);
}

Multiplier Ansatz::multiplier(const std::vector<double>& coeffs, const Chart& chart) const {
  Multiplier k(n, std::vector<Expr>(n, Expr(0)));
  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::vector<Expr> terms;
    for (std::size_t m = 0; m < monomials.size(); ++m) {
      const double c = coeffs.at(column(e, m));
      if (c != 0.0) terms.push_back(Expr(c) * monomial(m, chart));
    }
    const auto [a, b] = entries[e];
    k[a][b] = simplify(sum(terms));
    k[b][a] = k[a][b];
  }
  return k;
}

Ansatz make_ansatz(std::size_t n, std::size_t degree) {
  Ansatz a;
  a.n = n;
  a.degree = degree;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) a.entries.emplace_back(i, j);
  }
  std::vector<int> cur(n + 1, 0);
  for (int d = 0; d <= static_cast<int>(degree); ++d) exponents_of_degree(n + 1, d, cur, 0, a.monomials);
  return a;
}

CollocationSystem build_collocation(const IpData& ip, const Ansatz& ansatz, const SampleSpec& spec) {
  if (ansatz.n != ip.n) throw ShapeMismatch("ansatz size does not match the IP data");
  const auto conds = conditions(ip);
  std::map<std::string, std::size_t> per_family;
  for (const auto& c : conds) ++per_family[c.family];
  std::size_t widest = 1;
  for (const auto& [f, count] : per_family) widest = std::max(widest, count);
  const std::size_t cap = std::max<std::size_t>(1, kMaxRowsPerFamily / widest);
  const std::size_t want = std::max(spec.count, 4 * ansatz.unknowns());
  SampleSpec s = spec;
  s.count = std::min(want, cap);

  CollocationSystem sys;
  sys.points = sample_points(ip.chart, s);
  const std::size_t P = sys.points.size();
  const std::size_t U = ansatz.unknowns();
  sys.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(conds.size() * P), static_cast<Eigen::Index>(U));
  for (std::size_t c = 0; c < conds.size(); ++c) {
    for (std::size_t p = 0; p < P; ++p) sys.tags.push_back({conds[c].family, conds[c].indices, p});
  }
  const Multiplier zero(ip.n, std::vector<Expr>(ip.n, Expr(0)));
  for (std::size_t e = 0; e < ansatz.entries.size(); ++e) {
    const auto [a, b] = ansatz.entries[e];
    for (std::size_t m = 0; m < ansatz.monomials.size(); ++m) {
      Multiplier k = zero;
      k[a][b] = ansatz.monomial(m, ip.chart);
      k[b][a] = k[a][b];
      const auto col = static_cast<Eigen::Index>(ansatz.column(e, m));
      for (std::size_t c = 0; c < conds.size(); ++c) {
        const Expr v = simplify(conds[c].eval(k));
        if (v.is_zero()) continue;
        const CompiledExpr f(v, ip.chart);
        for (std::size_t p = 0; p < P; ++p) sys.matrix(static_cast<Eigen::Index>(c * P + p), col) = f(sys.points[p]);
      }
    }
  }
  return sys;
}

SearchResult search_multiplier(const IpData& ip, const SearchOptions& options, const SampleSpec& spec) {
  SearchResult res;
  const SampleSpec fresh = spec.with_seed(spec.seed ^ 0x5deece66dULL);
  bool any_null = false;
  bool any_verified = false;
  for (std::size_t d = 0; d <= options.max_degree; ++d) {
    const Ansatz ansatz = make_ansatz(ip.n, d);
    const CollocationSystem sys = build_collocation(ip, ansatz, spec);
    const Eigen::MatrixXd N = nullspace(sys.matrix);
    DegreeSummary sum_d;
    sum_d.degree = d;
    sum_d.unknowns = ansatz.unknowns();
    sum_d.rows = static_cast<std::size_t>(sys.matrix.rows());
    sum_d.nullity = static_cast<std::size_t>(N.cols());
    if (N.cols() > 0) {
      any_null = true;
      const auto basis = rref(N.transpose());
      std::vector<std::vector<double>> trials;
      for (const auto& v : basis) trials.push_back(normalized(v));
      // Sum of the basis vectors pivoting on constant diagonal entries.
      std::vector<double> diag(ansatz.unknowns(), 0.0);
      std::size_t diag_count = 0;
      for (const auto& v : basis) {
        const std::size_t piv = first_nonzero(v);
        const std::size_t e = piv / ansatz.monomials.size();
        if (piv % ansatz.monomials.size() == 0 && ansatz.entries[e].first == ansatz.entries[e].second) {
          for (std::size_t i = 0; i < v.size(); ++i) diag[i] += v[i];
          ++diag_count;
        }
      }
      if (diag_count > 1) trials.push_back(normalized(diag));
      const std::size_t structured = trials.size();
      SplitMix64 rng(spec.seed ^ (0x9e3779b97f4a7c15ULL * (d + 1)));
      for (std::size_t t = 0; t < options.trials && basis.size() > 1; ++t) {
        std::vector<double> v(ansatz.unknowns(), 0.0);
        for (const auto& b : basis) {
          const double c = 2.0 * rng.uniform() - 1.0;
          for (std::size_t i = 0; i < v.size(); ++i) v[i] += c * b[i];
        }
        trials.push_back(normalized(v));
      }
      std::vector<MultiplierCandidate> found_here;
      for (std::size_t ti = 0; ti < trials.size(); ++ti) {
        const auto& coeffs = trials[ti];
        ++sum_d.trials;
        MultiplierCandidate cand;
        cand.degree = d;
        cand.structured = ti < structured;
        cand.coefficients = coeffs;
        cand.k = ansatz.multiplier(coeffs, ip.chart);
        cand.report = helmholtz_residuals(ip, cand.k, fresh);
        bool conditions_hold = true;
        for (const auto& f : cand.report.families) {
          if (!f.informational && f.kind == FamilyKind::MaxAbs && !f.pass) conditions_hold = false;
        }
        if (!conditions_hold) continue;
        ++sum_d.verified;
        any_verified = true;
        cand.min_det = cand.report.value("det");
        sum_d.best_min_det = std::max(sum_d.best_min_det, cand.min_det);
        res.best_min_det = std::max(res.best_min_det, cand.min_det);
        if (cand.report.pass()) {
          ++sum_d.found;
          found_here.push_back(std::move(cand));
        }
      }
      std::stable_sort(found_here.begin(), found_here.end(), [](const auto& x, const auto& y) {
        if (x.structured != y.structured) return x.structured;
        return !x.structured && x.min_det > y.min_det;
      });
      if (found_here.size() > options.max_candidates) found_here.resize(options.max_candidates);
      for (auto& c : found_here) res.candidates.push_back(std::move(c));
    }
    res.degrees.push_back(sum_d);
  }
  if (res.found()) {
    res.verdict = kVerdictFound;
  } else if (!any_null) {
    res.verdict = kVerdictEmpty;
  } else if (any_verified) {
    res.verdict = kVerdictSingular;
  } else {
    res.verdict = kVerdictUnverified;
  }
  return res;
}

}  // namespace aeds
