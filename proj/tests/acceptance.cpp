// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "aeds/cli/commands.hpp"
#include "aeds/cli/problem.hpp"
#include "aeds/linalg.hpp"
#include "aeds/solver.hpp"
#include "fixtures.hpp"

using namespace aeds;
using namespace aeds::cli;

namespace {

const std::string kCorpus = AEDS_CORPUS_DIR;

ProblemFile corpus(const std::string& name) { return load_problem(kCorpus + "/" + name + ".toml"); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// Largest value among the non-informational max-abs families.
double worst(const Report& r) {
  double m = 0.0;
  for (const auto& f : r.families) {
    if (!f.informational && f.kind == FamilyKind::MaxAbs) m = std::max(m, f.value);
  }
  return m;
}

std::set<std::string> failing(const Report& r) {
  std::set<std::string> out;
  for (const auto& f : r.families) {
    if (!f.informational && !f.pass) out.insert(f.name);
  }
  return out;
}

// Max |coefficient| of an expanded form: exact zeros count as 0, anything
// left over is sampled.
double symbolic_residual(const Form& w, const Sweep& sweep) {
  double m = 0.0;
  for (const auto& [mask, c] : w.terms()) {
    const Expr e = expand(c);
    if (e.is_zero()) continue;
    m = std::max(m, e.is_const() ? std::abs(e.value()) : sweep.residual("coefficient", e).value);
  }
  return m;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
Outcome calculus_core() {
  const auto t0 = std::chrono::steady_clock::now();
  double dd = 0.0;
  double anti = 0.0;
  double intrinsic = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  for (const auto& entry : list_corpus(kCorpus)) {
    const ProblemFile pf = load_problem(entry.path);
    const Algebroid alg = pf.prolongation ? pf.prolongation->total : pf.algebroid ? *pf.algebroid : pf.ip->algebroid;
    ++count;
    SampleSpec spec = pf.sampling;
    spec.count = 64;
    spec.seed = 1000 + seed;
    const Sweep sweep(alg.chart(), spec);
    SplitMix64 rng(seed++);
    const std::size_t r = alg.rank();
    for (std::size_t q = 0; q <= std::min<std::size_t>(r, 3); ++q) {
      for (int rep = 0; rep < 3; ++rep) {
        const Form w = fx::random_form(rng, alg, q);
        const Form dw = exterior_derivative(w);
        dd = std::max(dd, fx::form_zero(sweep, "dd", exterior_derivative(dw)).value);
        for (std::size_t p = 0; p + q <= std::min<std::size_t>(r, 3); ++p) {
          const Form b = fx::random_form(rng, alg, p);
          const Form lhs = exterior_derivative(wedge(w, b));
          const Form rhs = wedge(dw, b) + ((q % 2) ? -wedge(w, exterior_derivative(b)) : wedge(w, exterior_derivative(b)));
          anti = std::max(anti, fx::form_zero(sweep, "anti", lhs - rhs).value);
        }
        if (q + 1 > r || q > 2) continue;
        // Basis tuples, then one tuple of random sections.
        std::vector<std::size_t> idx(q + 1);
        for (std::size_t i = 0; i <= q; ++i) idx[i] = i;
        for (;;) {
          std::vector<Section> args;
          for (std::size_t a : idx) args.push_back(Section::basis(alg, a));
          intrinsic = std::max(intrinsic, sweep.residual("intrinsic", apply_form(dw, args) - fx::intrinsic_d(w, args)).value);
          std::size_t k = q + 1;
          while (k > 0 && idx[k - 1] == r - (q + 1) + (k - 1)) --k;
          if (k == 0) break;
          ++idx[k - 1];
          for (std::size_t i = k; i <= q; ++i) idx[i] = idx[i - 1] + 1;
        }
        std::vector<Section> args;
        for (std::size_t i = 0; i <= q; ++i) args.push_back(fx::random_section(rng, alg));
        intrinsic = std::max(intrinsic, sweep.residual("intrinsic", apply_form(dw, args) - fx::intrinsic_d(w, args)).value);
      }
    }
  }
  const double t = seconds_since(t0);
  const bool ok = count == 6 && dd < 1e-9 && anti < 1e-9 && intrinsic < 1e-9 && t < 10.0;
  return {ok, std::to_string(count) + " algebroids; dd " + sci(dd) + ", antiderivation " + sci(anti) + ", intrinsic " +
                  sci(intrinsic) + "; " + sci(t) + " s (< 10 s)"};
}

// ---------------------------------------------------------------------------
Outcome semilinear() {
  const ProblemFile pf = corpus("semilinear");
  const ProlongedAlgebroid& p = *pf.prolongation;
  const Algebroid& A = p.total;
  const std::size_t w = *A.basis_index("w");
  const std::size_t U = *A.basis_index("U");
  const Sweep sweep(A.chart(), pf.sampling);
  double sym = 0.0;
  double sampled = 0.0;
  // The corpus c = u, and a nonlinear c on the same algebroid.
  std::vector<Form> thetas{pf.ideal->generators.front()};
  thetas.push_back(Form::basis(A, U) - Form::basis(A, w) * parse("u^2*x + sin(y)*u", A.chart()));
  for (const Form& theta : thetas) {
    const Expr c = -theta.coefficient(Mask{1} << w);
    const Form diff = exterior_derivative(theta) - wedge(Form::basis(A, w) * differentiate(c, "u"), theta);
    sym = std::max(sym, symbolic_residual(diff, sweep));
    sampled = std::max(sampled, fx::form_zero(sweep, "d theta", diff).value);
  }
  // u_x + 2 u_y = u along characteristics: u = g(y - 2x) e^x.
  double integral = 0.0;
  double dependency = 0.0;
  for (const char* g : {"cos(y - 2*x)", "(y - 2*x)^3 + 1", "exp((y - 2*x)/2)"}) {
    const BundleSection s{{parse(std::string("(") + g + ")*exp(x)", p.base.chart())}};
    integral = std::max(integral, worst(integral_residual(p, *pf.ideal, s, pf.sampling)));
    dependency = std::max(dependency, worst(dependency_residual(p, *pf.ideal, s, pf.sampling)));
  }
  const bool ok = sym < 1e-12 && sampled < 1e-9 && integral < 1e-8 && dependency < 1e-8;
  return {ok, "d theta - c_u e^w ^ theta: symbolic " + sci(sym) + ", sampled " + sci(sampled) + "; integral " + sci(integral) +
                  ", dependency " + sci(dependency)};
}

// ---------------------------------------------------------------------------
Outcome radial() {
  const ProblemFile atiyah = corpus("radial-atiyah");
  const bool ideal = is_differential_ideal(*atiyah.ideal, atiyah.sampling).pass();
  double integral = 0.0;
  SampleSpec unit = atiyah.sampling;
  unit.box["t"] = {0.0, 1.0};
  for (const char* r0 : {"0.7", "1.5"}) {
    const BundleSection s{{parse(std::string(r0) + "*exp(t)", atiyah.prolongation->base.chart())}};
    integral = std::max(integral, worst(integral_residual(*atiyah.prolongation, *atiyah.ideal, s, unit)));
  }
  // r' = r with the reconstruction eps' = -r^2, eps(0) = 0.
  const double r0 = 1.2;
  const Chart c({"t", "r", "eps"});
  const OdeSystem sys(c, {parse("r", c), parse("-r^2", c)});
  const Trajectory traj = rk4(sys, std::vector<double>{r0, 0.0}, 0.0, 1.0, 1e-3);
  const Chart tc({"t"});
  const std::vector<Expr> exact{parse("1.2*exp(t)", tc), parse("0.5*1.44*(1 - exp(2*t))", tc)};
  const double rk = compare_closed_form(traj, exact).max();
  // Cartesian trajectory against the polar one mapped to the plane.
  const ProblemFile manifold = corpus("radial-manifold");
  const OdeRun& polar = manifold.ode.at(0);
  const OdeRun& cart = manifold.ode.at(1);
  const Trajectory tp = rk4(polar.system, polar.x0, polar.t0, polar.t1, polar.h);
  const Trajectory tx = rk4(cart.system, cart.x0, cart.t0, cart.t1, cart.h);
  double cross = tp.t.size() == tx.t.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(tp.t.size(), tx.t.size()); ++i) {
    cross = std::max(cross, std::abs(tp.x[i][0] * std::cos(tp.x[i][1]) - tx.x[i][0]));
    cross = std::max(cross, std::abs(tp.x[i][0] * std::sin(tp.x[i][1]) - tx.x[i][1]));
  }
  const bool ok = ideal && integral < 1e-9 && rk < 1e-6 && cross < 1e-5;
  return {ok, std::string("differential ideal ") + (ideal ? "true" : "false") + "; integral " + sci(integral) +
                  " on t in [0,1]; RK4 h=1e-3 " + sci(rk) + "; Cartesian vs polar " + sci(cross)};
}

// ---------------------------------------------------------------------------
IpData so3_with(const std::vector<std::string>& gamma) {
  const ProblemFile pf = corpus("so3_canonical");
  std::vector<Expr> g;
  for (const auto& s : gamma) g.push_back(parse(s, pf.ip->chart));
  return build_ip(3, pf.ip->C, g);
}

// Free rigid body with inertia (1, 2, 3).
const std::vector<std::string> kRigid{"-w2*w3", "w3*w1", "-w1*w2/3"};
const std::vector<std::string> kQuadratic{"w1*w2", "w2^2 - w3^2", "t*w1*w3"};

Outcome bracket_lemma() {
  double brackets = 0.0;
  double anti = 0.0;
  for (const auto& g : {kRigid, kQuadratic}) {
    const IpData ip = so3_with(g);
    const Report r = bracket_table_checks(ip, SampleSpec{});
    for (const auto& f : r.families) {
      if (f.name == "r antisymmetry") {
        anti = std::max(anti, f.value);
      } else {
        brackets = std::max(brackets, f.value);
      }
    }
  }
  const bool ok = brackets < 1e-9 && anti < 1e-12;
  return {ok, "so(3), two quadratic gamma: brackets " + sci(brackets) + ", r antisymmetry " + sci(anti)};
}

// ---------------------------------------------------------------------------
Outcome coframe() {
  double m = 0.0;
  std::vector<IpData> cases{corpus("so3_canonical").ip.value(), so3_with(kRigid), corpus("heisenberg").ip.value()};
  const ProblemFile h = corpus("heisenberg");
  cases.push_back(build_ip(3, h.ip->C, {parse("w1*w3", h.ip->chart), parse("w1^2", h.ip->chart), parse("t*w2*w3", h.ip->chart)}));
  for (const auto& ip : cases) {
    for (const auto& f : dual_derivative_checks(ip, SampleSpec{}).families) m = std::max(m, f.value);
  }
  return {m < 1e-9, "d(Psi), d(Theta) on so(3) and Heisenberg, 4 cases: " + sci(m)};
}

// ---------------------------------------------------------------------------
Outcome equivalence() {
  const ProblemFile pf = corpus("r1_canonical");
  const IpData& ip = *pf.ip;
  const Multiplier k = pf.candidate->k.value();
  const Report h = helmholtz_residuals(ip, k, pf.sampling);
  const Report t = two_form_checks(ip, k, pf.sampling);
  const bool base = h.pass() && t.pass() && worst(h) < 1e-9 && worst(t) < 1e-9;
  Multiplier kp = k;
  kp[0][0] = k[0][0] + parse("0.1*t", ip.chart);
  const Report hp = helmholtz_residuals(ip, kp, pf.sampling);
  const Report tp = two_form_checks(ip, kp, pf.sampling);
  const auto hf = failing(hp);
  std::set<std::string> tf;
  bool mapped = true;
  for (const auto& f : tp.families) {
    if (f.informational || f.pass) continue;
    tf.insert(f.detail);
    if (f.detail.empty()) mapped = false;
  }
  const bool ok = base && hf == std::set<std::string>{"gamma(k)"} && tf == hf && mapped;
  std::string hs;
  for (const auto& s : hf) hs += (hs.empty() ? "" : ",") + s;
  return {ok, "k = 1 + w1^2: helmholtz " + sci(worst(h)) + ", two-form " + sci(worst(t)) + "; +0.1t fails {" + hs +
                  "} in helmholtz, " + std::to_string(tf.size()) + " matching family kind(s) in two-form"};
}

// ---------------------------------------------------------------------------
Outcome heisenberg_negative() {
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemFile pf = corpus("heisenberg");
  const IpData& ip = *pf.ip;
  std::vector<Expr> phi;
  std::vector<Expr> r;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      phi.push_back(ip.phi[i][j]);
      for (std::size_t k = 0; k < 3; ++k) r.push_back(ip.r[i][j][k]);
    }
  }
  const Sweep sweep(ip.chart, pf.sampling);
  const double vphi = sweep.residual("phi", phi).value;
  const double vr = sweep.residual("r", r).value;
  SearchOptions opt;
  opt.max_degree = 0;
  opt.trials = pf.trials;
  const SearchResult res = search_multiplier(ip, opt, pf.sampling);
  const double t = seconds_since(t0);
  const bool ok = vphi < 1e-12 && vr < 1e-12 && res.verdict == kVerdictSingular && res.best_min_det < 1e-9 && t < 5.0;
  return {ok, "phi " + sci(vphi) + ", r " + sci(vr) + "; degree 0: \"" + res.verdict + "\", best min |det| " +
                  sci(res.best_min_det) + "; " + sci(t) + " s (< 5 s)"};
}

// ---------------------------------------------------------------------------
Outcome r1_positive() {
  const ProblemFile pf = corpus("r1_canonical");
  const IpData& ip = *pf.ip;
  SearchOptions opt;
  opt.max_degree = 2;
  const SearchResult res = search_multiplier(ip, opt, pf.sampling);
  if (!res.found()) return {false, "no candidate: " + res.verdict};
  const MultiplierCandidate& c = res.candidates.front();
  const double resid = worst(c.report);
  const ExtendedSection ext = extended_from_multiplier(ip, c.k);
  const Report sigma = sigma_residual(ip, ext, pf.sampling);
  // The closed form on the line: P = -ds/dw1, Q = 0.
  const bool closed = expand(ext.P[0][0][0] + differentiate(ext.s[0][0], "w1")) == Expr(0) && expand(ext.Q[0][0][0]) == Expr(0);
  const bool ok = resid < 1e-9 && c.min_det > 0.1 && sigma.pass() && worst(sigma) < 1e-9 && closed;
  return {ok, "degree " + std::to_string(c.degree) + " k = " + to_string(c.k[0][0]) + ": residual " + sci(resid) +
                  ", min |det| " + sci(c.min_det) + "; sigma round trip " + sci(worst(sigma)) +
                  (closed ? ", P = -s', Q = 0" : ", closed form mismatch")};
}

// ---------------------------------------------------------------------------
Outcome cohomology() {
  const ProblemFile h = corpus("heisenberg");
  const std::size_t rank = exact_rank(d_matrix(h.ip->C));
  const Candidate& cand = *h.candidate;
  const CohomologyResult cr = cohomology_obstruction({h.ip->C, *cand.mu, *cand.nu}, h.sampling);
  const double coh = std::max(cr.report.value("coh-1"), cr.report.value("coh-2"));
  // Gauge covariance: l -> l + theta(t).w shifts mu by -C theta and nu by theta'.
  bool gauge = true;
  double gauge_worst = 0.0;
  const Chart tc({"t"});
  const ProblemFile so3 = corpus("so3_canonical");
  struct Case {
    const IpData* ip;
    std::string l;
  };
  for (const Case& k : {Case{&*so3.ip, "0.5*(w1^2 + w2^2 + w3^2)"}, Case{&*h.ip, "0"}}) {
    const IpData& ip = *k.ip;
    const std::vector<Expr> theta{parse("sin(t)", tc), parse("exp(t)", tc), parse("t^3 - t", tc)};
    Expr shift = parse(k.l, ip.chart);
    for (std::size_t i = 0; i < 3; ++i) shift = shift + theta[i] * ip.w(i);
    const MuNu a = extract_mu_nu(ip, parse(k.l, ip.chart), h.sampling);
    const MuNu b = extract_mu_nu(ip, shift, h.sampling);
    for (std::size_t i = 0; i < 3; ++i) {
      Expr dn = b.nu[i] - a.nu[i] - differentiate(theta[i], "t");
      const ZeroTest zn = is_zero(dn, h.sampling, tc);
      gauge = gauge && zn.zero;
      gauge_worst = std::max(gauge_worst, zn.residual);
      for (std::size_t j = 0; j < 3; ++j) {
        Expr dm = b.mu[i][j] - a.mu[i][j];
        for (std::size_t q = 0; q < 3; ++q) dm = dm + Expr(ip.C[i][j][q]) * theta[q];
        const ZeroTest zm = is_zero(dm, h.sampling, tc);
        gauge = gauge && zm.zero;
        gauge_worst = std::max(gauge_worst, zm.residual);
      }
    }
  }
  const bool ok = rank == 1 && cr.report.pass() && coh < 1e-12 && gauge;
  return {ok, "Heisenberg d rank " + std::to_string(rank) + " (exact); mu13 = 1 " + (cr.report.pass() ? "passes" : "fails") +
                  ", coh residuals " + sci(coh) + "; gauge covariance " + (gauge ? "is_zero" : "nonzero") + " (" +
                  sci(gauge_worst) + ")"};
}

// ---------------------------------------------------------------------------
std::string suite_json() {
  std::string out;
  for (const auto& entry : list_corpus(kCorpus)) {
    const ProblemFile pf = load_problem(entry.path);
    for (const auto& [cmd, expect] : pf.commands) out += render_json(run(cmd, pf));
  }
  return out;
}

Outcome determinism() {
  const std::string a = suite_json();
  const std::string b = suite_json();
  return {!a.empty() && a == b, "two corpus runs, " + std::to_string(a.size()) + " bytes of JSON, " +
                                    (a == b ? "byte-identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"calculus core", calculus_core},
      {"semilinear PDE", semilinear},
      {"radial system", radial},
      {"adapted bracket table", bracket_lemma},
      {"coframe derivatives", coframe},
      {"Helmholtz vs two-form", equivalence},
      {"Heisenberg negative result", heisenberg_negative},
      {"real line positive result", r1_positive},
      {"cohomology", cohomology},
      {"determinism", determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
  }
  return all ? 0 : 1;
}
