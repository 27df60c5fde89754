#include "aeds/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <json.hpp>
#include <sstream>

#include "aeds/solver.hpp"

namespace aeds::cli {

namespace {

using Json = nlohmann::ordered_json;

const char* const kCommands[] = {"validate", "ideal-check", "integral-check", "ip-report", "helmholtz", "two-form",
                                 "sigma-check", "solve", "cohomology", "ode", "list"};

SampleSpec effective_spec(const ProblemFile& pf, const RunOptions& o) {
  SampleSpec s = pf.sampling;
  if (o.seed) s.seed = *o.seed;
  if (o.samples) s.count = *o.samples;
  if (o.tol_abs) s.tol_abs = *o.tol_abs;
  if (o.tol_rel) s.tol_rel = *o.tol_rel;
  try {
    s.check();
  } catch (const Error& e) {
    throw ConfigError(std::string("sampling settings: ") + e.what());
  }
  return s;
}

template <class T>
const T& need(const std::optional<T>& v, const std::string& command, const std::string& block) {
  if (!v) throw ConfigError(command + " requires " + block);
  return *v;
}

std::string matrix_string(const ExprMatrix& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += i ? ", [" : "[";
    for (std::size_t j = 0; j < m[i].size(); ++j) out += (j ? ", " : "") + to_string(m[i][j]);
    out += "]";
  }
  return out + "]";
}

std::string list_string(const std::vector<Expr>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + to_string(v[i]);
  return out + "]";
}

Multiplier candidate_multiplier(const ProblemFile& pf, const std::string& command) {
  const IpData& ip = need(pf.ip, command, "an [ip] block");
  const Candidate& c = need(pf.candidate, command, "a [candidate] block");
  if (c.k) return *c.k;
  if (c.lagrangian) return hessian(ip, *c.lagrangian);
  throw ConfigError(command + " requires candidate.k or candidate.lagrangian");
}

void run_validate(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  if (pf.algebroid) {
    out.reports.push_back(validate(*pf.algebroid, spec));
    out.reports.back().title = "algebroid axioms [algebroid]";
  }
  if (pf.prolongation) {
    out.reports.push_back(validate(pf.prolongation->total, spec));
    out.reports.back().title = "algebroid axioms [prolongation]";
  }
  if (pf.ip) {
    out.reports.push_back(validate(pf.ip->algebroid, spec));
    out.reports.back().title = "algebroid axioms [ip]";
  }
  if (out.reports.empty()) throw ConfigError("validate requires an [algebroid] or [ip] block");
}

void run_ideal_check(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  const IdealSpec& ideal = need(pf.ideal, "ideal-check", "an [ideal] block");
  Report r = is_differential_ideal(ideal, spec);
  r.title = "differential ideal";
  const bool ok = r.pass();
  out.reports.push_back(std::move(r));
  out.verdict = ok ? "differential ideal" : "not a differential ideal";
}

void run_integral_check(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  const auto& p = need(pf.prolongation, "integral-check", "a [prolongation] block");
  const auto& ideal = need(pf.ideal, "integral-check", "an [ideal] block");
  const auto& section = need(pf.section, "integral-check", "a [section] block");
  Report a = integral_residual(p, ideal, section, spec);
  a.title = "integral residual";
  Report b = dependency_residual(p, ideal, section, spec);
  b.title = "dependency residual";
  const bool ok = a.pass() && b.pass();
  out.reports.push_back(std::move(a));
  out.reports.push_back(std::move(b));
  out.verdict = ok ? "integral manifold" : "not an integral manifold";
}

void run_ip_report(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  const IpData& ip = need(pf.ip, "ip-report", "an [ip] block");
  const std::size_t n = ip.n;
  Report derived;
  derived.title = "derived fields";
  auto dump = [&](const std::string& prefix, const ExprMatrix& m) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (m[i][j].is_zero()) continue;
        derived.note(prefix + "_" + std::to_string(i + 1) + "^" + std::to_string(j + 1), to_string(m[i][j]));
        any = true;
      }
    }
    if (!any) derived.note(prefix, "0");
  };
  derived.note("gamma", list_string(ip.gamma));
  dump("lambda", ip.lambda);
  dump("psi", ip.psi);
  dump("phi", ip.phi);
  std::vector<Expr> phi_all;
  std::vector<Expr> r_all;
  bool r_any = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      phi_all.push_back(ip.phi[i][j]);
      for (std::size_t k = 0; k < n; ++k) {
        r_all.push_back(ip.r[i][j][k]);
        if (i < j && !ip.r[i][j][k].is_zero()) {
          derived.note("r_" + std::to_string(i + 1) + std::to_string(j + 1) + "^" + std::to_string(k + 1),
                       to_string(ip.r[i][j][k]));
          r_any = true;
        }
      }
    }
  }
  if (!r_any) derived.note("r", "0");
  const Sweep sweep(ip.chart, spec);
  Family fphi = sweep.residual("phi vanishes", phi_all);
  fphi.informational = true;
  Family fr = sweep.residual("r vanishes", r_all);
  fr.informational = true;
  derived.add(std::move(fphi));
  derived.add(std::move(fr));
  out.reports.push_back(std::move(derived));
  out.reports.push_back(bracket_table_checks(ip, spec));
  out.reports.back().title = "adapted brackets";
  out.reports.push_back(dual_derivative_checks(ip, spec));
  out.reports.back().title = "coframe derivatives";
}

void run_helmholtz(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  const Multiplier k = candidate_multiplier(pf, "helmholtz");
  out.reports.push_back(helmholtz_residuals(*pf.ip, k, spec));
  out.reports.back().title = "reduced Helmholtz conditions";
  out.reports.back().note("k", matrix_string(k));
}

void run_two_form(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  const Multiplier k = candidate_multiplier(pf, "two-form");
  out.reports.push_back(two_form_checks(*pf.ip, k, spec));
  out.reports.back().title = "two-form conditions";
  out.reports.back().note("k", matrix_string(k));
}

void run_sigma_check(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  const IpData& ip = need(pf.ip, "sigma-check", "an [ip] block");
  const Candidate& c = need(pf.candidate, "sigma-check", "a [candidate] block");
  const ExtendedSection ext = c.extended ? *c.extended : extended_from_multiplier(ip, candidate_multiplier(pf, "sigma-check"));
  try {
    out.reports.push_back(sigma_residual(ip, ext, spec));
    out.reports.back().title = "sigma residuals";
    out.reports.back().note("s", matrix_string(ext.s));
  } catch (const PreconditionFailed& e) {
    out.reports.push_back(e.report());
    out.reports.back().title = "sigma precondition";
    out.verdict = std::string("precondition failed: ") + e.what();
  }
}

void run_solve(const ProblemFile& pf, const RunOptions& o, const SampleSpec& spec, RunResult& out) {
  const IpData& ip = need(pf.ip, "solve", "an [ip] block");
  SearchOptions opt;
  opt.max_degree = o.max_degree.value_or(pf.max_degree);
  opt.trials = o.trials.value_or(pf.trials);
  const SearchResult res = search_multiplier(ip, opt, spec);
  Report r;
  r.title = "multiplier search";
  Family det;
  det.name = "best min |det|";
  det.kind = FamilyKind::LowerBound;
  det.value = res.best_min_det;
  det.pass = res.found();
  det.detail = "over null-space trials passing the linear conditions";
  r.add(det);
  r.metric("max degree", static_cast<double>(opt.max_degree));
  r.metric("trials per degree", static_cast<double>(opt.trials));
  for (const auto& d : res.degrees) {
    const std::string p = "degree " + std::to_string(d.degree) + " ";
    r.metric(p + "unknowns", static_cast<double>(d.unknowns));
    r.metric(p + "rows", static_cast<double>(d.rows));
    r.metric(p + "nullity", static_cast<double>(d.nullity));
    r.metric(p + "trials", static_cast<double>(d.trials));
    r.metric(p + "verified", static_cast<double>(d.verified));
    r.metric(p + "found", static_cast<double>(d.found));
    r.metric(p + "best min |det|", d.best_min_det);
  }
  r.note("verdict", res.verdict);
  for (std::size_t i = 0; i < res.candidates.size(); ++i) {
    const auto& c = res.candidates[i];
    r.note("candidate " + std::to_string(i + 1), "degree " + std::to_string(c.degree) + ", k = " + matrix_string(c.k));
  }
  out.reports.push_back(std::move(r));
  for (std::size_t i = 0; i < res.candidates.size(); ++i) {
    out.reports.push_back(res.candidates[i].report);
    out.reports.back().title = "candidate " + std::to_string(i + 1);
  }
  out.verdict = res.verdict;
  out.exit_code = res.found() ? kExitPass : kExitFail;
}

void run_cohomology(const ProblemFile& pf, const SampleSpec& spec, RunResult& out) {
  const IpData& ip = need(pf.ip, "cohomology", "an [ip] block");
  const Candidate& c = need(pf.candidate, "cohomology", "a [candidate] block");
  CohomologyProblem prob{ip.C, {}, {}};
  std::optional<Family> affine;
  if (c.mu) {
    prob.mu = *c.mu;
    prob.nu = *c.nu;
  } else if (c.lagrangian) {
    try {
      MuNu m = extract_mu_nu(ip, *c.lagrangian, spec);
      prob.mu = std::move(m.mu);
      prob.nu = std::move(m.nu);
      affine = std::move(m.affine);
    } catch (const NotAffine& e) {
      Report r;
      r.title = "Euler-Poincare expressions";
      Family f;
      f.name = "affine in w";
      f.value = e.worst_residual();
      f.pass = false;
      f.detail = e.what();
      r.add(f);
      out.reports.push_back(std::move(r));
      out.verdict = "Euler-Poincare expressions are not affine in w";
      return;
    }
  } else {
    throw ConfigError("cohomology requires candidate.mu or candidate.lagrangian");
  }
  CohomologyResult res = cohomology_obstruction(prob, spec);
  res.report.title = "cohomology obstruction";
  if (affine) res.report.families.insert(res.report.families.begin(), *affine);
  res.report.note("mu", matrix_string(prob.mu));
  res.report.note("nu", list_string(prob.nu));
  for (const auto& [k, v] : res.report.notes) {
    if (k == "verdict") out.verdict = v;
  }
  out.reports.push_back(std::move(res.report));
}

void run_ode(const ProblemFile& pf, RunResult& out) {
  if (pf.ode.empty()) throw ConfigError("ode requires an [ode] block");
  for (const auto& o : pf.ode) {
    const Trajectory traj = rk4(o.system, o.x0, o.t0, o.t1, o.h);
    std::vector<std::string> states(o.system.chart().names().begin() + 1, o.system.chart().names().end());
    Report r;
    if (!o.exact.empty()) {
      r = closed_form_report(compare_closed_form(traj, o.exact, o.system.time_name()), states, o.tol);
    }
    r.title = "ode " + o.name;
    r.metric("steps", static_cast<double>(traj.t.size() - 1));
    r.metric("h", traj.h);
    for (std::size_t i = 0; i < states.size(); ++i) r.metric("final " + states[i], traj.x.back()[i]);
    if (o.exact.empty()) r.note("closed form", "none given; trajectory only");
    out.reports.push_back(std::move(r));
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names(std::begin(kCommands), std::end(kCommands));
  return names;
}

bool known_command(std::string_view name) {
  const auto& n = command_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

RunResult run(const std::string& command, const ProblemFile& pf, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunResult out;
  out.command = command;
  out.file = pf.path;
  out.digest = pf.digest;
  try {
    if (!known_command(command) || command == "list") throw ConfigError("unknown command '" + command + "'");
    const SampleSpec spec = effective_spec(pf, options);
    out.sampling = spec;
    if (command == "validate") {
      run_validate(pf, spec, out);
    } else if (command == "ideal-check") {
      run_ideal_check(pf, spec, out);
    } else if (command == "integral-check") {
      run_integral_check(pf, spec, out);
    } else if (command == "ip-report") {
      run_ip_report(pf, spec, out);
    } else if (command == "helmholtz") {
      run_helmholtz(pf, spec, out);
    } else if (command == "two-form") {
      run_two_form(pf, spec, out);
    } else if (command == "sigma-check") {
      run_sigma_check(pf, spec, out);
    } else if (command == "solve") {
      run_solve(pf, options, spec, out);
    } else if (command == "cohomology") {
      run_cohomology(pf, spec, out);
    } else if (command == "ode") {
      run_ode(pf, out);
    }
    if (command != "solve") {
      bool ok = true;
      for (const auto& r : out.reports) ok = ok && r.pass();
      out.exit_code = ok ? kExitPass : kExitFail;
      if (out.verdict.empty()) out.verdict = ok ? "pass" : "fail";
    }
  } catch (const ConfigError& e) {
    out.reports.clear();
    out.error = e.what();
    out.verdict = "input error";
    out.exit_code = kExitInput;
  } catch (const EvalError& e) {
    out.reports.clear();
    out.error = std::string("evaluation error: ") + e.what();
    out.verdict = "input error";
    out.exit_code = kExitInput;
  } catch (const Error& e) {
    out.reports.clear();
    out.error = e.what();
    out.verdict = "input error";
    out.exit_code = kExitInput;
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunResult run_file(const std::string& command, const std::string& path, const RunOptions& options) {
  try {
    const ProblemFile pf = load_problem(path);
    return run(command, pf, options);
  } catch (const Error& e) {
    RunResult out;
    out.command = command;
    out.file = path;
    out.error = e.what();
    out.verdict = "input error";
    out.exit_code = kExitInput;
    return out;
  }
}

namespace {

Json point_json(const std::vector<std::pair<std::string, double>>& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

Json report_json(const Report& r) {
  Json j;
  j["title"] = r.title;
  j["pass"] = r.pass();
  Json fams = Json::array();
  for (const auto& f : r.families) {
    Json fj;
    fj["name"] = f.name;
    fj["kind"] = f.kind == FamilyKind::MaxAbs ? "max_abs" : "min_abs";
    fj["value"] = f.value;
    fj["pass"] = f.pass;
    fj["informational"] = f.informational;
    fj["worst_point"] = point_json(f.worst_point);
    if (!f.detail.empty()) fj["detail"] = f.detail;
    fams.push_back(std::move(fj));
  }
  j["families"] = std::move(fams);
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = std::move(metrics);
  Json notes = Json::object();
  for (const auto& [k, v] : r.notes) notes[k] = v;
  j["notes"] = std::move(notes);
  return j;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string point_text(const std::vector<std::pair<std::string, double>>& p) {
  std::string out;
  for (const auto& [k, v] : p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s=%.6g", out.empty() ? "" : " ", k.c_str(), v);
    out += buf;
  }
  return out;
}

}  // namespace

std::string render_json(const RunResult& r, bool timing) {
  Json j;
  j["report_version"] = 1;
  j["command"] = r.command;
  j["input"] = {{"file", std::filesystem::path(r.file).filename().string()}, {"digest", r.digest}};
  if (r.error.empty()) {
    j["sampling"] = {{"seed", r.sampling.seed},
                     {"samples", r.sampling.count},
                     {"tol_abs", r.sampling.tol_abs},
                     {"tol_rel", r.sampling.tol_rel}};
  }
  Json reps = Json::array();
  for (const auto& rep : r.reports) reps.push_back(report_json(rep));
  j["reports"] = std::move(reps);
  j["verdict"] = r.verdict;
  if (!r.error.empty()) j["error"] = r.error;
  j["exit_code"] = r.exit_code;
  if (timing) j["wall_seconds"] = r.wall_seconds;
  return j.dump(2) + "\n";
}

std::string render_text(const RunResult& r, bool timing) {
  std::ostringstream os;
  os << "command  " << r.command << "\n";
  os << "file     " << r.file << "\n";
  if (!r.digest.empty()) os << "digest   " << r.digest << "\n";
  if (r.error.empty()) {
    os << "sampling seed " << r.sampling.seed << ", " << r.sampling.count << " samples, tol_abs " << sci(r.sampling.tol_abs)
       << ", tol_rel " << sci(r.sampling.tol_rel) << "\n";
  }
  for (const auto& rep : r.reports) {
    os << "\n" << rep.title << (rep.pass() ? "" : "  [FAIL]") << "\n";
    std::size_t width = 6;
    for (const auto& f : rep.families) width = std::max(width, f.name.size());
    for (const auto& f : rep.families) {
      std::string status = f.pass ? "pass" : "FAIL";
      if (f.informational) status += " (info)";
      os << "  " << f.name << std::string(width - f.name.size() + 2, ' ') << (f.kind == FamilyKind::MaxAbs ? "max " : "min ")
         << sci(f.value) << "  " << status;
      if (!f.worst_point.empty()) os << "  at " << point_text(f.worst_point);
      if (!f.detail.empty()) os << "  (" << f.detail << ")";
      os << "\n";
    }
    for (const auto& [k, v] : rep.metrics) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", v);
      os << "  " << k << ": " << buf << "\n";
    }
    for (const auto& [k, v] : rep.notes) os << "  " << k << ": " << v << "\n";
  }
  if (!r.error.empty()) os << "\nerror    " << r.error << "\n";
  os << "\nverdict  " << r.verdict << " (exit " << r.exit_code << ")\n";
  if (timing) os << "time     " << sci(r.wall_seconds) << " s\n";
  return os.str();
}

std::string render_list_json(const std::vector<CorpusEntry>& entries) {
  Json j;
  j["report_version"] = 1;
  j["command"] = "list";
  Json arr = Json::array();
  for (const auto& e : entries) arr.push_back({{"name", e.name}, {"file", e.path.filename().string()}, {"description", e.description}});
  j["examples"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string render_list_text(const std::vector<CorpusEntry>& entries) {
  std::size_t width = 4;
  for (const auto& e : entries) width = std::max(width, e.name.size());
  std::ostringstream os;
  for (const auto& e : entries) os << e.name << std::string(width - e.name.size() + 2, ' ') << e.description << "\n";
  return os.str();
}

}  // namespace aeds::cli
