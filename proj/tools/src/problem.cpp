#include "aeds/cli/problem.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <toml.hpp>

#include "aeds/cli/commands.hpp"

namespace aeds::cli {

ConfigError::ConfigError(const std::string& message, std::size_t line, std::size_t column)
    : Error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message : message),
      message_(message),
      line_(line),
      column_(column) {}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

[[noreturn]] void fail_at(const toml::source_region& src, const std::string& msg) {
  throw ConfigError(msg, src.begin.line, src.begin.column);
}

[[noreturn]] void fail(const toml::node& n, const std::string& msg) { fail_at(n.source(), msg); }

// Runs f, turning library errors into ConfigErrors positioned at n.
template <class F>
auto guarded(const toml::node& n, const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(n, where + ": " + e.what());
  }
}

void check_keys(const toml::table& t, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (auto&& [k, v] : t) {
    if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end()) {
      fail_at(k.source(), "unknown key '" + std::string(k.str()) + "' in " + where);
    }
  }
}

const toml::table& as_table(const toml::node& n, const std::string& what) {
  if (const auto* t = n.as_table()) return *t;
  fail(n, what + " must be a table");
}

const toml::array& as_array(const toml::node& n, const std::string& what) {
  if (const auto* a = n.as_array()) return *a;
  fail(n, what + " must be an array");
}

const toml::node& require(const toml::table& t, std::string_view key, const std::string& where) {
  if (const auto* n = t.get(key)) return *n;
  fail_at(t.source(), where + " requires '" + std::string(key) + "'");
}

std::string as_string(const toml::node& n, const std::string& what) {
  if (const auto* s = n.as_string()) return s->get();
  fail(n, what + " must be a string");
}

double as_number(const toml::node& n, const std::string& what) {
  if (const auto* f = n.as_floating_point()) return f->get();
  if (const auto* i = n.as_integer()) return static_cast<double>(i->get());
  fail(n, what + " must be a number");
}

std::int64_t as_integer(const toml::node& n, const std::string& what) {
  if (const auto* i = n.as_integer()) return i->get();
  fail(n, what + " must be an integer");
}

std::size_t as_count(const toml::node& n, const std::string& what) {
  const std::int64_t v = as_integer(n, what);
  if (v < 0) fail(n, what + " must not be negative");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> as_names(const toml::node& n, const std::string& what) {
  std::vector<std::string> out;
  for (const auto& e : as_array(n, what)) out.push_back(as_string(e, what + " entry"));
  return out;
}

std::vector<double> as_numbers(const toml::node& n, const std::string& what) {
  std::vector<double> out;
  for (const auto& e : as_array(n, what)) out.push_back(as_number(e, what + " entry"));
  return out;
}

Interval as_interval(const toml::node& n, const std::string& what) {
  const auto v = as_numbers(n, what);
  if (v.size() != 2) fail(n, what + " must be [lo, hi]");
  if (!(v[0] < v[1])) fail(n, what + " must have lo < hi");
  return {v[0], v[1]};
}

Expr as_expr(const toml::node& n, const Chart& chart, const std::string& what) {
  const std::string src = as_string(n, what);
  try {
    return parse(src, chart);
  } catch (const SyntaxError& e) {
    // Column of the offending character, past the opening quote.
    const auto& b = n.source().begin;
    throw ConfigError(what + ": " + e.what(), b.line, b.column + 1 + e.position());
  } catch (const Error& e) {
    fail(n, what + ": " + e.what());
  }
}

std::vector<Expr> as_expr_list(const toml::node& n, const Chart& chart, std::size_t size, const std::string& what) {
  const auto& a = as_array(n, what);
  if (a.size() != size) fail(n, what + " must have " + std::to_string(size) + " entries");
  std::vector<Expr> out;
  for (const auto& e : a) out.push_back(as_expr(e, chart, what + " entry"));
  return out;
}

ExprMatrix as_expr_matrix(const toml::node& n, const Chart& chart, std::size_t size, const std::string& what) {
  const auto& a = as_array(n, what);
  if (a.size() != size) fail(n, what + " must have " + std::to_string(size) + " rows");
  ExprMatrix out;
  for (const auto& row : a) out.push_back(as_expr_list(row, chart, size, what + " row"));
  return out;
}

ExprCube as_expr_cube(const toml::node& n, const Chart& chart, std::size_t size, const std::string& what) {
  const auto& a = as_array(n, what);
  if (a.size() != size) fail(n, what + " must have " + std::to_string(size) + " slices");
  ExprCube out;
  for (const auto& m : a) out.push_back(as_expr_matrix(m, chart, size, what + " slice"));
  return out;
}

void apply_boxes(const toml::node& n, Chart& chart, const std::string& what) {
  for (auto&& [k, v] : as_table(n, what)) {
    const std::string name(k.str());
    if (!chart.contains(name)) fail_at(k.source(), what + ": '" + name + "' is not a coordinate");
    chart.set_box(name, as_interval(v, what + "." + name));
  }
}

std::size_t basis_index(const Algebroid& alg, const toml::key& k, std::string_view label, const std::string& what) {
  if (const auto i = alg.basis_index(label)) return *i;
  fail_at(k.source(), what + ": unknown basis label '" + std::string(label) + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

Chart load_chart(const toml::table& t) {
  check_keys(t, {"coordinates", "box"}, "[chart]");
  const auto& coords = require(t, "coordinates", "[chart]");
  Chart chart = guarded(coords, "[chart]", [&] { return Chart(as_names(coords, "chart.coordinates")); });
  if (chart.dim() == 0) fail(coords, "[chart] needs at least one coordinate");
  if (const auto* box = t.get("box")) apply_boxes(*box, chart, "chart.box");
  return chart;
}

Algebroid load_algebroid(const toml::table& t, const Chart& chart) {
  check_keys(t, {"basis", "anchor", "structure"}, "[algebroid]");
  const auto& basis_node = require(t, "basis", "[algebroid]");
  const auto basis = as_names(basis_node, "algebroid.basis");
  if (basis.empty()) fail(basis_node, "[algebroid] needs at least one basis section");
  const std::size_t r = basis.size();
  auto index = [&](const toml::key& k, std::string_view label, const std::string& what) {
    const auto it = std::find(basis.begin(), basis.end(), label);
    if (it == basis.end()) fail_at(k.source(), what + ": unknown basis label '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - basis.begin());
  };
  ExprMatrix rho(r, std::vector<Expr>(chart.dim(), Expr(0)));
  if (const auto* anchor = t.get("anchor")) {
    for (auto&& [k, row] : as_table(*anchor, "algebroid.anchor")) {
      const std::size_t a = index(k, k.str(), "algebroid.anchor");
      for (auto&& [c, v] : as_table(row, "algebroid.anchor." + std::string(k.str()))) {
        const auto i = chart.index_of(c.str());
        if (!i) fail_at(c.source(), "algebroid.anchor: '" + std::string(c.str()) + "' is not a coordinate");
        rho[a][*i] = as_expr(v, chart, "anchor of " + std::string(k.str()));
      }
    }
  }
  ExprCube L(r, ExprMatrix(r, std::vector<Expr>(r, Expr(0))));
  if (const auto* structure = t.get("structure")) {
    for (auto&& [k, row] : as_table(*structure, "algebroid.structure")) {
      const auto pair = split(k.str(), ',');
      if (pair.size() != 2) fail_at(k.source(), "algebroid.structure keys must read \"a,b\"");
      const std::size_t a = index(k, pair[0], "algebroid.structure");
      const std::size_t b = index(k, pair[1], "algebroid.structure");
      for (auto&& [c, v] : as_table(row, "algebroid.structure." + std::string(k.str()))) {
        const std::size_t cc = index(c, c.str(), "algebroid.structure");
        L[a][b][cc] = as_expr(v, chart, "structure function [" + std::string(k.str()) + "]");
      }
    }
  }
  return guarded(t, "[algebroid]", [&] { return Algebroid(chart, r, rho, L, basis); });
}

ProlongedAlgebroid load_prolongation(const toml::table& t, const Algebroid& base) {
  check_keys(t, {"fiber", "labels", "box", "connection"}, "[prolongation]");
  const auto& fiber_node = require(t, "fiber", "[prolongation]");
  Chart fiber = guarded(fiber_node, "[prolongation]", [&] { return Chart(as_names(fiber_node, "prolongation.fiber")); });
  if (fiber.dim() == 0) fail(fiber_node, "[prolongation] needs at least one fiber coordinate");
  if (const auto* box = t.get("box")) apply_boxes(*box, fiber, "prolongation.box");
  std::vector<std::string> labels;
  if (const auto* l = t.get("labels")) {
    labels = as_names(*l, "prolongation.labels");
    if (labels.size() != fiber.dim()) fail(*l, "prolongation.labels needs one label per fiber coordinate");
  }
  const toml::node* conn = t.get("connection");
  if (!conn) {
    return guarded(t, "[prolongation]", [&] { return prolong_trivial(base, fiber, labels); });
  }
  const Chart total = guarded(t, "[prolongation]", [&] { return base.chart().extended(fiber); });
  ExprMatrix A(fiber.dim(), std::vector<Expr>(base.dim(), Expr(0)));
  for (auto&& [k, row] : as_table(*conn, "prolongation.connection")) {
    const auto mu = fiber.index_of(k.str());
    if (!mu) fail_at(k.source(), "prolongation.connection: '" + std::string(k.str()) + "' is not a fiber coordinate");
    for (auto&& [c, v] : as_table(row, "prolongation.connection." + std::string(k.str()))) {
      const auto i = base.chart().index_of(c.str());
      if (!i) fail_at(c.source(), "prolongation.connection: '" + std::string(c.str()) + "' is not a base coordinate");
      A[*mu][*i] = as_expr(v, total, "connection coefficient");
    }
  }
  return guarded(t, "[prolongation]", [&] { return prolong_connection(base, fiber, A, labels); });
}

Form load_form(const toml::table& terms, const Algebroid& alg, const std::string& what) {
  std::optional<Form> out;
  for (auto&& [k, v] : terms) {
    std::vector<std::size_t> idx;
    for (const auto& label : split(k.str(), '^')) idx.push_back(basis_index(alg, k, label, what));
    if (out && out->degree() != idx.size()) fail_at(k.source(), what + ": all terms must have the same degree");
    const Expr c = as_expr(v, alg.chart(), what + " coefficient");
    const Form m = guarded(v, what, [&] { return Form::monomial(alg, idx, c); });
    out = out ? *out + m : m;
  }
  if (!out) fail_at(terms.source(), what + " has no terms");
  return *out;
}

IdealSpec load_ideal(const toml::table& t, const Algebroid& alg) {
  check_keys(t, {"generators"}, "[ideal]");
  const auto& gens = as_array(require(t, "generators", "[ideal]"), "ideal.generators");
  if (gens.empty()) fail(gens, "[ideal] needs at least one generator");
  std::vector<Form> forms;
  std::vector<std::string> names;
  for (const auto& g : gens) {
    const auto& gt = as_table(g, "ideal generator");
    check_keys(gt, {"name", "form"}, "ideal generator");
    const std::string name = gt.get("name") ? as_string(*gt.get("name"), "generator name") : "g" + std::to_string(forms.size() + 1);
    forms.push_back(load_form(as_table(require(gt, "form", "ideal generator"), "generator form"), alg, "generator " + name));
    names.push_back(name);
  }
  return guarded(t, "[ideal]", [&] { return IdealSpec(alg, forms, names); });
}

BundleSection load_section(const toml::table& t, const ProlongedAlgebroid& p) {
  BundleSection s;
  s.ybar.assign(p.fiber_dim(), Expr(0));
  std::vector<bool> seen(p.fiber_dim(), false);
  for (auto&& [k, v] : t) {
    const auto mu = p.fiber.index_of(k.str());
    if (!mu) fail_at(k.source(), "unknown key '" + std::string(k.str()) + "' in [section] (not a fiber coordinate)");
    s.ybar[*mu] = as_expr(v, p.base.chart(), "section component " + std::string(k.str()));
    seen[*mu] = true;
  }
  for (std::size_t mu = 0; mu < seen.size(); ++mu) {
    if (!seen[mu]) fail_at(t.source(), "[section] is missing the component for '" + p.fiber.name(mu) + "'");
  }
  return s;
}

IpData load_ip(const toml::table& t, ProblemFile& pf) {
  check_keys(t, {"n", "structure", "gamma", "max_degree", "trials"}, "[ip]");
  const auto& n_node = require(t, "n", "[ip]");
  const std::size_t n = as_count(n_node, "ip.n");
  if (n == 0 || n > 16) fail(n_node, "ip.n must be between 1 and 16");
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> entries;
  if (const auto* s = t.get("structure")) {
    for (const auto& e : as_array(*s, "ip.structure")) {
      const auto& a = as_array(e, "ip.structure entry");
      if (a.size() != 4) fail(e, "ip.structure entries read [i, j, k, value] (1-based, C^k_ij)");
      std::size_t idx[3];
      for (std::size_t q = 0; q < 3; ++q) {
        const std::int64_t v = as_integer(*a.get(q), "structure index");
        if (v < 1 || static_cast<std::size_t>(v) > n) fail(*a.get(q), "structure index out of range 1.." + std::to_string(n));
        idx[q] = static_cast<std::size_t>(v - 1);
      }
      if (idx[0] == idx[1]) fail(e, "ip.structure entries need i != j");
      entries.emplace_back(idx[0], idx[1], idx[2], as_number(*a.get(3), "structure value"));
    }
  }
  const Chart chart = ip_chart(n);
  std::vector<Expr> gamma(n, Expr(0));
  if (const auto* g = t.get("gamma")) gamma = as_expr_list(*g, chart, n, "ip.gamma");
  if (const auto* d = t.get("max_degree")) pf.max_degree = as_count(*d, "ip.max_degree");
  if (const auto* tr = t.get("trials")) pf.trials = as_count(*tr, "ip.trials");
  return guarded(t, "[ip]", [&] { return build_ip(n, structure_constants(n, entries), gamma); });
}

Candidate load_candidate(const toml::table& t, const IpData& ip) {
  check_keys(t, {"k", "lagrangian", "s", "P", "Q", "mu", "nu"}, "[candidate]");
  Candidate c;
  const std::size_t n = ip.n;
  if (const auto* k = t.get("k")) {
    c.k = as_expr_matrix(*k, ip.chart, n, "candidate.k");
  }
  if (const auto* l = t.get("lagrangian")) c.lagrangian = as_expr(*l, ip.chart, "candidate.lagrangian");
  const toml::node* s = t.get("s");
  const toml::node* P = t.get("P");
  const toml::node* Q = t.get("Q");
  if (s || P || Q) {
    if (!(s && P && Q)) fail_at(t.source(), "[candidate] needs all of s, P and Q or none of them");
    c.extended = ExtendedSection{as_expr_matrix(*s, ip.chart, n, "candidate.s"), as_expr_cube(*P, ip.chart, n, "candidate.P"),
                                 as_expr_cube(*Q, ip.chart, n, "candidate.Q")};
  }
  const Chart tchart({"t"});
  if (const auto* mu = t.get("mu")) {
    c.mu = as_expr_matrix(*mu, tchart, n, "candidate.mu");
    c.nu = std::vector<Expr>(n, Expr(0));
  }
  if (const auto* nu = t.get("nu")) {
    if (!c.mu) fail(*nu, "candidate.nu needs candidate.mu");
    c.nu = as_expr_list(*nu, tchart, n, "candidate.nu");
  }
  return c;
}

OdeRun load_ode(const toml::table& t, std::size_t index) {
  const std::string where = "[ode] entry " + std::to_string(index + 1);
  check_keys(t, {"name", "time", "states", "rhs", "x0", "t0", "t1", "h", "exact", "tol"}, where);
  const std::string name = t.get("name") ? as_string(*t.get("name"), "ode.name") : "ode" + std::to_string(index + 1);
  const std::string time = t.get("time") ? as_string(*t.get("time"), "ode.time") : "t";
  const auto& states_node = require(t, "states", where);
  auto states = as_names(states_node, "ode.states");
  if (states.empty()) fail(states_node, "ode.states must not be empty");
  std::vector<std::string> names{time};
  names.insert(names.end(), states.begin(), states.end());
  const Chart chart = guarded(states_node, where, [&] { return Chart(names); });
  const auto rhs = as_expr_list(require(t, "rhs", where), chart, states.size(), "ode.rhs");
  const auto& x0_node = require(t, "x0", where);
  const auto x0 = as_numbers(x0_node, "ode.x0");
  if (x0.size() != states.size()) fail(x0_node, "ode.x0 needs one value per state");
  OdeRun run{name, guarded(t, where, [&] { return OdeSystem(chart, rhs); }), x0, 0.0, 1.0, 1e-3, {}, 1e-6};
  if (const auto* v = t.get("t0")) run.t0 = as_number(*v, "ode.t0");
  if (const auto* v = t.get("t1")) run.t1 = as_number(*v, "ode.t1");
  if (const auto* v = t.get("h")) run.h = as_number(*v, "ode.h");
  if (const auto* v = t.get("tol")) run.tol = as_number(*v, "ode.tol");
  if (!(run.h > 0.0) || !(run.t1 > run.t0)) fail_at(t.source(), where + " needs h > 0 and t1 > t0");
  if (const auto* v = t.get("exact")) run.exact = as_expr_list(*v, Chart({time}), states.size(), "ode.exact");
  return run;
}

SampleSpec load_sampling(const toml::table& t) {
  check_keys(t, {"seed", "samples", "tol_abs", "tol_rel", "box"}, "[sampling]");
  SampleSpec spec;
  if (const auto* v = t.get("seed")) spec.seed = static_cast<std::uint64_t>(as_count(*v, "sampling.seed"));
  if (const auto* v = t.get("samples")) spec.count = as_count(*v, "sampling.samples");
  if (const auto* v = t.get("tol_abs")) spec.tol_abs = as_number(*v, "sampling.tol_abs");
  if (const auto* v = t.get("tol_rel")) spec.tol_rel = as_number(*v, "sampling.tol_rel");
  if (const auto* v = t.get("box")) {
    for (auto&& [k, b] : as_table(*v, "sampling.box")) spec.box[std::string(k.str())] = as_interval(b, "sampling.box." + std::string(k.str()));
  }
  guarded(t, "[sampling]", [&] {
    spec.check();
    return 0;
  });
  return spec;
}

const toml::table& block(const toml::table& doc, std::string_view name, const std::string& needed_by) {
  if (const auto* n = doc.get(name)) return as_table(*n, "[" + std::string(name) + "]");
  throw ConfigError(needed_by + " requires a [" + std::string(name) + "] block");
}

}  // namespace

ProblemFile load_problem_text(const std::string& text, const std::string& path) {
  toml::table doc;
  try {
    doc = toml::parse(text, path);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(e.description()), e.source().begin.line, e.source().begin.column);
  }
  check_keys(doc,
             {"name", "description", "commands", "expect", "chart", "algebroid", "prolongation", "ideal", "section", "ip",
              "candidate", "ode", "sampling"},
             "the top level");
  ProblemFile pf;
  pf.path = path;
  pf.digest = fnv1a_hex(text);
  pf.name = doc.get("name") ? as_string(*doc.get("name"), "name") : std::filesystem::path(path).stem().string();
  if (const auto* d = doc.get("description")) pf.description = as_string(*d, "description");
  for (auto&& [k, v] : doc) {
    if (v.is_table() || v.is_array_of_tables()) pf.blocks.insert(std::string(k.str()));
  }
  if (const auto* c = doc.get("commands")) {
    std::map<std::string, int> expect;
    if (const auto* e = doc.get("expect")) {
      for (auto&& [k, v] : as_table(*e, "expect")) {
        if (!known_command(k.str())) fail_at(k.source(), "expect: unknown command '" + std::string(k.str()) + "'");
        const auto code = as_integer(v, "expected exit code");
        if (code < 0 || code > 2) fail(v, "expected exit codes are 0, 1 or 2");
        expect[std::string(k.str())] = static_cast<int>(code);
      }
    }
    for (const auto& e : as_array(*c, "commands")) {
      const std::string cmd = as_string(e, "command");
      if (!known_command(cmd) || cmd == "list") fail(e, "unknown command '" + cmd + "'");
      pf.commands.emplace_back(cmd, expect.count(cmd) ? expect[cmd] : 0);
    }
  } else if (const auto* e = doc.get("expect")) {
    fail(*e, "expect needs a commands list");
  }

  if (const auto* s = doc.get("sampling")) pf.sampling = load_sampling(as_table(*s, "[sampling]"));
  std::optional<Chart> chart;
  if (const auto* c = doc.get("chart")) chart = load_chart(as_table(*c, "[chart]"));
  if (const auto* a = doc.get("algebroid")) {
    if (!chart) throw ConfigError("[algebroid] requires a [chart] block");
    pf.algebroid = load_algebroid(as_table(*a, "[algebroid]"), *chart);
  }
  if (const auto* p = doc.get("prolongation")) {
    if (!pf.algebroid) throw ConfigError("[prolongation] requires an [algebroid] block");
    pf.prolongation = load_prolongation(as_table(*p, "[prolongation]"), *pf.algebroid);
  }
  if (const auto* i = doc.get("ideal")) {
    if (!pf.algebroid) throw ConfigError("[ideal] requires an [algebroid] block");
    pf.ideal = load_ideal(as_table(*i, "[ideal]"), pf.prolongation ? pf.prolongation->total : *pf.algebroid);
  }
  if (doc.get("section")) {
    if (!pf.prolongation) throw ConfigError("[section] requires a [prolongation] block");
    pf.section = load_section(block(doc, "section", "[section]"), *pf.prolongation);
  }
  if (const auto* i = doc.get("ip")) pf.ip = load_ip(as_table(*i, "[ip]"), pf);
  if (const auto* c = doc.get("candidate")) {
    if (!pf.ip) throw ConfigError("[candidate] requires an [ip] block");
    pf.candidate = load_candidate(as_table(*c, "[candidate]"), *pf.ip);
  }
  if (const auto* o = doc.get("ode")) {
    if (const auto* t = o->as_table()) {
      pf.ode.push_back(load_ode(*t, 0));
    } else if (const auto* arr = o->as_array()) {
      for (std::size_t i = 0; i < arr->size(); ++i) pf.ode.push_back(load_ode(as_table(*arr->get(i), "[[ode]] entry"), i));
    } else {
      fail(*o, "[ode] must be a table or an array of tables");
    }
  }
  return pf;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_problem_text(ss.str(), path.string());
}

std::vector<CorpusEntry> list_corpus(const std::filesystem::path& dir) {
  std::vector<CorpusEntry> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".toml") continue;
    CorpusEntry c{entry.path().stem().string(), "", entry.path()};
    try {
      const toml::table doc = toml::parse_file(entry.path().string());
      if (const auto* n = doc.get_as<std::string>("name")) c.name = n->get();
      if (const auto* d = doc.get_as<std::string>("description")) c.description = d->get();
    } catch (const toml::parse_error& e) {
      c.description = "(unreadable: " + std::string(e.description()) + ")";
    }
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path.filename() < b.path.filename(); });
  return out;
}

}  // namespace aeds::cli
