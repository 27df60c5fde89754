#include "aeds/algebroid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>

#include "aeds/errors.hpp"

namespace aeds {

struct Algebroid::Impl {
  Chart chart;
  std::size_t rank = 0;
  ExprMatrix anchor;
  ExprCube structure;
  std::vector<std::string> names;
  // delta e^c as a 2-form: mask {a<b} -> -(L^c_{ab} - L^c_{ba})/2
  std::vector<std::map<Mask, Expr>> de;
};

namespace {

void check_vars(const Expr& e, const Chart& chart, const std::string& where) {
  for (const auto& v : free_variables(e)) {
    if (!chart.contains(v)) throw UnknownVariable(v + " (in " + where + ")");
  }
}

// Sign of the permutation sorting idx, or 0 on a repeated index.
int sort_sign(std::vector<std::size_t>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  return sign;
}

// Number of set bits of m strictly below position a.
int bits_below(Mask m, std::size_t a) {
  return std::popcount(m & ((Mask{1} << a) - 1));
}

void require_same(const Algebroid& a, const Algebroid& b) {
  if (!same(a, b)) throw AlgebroidMismatch();
}

}  // namespace

std::vector<std::size_t> mask_indices(Mask m) {
  std::vector<std::size_t> out;
  while (m) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

Mask indices_mask(std::span<const std::size_t> increasing) {
  Mask m = 0;
  for (auto i : increasing) m |= Mask{1} << i;
  return m;
}

// ---------------------------------------------------------------------------

Algebroid::Algebroid(Chart chart, std::size_t rank, ExprMatrix anchor, ExprCube structure,
                     std::vector<std::string> basis_names) {
  if (rank == 0 || rank > 64) throw ShapeMismatch("algebroid rank must be between 1 and 64");
  const std::size_t n = chart.dim();
  if (anchor.size() != rank) throw ShapeMismatch("anchor must have one row per basis section");
  for (const auto& row : anchor) {
    if (row.size() != n) throw ShapeMismatch("anchor rows must have one entry per coordinate");
  }
  if (structure.size() != rank) throw ShapeMismatch("structure functions must be rank x rank x rank");
  for (const auto& m : structure) {
    if (m.size() != rank) throw ShapeMismatch("structure functions must be rank x rank x rank");
    for (const auto& v : m) {
      if (v.size() != rank) throw ShapeMismatch("structure functions must be rank x rank x rank");
    }
  }
  if (basis_names.empty()) {
    for (std::size_t a = 0; a < rank; ++a) basis_names.push_back("e" + std::to_string(a + 1));
  }
  if (basis_names.size() != rank) throw ShapeMismatch("one basis name per section required");
  for (std::size_t a = 0; a < rank; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (basis_names[a] == basis_names[b]) throw NameCollision("duplicate basis name '" + basis_names[a] + "'");
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->rank = rank;
  for (auto& row : anchor) {
    for (auto& e : row) {
      e = simplify(e);
      check_vars(e, chart, "anchor");
    }
  }
  for (auto& m : structure) {
    for (auto& v : m) {
      for (auto& e : v) {
        e = simplify(e);
        check_vars(e, chart, "structure functions");
      }
    }
  }
  impl->de.resize(rank);
  for (std::size_t c = 0; c < rank; ++c) {
    for (std::size_t a = 0; a < rank; ++a) {
      for (std::size_t b = a + 1; b < rank; ++b) {
        Expr coeff = Expr(-0.5) * (structure[a][b][c] - structure[b][a][c]);
        if (!coeff.is_zero()) impl->de[c].emplace((Mask{1} << a) | (Mask{1} << b), coeff);
      }
    }
  }
  impl->chart = std::move(chart);
  impl->anchor = std::move(anchor);
  impl->structure = std::move(structure);
  impl->names = std::move(basis_names);
  impl_ = std::move(impl);
}

const Chart& Algebroid::chart() const noexcept { return impl_->chart; }
std::size_t Algebroid::rank() const noexcept { return impl_->rank; }
const Expr& Algebroid::anchor(std::size_t a, std::size_t i) const { return impl_->anchor.at(a).at(i); }
const Expr& Algebroid::structure(std::size_t a, std::size_t b, std::size_t c) const {
  return impl_->structure.at(a).at(b).at(c);
}
const std::string& Algebroid::basis_name(std::size_t a) const { return impl_->names.at(a); }
const std::vector<std::string>& Algebroid::basis_names() const noexcept { return impl_->names; }

std::optional<std::size_t> Algebroid::basis_index(std::string_view name) const noexcept {
  for (std::size_t a = 0; a < impl_->names.size(); ++a) {
    if (impl_->names[a] == name) return a;
  }
  return std::nullopt;
}

Expr Algebroid::anchor_apply(std::size_t a, const Expr& f) const {
  if (f.is_const()) return Expr(0);
  std::vector<Expr> terms;
  const auto vars = free_variables(f);
  for (std::size_t i = 0; i < dim(); ++i) {
    const Expr& r = anchor(a, i);
    if (r.is_zero() || !vars.contains(chart().name(i))) continue;
    terms.push_back(r * differentiate(f, chart().name(i)));
  }
  return sum(terms);
}

// ---------------------------------------------------------------------------

Section::Section(Algebroid alg, std::vector<Expr> components) : alg_(std::move(alg)), comps_(std::move(components)) {
  if (comps_.size() != alg_.rank()) throw ShapeMismatch("section needs one component per basis section");
  for (auto& c : comps_) {
    c = simplify(c);
    check_vars(c, alg_.chart(), "section");
  }
}

Section Section::basis(const Algebroid& alg, std::size_t a) {
  std::vector<Expr> c(alg.rank(), Expr(0));
  c.at(a) = Expr(1);
  return Section(alg, std::move(c));
}

Section Section::zero(const Algebroid& alg) { return Section(alg, std::vector<Expr>(alg.rank(), Expr(0))); }

Expr Section::apply(const Expr& f) const {
  std::vector<Expr> terms;
  for (std::size_t a = 0; a < comps_.size(); ++a) {
    if (comps_[a].is_zero()) continue;
    terms.push_back(comps_[a] * alg_.anchor_apply(a, f));
  }
  return sum(terms);
}

Section operator+(const Section& a, const Section& b) {
  require_same(a.alg_, b.alg_);
  std::vector<Expr> c(a.comps_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.comps_[i] + b.comps_[i];
  return Section(a.alg_, std::move(c));
}

Section operator-(const Section& a, const Section& b) {
  require_same(a.alg_, b.alg_);
  std::vector<Expr> c(a.comps_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.comps_[i] - b.comps_[i];
  return Section(a.alg_, std::move(c));
}

Section operator*(const Expr& f, const Section& s) {
  std::vector<Expr> c(s.comps_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f * s.comps_[i];
  return Section(s.alg_, std::move(c));
}

// ---------------------------------------------------------------------------

Form::Form(Algebroid alg, std::size_t degree) : alg_(std::move(alg)), degree_(degree) {}

Form Form::function(const Algebroid& alg, const Expr& f) {
  Form w(alg, 0);
  w.accumulate(0, f);
  return w;
}

Form Form::basis(const Algebroid& alg, std::size_t a) {
  if (a >= alg.rank()) throw ShapeMismatch("basis index out of range");
  Form w(alg, 1);
  w.accumulate(Mask{1} << a, Expr(1));
  return w;
}

Form Form::monomial(const Algebroid& alg, std::span<const std::size_t> indices, const Expr& coeff) {
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  for (auto i : idx) {
    if (i >= alg.rank()) throw ShapeMismatch("basis index out of range");
  }
  Form w(alg, idx.size());
  const int sign = sort_sign(idx);
  if (sign != 0) w.accumulate(indices_mask(idx), sign * coeff);
  return w;
}

Expr Form::coefficient(Mask m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Expr(0) : it->second;
}

void Form::accumulate(Mask m, const Expr& c) {
  if (static_cast<std::size_t>(std::popcount(m)) != degree_) throw DegreeError("term degree does not match the form");
  if (alg_.rank() < 64 && (m >> alg_.rank()) != 0) throw ShapeMismatch("basis index out of range");
  const Expr s = simplify(c);
  if (s.is_zero()) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, s);
    return;
  }
  it->second = it->second + s;
  if (it->second.is_zero()) terms_.erase(it);
}

std::vector<Expr> Form::coefficients() const {
  std::vector<Expr> out;
  out.reserve(terms_.size());
  for (const auto& [m, c] : terms_) out.push_back(c);
  return out;
}

Form operator+(const Form& a, const Form& b) {
  require_same(a.alg_, b.alg_);
  if (a.degree_ != b.degree_) throw DegreeError("cannot add forms of different degree");
  Form out = a;
  for (const auto& [m, c] : b.terms_) out.accumulate(m, c);
  return out;
}

Form operator-(const Form& a) {
  Form out(a.alg_, a.degree_);
  for (const auto& [m, c] : a.terms_) out.accumulate(m, -c);
  return out;
}

Form operator-(const Form& a, const Form& b) { return a + (-b); }

Form operator*(const Expr& f, const Form& w) {
  Form out(w.alg_, w.degree_);
  if (f.is_zero()) return out;
  for (const auto& [m, c] : w.terms_) out.accumulate(m, f * c);
  return out;
}

Form wedge(const Form& a, const Form& b) {
  require_same(a.algebroid(), b.algebroid());
  Form out(a.algebroid(), a.degree() + b.degree());
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      if (ma & mb) continue;
      // Moving each index of b left past the larger indices of a.
      int swaps = 0;
      for (Mask r = mb; r; r &= r - 1) {
        const auto j = static_cast<std::size_t>(std::countr_zero(r));
        swaps += std::popcount(ma) - bits_below(ma, j);
      }
      const Expr c = ca * cb;
      out.accumulate(ma | mb, (swaps % 2) ? -c : c);
    }
  }
  return out;
}

Section bracket(const Section& s1, const Section& s2) {
  require_same(s1.algebroid(), s2.algebroid());
  const Algebroid& alg = s1.algebroid();
  const std::size_t r = alg.rank();
  std::vector<Expr> out(r);
  for (std::size_t c = 0; c < r; ++c) {
    std::vector<Expr> terms;
    for (std::size_t a = 0; a < r; ++a) {
      if (s1[a].is_zero()) continue;
      for (std::size_t b = 0; b < r; ++b) {
        if (s2[b].is_zero() || alg.structure(a, b, c).is_zero()) continue;
        terms.push_back(s1[a] * s2[b] * alg.structure(a, b, c));
      }
    }
    terms.push_back(s1.apply(s2[c]));
    terms.push_back(-s2.apply(s1[c]));
    out[c] = sum(terms);
  }
  return Section(alg, std::move(out));
}

Form exterior_derivative(const Algebroid& alg, const Form& w) {
  require_same(alg, w.algebroid());
  const std::size_t r = alg.rank();
  Form out(alg, w.degree() + 1);
  if (w.degree() >= r) return out;
  const auto& de = alg.impl_->de;
  for (const auto& [m, f] : w.terms()) {
    // df ^ e^I
    for (std::size_t a = 0; a < r; ++a) {
      if (m & (Mask{1} << a)) continue;
      const Expr d = alg.anchor_apply(a, f);
      if (d.is_zero()) continue;
      out.accumulate(m | (Mask{1} << a), (bits_below(m, a) % 2) ? -d : d);
    }
    // f * sum_k (-1)^(k-1) e^{i1} ^ ... ^ de^{ik} ^ ...
    const auto idx = mask_indices(m);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Mask rest = m & ~(Mask{1} << idx[k]);
      for (const auto& [pair, c] : de[idx[k]]) {
        if (pair & rest) continue;
        std::vector<std::size_t> seq(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        for (auto p : mask_indices(pair)) seq.push_back(p);
        seq.insert(seq.end(), idx.begin() + static_cast<std::ptrdiff_t>(k) + 1, idx.end());
        int sign = sort_sign(seq);
        if (sign == 0) continue;
        if (k % 2) sign = -sign;
        out.accumulate(rest | pair, sign * (f * c));
      }
    }
  }
  return out;
}

Form interior_product(const Section& s, const Form& w) {
  require_same(s.algebroid(), w.algebroid());
  if (w.degree() == 0) throw DegreeZero();
  Form out(w.algebroid(), w.degree() - 1);
  for (const auto& [m, f] : w.terms()) {
    const auto idx = mask_indices(m);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (s[idx[k]].is_zero()) continue;
      const Expr c = s[idx[k]] * f;
      out.accumulate(m & ~(Mask{1} << idx[k]), (k % 2) ? -c : c);
    }
  }
  return out;
}

Form lie_derivative(const Section& s, const Form& w) {
  require_same(s.algebroid(), w.algebroid());
  const Form dw = exterior_derivative(w);
  if (w.degree() == 0) return interior_product(s, dw);
  return interior_product(s, dw) + exterior_derivative(interior_product(s, w));
}

Expr apply_form(const Form& w, std::span<const Section> sections) {
  if (sections.size() != w.degree()) {
    throw ArityMismatch("form of degree " + std::to_string(w.degree()) + " applied to " +
                        std::to_string(sections.size()) + " sections");
  }
  Form cur = w;
  for (const auto& s : sections) cur = interior_product(s, cur);
  return cur.scalar();
}

double eval_form(const Form& w, std::span<const Section> sections, const Point& point) {
  return evaluate(apply_form(w, sections), point);
}

// ---------------------------------------------------------------------------

Report validate(const Algebroid& alg, const SampleSpec& spec) {
  Report rep;
  rep.title = "algebroid validation";
  const std::size_t r = alg.rank();
  const std::size_t n = alg.dim();
  const Sweep sweep(alg.chart(), spec);

  std::vector<Expr> anti;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a; b < r; ++b) {
      for (std::size_t c = 0; c < r; ++c) anti.push_back(alg.structure(a, b, c) + alg.structure(b, a, c));
    }
  }
  rep.add(sweep.residual("antisymmetry", anti));

  std::vector<Expr> compat;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = 0; b < r; ++b) {
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<Expr> terms;
        for (std::size_t g = 0; g < r; ++g) terms.push_back(alg.anchor(g, k) * alg.structure(a, b, g));
        terms.push_back(-alg.anchor_apply(a, alg.anchor(b, k)));
        terms.push_back(alg.anchor_apply(b, alg.anchor(a, k)));
        compat.push_back(sum(terms));
      }
    }
  }
  rep.add(sweep.residual("anchor compatibility", compat));

  std::vector<Expr> jacobi;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      for (std::size_t c = b + 1; c < r; ++c) {
        const std::size_t cyc[3][3] = {{a, b, c}, {b, c, a}, {c, a, b}};
        for (std::size_t d = 0; d < r; ++d) {
          std::vector<Expr> terms;
          for (const auto& t : cyc) {
            terms.push_back(alg.anchor_apply(t[0], alg.structure(t[1], t[2], d)));
            for (std::size_t e = 0; e < r; ++e) {
              terms.push_back(alg.structure(t[0], e, d) * alg.structure(t[1], t[2], e));
            }
          }
          jacobi.push_back(sum(terms));
        }
      }
    }
  }
  rep.add(sweep.residual("jacobi", jacobi));
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

enum class Shape { Upper, Lower, General };

Shape triangular_shape(const ExprMatrix& m) {
  const std::size_t r = m.size();
  for (std::size_t i = 0; i < r; ++i) {
    if (!m[i][i].is_const() || m[i][i].is_zero()) return Shape::General;
  }
  bool upper = true;
  bool lower = true;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      if (i > j && !m[i][j].is_zero()) upper = false;
      if (i < j && !m[i][j].is_zero()) lower = false;
    }
  }
  if (upper) return Shape::Upper;
  if (lower) return Shape::Lower;
  return Shape::General;
}

ExprMatrix transpose(const ExprMatrix& m) {
  ExprMatrix t(m.size(), std::vector<Expr>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) t[j][i] = m[i][j];
  }
  return t;
}

ExprMatrix upper_inverse(const ExprMatrix& u) {
  const std::size_t r = u.size();
  ExprMatrix x(r, std::vector<Expr>(r, Expr(0)));
  for (std::size_t i = r; i-- > 0;) {
    const Expr inv = Expr(1.0 / u[i][i].value());
    x[i][i] = inv;
    for (std::size_t j = i + 1; j < r; ++j) {
      std::vector<Expr> terms;
      for (std::size_t k = i + 1; k <= j; ++k) {
        if (u[i][k].is_zero() || x[k][j].is_zero()) continue;
        terms.push_back(u[i][k] * x[k][j]);
      }
      x[i][j] = -inv * sum(terms);
    }
  }
  return x;
}

}  // namespace

BasisChange::BasisChange(Algebroid alg, ExprMatrix rows, std::vector<std::string> names)
    : alg_(std::move(alg)), rows_(std::move(rows)), names_(std::move(names)) {
  const std::size_t r = alg_.rank();
  if (rows_.size() != r) throw ShapeMismatch("basis change must be rank x rank");
  for (auto& row : rows_) {
    if (row.size() != r) throw ShapeMismatch("basis change must be rank x rank");
    for (auto& e : row) e = simplify(e);
  }
  if (names_.empty()) {
    for (std::size_t a = 0; a < r; ++a) names_.push_back("b" + std::to_string(a + 1));
  }
  if (names_.size() != r) throw ShapeMismatch("one name per new basis section required");
  for (std::size_t a = 0; a < r; ++a) sections_.emplace_back(alg_, rows_[a]);

  const Shape shape = triangular_shape(rows_);
  if (shape == Shape::General) return;
  const ExprMatrix inv = shape == Shape::Upper ? upper_inverse(rows_) : transpose(upper_inverse(transpose(rows_)));
  // b^a = sum_c (M^-1)_{c a} e^c
  for (std::size_t a = 0; a < r; ++a) {
    Form f(alg_, 1);
    for (std::size_t c = 0; c < r; ++c) f.accumulate(Mask{1} << c, inv[c][a]);
    dual_.push_back(std::move(f));
  }
}

const Form& BasisChange::dual(std::size_t a) const {
  if (!symbolic()) throw ShapeMismatch("dual basis is only available for triangular basis changes");
  return dual_.at(a);
}

std::vector<Expr> BasisChange::components(const Section& s) const {
  require_same(alg_, s.algebroid());
  std::vector<Expr> out;
  for (std::size_t a = 0; a < rank(); ++a) {
    const Section one[] = {s};
    out.push_back(apply_form(dual(a), one));
  }
  return out;
}

std::vector<double> BasisChange::components_at(const Section& s, const Point& p) const {
  require_same(alg_, s.algebroid());
  const auto r = static_cast<Eigen::Index>(rank());
  Eigen::MatrixXd mt(r, r);
  Eigen::VectorXd v(r);
  for (Eigen::Index a = 0; a < r; ++a) {
    v(a) = evaluate(s[static_cast<std::size_t>(a)], p);
    for (Eigen::Index c = 0; c < r; ++c) mt(c, a) = evaluate(rows_[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)], p);
  }
  const Eigen::VectorXd x = mt.fullPivLu().solve(v);
  return {x.data(), x.data() + r};
}

Expr BasisChange::coefficient(const Form& w, Mask m) const {
  require_same(alg_, w.algebroid());
  std::vector<Section> secs;
  for (auto a : mask_indices(m)) secs.push_back(sections_.at(a));
  return apply_form(w, secs);
}

std::map<Mask, Expr> BasisChange::coefficients(const Form& w) const {
  std::map<Mask, Expr> out;
  const std::size_t r = rank();
  const std::size_t q = w.degree();
  // Enumerate increasing q-tuples.
  std::vector<std::size_t> idx(q);
  for (std::size_t i = 0; i < q; ++i) idx[i] = i;
  if (q > r) return out;
  for (;;) {
    const Mask m = indices_mask(idx);
    Expr c = coefficient(w, m);
    if (!c.is_zero()) out.emplace(m, std::move(c));
    std::size_t i = q;
    while (i > 0 && idx[i - 1] == r - q + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < q; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace aeds
