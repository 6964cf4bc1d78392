#include "gliq/templates.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include "gliq/program.hpp"
#include "gliq/smt.hpp"

namespace gliq {

std::string slot_var(size_t i) { return "*" + std::to_string(i); }

std::string Template::show() const {
  std::string s = gliq::show(body, "v");
  // slot variables print as `*N`; collapse to the conventional star.
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    out += s[i];
    if (s[i] == '*' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))
      while (i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) ++i;
  }
  return out;
}

namespace {

const CmpOp kOrder[] = {CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne};

Template tmpl(TermPtr body, std::vector<Sort> slots) {
  Template t;
  t.body = std::move(body);
  t.slots = std::move(slots);
  return t;
}

TermPtr nu() { return var(kNu); }
TermPtr star(size_t i = 0) { return var(slot_var(i)); }

}  // namespace

std::vector<Template> builtin_templates() {
  std::vector<Template> out;
  for (auto op : kOrder) out.push_back(tmpl(cmp(op, nu(), star()), {Sort::Int}));
  for (auto op : kOrder) out.push_back(tmpl(cmp(op, nu(), int_const(0)), {}));
  auto len = [](TermPtr t) { return measure("len", std::move(t)); };
  out.push_back(tmpl(cmp(CmpOp::Ge, len(nu()), int_const(0)), {}));
  out.push_back(tmpl(cmp(CmpOp::Gt, len(nu()), int_const(0)), {}));
  out.push_back(tmpl(cmp(CmpOp::Eq, len(nu()), len(star())), {Sort::List}));
  out.push_back(tmpl(cmp(CmpOp::Eq, nu(), len(star())), {Sort::List}));
  out.push_back(tmpl(cmp(CmpOp::Eq, nu(), arith(ArithOp::Add, len(star()), int_const(1))), {Sort::List}));
  return out;
}

std::vector<Template> minimal_templates() {
  return {
      tmpl(cmp(CmpOp::Lt, int_const(0), nu()), {}),
      tmpl(cmp(CmpOp::Le, int_const(0), nu()), {}),
      tmpl(cmp(CmpOp::Lt, nu(), int_const(0)), {}),
      tmpl(cmp(CmpOp::Le, nu(), int_const(0)), {}),
      tmpl(cmp(CmpOp::Lt, nu(), star()), {Sort::Int}),
      tmpl(cmp(CmpOp::Le, nu(), star()), {Sort::Int}),
  };
}

Template generalize(const TermPtr& atom, const SortEnv& sorts, TemplateOrigin origin) {
  Template t;
  t.origin = origin;
  Subst theta;
  std::vector<std::string> order;
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& x) {
    if (x->kind == TermKind::Var && x->name != kNu && !theta.count(x->name)) {
      auto it = sorts.find(x->name);
      Sort s = it == sorts.end() ? Sort::Int : it->second;
      theta[x->name] = var(slot_var(t.slots.size()));
      t.slots.push_back(s);
    }
    for (const auto& a : x->args) walk(a);
  };
  walk(atom);
  t.body = subst(atom, theta);
  return t;
}

namespace {

bool same_template(const Template& a, const Template& b) { return a.slots == b.slots && term_equal(a.body, b.body); }

void spec_atoms(const RTypePtr& t, SortEnv scope, std::vector<Template>& out) {
  if (t->is_base()) {
    const auto& b = t->base();
    scope[kNu] = b.base;
    for (const auto& c : conjuncts(b.refinement.static_part)) {
      if (c->kind == TermKind::BoolConst || !mentions(c, kNu)) continue;
      out.push_back(generalize(c, scope, TemplateOrigin::Spec));
    }
    return;
  }
  const auto& f = t->fun();
  spec_atoms(f.arg_type, scope, out);
  if (f.arg_type->is_base()) scope[f.arg] = f.arg_type->base().base;
  spec_atoms(f.result, scope, out);
}

}  // namespace

std::vector<Template> abstract_from_specs(const Program& p) {
  std::vector<Template> found;
  for (const auto& a : p.assumes) spec_atoms(a.type, {}, found);
  for (const auto& d : p.defs)
    if (d.sig) spec_atoms(*d.sig, {}, found);
  return merge_templates({}, found);
}

std::vector<Template> merge_templates(std::vector<Template> base, const std::vector<Template>& extra) {
  for (const auto& t : extra) {
    bool dup = false;
    for (const auto& b : base) dup |= same_template(b, t);
    if (!dup) base.push_back(t);
  }
  return base;
}

std::string conj_key(const TermPtr& p) {
  std::vector<std::string> parts;
  for (const auto& c : conjuncts(p)) parts.push_back(show(canonical_atom(c), kNu));
  std::sort(parts.begin(), parts.end());
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? " && " : "") + parts[i];
  return out.empty() ? "true" : out;
}

std::vector<TermPtr> instantiate(const std::vector<Template>& ts, const Scope& scope, Sort binder,
                                 const MeasureTable& measures) {
  SortEnv sorts;
  for (const auto& [n, s] : scope) sorts[n] = s;
  sorts[kNu] = binder;

  auto fillers = [&](Sort s) {
    std::vector<TermPtr> out;
    for (const auto& [n, vs] : scope) {
      if (n == kNu) continue;
      if (vs == s) out.push_back(var(n));
      if (s == Sort::Int && vs != Sort::Int)
        for (const auto& [m, sig] : measures)
          if (sig.arg == vs && sig.result == Sort::Int) out.push_back(measure(m, var(n)));
    }
    return out;
  };

  std::vector<TermPtr> out;
  std::set<std::string> seen;
  for (const auto& t : ts) {
    std::vector<std::vector<TermPtr>> choices;
    bool empty = false;
    for (auto s : t.slots) {
      choices.push_back(fillers(s));
      empty |= choices.back().empty();
    }
    if (empty) continue;
    std::function<void(size_t, Subst&)> fill = [&](size_t i, Subst& theta) {
      if (i == t.slots.size()) {
        auto q = subst(t.body, theta);
        if (sort_of(q, sorts, measures) == Sort::Bool && seen.insert(conj_key(q)).second) out.push_back(q);
        return;
      }
      for (const auto& f : choices[i]) {
        theta[slot_var(i)] = f;
        fill(i + 1, theta);
      }
    };
    Subst theta;
    fill(0, theta);
  }
  return out;
}

namespace {

// Admissible orderings of (a, b) under `a op b`, as a bit set {<:1, =:2, >:4}.
int orderings(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return 1;
    case CmpOp::Le: return 3;
    case CmpOp::Gt: return 4;
    case CmpOp::Ge: return 6;
    case CmpOp::Eq: return 2;
    case CmpOp::Ne: return 5;
  }
  return 7;
}

int mirror(int set) { return (set & 2) | ((set & 1) << 2) | ((set & 4) >> 2); }

}  // namespace

// Rules (anything else is sensible):
//  1. `a < a`, `a > a`, `a /= a`.
//  2. two comparisons over the same pair of atoms with no common ordering,
//     e.g. `x < v && v < x`, `v < 0 && v == 0`.
//  3. ill-sorted instantiations (arithmetic or ordering on lists/booleans).
bool sensible(const TermPtr& q, const SortEnv& sorts, const MeasureTable& measures) {
  if (sort_of(q, sorts, measures) != Sort::Bool) return false;
  auto atoms = conjuncts(q);
  for (const auto& a : atoms) {
    if (a->kind != TermKind::Cmp) continue;
    if (term_equal(a->args[0], a->args[1]) && (orderings(a->cmp) & 2) == 0) return false;
  }
  for (size_t i = 0; i < atoms.size(); ++i) {
    for (size_t j = i + 1; j < atoms.size(); ++j) {
      const auto& x = atoms[i];
      const auto& y = atoms[j];
      if (x->kind != TermKind::Cmp || y->kind != TermKind::Cmp) continue;
      int sx = orderings(x->cmp);
      int sy;
      if (term_equal(x->args[0], y->args[0]) && term_equal(x->args[1], y->args[1])) {
        sy = orderings(y->cmp);
      } else if (term_equal(x->args[0], y->args[1]) && term_equal(x->args[1], y->args[0])) {
        sy = mirror(orderings(y->cmp));
      } else {
        continue;
      }
      if ((sx & sy) == 0) return false;
    }
  }
  return true;
}

CandidateSet candidates(const std::vector<TermPtr>& qualifiers, Sort binder, const SortEnv& scope,
                        const TermPtr& static_part, const CandidateOptions& opts, SmtSession& smt) {
  CandidateSet cs;
  size_t n = qualifiers.size();
  int depth = std::max(1, opts.depth);
  // Conjunctions of 1..depth distinct qualifiers, by size then lexicographic index.
  std::vector<size_t> pick;
  if (opts.with_true) cs.all.push_back(mk_true());
  for (int k = 1; k <= depth && static_cast<size_t>(k) <= n; ++k) {
    pick.assign(static_cast<size_t>(k), 0);
    for (int i = 0; i < k; ++i) pick[static_cast<size_t>(i)] = static_cast<size_t>(i);
    while (true) {
      std::vector<TermPtr> parts;
      for (auto i : pick) parts.push_back(qualifiers[i]);
      cs.all.push_back(conj(parts));
      int i = k - 1;
      while (i >= 0 && pick[static_cast<size_t>(i)] == n - static_cast<size_t>(k - i)) --i;
      if (i < 0) break;
      ++pick[static_cast<size_t>(i)];
      for (int j = i + 1; j < k; ++j) pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
    }
  }
  SortEnv sorts = scope;
  sorts[kNu] = binder;
  for (size_t i = 0; i < cs.all.size(); ++i)
    if (!opts.sensibility || is_true(cs.all[i]) || sensible(cs.all[i], sorts, smt.measures())) cs.sensible.push_back(i);
  for (auto i : cs.sensible)
    if (smt.is_local(conj(static_part, cs.all[i]), binder, scope)) cs.local.push_back(i);
  for (auto i : cs.local)
    if (is_true(static_part) || smt.is_specific(cs.all[i], static_part, binder, scope)) cs.specific.push_back(i);
  return cs;
}

}  // namespace gliq
