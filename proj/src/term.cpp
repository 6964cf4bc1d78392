#include "gliq/term.hpp"

#include <sstream>

namespace gliq {

std::string_view sort_name(Sort s) {
  switch (s) {
    case Sort::Int: return "Int";
    case Sort::Bool: return "Bool";
    case Sort::List: return "List Int";
  }
  return "?";
}

namespace {

TermPtr make(Term t) { return std::make_shared<const Term>(std::move(t)); }

}  // namespace

TermPtr int_const(long long n) {
  Term t;
  t.kind = TermKind::IntConst;
  t.value = n;
  return make(std::move(t));
}

TermPtr bool_const(bool b) {
  static const TermPtr kT = [] {
    Term t;
    t.kind = TermKind::BoolConst;
    t.value = 1;
    return make(std::move(t));
  }();
  static const TermPtr kF = [] {
    Term t;
    t.kind = TermKind::BoolConst;
    t.value = 0;
    return make(std::move(t));
  }();
  return b ? kT : kF;
}

TermPtr mk_true() { return bool_const(true); }
TermPtr mk_false() { return bool_const(false); }

TermPtr var(const std::string& name) {
  Term t;
  t.kind = TermKind::Var;
  t.name = name;
  return make(std::move(t));
}

TermPtr measure(const std::string& name, TermPtr arg) {
  Term t;
  t.kind = TermKind::Measure;
  t.name = name;
  t.args = {std::move(arg)};
  return make(std::move(t));
}

TermPtr arith(ArithOp op, TermPtr a, TermPtr b) {
  Term t;
  t.kind = TermKind::Arith;
  t.arith = op;
  t.args = {std::move(a), std::move(b)};
  return make(std::move(t));
}

TermPtr cmp(CmpOp op, TermPtr a, TermPtr b) {
  Term t;
  t.kind = TermKind::Cmp;
  t.cmp = op;
  t.args = {std::move(a), std::move(b)};
  return make(std::move(t));
}

TermPtr neg(TermPtr a) {
  if (a->kind == TermKind::BoolConst) return bool_const(a->value == 0);
  Term t;
  t.kind = TermKind::Not;
  t.args = {std::move(a)};
  return make(std::move(t));
}

TermPtr conj(std::vector<TermPtr> parts) {
  std::vector<TermPtr> flat;
  for (auto& p : parts) {
    if (!p || is_true(p)) continue;
    if (is_false(p)) return mk_false();
    if (p->kind == TermKind::And) {
      for (auto& q : p->args) flat.push_back(q);
    } else {
      flat.push_back(p);
    }
  }
  if (flat.empty()) return mk_true();
  if (flat.size() == 1) return flat[0];
  Term t;
  t.kind = TermKind::And;
  t.args = std::move(flat);
  return make(std::move(t));
}

TermPtr conj(TermPtr a, TermPtr b) { return conj(std::vector<TermPtr>{std::move(a), std::move(b)}); }

TermPtr disj(std::vector<TermPtr> parts) {
  std::vector<TermPtr> flat;
  for (auto& p : parts) {
    if (!p || is_false(p)) continue;
    if (is_true(p)) return mk_true();
    if (p->kind == TermKind::Or) {
      for (auto& q : p->args) flat.push_back(q);
    } else {
      flat.push_back(p);
    }
  }
  if (flat.empty()) return mk_false();
  if (flat.size() == 1) return flat[0];
  Term t;
  t.kind = TermKind::Or;
  t.args = std::move(flat);
  return make(std::move(t));
}

TermPtr iff(TermPtr a, TermPtr b) {
  Term t;
  t.kind = TermKind::Iff;
  t.args = {std::move(a), std::move(b)};
  return make(std::move(t));
}

TermPtr implies(TermPtr a, TermPtr b) {
  Term t;
  t.kind = TermKind::Implies;
  t.args = {std::move(a), std::move(b)};
  return make(std::move(t));
}

TermPtr kvar_app(int id, Subst pending) {
  Term t;
  t.kind = TermKind::KVar;
  t.kvar = id;
  t.pending = std::move(pending);
  return make(std::move(t));
}

bool is_true(const TermPtr& t) { return t->kind == TermKind::BoolConst && t->value != 0; }
bool is_false(const TermPtr& t) { return t->kind == TermKind::BoolConst && t->value == 0; }

Subst compose(const Subst& inner, const Subst& outer) {
  // (t[inner])[outer]
  Subst out;
  for (const auto& [k, v] : inner) out[k] = subst(v, outer);
  for (const auto& [k, v] : outer) out.emplace(k, v);
  return out;
}

TermPtr subst(const TermPtr& t, const Subst& theta) {
  if (theta.empty()) return t;
  switch (t->kind) {
    case TermKind::IntConst:
    case TermKind::BoolConst:
      return t;
    case TermKind::Var: {
      auto it = theta.find(t->name);
      return it == theta.end() ? t : it->second;
    }
    case TermKind::KVar:
      return kvar_app(t->kvar, compose(t->pending, theta));
    default: {
      Term copy = *t;
      bool changed = false;
      for (auto& a : copy.args) {
        auto b = subst(a, theta);
        changed |= (b != a);
        a = b;
      }
      if (!changed) return t;
      if (copy.kind == TermKind::And) return conj(copy.args);
      if (copy.kind == TermKind::Or) return disj(copy.args);
      return make(std::move(copy));
    }
  }
}

TermPtr rename(const TermPtr& t, const std::string& from, const std::string& to) {
  return subst(t, Subst{{from, var(to)}});
}

namespace {

void collect_vars(const TermPtr& t, std::set<std::string>& out) {
  if (t->kind == TermKind::Var) out.insert(t->name);
  if (t->kind == TermKind::KVar)
    for (const auto& [k, v] : t->pending) collect_vars(v, out);
  for (const auto& a : t->args) collect_vars(a, out);
}

void collect_kvars(const TermPtr& t, std::set<int>& out) {
  if (t->kind == TermKind::KVar) out.insert(t->kvar);
  for (const auto& a : t->args) collect_kvars(a, out);
}

}  // namespace

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> out;
  collect_vars(t, out);
  return out;
}

std::set<int> kvars_of(const TermPtr& t) {
  std::set<int> out;
  collect_kvars(t, out);
  return out;
}

bool mentions(const TermPtr& t, const std::string& name) {
  if (t->kind == TermKind::Var) return t->name == name;
  for (const auto& a : t->args)
    if (mentions(a, name)) return true;
  return false;
}

std::vector<TermPtr> conjuncts(const TermPtr& t) {
  if (is_true(t)) return {};
  if (t->kind == TermKind::And) return t->args;
  return {t};
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->value != b->value || a->name != b->name || a->kvar != b->kvar) return false;
  if (a->kind == TermKind::Arith && a->arith != b->arith) return false;
  if (a->kind == TermKind::Cmp && a->cmp != b->cmp) return false;
  if (a->args.size() != b->args.size() || a->pending.size() != b->pending.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!term_equal(a->args[i], b->args[i])) return false;
  auto ia = a->pending.begin();
  auto ib = b->pending.begin();
  for (; ia != a->pending.end(); ++ia, ++ib)
    if (ia->first != ib->first || !term_equal(ia->second, ib->second)) return false;
  return true;
}

bool term_less(const TermPtr& a, const TermPtr& b) { return show(a, kNu) < show(b, kNu); }

namespace {

CmpOp flip(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Ge: return CmpOp::Le;
    default: return op;
  }
}

bool is_literal(const TermPtr& t) { return t->kind == TermKind::IntConst || t->kind == TermKind::BoolConst; }

}  // namespace

TermPtr canonical_atom(const TermPtr& t) {
  if (t->kind != TermKind::Cmp) return t;
  const auto& l = t->args[0];
  const auto& r = t->args[1];
  bool swap = (mentions(r, kNu) && !mentions(l, kNu)) ||
              (is_literal(l) && !is_literal(r) && !mentions(l, kNu));
  if (!swap) return t;
  return cmp(flip(t->cmp), r, l);
}

namespace {

// Precedence, loosest first.
enum Prec { kIff = 1, kImp, kOr, kAnd, kNot, kCmp, kAdd, kMul, kApp, kAtom };

std::string cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "/=";
  }
  return "?";
}

void render(const TermPtr& t, const std::string& binder, int ctx, std::ostream& os);

void wrap(const TermPtr& t, const std::string& binder, int own, int ctx, std::ostream& os,
          void (*body)(const TermPtr&, const std::string&, std::ostream&)) {
  if (own < ctx) os << '(';
  body(t, binder, os);
  if (own < ctx) os << ')';
}

void render(const TermPtr& t, const std::string& binder, int ctx, std::ostream& os) {
  switch (t->kind) {
    case TermKind::IntConst:
      if (t->value < 0 && ctx > kAdd) {
        os << '(' << t->value << ')';
      } else {
        os << t->value;
      }
      return;
    case TermKind::BoolConst:
      os << (t->value ? "true" : "false");
      return;
    case TermKind::Var:
      os << (t->name == kNu ? binder : t->name);
      return;
    case TermKind::Measure:
      wrap(t, binder, kApp, ctx, os, [](const TermPtr& x, const std::string& b, std::ostream& o) {
        o << x->name << ' ';
        render(x->args[0], b, kAtom, o);
      });
      return;
    case TermKind::Arith: {
      int own = t->arith == ArithOp::Mul ? kMul : kAdd;
      if (own < ctx) os << '(';
      render(t->args[0], binder, own, os);
      os << (t->arith == ArithOp::Add ? " + " : t->arith == ArithOp::Sub ? " - " : " * ");
      render(t->args[1], binder, own + 1, os);
      if (own < ctx) os << ')';
      return;
    }
    case TermKind::Cmp:
      if (kCmp < ctx) os << '(';
      render(t->args[0], binder, kCmp + 1, os);
      os << ' ' << cmp_text(t->cmp) << ' ';
      render(t->args[1], binder, kCmp + 1, os);
      if (kCmp < ctx) os << ')';
      return;
    case TermKind::Not:
      if (kNot < ctx) os << '(';
      os << "not ";
      render(t->args[0], binder, kNot + 1, os);
      if (kNot < ctx) os << ')';
      return;
    case TermKind::And:
    case TermKind::Or: {
      int own = t->kind == TermKind::And ? kAnd : kOr;
      if (own < ctx) os << '(';
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << (t->kind == TermKind::And ? " && " : " || ");
        render(t->args[i], binder, own + 1, os);
      }
      if (own < ctx) os << ')';
      return;
    }
    case TermKind::Iff:
    case TermKind::Implies: {
      int own = t->kind == TermKind::Iff ? kIff : kImp;
      if (own < ctx) os << '(';
      render(t->args[0], binder, own + 1, os);
      os << (t->kind == TermKind::Iff ? " <=> " : " => ");
      render(t->args[1], binder, own, os);
      if (own < ctx) os << ')';
      return;
    }
    case TermKind::KVar:
      os << "k" << t->kvar;
      if (!t->pending.empty()) {
        os << '[';
        bool first = true;
        for (const auto& [k, v] : t->pending) {
          if (!first) os << ", ";
          first = false;
          os << (k == kNu ? binder : k) << ":=";
          render(v, binder, kAtom, os);
        }
        os << ']';
      }
      return;
  }
}

}  // namespace

std::string show(const TermPtr& t, const std::string& binder) {
  std::ostringstream os;
  render(t, binder, 0, os);
  return os.str();
}

MeasureTable default_measures() { return {{"len", MeasureSig{Sort::List, Sort::Int}}}; }

std::optional<Sort> sort_of(const TermPtr& t, const SortEnv& env, const MeasureTable& measures) {
  auto sub = [&](size_t i) { return sort_of(t->args[i], env, measures); };
  auto all_bool = [&]() {
    for (size_t i = 0; i < t->args.size(); ++i)
      if (sub(i) != Sort::Bool) return false;
    return true;
  };
  switch (t->kind) {
    case TermKind::IntConst: return Sort::Int;
    case TermKind::BoolConst: return Sort::Bool;
    case TermKind::KVar: return Sort::Bool;
    case TermKind::Var: {
      auto it = env.find(t->name);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    case TermKind::Measure: {
      auto it = measures.find(t->name);
      if (it == measures.end() || sub(0) != it->second.arg) return std::nullopt;
      return it->second.result;
    }
    case TermKind::Arith:
      if (sub(0) != Sort::Int || sub(1) != Sort::Int) return std::nullopt;
      return Sort::Int;
    case TermKind::Cmp: {
      auto a = sub(0);
      auto b = sub(1);
      if (!a || !b || *a != *b) return std::nullopt;
      if (t->cmp != CmpOp::Eq && t->cmp != CmpOp::Ne && *a != Sort::Int) return std::nullopt;
      return Sort::Bool;
    }
    case TermKind::Not:
    case TermKind::And:
    case TermKind::Or:
    case TermKind::Iff:
    case TermKind::Implies:
      if (!all_bool()) return std::nullopt;
      return Sort::Bool;
  }
  return std::nullopt;
}

namespace {
void collect_measures(const TermPtr& t, std::vector<TermPtr>& out) {
  if (t->kind == TermKind::Measure) {
    bool seen = false;
    for (const auto& m : out) seen |= term_equal(m, t);
    if (!seen) out.push_back(t);
  }
  for (const auto& a : t->args) collect_measures(a, out);
  if (t->kind == TermKind::KVar)
    for (const auto& [k, v] : t->pending) collect_measures(v, out);
}
}  // namespace

std::vector<TermPtr> measure_apps(const TermPtr& t) {
  std::vector<TermPtr> out;
  collect_measures(t, out);
  return out;
}

}  // namespace gliq
