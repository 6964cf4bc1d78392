#include "gliq/types.hpp"

#include <sstream>

namespace gliq {

GPred precise(TermPtr p) { return GPred{std::move(p), std::nullopt}; }
GPred gradual(TermPtr p, int source) { return GPred{std::move(p), Hole{source, {}}}; }

RTypePtr make_base(Sort s, GPred p, std::string binder) {
  return std::make_shared<const RType>(RType{RBase{s, std::move(p), std::move(binder)}});
}

RTypePtr make_base(Sort s, TermPtr p, std::string binder) { return make_base(s, precise(std::move(p)), std::move(binder)); }

RTypePtr make_fun(std::string arg, RTypePtr arg_type, RTypePtr result) {
  return std::make_shared<const RType>(RType{RFun{std::move(arg), std::move(arg_type), std::move(result)}});
}

GPred subst(const GPred& p, const Subst& theta) {
  GPred out{subst(p.static_part, theta), p.hole};
  if (out.hole) out.hole->pending = compose(out.hole->pending, theta);
  return out;
}

RBase subst(const RBase& b, const Subst& theta) { return RBase{b.base, subst(b.refinement, theta), b.binder}; }

RTypePtr subst(const RTypePtr& t, const Subst& theta) {
  if (theta.empty()) return t;
  if (t->is_base()) return std::make_shared<const RType>(RType{subst(t->base(), theta)});
  const auto& f = t->fun();
  Subst inner = theta;
  inner.erase(f.arg);
  // Avoid capturing a variable of θ's range under the arrow binder.
  bool clash = false;
  for (const auto& [k, v] : inner) clash |= mentions(v, f.arg);
  if (clash) {
    std::string fresh = f.arg + "'";
    auto taken = [&](const std::string& n) {
      for (const auto& [k, v] : inner)
        if (k == n || mentions(v, n)) return true;
      return false;
    };
    while (taken(fresh)) fresh += "'";
    auto renamed = subst(f.result, Subst{{f.arg, var(fresh)}});
    return make_fun(fresh, subst(f.arg_type, theta), subst(renamed, inner));
  }
  return make_fun(f.arg, subst(f.arg_type, theta), subst(f.result, inner));
}

std::string show(const GPred& p, const std::string& binder) {
  if (p.precise()) return show(p.static_part, binder);
  if (is_true(p.static_part)) return "?";
  return show(p.static_part, binder) + " && ?";
}

namespace {

bool hidden_arg(const std::string& name) { return name.empty() || name[0] == '_'; }

void render(const RTypePtr& t, std::ostream& os, bool arg_pos) {
  if (t->is_base()) {
    const auto& b = t->base();
    if (b.refinement.precise() && is_true(b.refinement.static_part)) {
      if (arg_pos && b.base == Sort::List) {
        os << "(List Int)";
      } else {
        os << sort_name(b.base);
      }
      return;
    }
    os << '{' << sort_name(b.base) << " | " << show(b.refinement, b.binder) << '}';
    return;
  }
  const auto& f = t->fun();
  if (arg_pos) os << '(';
  if (!hidden_arg(f.arg)) os << f.arg << ':';
  if (f.arg_type->is_base()) {
    const auto& b = f.arg_type->base();
    if (b.refinement.precise() && is_true(b.refinement.static_part)) {
      os << sort_name(b.base);
    } else {
      std::string name = hidden_arg(f.arg) ? b.binder : f.arg;
      os << '{' << sort_name(b.base) << " | " << show(b.refinement, name) << '}';
    }
  } else {
    render(f.arg_type, os, true);
  }
  os << " -> ";
  render(f.result, os, false);
  if (arg_pos) os << ')';
}

}  // namespace

std::string show(const RTypePtr& t) {
  std::ostringstream os;
  if (t->is_base()) {
    const auto& b = t->base();
    if (!(b.refinement.precise() && is_true(b.refinement.static_part))) {
      os << '{' << b.binder << ':' << sort_name(b.base) << " | " << show(b.refinement, b.binder) << '}';
      return os.str();
    }
  }
  render(t, os, false);
  return os.str();
}

namespace {
bool gpred_equal(const GPred& a, const GPred& b) {
  if (!term_equal(a.static_part, b.static_part)) return false;
  if (a.hole.has_value() != b.hole.has_value()) return false;
  return !a.hole || a.hole->source == b.hole->source;
}
}  // namespace

bool type_equal(const RTypePtr& a, const RTypePtr& b) {
  if (a->is_base() != b->is_base()) return false;
  if (a->is_base()) return a->base().base == b->base().base && gpred_equal(a->base().refinement, b->base().refinement);
  const auto& fa = a->fun();
  const auto& fb = b->fun();
  if (!type_equal(fa.arg_type, fb.arg_type)) return false;
  if (fa.arg == fb.arg) return type_equal(fa.result, fb.result);
  return type_equal(fa.result, subst(fb.result, Subst{{fb.arg, var(fa.arg)}}));
}

ShapePtr shape_base(Sort s) {
  auto sh = std::make_shared<Shape>();
  sh->base = s;
  return sh;
}

ShapePtr shape_fun(ShapePtr a, ShapePtr r) {
  auto sh = std::make_shared<Shape>();
  sh->is_fun = true;
  sh->arg = std::move(a);
  sh->result = std::move(r);
  return sh;
}

ShapePtr shape_of(const RTypePtr& t) {
  if (t->is_base()) return shape_base(t->base().base);
  return shape_fun(shape_of(t->fun().arg_type), shape_of(t->fun().result));
}

bool shape_equal(const ShapePtr& a, const ShapePtr& b) {
  if (a->is_fun != b->is_fun) return false;
  if (!a->is_fun) return a->base == b->base;
  return shape_equal(a->arg, b->arg) && shape_equal(a->result, b->result);
}

std::string show(const ShapePtr& s) {
  if (!s->is_fun) return std::string(sort_name(s->base));
  std::string a = show(s->arg);
  if (s->arg->is_fun || (!s->arg->is_fun && s->arg->base == Sort::List)) a = "(" + a + ")";
  return a + " -> " + show(s->result);
}

Env Env::extend(std::string name, RTypePtr t) const {
  Env e = *this;
  for (auto& b : e.bindings_) {
    if (b.name == name) {
      b.type = std::move(t);
      return e;
    }
  }
  e.bindings_.push_back(Binding{std::move(name), std::move(t)});
  return e;
}

const RTypePtr* Env::lookup(const std::string& name) const {
  for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it)
    if (it->name == name) return &it->type;
  return nullptr;
}

std::vector<std::pair<std::string, Sort>> Env::base_vars() const {
  std::vector<std::pair<std::string, Sort>> out;
  for (const auto& b : bindings_)
    if (b.type->is_base()) out.emplace_back(b.name, b.type->base().base);
  return out;
}

SortEnv Env::sorts() const {
  SortEnv out;
  for (const auto& [n, s] : base_vars()) out[n] = s;
  return out;
}

std::optional<int> Constraint::head_kvar() const {
  const auto& p = rhs.refinement.static_part;
  if (p->kind == TermKind::KVar) return p->kvar;
  return std::nullopt;
}

std::string show(const Constraint& c) {
  std::ostringstream os;
  bool first = true;
  for (const auto& b : c.env.bindings()) {
    if (!b.type->is_base()) continue;
    if (!first) os << ", ";
    first = false;
    os << b.name << ":" << show(b.type->base().refinement, b.name);
  }
  if (c.kind == ConstraintKind::Sub) {
    os << " |- {" << show(c.lhs.refinement, "v") << "} <: {" << show(c.rhs.refinement, "v") << "}";
  } else {
    os << " |- wf {" << show(c.rhs.refinement, "v") << "}";
  }
  return os.str();
}

TermPtr Solution::of(int k) const {
  auto it = sets.find(k);
  if (it == sets.end()) return mk_true();
  return conj(it->second);
}

bool Solution::operator==(const Solution& o) const {
  if (sets.size() != o.sets.size()) return false;
  for (auto a = sets.begin(), b = o.sets.begin(); a != sets.end(); ++a, ++b) {
    if (a->first != b->first || a->second.size() != b->second.size()) return false;
    for (size_t i = 0; i < a->second.size(); ++i)
      if (!term_equal(a->second[i], b->second[i])) return false;
  }
  return true;
}

TermPtr apply_solution(const Solution& s, const TermPtr& t) {
  if (t->kind == TermKind::KVar) return subst(s.of(t->kvar), t->pending);
  if (t->args.empty()) return t;
  std::vector<TermPtr> args;
  bool changed = false;
  for (const auto& a : t->args) {
    args.push_back(apply_solution(s, a));
    changed |= args.back() != a;
  }
  if (!changed) return t;
  if (t->kind == TermKind::And) return conj(args);
  if (t->kind == TermKind::Or) return disj(args);
  Term copy = *t;
  copy.args = std::move(args);
  return std::make_shared<const Term>(std::move(copy));
}

RTypePtr apply_solution(const Solution& s, const RTypePtr& t) {
  if (t->is_base()) {
    const auto& b = t->base();
    GPred p = b.refinement;
    p.static_part = apply_solution(s, p.static_part);
    return make_base(b.base, p, b.binder);
  }
  const auto& f = t->fun();
  return make_fun(f.arg, apply_solution(s, f.arg_type), apply_solution(s, f.result));
}

}  // namespace gliq
