#include "gliq/constraint_gen.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace gliq {

bool is_guard(const std::string& name) { return name.rfind(kGuardPrefix, 0) == 0; }

namespace {

// Monomorphic shape unification.
class Unifier {
 public:
  int var() { return push(Node{Tag::Var}); }
  int base(Sort s) {
    Node n{Tag::Base};
    n.sort = s;
    return push(n);
  }
  int fun(int a, int b) {
    Node n{Tag::Fun};
    n.a = a;
    n.b = b;
    return push(n);
  }
  int of(const ShapePtr& s) { return s->is_fun ? fun(of(s->arg), of(s->result)) : base(s->base); }
  int of(const RTypePtr& t) { return of(shape_of(t)); }

  int find(int x) {
    while (nodes_[x].parent != x) {
      nodes_[x].parent = nodes_[nodes_[x].parent].parent;
      x = nodes_[x].parent;
    }
    return x;
  }

  bool is_fun(int x) { return nodes_[find(x)].tag == Tag::Fun; }
  bool is_base(int x) { return nodes_[find(x)].tag == Tag::Base; }

  void unify(int x, int y, const Span& span) {
    x = find(x);
    y = find(y);
    if (x == y) return;
    Node& nx = nodes_[x];
    Node& ny = nodes_[y];
    if (nx.tag == Tag::Var || ny.tag == Tag::Var) {
      int v = nx.tag == Tag::Var ? x : y;
      int t = v == x ? y : x;
      if (occurs(v, t)) throw SourceError(span, "cannot construct an infinite type");
      nodes_[v].parent = t;
      return;
    }
    if (nx.tag != ny.tag || (nx.tag == Tag::Base && nx.sort != ny.sort))
      throw SourceError(span, "shape mismatch: expected " + show(resolve(y)) + ", found " + show(resolve(x)));
    if (nx.tag == Tag::Fun) {
      int xa = nx.a, xb = nx.b, ya = ny.a, yb = ny.b;
      unify(xa, ya, span);
      unify(xb, yb, span);
    }
  }

  // Unconstrained positions default to Int.
  ShapePtr resolve(int x) {
    x = find(x);
    const Node& n = nodes_[x];
    switch (n.tag) {
      case Tag::Var: return shape_base(Sort::Int);
      case Tag::Base: return shape_base(n.sort);
      case Tag::Fun: return shape_fun(resolve(n.a), resolve(n.b));
    }
    return shape_base(Sort::Int);
  }

 private:
  enum class Tag { Var, Base, Fun };
  struct Node {
    Tag tag = Tag::Var;
    Sort sort = Sort::Int;
    int a = -1, b = -1;
    int parent = -1;
  };

  int push(Node n) {
    n.parent = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    return n.parent;
  }

  bool occurs(int v, int t) {
    t = find(t);
    if (t == v) return true;
    const Node& n = nodes_[t];
    return n.tag == Tag::Fun && (occurs(v, n.a) || occurs(v, n.b));
  }

  std::vector<Node> nodes_;
};

// Shapes of every subexpression of one definition.
class ShapePass {
 public:
  explicit ShapePass(std::map<std::string, int> globals, Unifier& u) : env_(std::move(globals)), u_(u) {}

  int bind(const std::string& x, int s) {
    env_[x] = s;
    return s;
  }

  int infer(const ExprPtr& e) {
    int s = go(e);
    at_[e.get()] = s;
    return s;
  }

  ShapePtr shape(const Expr* e) { return u_.resolve(at_.at(e)); }
  ShapePtr param(const Expr* lam) { return u_.resolve(params_.at(lam)); }
  ShapePtr var_shape(const std::string& x) { return u_.resolve(env_.at(x)); }

 private:
  int lookup(const std::string& x, const Span& span) {
    auto it = env_.find(x);
    if (it == env_.end()) throw SourceError(span, "unbound variable '" + x + "'");
    return it->second;
  }

  int go(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Int: return u_.base(Sort::Int);
      case ExprKind::Bool: return u_.base(Sort::Bool);
      case ExprKind::Var: return lookup(e->name, e->span);
      case ExprKind::Lam: {
        int p = e->annot ? u_.of(*e->annot) : u_.var();
        params_[e.get()] = p;
        auto saved = env_;
        bind(e->name, p);
        int r = infer(e->a);
        env_ = saved;
        return u_.fun(p, r);
      }
      case ExprKind::App: {
        int f = infer(e->a);
        int y = lookup(e->name, e->span);
        if (u_.is_base(f)) throw SourceError(e->span, "'" + show_expr(e->a) + "' is not a function");
        int r = u_.var();
        u_.unify(f, u_.fun(y, r), e->span);
        return r;
      }
      case ExprKind::If: {
        u_.unify(lookup(e->name, e->span), u_.base(Sort::Bool), e->span);
        int a = infer(e->a);
        int b = infer(e->b);
        u_.unify(b, a, e->b->span);
        return a;
      }
      case ExprKind::Let: {
        int a = infer(e->a);
        if (e->annot) u_.unify(a, u_.of(*e->annot), e->a->span);
        auto saved = env_;
        bind(e->name, a);
        int b = infer(e->b);
        env_ = saved;
        return b;
      }
      case ExprKind::List:
        for (const auto& x : e->elems) u_.unify(lookup(x, e->span), u_.base(Sort::Int), e->span);
        return u_.base(Sort::List);
      case ExprKind::Match: {
        u_.unify(lookup(e->name, e->span), u_.base(Sort::List), e->span);
        int a = infer(e->a);
        auto saved = env_;
        bind(e->elems[0], u_.base(Sort::Int));
        bind(e->elems[1], u_.base(Sort::List));
        int b = infer(e->b);
        env_ = saved;
        u_.unify(b, a, e->b->span);
        return a;
      }
    }
    throw SourceError(e->span, "unsupported expression");
  }

  std::map<std::string, int> env_;
  Unifier& u_;
  std::map<const Expr*, int> at_;
  std::map<const Expr*, int> params_;
};

void collect_holes(const RTypePtr& t, std::vector<Hole>& out) {
  if (t->is_base()) {
    if (t->base().refinement.hole) out.push_back(*t->base().refinement.hole);
    return;
  }
  collect_holes(t->fun().arg_type, out);
  collect_holes(t->fun().result, out);
}

void referenced(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  out.insert(e->name);
  for (const auto& x : e->elems) out.insert(x);
  referenced(e->a, out);
  referenced(e->b, out);
}

class Generator {
 public:
  explicit Generator(const Program& p) : prog_(p) {}

  ConstraintSet run() {
    Env globals;
    for (const auto& d : primitive_decls()) globals = globals.extend(d.name, d.type);
    for (const auto& a : prog_.assumes) globals = globals.extend(a.name, a.type);
    for (const auto& d : prog_.defs)
      if (d.sig) globals = globals.extend(d.name, *d.sig);
    for (const auto& s : prog_.sources) out_.source_scopes[s.id] = s.arrow_scope;

    for (size_t i : def_order()) {
      const Def& d = prog_.defs[i];
      def_ = d.name;
      RTypePtr t = gen_def(globals, d);
      out_.def_types[d.name] = t;
      out_.def_order.push_back(d.name);
      if (!d.sig) globals = globals.extend(d.name, t);
    }
    out_.constraints = split(judgments_);
    return std::move(out_);
  }

 private:
  // Sig-less defs must come after the sig-less defs they use.
  std::vector<size_t> def_order() const {
    const auto& defs = prog_.defs;
    std::map<std::string, size_t> unsigned_defs;
    for (size_t i = 0; i < defs.size(); ++i)
      if (!defs[i].sig) unsigned_defs[defs[i].name] = i;
    std::vector<std::set<size_t>> deps(defs.size());
    for (size_t i = 0; i < defs.size(); ++i) {
      std::set<std::string> names;
      referenced(defs[i].body, names);
      for (const auto& n : names) {
        auto it = unsigned_defs.find(n);
        if (it == unsigned_defs.end()) continue;
        // Parameters may shadow nothing global (normalize renames), so a hit is a use.
        if (it->second == i)
          throw SourceError(defs[i].span, "recursive definition '" + defs[i].name + "' needs a sig");
        deps[i].insert(it->second);
      }
    }
    std::vector<size_t> order;
    std::vector<bool> done(defs.size(), false);
    while (order.size() < defs.size()) {
      bool progressed = false;
      for (size_t i = 0; i < defs.size(); ++i) {
        if (done[i]) continue;
        bool ready = std::all_of(deps[i].begin(), deps[i].end(), [&](size_t j) { return done[j]; });
        if (!ready) continue;
        done[i] = true;
        order.push_back(i);
        progressed = true;
        break;
      }
      if (!progressed) {
        for (size_t i = 0; i < defs.size(); ++i)
          if (!done[i])
            throw SourceError(defs[i].span, "mutually recursive definition '" + defs[i].name + "' needs a sig");
      }
    }
    return order;
  }

  Scope local_scope(const Env& env) const {
    Scope out;
    const auto& bs = env.bindings();
    for (size_t i = nglobal_; i < bs.size(); ++i)
      if (bs[i].type->is_base() && !is_guard(bs[i].name)) out.emplace_back(bs[i].name, bs[i].type->base().base);
    return out;
  }

  int new_kvar(Sort s, Scope scope, const Span& span) {
    int id = static_cast<int>(out_.kvars.size());
    out_.kvars.push_back(KVarInfo{id, s, std::move(scope), span, def_});
    return id;
  }

  RTypePtr fresh(const ShapePtr& sh, Scope scope, const Span& span, const std::string& arg_name = "") {
    if (!sh->is_fun) return make_base(sh->base, kvar_app(new_kvar(sh->base, scope, span)));
    std::string x = arg_name.empty() ? "#a" + std::to_string(arrows_++) : arg_name;
    RTypePtr a = fresh(sh->arg, scope, span);
    if (a->is_base()) scope.emplace_back(x, a->base().base);
    return make_fun(x, a, fresh(sh->result, scope, span));
  }

  void sub(const Env& env, RTypePtr lhs, RTypePtr rhs, const Span& span) {
    judgments_.push_back(Judgment{ConstraintKind::Sub, env, std::move(lhs), std::move(rhs), span, def_});
  }
  void wf(const Env& env, RTypePtr t, const Span& span) {
    judgments_.push_back(Judgment{ConstraintKind::Wf, env, nullptr, std::move(t), span, def_});
  }

  std::string guard() { return kGuardPrefix + std::to_string(guards_++); }
  static RTypePtr fact(TermPtr p) { return make_base(Sort::Bool, std::move(p)); }

  // Holes written inside a body see the local variables in scope there.
  // Candidates speak the surface names of the annotation; the hole's pending
  // substitution maps those to the core names.
  void scope_annotation(const Env& env, const RTypePtr& t) {
    std::vector<Hole> holes;
    collect_holes(t, holes);
    for (const auto& h : holes) {
      Scope s;
      for (const auto& [core, sort] : local_scope(env)) {
        std::string name = core;
        for (const auto& [from, to] : h.pending)
          if (to->kind == TermKind::Var && to->name == core) name = from;
        // A core name that is also a renamed surface name is shadowed here.
        if (name == core && h.pending.count(core)) continue;
        s.emplace_back(name, sort);
      }
      for (const auto& v : prog_.sources.at(h.source).arrow_scope) s.push_back(v);
      out_.source_scopes[h.source] = s;
    }
  }

  RTypePtr selfify(const RTypePtr& t, const std::string& x) {
    if (!t->is_base()) return t;
    Sort s = t->base().base;
    TermPtr p = s == Sort::Bool ? iff(var(kNu), var(x)) : cmp(CmpOp::Eq, var(kNu), var(x));
    return make_base(s, p);
  }

  RTypePtr gen(const Env& env, const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Int: return make_base(Sort::Int, cmp(CmpOp::Eq, var(kNu), int_const(e->value)));
      case ExprKind::Bool: return make_base(Sort::Bool, e->value ? var(kNu) : neg(var(kNu)));
      case ExprKind::Var: {
        const RTypePtr* t = env.lookup(e->name);
        if (!t) throw SourceError(e->span, "unbound variable '" + e->name + "'");
        return selfify(*t, e->name);
      }
      case ExprKind::Lam: {
        RTypePtr tx;
        if (e->annot) {
          tx = *e->annot;
          scope_annotation(env, tx);
          wf(env, tx, e->span);
        } else {
          tx = fresh(shapes_->param(e.get()), local_scope(env), e->span);
        }
        Env inner = env.extend(e->name, tx);
        RTypePtr te = gen(inner, e->a);
        RTypePtr t = fresh(shapes_->shape(e->a.get()), local_scope(inner), e->a->span);
        sub(inner, te, t, e->a->span);
        RTypePtr ft = make_fun(e->name, tx, t);
        wf(env, ft, e->span);
        return ft;
      }
      case ExprKind::App: {
        RTypePtr tf = gen(env, e->a);
        if (tf->is_base()) throw SourceError(e->span, "'" + show_expr(e->a) + "' is not a function");
        const auto& f = tf->fun();
        const RTypePtr* ty = env.lookup(e->name);
        if (!ty) throw SourceError(e->span, "unbound variable '" + e->name + "'");
        sub(env, selfify(*ty, e->name), f.arg_type, e->span);
        if (!f.arg_type->is_base()) return f.result;
        return subst(f.result, Subst{{f.arg, var(e->name)}});
      }
      case ExprKind::If: {
        RTypePtr t = fresh(shapes_->shape(e.get()), local_scope(env), e->span);
        Env then_env = env.extend(guard(), fact(var(e->name)));
        sub(then_env, gen(then_env, e->a), t, e->a->span);
        Env else_env = env.extend(guard(), fact(neg(var(e->name))));
        sub(else_env, gen(else_env, e->b), t, e->b->span);
        wf(env, t, e->span);
        return t;
      }
      case ExprKind::Let: {
        RTypePtr tx = gen(env, e->a);
        if (e->annot) {
          scope_annotation(env, *e->annot);
          sub(env, tx, *e->annot, e->a->span);
          wf(env, *e->annot, e->span);
          tx = *e->annot;
        }
        Env inner = env.extend(e->name, tx);
        RTypePtr te = gen(inner, e->b);
        RTypePtr t = fresh(shapes_->shape(e.get()), local_scope(env), e->span);
        sub(inner, te, t, e->b->span);
        wf(env, t, e->span);
        return t;
      }
      case ExprKind::List:
        return make_base(Sort::List, cmp(CmpOp::Eq, measure("len", var(kNu)),
                                         int_const(static_cast<long long>(e->elems.size()))));
      case ExprKind::Match: {
        RTypePtr t = fresh(shapes_->shape(e.get()), local_scope(env), e->span);
        TermPtr len_x = measure("len", var(e->name));
        Env nil_env = env.extend(guard(), fact(cmp(CmpOp::Eq, len_x, int_const(0))));
        sub(nil_env, gen(nil_env, e->a), t, e->a->span);
        const std::string& h = e->elems[0];
        const std::string& tl = e->elems[1];
        Env cons_env = env.extend(h, make_base(Sort::Int, mk_true()))
                           .extend(tl, make_base(Sort::List, mk_true()))
                           .extend(guard(), fact(cmp(CmpOp::Eq, len_x,
                                                     arith(ArithOp::Add, int_const(1), measure("len", var(tl))))));
        sub(cons_env, gen(cons_env, e->b), t, e->b->span);
        wf(env, t, e->span);
        return t;
      }
    }
    throw SourceError(e->span, "unsupported expression");
  }

  RTypePtr gen_def(const Env& globals, const Def& d) {
    nglobal_ = globals.size();
    Unifier u;
    std::map<std::string, int> genv;
    for (const auto& b : globals.bindings()) genv[b.name] = u.of(b.type);
    ShapePass shapes(genv, u);
    shapes_ = &shapes;

    Env env = globals;
    if (d.sig) {
      RTypePtr cur = *d.sig;
      for (const auto& x : d.params) {
        const auto& f = cur->fun();
        shapes.bind(x, u.of(f.arg_type));
        env = env.extend(x, f.arg_type);
        cur = f.result;
      }
      int body = shapes.infer(d.body);
      u.unify(body, u.of(cur), d.body->span);
      RTypePtr tb = gen(env, d.body);
      sub(env, tb, cur, d.body->span);
      return *d.sig;
    }

    std::vector<int> ps;
    for (const auto& x : d.params) ps.push_back(shapes.bind(x, u.var()));
    shapes.infer(d.body);
    std::vector<RTypePtr> pts;
    for (size_t i = 0; i < d.params.size(); ++i) {
      pts.push_back(fresh(u.resolve(ps[i]), local_scope(env), d.span));
      env = env.extend(d.params[i], pts.back());
    }
    RTypePtr tb = gen(env, d.body);
    RTypePtr tr = fresh(shapes.shape(d.body.get()), local_scope(env), d.body->span);
    sub(env, tb, tr, d.body->span);
    RTypePtr t = tr;
    for (size_t i = d.params.size(); i-- > 0;) t = make_fun(d.params[i], pts[i], t);
    wf(globals, t, d.span);
    return t;
  }

  const Program& prog_;
  ConstraintSet out_;
  std::vector<Judgment> judgments_;
  std::string def_;
  size_t nglobal_ = 0;
  int guards_ = 0;
  int arrows_ = 0;
  ShapePass* shapes_ = nullptr;
};

void split_one(const Judgment& j, std::vector<Constraint>& out) {
  auto push = [&](ConstraintKind k, const Env& env, RBase lhs, RBase rhs) {
    Constraint c;
    c.id = static_cast<int>(out.size());
    c.kind = k;
    c.env = env;
    c.lhs = std::move(lhs);
    c.rhs = std::move(rhs);
    c.span = j.span;
    c.def = j.def;
    out.push_back(std::move(c));
  };
  if (j.kind == ConstraintKind::Wf) {
    if (j.rhs->is_base()) {
      push(ConstraintKind::Wf, j.env, RBase{}, j.rhs->base());
      return;
    }
    const auto& f = j.rhs->fun();
    split_one(Judgment{ConstraintKind::Wf, j.env, nullptr, f.arg_type, j.span, j.def}, out);
    split_one(Judgment{ConstraintKind::Wf, j.env.extend(f.arg, f.arg_type), nullptr, f.result, j.span, j.def}, out);
    return;
  }
  if (j.lhs->is_base() != j.rhs->is_base())
    throw std::logic_error("split: shape mismatch between " + show(j.lhs) + " and " + show(j.rhs));
  if (j.lhs->is_base()) {
    if (j.lhs->base().base != j.rhs->base().base)
      throw std::logic_error("split: sort mismatch between " + show(j.lhs) + " and " + show(j.rhs));
    push(ConstraintKind::Sub, j.env, j.lhs->base(), j.rhs->base());
    return;
  }
  const auto& f1 = j.lhs->fun();
  const auto& f2 = j.rhs->fun();
  split_one(Judgment{ConstraintKind::Sub, j.env, f2.arg_type, f1.arg_type, j.span, j.def}, out);
  // Keep the binder from shadowing a variable the environment already talks about.
  std::string x = f2.arg;
  RTypePtr r2 = f2.result;
  if (j.env.lookup(x)) {
    std::string y = x + "'";
    while (j.env.lookup(y)) y += "'";
    r2 = subst(r2, Subst{{x, var(y)}});
    x = y;
  }
  RTypePtr r1 = f1.arg == x ? f1.result : subst(f1.result, Subst{{f1.arg, var(x)}});
  split_one(Judgment{ConstraintKind::Sub, j.env.extend(x, f2.arg_type), r1, r2, j.span, j.def}, out);
}

}  // namespace

std::vector<Constraint> split(const std::vector<Judgment>& js, int first_id) {
  std::vector<Constraint> out;
  for (const auto& j : js) split_one(j, out);
  for (auto& c : out) c.id += first_id;
  return out;
}

ConstraintSet generate(const Program& p) { return Generator(p).run(); }

}  // namespace gliq
