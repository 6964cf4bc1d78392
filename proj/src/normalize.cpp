#include <map>
#include <set>

#include "gliq/frontend.hpp"

namespace gliq {

namespace {

using surface::Kind;

class Normalizer {
 public:
  explicit Normalizer(std::set<std::string> globals) : globals_(std::move(globals)) {}

  // Reserve a name for the current definition, renaming on clashes.
  std::string fresh(const std::string& base) {
    std::string stem = base.substr(0, base.find('#'));
    std::string n = stem;
    for (int k = 1; used_.count(n); ++k) n = stem + "#" + std::to_string(k);
    used_.insert(n);
    return n;
  }

  void start_def() {
    used_ = globals_;
    scope_.clear();
  }

  void bind(const std::string& surface, const std::string& core) { scope_[surface] = core; }

  ExprPtr def_body(const surface::ExprPtr& e) { return norm(e); }

  // Apply the current renaming to an annotation.
  RTypePtr rename_type(const RTypePtr& t) const {
    Subst theta;
    for (const auto& [s, c] : scope_)
      if (s != c) theta[s] = var(c);
    return subst(t, theta);
  }

  std::set<std::string> globals_;
  std::set<std::string> used_;
  std::map<std::string, std::string> scope_;

 private:
  struct Pending {
    std::string name;
    ExprPtr bound;
    Span span;
  };

  std::string resolve(const std::string& n, const Span& span) const {
    auto it = scope_.find(n);
    if (it != scope_.end()) return it->second;
    if (globals_.count(n)) return n;
    throw SourceError(span, "unbound variable '" + n + "'");
  }

  static ExprPtr wrap(std::vector<Pending> pre, ExprPtr body) {
    for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
      Expr e;
      e.kind = ExprKind::Let;
      e.span = it->span;
      e.name = it->name;
      e.a = it->bound;
      e.b = body;
      body = mk_expr(std::move(e));
    }
    return body;
  }

  // Moves the unannotated lets heading `core` into `pre`; binders are unique
  // per definition, so nothing gets captured.
  static ExprPtr hoist(ExprPtr core, std::vector<Pending>& pre) {
    while (core->kind == ExprKind::Let && !core->annot) {
      pre.push_back(Pending{core->name, core->a, core->span});
      core = core->b;
    }
    return core;
  }

  // Normalizes e and names it unless it is already a variable.
  std::string atomize(const surface::ExprPtr& e, std::vector<Pending>& pre) {
    if (e->kind == Kind::Var) return resolve(e->name, e->span);
    auto core = hoist(norm(e), pre);
    std::string n = fresh("tmp");
    pre.push_back(Pending{n, core, e->span});
    return n;
  }

  ExprPtr norm(const surface::ExprPtr& e) {
    switch (e->kind) {
      case Kind::Int:
      case Kind::Bool: {
        Expr c;
        c.kind = e->kind == Kind::Int ? ExprKind::Int : ExprKind::Bool;
        c.value = e->value;
        c.span = e->span;
        return mk_expr(std::move(c));
      }
      case Kind::Var: {
        Expr c;
        c.kind = ExprKind::Var;
        c.name = resolve(e->name, e->span);
        c.span = e->span;
        return mk_expr(std::move(c));
      }
      case Kind::App: {
        std::vector<Pending> pre;
        ExprPtr f = norm(e->args[0]);
        for (size_t i = 1; i < e->args.size(); ++i) {
          auto a = atomize(e->args[i], pre);
          Expr c;
          c.kind = ExprKind::App;
          c.span = e->span;
          c.a = f;
          c.name = a;
          f = mk_expr(std::move(c));
        }
        return wrap(std::move(pre), f);
      }
      case Kind::If: {
        std::vector<Pending> pre;
        auto g = atomize(e->args[0], pre);
        Expr c;
        c.kind = ExprKind::If;
        c.span = e->span;
        c.name = g;
        c.a = norm(e->args[1]);
        c.b = norm(e->args[2]);
        return wrap(std::move(pre), mk_expr(std::move(c)));
      }
      case Kind::Let: {
        std::vector<Pending> pre;
        Expr c;
        c.kind = ExprKind::Let;
        c.span = e->span;
        if (e->annot) c.annot = rename_type(*e->annot);
        c.a = hoist(norm(e->args[0]), pre);
        auto saved = scope_;
        c.name = fresh(e->name);
        bind(e->name, c.name);
        c.b = norm(e->args[1]);
        scope_ = saved;
        return wrap(std::move(pre), mk_expr(std::move(c)));
      }
      case Kind::Lam: {
        Expr c;
        c.kind = ExprKind::Lam;
        c.span = e->span;
        if (e->annot) c.annot = rename_type(*e->annot);
        auto saved = scope_;
        c.name = fresh(e->name);
        bind(e->name, c.name);
        c.a = norm(e->args[0]);
        scope_ = saved;
        return mk_expr(std::move(c));
      }
      case Kind::List: {
        std::vector<Pending> pre;
        Expr c;
        c.kind = ExprKind::List;
        c.span = e->span;
        for (const auto& x : e->args) c.elems.push_back(atomize(x, pre));
        return wrap(std::move(pre), mk_expr(std::move(c)));
      }
      case Kind::Match: {
        std::vector<Pending> pre;
        Expr c;
        c.kind = ExprKind::Match;
        c.span = e->span;
        c.name = atomize(e->args[0], pre);
        c.a = norm(e->args[1]);
        auto saved = scope_;
        std::string h = fresh(e->head);
        std::string t = fresh(e->tail);
        bind(e->head, h);
        bind(e->tail, t);
        c.elems = {h, t};
        c.b = norm(e->args[2]);
        scope_ = saved;
        return wrap(std::move(pre), mk_expr(std::move(c)));
      }
    }
    throw SourceError(e->span, "unsupported expression");
  }
};

// Renames the i-th arrow argument of t to `to`.
RTypePtr rename_arg(const RTypePtr& t, size_t i, const std::string& to) {
  const auto& f = t->fun();
  if (i > 0) return make_fun(f.arg, f.arg_type, rename_arg(f.result, i - 1, to));
  return make_fun(to, f.arg_type, subst(f.result, Subst{{f.arg, var(to)}}));
}

void check_sorts(const RTypePtr& t, SortEnv scope, const MeasureTable& measures, const Span& span) {
  if (t->is_base()) {
    scope[kNu] = t->base().base;
    if (sort_of(t->base().refinement.static_part, scope, measures) != Sort::Bool)
      throw SourceError(span, "refinement '" + show(t->base().refinement, t->base().binder) + "' is not a well-sorted predicate");
    return;
  }
  const auto& f = t->fun();
  check_sorts(f.arg_type, scope, measures, span);
  if (f.arg_type->is_base()) scope[f.arg] = f.arg_type->base().base;
  check_sorts(f.result, scope, measures, span);
}

}  // namespace

Program normalize(const SourceProgram& src) {
  Program out;
  out.file = src.file;
  out.text = src.text;
  out.measures = src.measures;
  out.sources = src.sources;

  std::set<std::string> globals;
  for (const auto& d : primitive_decls()) globals.insert(d.name);

  std::map<std::string, const surface::Item*> sigs;
  std::set<std::string> def_names, assume_names;
  for (const auto& it : src.items) {
    switch (it.kind) {
      case surface::ItemKind::Sig:
        if (sigs.count(it.name)) throw SourceError(it.span, "duplicate signature for '" + it.name + "'");
        sigs[it.name] = &it;
        break;
      case surface::ItemKind::Def:
        if (def_names.count(it.name) || assume_names.count(it.name) || globals.count(it.name))
          throw SourceError(it.span, "duplicate definition of '" + it.name + "'");
        def_names.insert(it.name);
        break;
      case surface::ItemKind::Assume:
        if (def_names.count(it.name) || assume_names.count(it.name) || globals.count(it.name))
          throw SourceError(it.span, "duplicate definition of '" + it.name + "'");
        assume_names.insert(it.name);
        break;
      case surface::ItemKind::Template:
        out.templates.push_back(it.tmpl);
        break;
      case surface::ItemKind::Measure:
        break;
    }
  }
  for (const auto& [n, it] : sigs) {
    if (!def_names.count(n)) throw SourceError(it->span, "signature for '" + n + "' has no definition");
    check_sorts(it->type, {}, out.measures, it->span);
  }
  for (const auto& n : def_names) globals.insert(n);
  for (const auto& n : assume_names) globals.insert(n);

  Normalizer norm(globals);
  for (const auto& it : src.items) {
    if (it.kind == surface::ItemKind::Assume) {
      check_sorts(it.type, {}, out.measures, it.span);
      out.assumes.push_back(Decl{it.name, it.type, it.span});
      continue;
    }
    if (it.kind != surface::ItemKind::Def) continue;
    Def d;
    d.name = it.name;
    d.span = it.span;
    norm.start_def();
    auto sig = sigs.find(it.name);
    if (sig != sigs.end()) {
      RTypePtr t = sig->second->type;
      d.sig_span = sig->second->span;
      RTypePtr cur = t;
      for (size_t i = 0; i < it.params.size(); ++i) {
        if (cur->is_base())
          throw SourceError(it.params[i].second, "'" + it.name + "' has more parameters than its signature");
        std::string arg = cur->fun().arg;
        std::string want = arg[0] == '_' ? it.params[i].first : arg;
        std::string core = norm.fresh(want);
        if (core != arg) t = rename_arg(t, i, core);
        d.params.push_back(core);
        norm.bind(it.params[i].first, core);
        cur = t;
        for (size_t k = 0; k <= i; ++k) cur = cur->fun().result;
      }
      // Arrow names of the remaining (unbound) arguments stay type-local.
      d.sig = t;
    } else {
      for (const auto& [p, span] : it.params) {
        std::string core = norm.fresh(p);
        d.params.push_back(core);
        norm.bind(p, core);
      }
    }
    d.body = norm.def_body(it.body);
    out.defs.push_back(std::move(d));
  }
  return out;
}

}  // namespace gliq
