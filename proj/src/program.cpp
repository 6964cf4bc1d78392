#include <set>
#include <sstream>

#include "gliq/frontend.hpp"
#include "gliq/program.hpp"

namespace gliq {

ExprPtr mk_expr(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

const Def* Program::find_def(const std::string& name) const {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

const std::vector<Decl>& primitive_decls() {
  static const std::vector<Decl> prims = [] {
    std::vector<Decl> out;
    auto add = [&](const std::string& n, const std::string& ty) { out.push_back(Decl{n, parse_type(ty), Span{}}); };
    add("+", "x:Int -> y:Int -> {v:Int | v == x + y}");
    add("-", "x:Int -> y:Int -> {v:Int | v == x - y}");
    add("*", "x:Int -> y:Int -> {v:Int | v == x * y}");
    add("/", "Int -> {d:Int | 0 < d} -> Int");
    for (const char* op : {"==", "/=", "<", "<=", ">", ">="})
      add(op, std::string("x:Int -> y:Int -> {v:Bool | v <=> x ") + op + " y}");
    add("&&", "x:Bool -> y:Bool -> {v:Bool | v <=> (x && y)}");
    add("||", "x:Bool -> y:Bool -> {v:Bool | v <=> (x || y)}");
    add("not", "x:Bool -> {v:Bool | v <=> not x}");
    add("len", "xs:List Int -> {v:Int | v == len xs}");
    add("cons", "h:Int -> t:List Int -> {v:List Int | len v == 1 + len t}");
    return out;
  }();
  return prims;
}

bool is_primitive(const std::string& name) {
  for (const auto& d : primitive_decls())
    if (d.name == name) return true;
  return false;
}

namespace {

bool binary_op(const std::string& n) {
  static const std::set<std::string> ops = {"+", "-", "*", "/", "==", "/=", "<", "<=", ">", ">=", "&&", "||"};
  return ops.count(n) > 0;
}

void render(const ExprPtr& e, std::ostream& os) {
  switch (e->kind) {
    case ExprKind::Int:
      if (e->value < 0) {
        os << '(' << e->value << ')';
      } else {
        os << e->value;
      }
      return;
    case ExprKind::Bool:
      os << (e->value ? "true" : "false");
      return;
    case ExprKind::Var:
      os << e->name;
      return;
    case ExprKind::App: {
      std::vector<std::string> args;
      ExprPtr f = e;
      while (f->kind == ExprKind::App) {
        args.insert(args.begin(), f->name);
        f = f->a;
      }
      if (f->kind == ExprKind::Var && binary_op(f->name) && args.size() == 2) {
        os << '(' << args[0] << ' ' << f->name << ' ' << args[1] << ')';
        return;
      }
      os << '(';
      render(f, os);
      for (const auto& a : args) os << ' ' << a;
      os << ')';
      return;
    }
    case ExprKind::Lam:
      os << "(\\" << e->name;
      if (e->annot) os << ':' << show(*e->annot);
      os << " -> ";
      render(e->a, os);
      os << ')';
      return;
    case ExprKind::If:
      os << "(if " << e->name << " then ";
      render(e->a, os);
      os << " else ";
      render(e->b, os);
      os << ')';
      return;
    case ExprKind::Let:
      os << "(let " << e->name;
      if (e->annot) os << " :: " << show(*e->annot);
      os << " = ";
      render(e->a, os);
      os << " in ";
      render(e->b, os);
      os << ')';
      return;
    case ExprKind::List:
      os << '[';
      for (size_t i = 0; i < e->elems.size(); ++i) os << (i ? ", " : "") << e->elems[i];
      os << ']';
      return;
    case ExprKind::Match:
      os << "(match " << e->name << " { [] -> ";
      render(e->a, os);
      os << " ; (" << e->elems[0] << ':' << e->elems[1] << ") -> ";
      render(e->b, os);
      os << " })";
      return;
  }
}

std::string sort_text(Sort s) { return std::string(sort_name(s)); }

}  // namespace

std::string show_expr(const ExprPtr& e) {
  std::ostringstream os;
  render(e, os);
  return os.str();
}

std::string show_program(const Program& p) {
  std::ostringstream os;
  auto defaults = default_measures();
  for (const auto& [name, sig] : p.measures)
    if (!defaults.count(name)) os << "measure " << name << " : " << sort_text(sig.arg) << " -> " << sort_text(sig.result) << "\n";
  for (const auto& t : p.templates) {
    os << "template v:" << sort_text(t.binder);
    Subst theta;
    for (size_t i = 0; i < t.slots.size(); ++i) {
      os << ", s" << i << ':' << sort_text(t.slots[i]);
      theta[slot_var(i)] = var("s" + std::to_string(i));
    }
    os << " => " << show(subst(t.body, theta), "v") << "\n";
  }
  for (const auto& a : p.assumes) os << "assume " << a.name << " :: " << show(a.type) << "\n";
  for (const auto& d : p.defs) {
    if (d.sig) os << "sig " << d.name << " :: " << show(*d.sig) << "\n";
    os << "def " << d.name;
    for (const auto& x : d.params) os << ' ' << x;
    os << " = " << show_expr(d.body) << "\n";
  }
  return os.str();
}

namespace {

bool check_expr(const ExprPtr& e, std::set<std::string>& binders, std::string* why) {
  auto bind = [&](const std::string& n) {
    if (!binders.insert(n).second) {
      if (why) *why = "binder '" + n + "' is not unique";
      return false;
    }
    return true;
  };
  switch (e->kind) {
    case ExprKind::Int:
    case ExprKind::Bool:
    case ExprKind::Var:
    case ExprKind::List:
      return true;
    case ExprKind::App:
      if (e->name.empty()) {
        if (why) *why = "application argument is not a variable";
        return false;
      }
      return check_expr(e->a, binders, why);
    case ExprKind::If:
      if (e->name.empty()) {
        if (why) *why = "conditional guard is not a variable";
        return false;
      }
      return check_expr(e->a, binders, why) && check_expr(e->b, binders, why);
    case ExprKind::Lam:
      return bind(e->name) && check_expr(e->a, binders, why);
    case ExprKind::Let:
      return bind(e->name) && check_expr(e->a, binders, why) && check_expr(e->b, binders, why);
    case ExprKind::Match:
      return bind(e->elems[0]) && bind(e->elems[1]) && check_expr(e->a, binders, why) && check_expr(e->b, binders, why);
  }
  return true;
}

}  // namespace

bool is_anf(const Program& p, std::string* why) {
  std::set<std::string> globals;
  for (const auto& d : primitive_decls()) globals.insert(d.name);
  for (const auto& a : p.assumes) globals.insert(a.name);
  for (const auto& d : p.defs) globals.insert(d.name);
  for (const auto& d : p.defs) {
    std::set<std::string> binders = globals;
    for (const auto& x : d.params)
      if (!binders.insert(x).second) {
        if (why) *why = "parameter '" + x + "' is not unique";
        return false;
      }
    if (!check_expr(d.body, binders, why)) return false;
  }
  return true;
}

}  // namespace gliq
