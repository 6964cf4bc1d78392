#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gliq/span.hpp"
#include "gliq/templates.hpp"
#include "gliq/types.hpp"

namespace gliq {

enum class ExprKind { Int, Bool, Var, Lam, App, If, Let, List, Match };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Core (ANF) expression. Field use by kind:
//   Var: name.  Lam: name = param, annot, a = body.
//   App: a = function, name = argument variable.
//   If:  name = guard variable, a / b = branches.
//   Let: name, annot (declared type), a = bound, b = body.
//   List: elems.  Match: name = scrutinee, a = nil branch, elems = {head, tail}, b = cons branch.
struct Expr {
  ExprKind kind = ExprKind::Int;
  Span span;
  long long value = 0;
  std::string name;
  std::optional<RTypePtr> annot;
  ExprPtr a, b;
  std::vector<std::string> elems;
};

ExprPtr mk_expr(Expr e);

// One syntactic `?`.
struct GradualSource {
  int id = 0;
  Span span;
  Sort sort = Sort::Int;
  std::string binder;  // user-facing name of ν at the declaration
  TermPtr static_part;
  // Base-sorted variables bound by enclosing arrows of the annotation.
  std::vector<std::pair<std::string, Sort>> arrow_scope;
  std::string owner;  // sig/assume name or enclosing def
};

struct Decl {
  std::string name;
  RTypePtr type;
  Span span;
};

struct Def {
  std::string name;
  Span span;
  std::optional<RTypePtr> sig;
  Span sig_span;
  std::vector<std::string> params;
  ExprPtr body;
};

struct Program {
  std::string file;
  std::string text;
  MeasureTable measures = default_measures();
  std::vector<Template> templates;  // user `template` items
  std::vector<Decl> assumes;
  std::vector<Def> defs;
  std::vector<GradualSource> sources;

  const Def* find_def(const std::string& name) const;
  bool has_holes() const { return !sources.empty(); }
};

// Built-in operators and functions: + - * / comparisons && || not len cons.
const std::vector<Decl>& primitive_decls();
bool is_primitive(const std::string& name);

// Render a core program back in surface syntax (parsable).
std::string show_program(const Program& p);
std::string show_expr(const ExprPtr& e);

// ANF restrictions: arguments and guards are variables, binders unique.
bool is_anf(const Program& p, std::string* why = nullptr);

}  // namespace gliq
