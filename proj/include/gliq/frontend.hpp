#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gliq/program.hpp"

namespace gliq {

namespace surface {

enum class Kind { Int, Bool, Var, App, If, Let, Lam, List, Match };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// args by kind: App: fn, arguments...; If: cond, then, else; Let: bound, body;
// Lam: body; List: elements; Match: scrutinee, nil branch, cons branch.
struct Expr {
  Kind kind = Kind::Int;
  Span span;
  long long value = 0;
  std::string name;  // Var, Let, Lam
  std::optional<RTypePtr> annot;
  std::vector<ExprPtr> args;
  std::string head, tail;  // Match
};

enum class ItemKind { Sig, Assume, Def, Template, Measure };

struct Item {
  ItemKind kind = ItemKind::Def;
  Span span;
  std::string name;
  RTypePtr type;  // Sig, Assume
  std::vector<std::pair<std::string, Span>> params;
  ExprPtr body;
  Template tmpl;
  MeasureSig measure;
};

}  // namespace surface

struct SourceProgram {
  std::string file;
  std::string text;
  std::vector<surface::Item> items;
  std::vector<GradualSource> sources;
  MeasureTable measures = default_measures();
};

// Throws SourceError with the offending span.
SourceProgram parse(const std::string& text, const std::string& file = "<input>");
Program normalize(const SourceProgram& src);
Program load_program(const std::string& text, const std::string& file = "<input>");
Program load_file(const std::string& path);  // throws std::runtime_error on IO failure

// A refinement predicate in surface syntax; `binder` names ν.
TermPtr parse_predicate(const std::string& text, const std::string& binder, const MeasureTable& measures);
RTypePtr parse_type(const std::string& text);

}  // namespace gliq
