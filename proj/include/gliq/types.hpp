#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gliq/span.hpp"
#include "gliq/term.hpp"

namespace gliq {

// A `?` occurrence. `source` indexes the program's gradual sources; the
// pending substitution records the renamings applied since the declaration.
struct Hole {
  int source = -1;
  Subst pending;
};

// p ∧ ? when `hole` is set, otherwise the precise predicate p.
struct GPred {
  TermPtr static_part = mk_true();
  std::optional<Hole> hole;

  bool precise() const { return !hole.has_value(); }
};

GPred precise(TermPtr p);
GPred gradual(TermPtr p, int source);

struct RType;
using RTypePtr = std::shared_ptr<const RType>;

// {ν:base | refinement}; `binder` is the user-facing name for ν.
struct RBase {
  Sort base = Sort::Int;
  GPred refinement;
  std::string binder = "v";
};

struct RFun {
  std::string arg;
  RTypePtr arg_type;
  RTypePtr result;
};

struct RType {
  std::variant<RBase, RFun> node;

  bool is_base() const { return std::holds_alternative<RBase>(node); }
  const RBase& base() const { return std::get<RBase>(node); }
  const RFun& fun() const { return std::get<RFun>(node); }
};

RTypePtr make_base(Sort s, GPred p, std::string binder = "v");
RTypePtr make_base(Sort s, TermPtr p, std::string binder = "v");
RTypePtr make_fun(std::string arg, RTypePtr arg_type, RTypePtr result);

// Applies θ to every refinement (static parts, hole pendings, κ pendings).
GPred subst(const GPred& p, const Subst& theta);
RBase subst(const RBase& b, const Subst& theta);
RTypePtr subst(const RTypePtr& t, const Subst& theta);

std::string show(const GPred& p, const std::string& binder);
std::string show(const RTypePtr& t);

bool type_equal(const RTypePtr& a, const RTypePtr& b);

// Shapes: the unrefined skeleton.
struct Shape;
using ShapePtr = std::shared_ptr<const Shape>;
struct Shape {
  bool is_fun = false;
  Sort base = Sort::Int;
  ShapePtr arg, result;
};
ShapePtr shape_base(Sort s);
ShapePtr shape_fun(ShapePtr a, ShapePtr r);
ShapePtr shape_of(const RTypePtr& t);
bool shape_equal(const ShapePtr& a, const ShapePtr& b);
std::string show(const ShapePtr& s);

struct Binding {
  std::string name;
  RTypePtr type;
};

// Ordered, names unique.
class Env {
 public:
  Env() = default;
  Env extend(std::string name, RTypePtr t) const;
  const RTypePtr* lookup(const std::string& name) const;
  const std::vector<Binding>& bindings() const { return bindings_; }
  std::vector<Binding>& bindings() { return bindings_; }
  size_t size() const { return bindings_.size(); }

  // Base-sorted bindings, in order.
  std::vector<std::pair<std::string, Sort>> base_vars() const;
  SortEnv sorts() const;

 private:
  std::vector<Binding> bindings_;
};

enum class ConstraintKind { Sub, Wf };

// Split (base) constraint.
struct Constraint {
  int id = 0;
  ConstraintKind kind = ConstraintKind::Sub;
  Env env;
  RBase lhs;  // Sub only
  RBase rhs;  // Sub: the supertype; Wf: the type checked
  Span span;
  std::string def;  // enclosing definition

  // κ in head position (rhs), if any.
  std::optional<int> head_kvar() const;
};

std::string show(const Constraint& c);

struct Solution {
  std::map<int, std::vector<TermPtr>> sets;  // κ ↦ qualifiers (conjunction; empty = true)

  TermPtr of(int k) const;
  bool operator==(const Solution& o) const;
};

TermPtr apply_solution(const Solution& s, const TermPtr& t);
RTypePtr apply_solution(const Solution& s, const RTypePtr& t);

}  // namespace gliq
