#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gliq {

enum class Sort { Int, Bool, List };

std::string_view sort_name(Sort s);

// Internal name of the refinement binder. Surface programs cannot spell it.
inline const std::string kNu = "ν";

enum class TermKind { IntConst, BoolConst, Var, Measure, Arith, Cmp, Not, And, Or, Iff, Implies, KVar };
enum class ArithOp { Add, Sub, Mul };
enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

struct Term;
using TermPtr = std::shared_ptr<const Term>;
// Simultaneous substitution; ordered so that printing and hashing are stable.
using Subst = std::map<std::string, TermPtr>;

struct Term {
  TermKind kind = TermKind::BoolConst;
  long long value = 0;  // IntConst value, BoolConst 0/1
  std::string name;     // Var, Measure
  ArithOp arith = ArithOp::Add;
  CmpOp cmp = CmpOp::Eq;
  std::vector<TermPtr> args;
  int kvar = -1;
  Subst pending;  // KVar only
};

TermPtr int_const(long long n);
TermPtr bool_const(bool b);
TermPtr mk_true();
TermPtr mk_false();
TermPtr var(const std::string& name);
TermPtr measure(const std::string& name, TermPtr arg);
TermPtr arith(ArithOp op, TermPtr a, TermPtr b);
TermPtr cmp(CmpOp op, TermPtr a, TermPtr b);
TermPtr neg(TermPtr a);
TermPtr conj(std::vector<TermPtr> parts);  // flattens, drops `true`
TermPtr conj(TermPtr a, TermPtr b);
TermPtr disj(std::vector<TermPtr> parts);
TermPtr iff(TermPtr a, TermPtr b);
TermPtr implies(TermPtr a, TermPtr b);
TermPtr kvar_app(int id, Subst pending = {});

bool is_true(const TermPtr& t);
bool is_false(const TermPtr& t);

TermPtr subst(const TermPtr& t, const Subst& theta);
TermPtr rename(const TermPtr& t, const std::string& from, const std::string& to);
Subst compose(const Subst& inner, const Subst& outer);

std::set<std::string> free_vars(const TermPtr& t);
std::set<int> kvars_of(const TermPtr& t);
bool mentions(const TermPtr& t, const std::string& name);
std::vector<TermPtr> conjuncts(const TermPtr& t);

bool term_equal(const TermPtr& a, const TermPtr& b);
bool term_less(const TermPtr& a, const TermPtr& b);

// Orient comparisons so that ν (if present) is on the left, and literals on the right.
TermPtr canonical_atom(const TermPtr& t);

// Surface rendering. `binder` replaces ν in the output.
std::string show(const TermPtr& t, const std::string& binder = "v");

// Measures are unary functions from a sort to a sort.
struct MeasureSig {
  Sort arg = Sort::List;
  Sort result = Sort::Int;
};
using MeasureTable = std::map<std::string, MeasureSig>;
MeasureTable default_measures();

using SortEnv = std::map<std::string, Sort>;

// Returns the sort of t, or nullopt if ill-sorted / unbound. KVars sort as Bool.
std::optional<Sort> sort_of(const TermPtr& t, const SortEnv& env, const MeasureTable& measures);

// Every measure application `m t` occurring in t (deduplicated).
std::vector<TermPtr> measure_apps(const TermPtr& t);

}  // namespace gliq
