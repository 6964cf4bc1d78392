#pragma once

#include <map>
#include <string>
#include <vector>

#include "gliq/program.hpp"
#include "gliq/types.hpp"

namespace gliq {

// A liquid variable and the variables its qualifiers may mention.
struct KVarInfo {
  int id = 0;
  Sort sort = Sort::Int;
  Scope scope;
  Span span;
  std::string def;
};

// Unsplit judgment: Sub (lhs ≼ rhs) or Wf (rhs).
struct Judgment {
  ConstraintKind kind = ConstraintKind::Sub;
  Env env;
  RTypePtr lhs, rhs;
  Span span;
  std::string def;
};

struct ConstraintSet {
  std::vector<Constraint> constraints;  // base constraints; id == index
  std::vector<KVarInfo> kvars;          // id == index
  std::map<std::string, RTypePtr> def_types;  // sig, or the inferred template
  std::vector<std::string> def_order;
  // Variables a candidate for each gradual source may mention (besides ν).
  std::map<int, Scope> source_scopes;
};

// Pseudo-bindings introduced for branch guards start with this prefix and
// never enter qualifier scopes.
inline const std::string kGuardPrefix = "#g";
bool is_guard(const std::string& name);

// Throws SourceError on shape errors, shape-mismatched Sub on a frontend bug.
std::vector<Constraint> split(const std::vector<Judgment>& js, int first_id = 0);

// Fresh, Gen and Split over the whole program. Defs without a sig export
// their template type to the defs after them.
ConstraintSet generate(const Program& p);

}  // namespace gliq
