#pragma once

#include <optional>
#include <vector>

#include "gliq/constraint_gen.hpp"
#include "gliq/smt.hpp"
#include "gliq/templates.hpp"

namespace gliq {

// A0 = λκ. Q, each κ getting the qualifiers instantiated over its own scope.
Solution initial_solution(const std::vector<KVarInfo>& kvars, const std::vector<Template>& qualifiers,
                          const MeasureTable& measures);
Solution initial_solution(const std::vector<KVarInfo>& kvars, const std::vector<int>& only,
                          const std::vector<Template>& qualifiers, const MeasureTable& measures);

// Substitutes A into environment, lhs and (unless it is the κ being solved) rhs.
Constraint apply(const Constraint& c, const Solution& a);

// Valid under A. Wf constraints check that refinements are well-sorted.
bool satisfied(const Constraint& c, const Solution& a, SmtSession& smt);

// Filters A(κ) for a κ-headed c; nothing when the head is concrete.
std::optional<Solution> weaken(const Constraint& c, const Solution& a, SmtSession& smt);

struct SolveStats {
  long iterations = 0;  // weakening steps
  long removed = 0;     // qualifiers dropped overall
  long checks = 0;      // constraint validity checks
  int failed = -1;      // id of the concrete constraint that failed
};

// Constraints must be free of holes. Deterministic FIFO worklist.
std::optional<Solution> solve(const Solution& a0, const std::vector<Constraint>& cs, SmtSession& smt,
                              SolveStats* stats = nullptr);

// Like solve, but failing concrete constraints are recorded and skipped.
struct Collected {
  Solution solution;
  std::vector<int> failed;  // constraint ids, ascending
};
Collected solve_collect(const Solution& a0, const std::vector<Constraint>& cs, SmtSession& smt);

}  // namespace gliq
