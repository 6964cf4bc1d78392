#include "gliq/liquid_solver.hpp"

#include <deque>
#include <map>
#include <set>

namespace gliq {

Solution initial_solution(const std::vector<KVarInfo>& kvars, const std::vector<int>& only,
                          const std::vector<Template>& qualifiers, const MeasureTable& measures) {
  Solution a;
  for (int k : only) {
    const auto& info = kvars.at(k);
    a.sets[k] = instantiate(qualifiers, info.scope, info.sort, measures);
  }
  return a;
}

Solution initial_solution(const std::vector<KVarInfo>& kvars, const std::vector<Template>& qualifiers,
                          const MeasureTable& measures) {
  std::vector<int> all;
  for (const auto& k : kvars) all.push_back(k.id);
  return initial_solution(kvars, all, qualifiers, measures);
}

namespace {

RBase apply_base(const RBase& b, const Solution& a) {
  RBase out = b;
  out.refinement.static_part = apply_solution(a, b.refinement.static_part);
  return out;
}

Env apply_env(const Env& env, const Solution& a) {
  Env out = env;
  for (auto& b : out.bindings())
    if (b.type->is_base()) b.type = std::make_shared<const RType>(RType{apply_base(b.type->base(), a)});
  return out;
}

std::set<int> hypothesis_kvars(const Constraint& c) {
  std::set<int> out;
  for (const auto& b : c.env.bindings())
    if (b.type->is_base())
      for (int k : kvars_of(b.type->base().refinement.static_part)) out.insert(k);
  if (c.kind == ConstraintKind::Sub)
    for (int k : kvars_of(c.lhs.refinement.static_part)) out.insert(k);
  return out;
}

bool well_formed(const TermPtr& q, const SortEnv& sorts, const MeasureTable& measures) {
  for (const auto& v : free_vars(q))
    if (!sorts.count(v)) return false;
  return sort_of(q, sorts, measures) == Sort::Bool;
}

}  // namespace

Constraint apply(const Constraint& c, const Solution& a) {
  Constraint out = c;
  out.env = apply_env(c.env, a);
  if (c.kind == ConstraintKind::Sub) out.lhs = apply_base(c.lhs, a);
  out.rhs = apply_base(c.rhs, a);
  return out;
}

bool satisfied(const Constraint& c, const Solution& a, SmtSession& smt) {
  Constraint applied = apply(c, a);
  if (c.kind == ConstraintKind::Wf) return check_wf(applied.env, applied.rhs, smt.measures());
  return smt.valid(embed_sub(applied));
}

std::optional<Solution> weaken(const Constraint& c, const Solution& a, SmtSession& smt) {
  auto head = c.head_kvar();
  if (!head) return std::nullopt;
  const TermPtr& app = c.rhs.refinement.static_part;
  const auto& qs = a.sets.count(*head) ? a.sets.at(*head) : std::vector<TermPtr>{};
  std::vector<TermPtr> keep;
  if (c.kind == ConstraintKind::Wf) {
    SortEnv sorts = c.env.sorts();
    sorts[kNu] = c.rhs.base;
    for (const auto& q : qs)
      if (well_formed(subst(q, app->pending), sorts, smt.measures())) keep.push_back(q);
  } else {
    Constraint probe = apply(c, a);
    probe.rhs.refinement = precise(mk_true());
    VC vc = embed_sub(probe);
    for (const auto& q : qs) {
      vc.consequent = subst(q, app->pending);
      if (smt.valid(vc)) keep.push_back(q);
    }
  }
  Solution out = a;
  out.sets[*head] = std::move(keep);
  return out;
}

namespace {

struct Run {
  Solution solution;
  std::vector<int> failed;
  bool ok = true;
};

Run fixpoint(const Solution& a0, const std::vector<Constraint>& cs, SmtSession& smt, bool collect,
             SolveStats* stats) {
  SolveStats local;
  SolveStats& st = stats ? *stats : local;
  std::map<int, std::vector<size_t>> dependents;
  for (size_t i = 0; i < cs.size(); ++i)
    for (int k : hypothesis_kvars(cs[i])) dependents[k].push_back(i);

  Run run;
  run.solution = a0;
  std::deque<size_t> queue;
  std::vector<bool> queued(cs.size(), true);
  std::vector<bool> dead(cs.size(), false);
  for (size_t i = 0; i < cs.size(); ++i) queue.push_back(i);

  while (true) {
    while (!queue.empty()) {
      size_t i = queue.front();
      queue.pop_front();
      queued[i] = false;
      if (dead[i]) continue;
      ++st.checks;
      if (satisfied(cs[i], run.solution, smt)) continue;
      auto w = weaken(cs[i], run.solution, smt);
      if (!w) {
        if (!collect) {
          st.failed = cs[i].id;
          run.ok = false;
          return run;
        }
        // Hypotheses only get weaker, so a failed concrete check stays failed.
        dead[i] = true;
        continue;
      }
      int k = *cs[i].head_kvar();
      size_t before = run.solution.sets.count(k) ? run.solution.sets.at(k).size() : 0;
      size_t after = w->sets.at(k).size();
      run.solution = std::move(*w);
      if (after == before) continue;
      ++st.iterations;
      st.removed += static_cast<long>(before - after);
      for (size_t j : dependents[k])
        if (!queued[j]) {
          queued[j] = true;
          queue.push_back(j);
        }
    }
    // Final validation pass.
    for (size_t i = 0; i < cs.size(); ++i) {
      if (dead[i]) continue;
      ++st.checks;
      if (!satisfied(cs[i], run.solution, smt)) {
        queued[i] = true;
        queue.push_back(i);
      }
    }
    if (queue.empty()) break;
  }
  for (size_t i = 0; i < cs.size(); ++i)
    if (dead[i]) run.failed.push_back(cs[i].id);
  run.ok = run.failed.empty();
  return run;
}

}  // namespace

std::optional<Solution> solve(const Solution& a0, const std::vector<Constraint>& cs, SmtSession& smt,
                              SolveStats* stats) {
  Run r = fixpoint(a0, cs, smt, false, stats);
  if (!r.ok) return std::nullopt;
  return r.solution;
}

Collected solve_collect(const Solution& a0, const std::vector<Constraint>& cs, SmtSession& smt) {
  Run r = fixpoint(a0, cs, smt, true, nullptr);
  return Collected{std::move(r.solution), std::move(r.failed)};
}

}  // namespace gliq
