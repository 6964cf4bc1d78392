#include "gliq/gradual.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

namespace gliq {

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::All: return "all";
    case Stage::Sensible: return "sensible";
    case Stage::Local: return "local";
    case Stage::Specific: return "specific";
    case Stage::Valid: return "valid";
    case Stage::None: return "none";
  }
  return "none";
}

std::vector<Template> engine_templates(const Program& p, const EngineOptions& opts) {
  auto base = opts.templates_minimal ? minimal_templates() : builtin_templates();
  auto all = merge_templates(merge_templates(std::move(base), abstract_from_specs(p)), p.templates);
  if (opts.drop_templates.empty()) return all;
  std::vector<Template> kept;
  for (auto& t : all)
    if (std::find(opts.drop_templates.begin(), opts.drop_templates.end(), t.show()) == opts.drop_templates.end())
      kept.push_back(std::move(t));
  return kept;
}

namespace {

GPred concretize_pred(const GPred& g, const std::map<int, TermPtr>& by_source) {
  if (!g.hole) return g;
  auto it = by_source.find(g.hole->source);
  if (it == by_source.end()) return g;
  return precise(conj(g.static_part, subst(it->second, g.hole->pending)));
}

RBase map_base(const RBase& b, const std::function<GPred(const GPred&)>& f) {
  RBase out = b;
  out.refinement = f(b.refinement);
  return out;
}

Constraint map_preds(const Constraint& c, const std::function<GPred(const GPred&)>& f) {
  Constraint out = c;
  for (auto& b : out.env.bindings())
    if (b.type->is_base()) b.type = std::make_shared<const RType>(RType{map_base(b.type->base(), f)});
  out.lhs = map_base(c.lhs, f);
  out.rhs = map_base(c.rhs, f);
  return out;
}

void add_kvars(const GPred& g, std::set<int>& out) {
  for (int k : kvars_of(g.static_part)) out.insert(k);
}

std::set<int> hypothesis_kvars(const Constraint& c) {
  std::set<int> out;
  for (const auto& b : c.env.bindings())
    if (b.type->is_base()) add_kvars(b.type->base().refinement, out);
  if (c.kind == ConstraintKind::Sub) add_kvars(c.lhs.refinement, out);
  return out;
}

std::set<int> all_kvars(const Constraint& c) {
  auto out = hypothesis_kvars(c);
  add_kvars(c.rhs.refinement, out);
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

Solution restrict(const Solution& a, const std::vector<int>& ks) {
  Solution out;
  for (int k : ks) {
    auto it = a.sets.find(k);
    if (it != a.sets.end()) out.sets[k] = it->second;
  }
  return out;
}

void add_stats(SmtStats& into, const SmtStats& s) {
  into.queries += s.queries;
  into.cache_hits += s.cache_hits;
  into.unknowns += s.unknowns;
  into.restarts += s.restarts;
}

TypeError describe(const Constraint& c, const Solution& a) {
  TypeError e;
  e.constraint = c.id;
  e.span = c.span;
  e.def = c.def;
  Constraint applied = apply(c, a);
  if (c.kind == ConstraintKind::Sub) {
    e.vc = show(embed_sub(applied));
    e.message = "cannot prove {v | " + show(applied.rhs.refinement.static_part) + "} from {v | " +
                show(applied.lhs.refinement.static_part) + "}";
  } else {
    e.message = "ill-formed refinement " + show(applied.rhs.refinement, "v");
  }
  return e;
}

std::vector<size_t> decode(size_t index, const std::vector<size_t>& sizes) {
  std::vector<size_t> out(sizes.size());
  for (size_t i = sizes.size(); i-- > 0;) {
    out[i] = index % sizes[i];
    index /= sizes[i];
  }
  return out;
}

Inference run(const Program& p, EngineOptions opts, bool oracle, const ScCallback& cb) {
  auto t0 = std::chrono::steady_clock::now();
  if (!opts.cache) opts.cache = std::make_shared<SmtCache>();
  if (oracle) {
    opts.partition = false;
    opts.sensibility = false;
  }
  Inference inf;
  inf.program = p;
  inf.cs = generate(p);
  const auto& cons = inf.cs.constraints;
  const size_t n = cons.size();
  auto quals = engine_templates(p, opts);
  SmtSession smt(opts.smt, p.measures, opts.cache);

  // Trivially valid constraints carry no information.
  std::vector<bool> keep(n, true);
  for (size_t i = 0; i < n; ++i) {
    const auto& c = cons[i];
    bool concrete_true = c.rhs.refinement.precise() && is_true(c.rhs.refinement.static_part);
    if ((c.kind == ConstraintKind::Sub && concrete_true) || (c.kind == ConstraintKind::Wf && !c.head_kvar())) {
      keep[i] = false;
      inf.dropped.push_back(c.id);
    }
  }

  // A constraint matters if it can fail, or if its κ reaches one that can.
  inf.relevant.assign(n, false);
  std::set<int> live;
  for (size_t i = 0; i < n; ++i) {
    if (!keep[i] || cons[i].head_kvar()) continue;
    inf.relevant[i] = true;
    for (int k : hypothesis_kvars(cons[i])) live.insert(k);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t i = 0; i < n; ++i) {
      if (!keep[i] || inf.relevant[i] || !live.count(*cons[i].head_kvar())) continue;
      inf.relevant[i] = true;
      changed = true;
      for (int k : hypothesis_kvars(cons[i])) live.insert(k);
    }
  }
  std::vector<Constraint> work(cons.begin(), cons.end());
  for (size_t i = 0; i < n; ++i)
    if (keep[i] && !inf.relevant[i]) work[i] = erase_holes(cons[i]);

  std::map<std::pair<int, int>, int> occ_of;  // (constraint, source) -> occurrence
  for (size_t i = 0; i < n; ++i) {
    if (!keep[i] || !inf.relevant[i]) continue;
    for (int s : hole_sources(cons[i])) {
      Occurrence o;
      o.id = static_cast<int>(inf.occurrences.size());
      o.source = s;
      o.constraint = cons[i].id;
      o.span = cons[i].span;
      o.def = cons[i].def;
      occ_of[{o.constraint, s}] = o.id;
      inf.occurrences.push_back(o);
    }
  }

  // Partitions: constraints sharing a κ belong together.
  UnionFind uf(n);
  std::map<int, int> first_with;
  int anchor = -1;
  for (size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    if (anchor < 0) anchor = static_cast<int>(i);
    if (!opts.partition) uf.join(anchor, static_cast<int>(i));
    for (int k : all_kvars(cons[i])) {
      auto [it, fresh] = first_with.emplace(k, static_cast<int>(i));
      if (!fresh) uf.join(it->second, static_cast<int>(i));
    }
  }
  std::map<int, int> part_of_root;
  for (size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    int r = uf.find(static_cast<int>(i));
    auto [it, fresh] = part_of_root.emplace(r, static_cast<int>(inf.partitions.size()));
    if (fresh) {
      Partition part;
      part.id = it->second;
      inf.partitions.push_back(part);
    }
    auto& part = inf.partitions[it->second];
    part.constraints.push_back(cons[i].id);
  }
  for (auto& part : inf.partitions) {
    std::set<int> ks;
    for (int c : part.constraints)
      for (int k : all_kvars(cons[c])) ks.insert(k);
    part.kvars.assign(ks.begin(), ks.end());
  }
  for (auto& o : inf.occurrences) {
    o.partition = part_of_root.at(uf.find(o.constraint));
    inf.partitions[o.partition].occurrences.push_back(o.id);
  }

  // Candidates, one list per source shared by all its occurrences.
  CandidateOptions copts{opts.depth, opts.sensibility, opts.with_true};
  for (const auto& s : p.sources) {
    const Scope& scope = inf.cs.source_scopes.at(s.id);
    SortEnv sorts;
    for (const auto& [v, srt] : scope) sorts[v] = srt;
    auto qs = instantiate(quals, scope, s.sort, p.measures);
    inf.candidates[s.id] = candidates(qs, s.sort, sorts, s.static_part, copts, smt);
  }

  Solution a0 = initial_solution(inf.cs.kvars, quals, p.measures);
  bool ok = true;
  bool type_error = false;

  for (const auto& part : inf.partitions) {
    if (part.gradual()) continue;
    std::vector<Constraint> cs;
    for (int c : part.constraints) cs.push_back(work[c]);
    Solution start = restrict(a0, part.kvars);
    auto sol = solve(start, cs, smt);
    if (sol) {
      inf.static_parts[part.id] = *sol;
      continue;
    }
    ok = false;
    type_error = true;
    auto col = solve_collect(start, cs, smt);
    for (int id : col.failed) inf.errors.push_back(describe(cons[id], col.solution));
  }

  int jobs = std::max(1, opts.jobs);
  std::vector<std::unique_ptr<SmtSession>> workers;
  for (int j = 0; j < jobs; ++j) workers.push_back(std::make_unique<SmtSession>(opts.smt, p.measures, opts.cache));
  std::mutex mu;

  for (const auto& part : inf.partitions) {
    if (!part.gradual()) continue;
    std::vector<size_t> sizes;
    size_t total = 1;
    for (int o : part.occurrences) {
      size_t k = inf.candidates.at(inf.occurrences[o].source).size();
      sizes.push_back(k);
      if (k == 0) {
        total = 0;
      } else if (total > opts.enumeration_cap / k && !opts.first_only) {
        throw std::runtime_error("partition " + std::to_string(part.id) + " has more than " +
                                 std::to_string(opts.enumeration_cap) + " concretizations");
      } else if (total > std::numeric_limits<size_t>::max() / k) {
        total = std::numeric_limits<size_t>::max();  // first_only never gets that far
      } else {
        total *= k;
      }
    }
    inf.metrics.instan = total > static_cast<size_t>(std::numeric_limits<long>::max() - inf.metrics.instan)
                             ? std::numeric_limits<long>::max()
                             : inf.metrics.instan + static_cast<long>(total);
    Solution start = restrict(a0, part.kvars);
    std::vector<SafeConcretization> found;
    std::atomic<size_t> next{0};
    std::atomic<bool> stop{false};

    std::exception_ptr error;
    auto work_on = [&](SmtSession& s) {
      try {
        for (size_t idx; (idx = next++) < total;) {
          if (stop.load()) return;
          if (opts.first_only && idx >= opts.enumeration_cap)
            throw std::runtime_error("partition " + std::to_string(part.id) + ": no safe concretization among the first " +
                                     std::to_string(opts.enumeration_cap));
          auto choice = decode(idx, sizes);
          std::vector<Constraint> concrete;
          for (int c : part.constraints) {
            std::map<int, TermPtr> by_source;
            for (int src : hole_sources(work[c])) {
              size_t pos = std::find(part.occurrences.begin(), part.occurrences.end(), occ_of.at({c, src})) -
                           part.occurrences.begin();
              by_source[src] = inf.candidates.at(src).at(choice[pos]);
            }
            concrete.push_back(concretize(work[c], by_source));
          }
          auto sol = solve(start, concrete, s);
          if (!sol) continue;
          SafeConcretization sc{part.id, idx, std::move(choice), std::move(*sol)};
          std::lock_guard<std::mutex> lock(mu);
          if (cb) cb(inf, sc);
          found.push_back(std::move(sc));
          if (opts.first_only) stop = true;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    };
    std::vector<std::thread> threads;
    for (int j = 1; j < jobs; ++j) threads.emplace_back(work_on, std::ref(*workers[j]));
    work_on(*workers[0]);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    if (found.empty()) ok = false;
    inf.scs[part.id] = std::move(found);
  }

  // Per-occurrence projections and the failure stage.
  inf.per_occurrence.resize(inf.occurrences.size());
  for (const auto& o : inf.occurrences) {
    const auto& part = inf.partitions[o.partition];
    size_t pos = std::find(part.occurrences.begin(), part.occurrences.end(), o.id) - part.occurrences.begin();
    std::set<size_t> picked;
    for (const auto& sc : inf.scs[part.id]) picked.insert(sc.choice[pos]);
    auto& r = inf.per_occurrence[o.id];
    r.scs.assign(picked.begin(), picked.end());
    const auto& cs = inf.candidates.at(o.source);
    if (cs.all.empty()) r.emptied = Stage::All;
    else if (cs.sensible.empty()) r.emptied = Stage::Sensible;
    else if (cs.local.empty()) r.emptied = Stage::Local;
    else if (cs.specific.empty()) r.emptied = Stage::Specific;
    else if (r.scs.empty()) r.emptied = Stage::Valid;
  }

  // Static solutions: one candidate that some SC uses at every occurrence of the source.
  for (const auto& s : p.sources) {
    auto& out = inf.static_solutions[s.id];
    size_t k = inf.candidates.at(s.id).size();
    for (size_t q = 0; q < k; ++q) {
      bool everywhere = true;
      for (const auto& part : inf.partitions) {
        std::vector<size_t> positions;
        for (size_t j = 0; j < part.occurrences.size(); ++j)
          if (inf.occurrences[part.occurrences[j]].source == s.id) positions.push_back(j);
        if (positions.empty()) continue;
        bool some = false;
        for (const auto& sc : inf.scs[part.id]) {
          bool all_q = true;
          for (size_t j : positions) all_q &= sc.choice[j] == q;
          if (all_q) {
            some = true;
            break;
          }
        }
        if (!some) {
          everywhere = false;
          break;
        }
      }
      if (everywhere) out.push_back(q);
    }
  }

  // Inferred types: combinations of per-partition solutions, in order.
  if (ok) {
    std::vector<const std::vector<SafeConcretization>*> factors;
    std::vector<size_t> sizes;
    for (const auto& part : inf.partitions)
      if (part.gradual()) {
        factors.push_back(&inf.scs[part.id]);
        sizes.push_back(inf.scs[part.id].size());
      }
    size_t combos = 1;
    for (size_t s : sizes) combos = combos > opts.max_types ? combos : combos * s;
    std::set<std::string> seen;
    for (size_t idx = 0; idx < combos && inf.types.size() < opts.max_types; ++idx) {
      Solution a = a0;
      for (const auto& [pid, sol] : inf.static_parts)
        for (const auto& [k, qs] : sol.sets) a.sets[k] = qs;
      auto choice = decode(idx, sizes);
      for (size_t f = 0; f < factors.size(); ++f)
        for (const auto& [k, qs] : (*factors[f])[choice[f]].solution.sets) a.sets[k] = qs;
      std::map<std::string, RTypePtr> types;
      std::string key;
      for (const auto& name : inf.cs.def_order) {
        types[name] = apply_solution(a, inf.cs.def_types.at(name));
        key += name + "::" + show(types[name]) + "\n";
      }
      if (seen.insert(key).second) inf.types.push_back(std::move(types));
    }
    if (!inf.types.empty()) {
      for (const auto& d : p.defs) {
        if (d.sig) continue;
        RTypePtr t = inf.types.front().at(d.name);
        SortEnv sorts;
        while (!t->is_base()) {
          const auto& f = t->fun();
          if (f.arg_type->is_base()) {
            SortEnv with = sorts;
            with[kNu] = f.arg_type->base().base;
            if (!smt.maybe_satisfiable(f.arg_type->base().refinement.static_part, with))
              inf.warnings.push_back(d.name + ": argument refinement is unsatisfiable (dead code): " + f.arg + ":" +
                                     show(f.arg_type));
            sorts[f.arg] = f.arg_type->base().base;
          }
          t = f.result;
        }
      }
    }
  }

  inf.ok = ok;
  inf.verdict = ok ? "ok" : (type_error ? "type-error" : "no-concretization");

  auto& m = inf.metrics;
  m.depth = opts.depth;
  m.grad = static_cast<int>(p.sources.size());
  m.occs = static_cast<int>(inf.occurrences.size());
  for (const auto& [sid, cs] : inf.candidates) {
    m.cands += cs.all.size();
    m.sens += cs.sensible.size();
    m.local += cs.local.size();
    m.precise += cs.specific.size();
  }
  m.parts = static_cast<int>(inf.partitions.size());
  for (const auto& part : inf.partitions) m.gradual_parts += part.gradual() ? 1 : 0;
  for (const auto& r : inf.per_occurrence) m.sols.push_back(r.scs.size());
  for (const auto& [sid, qs] : inf.static_solutions) m.statics += qs.size();

  add_stats(inf.smt, smt.stats());
  for (const auto& w : workers) add_stats(inf.smt, w->stats());
  for (const auto& w : smt.warnings()) inf.warnings.push_back(w);
  for (const auto& s : workers)
    for (const auto& w : s->warnings()) inf.warnings.push_back(w);
  m.time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return inf;
}

}  // namespace

Constraint concretize(const Constraint& c, const std::map<int, TermPtr>& by_source) {
  return map_preds(c, [&](const GPred& g) { return concretize_pred(g, by_source); });
}

Constraint erase_holes(const Constraint& c) {
  return map_preds(c, [](const GPred& g) { return precise(g.static_part); });
}

std::vector<int> hole_sources(const Constraint& c) {
  std::set<int> out;
  auto visit = [&](const GPred& g) {
    if (g.hole) out.insert(g.hole->source);
  };
  for (const auto& b : c.env.bindings())
    if (b.type->is_base()) visit(b.type->base().refinement);
  if (c.kind == ConstraintKind::Sub) visit(c.lhs.refinement);
  visit(c.rhs.refinement);
  return {out.begin(), out.end()};
}

Inference ginfer(const Program& p, const EngineOptions& opts, const ScCallback& on_sc) {
  return run(p, opts, false, on_sc);
}

Inference oracle_ginfer(const Program& p, EngineOptions opts) { return run(p, std::move(opts), true, nullptr); }

std::optional<std::map<std::string, RTypePtr>> infer(const Program& p, const EngineOptions& opts) {
  if (p.has_holes()) throw std::logic_error("infer: program has gradual refinements");
  auto cs = generate(p);
  auto quals = engine_templates(p, opts);
  SmtSession smt(opts.smt, p.measures, opts.cache);
  auto sol = solve(initial_solution(cs.kvars, quals, p.measures), cs.constraints, smt);
  if (!sol) return std::nullopt;
  std::map<std::string, RTypePtr> out;
  for (const auto& name : cs.def_order) out[name] = apply_solution(*sol, cs.def_types.at(name));
  return out;
}

Recheck recheck(const Inference& inf, const std::map<int, TermPtr>& by_source,
                const std::map<int, TermPtr>& by_occurrence, const EngineOptions& opts) {
  std::map<std::pair<int, int>, int> occ_of;
  for (const auto& o : inf.occurrences) occ_of[{o.constraint, o.source}] = o.id;
  std::vector<Constraint> cs;
  for (const auto& c : inf.cs.constraints) {
    std::map<int, TermPtr> choice;
    for (int s : hole_sources(c)) {
      auto o = occ_of.find({c.id, s});
      if (o != occ_of.end() && by_occurrence.count(o->second)) {
        choice[s] = by_occurrence.at(o->second);
      } else if (by_source.count(s)) {
        choice[s] = by_source.at(s);
      } else if (o == occ_of.end()) {
        continue;  // not an occurrence: the engine keeps only the static part here too
      } else {
        throw std::invalid_argument("no predicate given for gradual refinement " + std::to_string(s));
      }
    }
    cs.push_back(erase_holes(concretize(c, choice)));
  }
  auto quals = engine_templates(inf.program, opts);
  SmtSession smt(opts.smt, inf.program.measures, opts.cache);
  auto col = solve_collect(initial_solution(inf.cs.kvars, quals, inf.program.measures), cs, smt);
  Recheck out;
  for (int id : col.failed) out.errors.push_back(describe(cs[id], col.solution));
  out.ok = out.errors.empty();
  return out;
}

namespace {

bool pred_precision(const GPred& a, const GPred& b, Sort binder, const SortEnv& scope, SmtSession& smt) {
  if (b.precise()) {
    return a.precise() && smt.is_specific(a.static_part, b.static_part, binder, scope) &&
           smt.is_specific(b.static_part, a.static_part, binder, scope);
  }
  if (a.precise())
    return smt.is_local(a.static_part, binder, scope) && smt.is_specific(a.static_part, b.static_part, binder, scope);
  return smt.is_specific(a.static_part, b.static_part, binder, scope);
}

bool precision(const RTypePtr& a, const RTypePtr& b, SortEnv scope, SmtSession& smt) {
  if (a->is_base() != b->is_base()) return false;
  if (a->is_base()) {
    if (a->base().base != b->base().base) return false;
    return pred_precision(a->base().refinement, b->base().refinement, a->base().base, scope, smt);
  }
  const auto& fa = a->fun();
  const auto& fb = b->fun();
  if (!precision(fa.arg_type, fb.arg_type, scope, smt)) return false;
  if (fa.arg_type->is_base()) scope[fa.arg] = fa.arg_type->base().base;
  RTypePtr rb = fb.arg == fa.arg ? fb.result : subst(fb.result, Subst{{fb.arg, var(fa.arg)}});
  return precision(fa.result, rb, scope, smt);
}

}  // namespace

bool type_precision(const RTypePtr& a, const RTypePtr& b, SmtSession& smt) { return precision(a, b, {}, smt); }

}  // namespace gliq
