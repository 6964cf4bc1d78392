#include "properties.hpp"

#include <chrono>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "brute.hpp"
#include "gliq/frontend.hpp"
#include "gliq/templates.hpp"
#include "progen.hpp"

namespace gliq::testing {

namespace {

using Clock = std::chrono::steady_clock;

// Enumeration cap hit: the program is too big for this run, not a failure.
bool is_cap(const std::exception& e) {
  std::string w = e.what();
  return w.find("concretizations") != std::string::npos || w.find("no safe concretization among") != std::string::npos;
}

struct Runner {
  PropertyResult r;
  const PropertyConfig& cfg;
  std::mt19937 rng;
  Clock::time_point t0 = Clock::now();

  Runner(std::string name, const PropertyConfig& c) : cfg(c), rng(c.seed) { r.name = std::move(name); }

  void violation(const std::string& what) {
    ++r.violations;
    if (r.examples.size() < 3) r.examples.push_back(what);
  }

  // `body` returns false to discard the sample.
  PropertyResult run(const std::function<bool()>& body) {
    int attempts = 0;
    while (r.programs < cfg.count && attempts < cfg.count * 8) {
      ++attempts;
      bool counted = false;
      try {
        counted = body();
      } catch (const std::exception& e) {
        if (is_cap(e)) {
          ++r.discarded;
          continue;
        }
        violation(std::string("exception: ") + e.what());
        counted = true;
      }
      if (counted) ++r.programs;
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
  }

  EngineOptions opts(size_t cap) const {
    EngineOptions o = cfg.engine;
    o.enumeration_cap = cap;
    return o;
  }
};

std::string sc_text(const Inference& inf, int part, const std::vector<size_t>& choice) {
  std::ostringstream os;
  const auto& p = inf.partitions[part];
  for (size_t j = 0; j < choice.size(); ++j) {
    const auto& o = inf.occurrences[p.occurrences[j]];
    os << (j ? ", " : "") << "occ" << o.id << "=" << show(inf.candidates.at(o.source).at(choice[j]), inf.program.sources[o.source].binder);
  }
  return os.str();
}

// The constraints a partition is solved with, holes filled per `choice`.
std::vector<Constraint> concrete_partition(const Inference& inf, const Partition& part, const std::vector<size_t>* choice) {
  std::vector<Constraint> out;
  for (int c : part.constraints) {
    const Constraint& con = inf.cs.constraints[c];
    if (!inf.relevant[c]) {
      out.push_back(erase_holes(con));
      continue;
    }
    std::map<int, TermPtr> by_source;
    for (int src : hole_sources(con)) {
      size_t pos = 0;
      for (; pos < part.occurrences.size(); ++pos) {
        const auto& o = inf.occurrences[part.occurrences[pos]];
        if (o.constraint == c && o.source == src) break;
      }
      by_source[src] = inf.candidates.at(src).at((*choice)[pos]);
    }
    out.push_back(concretize(con, by_source));
  }
  return out;
}

// Independent check of a claimed solution: every Sub VC has no finite countermodel.
std::optional<std::string> brute_check(const std::vector<Constraint>& cs, const Solution& sol, std::mt19937& rng) {
  for (const auto& c : cs) {
    if (c.kind != ConstraintKind::Sub) continue;
    VC vc = embed_sub(apply(c, sol));
    auto b = brute_valid(vc, 200000, &rng);
    if (b.counterexample) return "constraint " + std::to_string(c.id) + " fails at " + b.counterexample->show() + ": " + show(vc);
  }
  return std::nullopt;
}

std::set<std::string> occurrence_keys(const Inference& inf, int occ) {
  std::set<std::string> out;
  const auto& o = inf.occurrences[occ];
  for (size_t q : inf.per_occurrence[occ].scs) out.insert(conj_key(inf.candidates.at(o.source).at(q)));
  return out;
}

}  // namespace

PropertyConfig::PropertyConfig() { engine.templates_minimal = true; }

std::string PropertyResult::line() const {
  std::ostringstream os;
  os << name << ": " << programs << " checked (" << nontrivial << " non-trivial, " << discarded << " over the cap), "
     << violations << " violations, " << static_cast<int>(seconds + 0.5) << "s";
  return os.str();
}

PropertyResult prop_soundness(const PropertyConfig& cfg) {
  Runner run("soundness", cfg);
  return run.run([&] {
    GenProgram g = generate_program(run.rng, GenOptions{GenMode::Gradual});
    Program p = load_program(g.text());
    EngineOptions o = run.opts(cfg.cap);
    Inference inf = ginfer(p, o);
    if (!inf.ok) return true;
    ++run.r.nontrivial;
    // Static partitions as solved.
    for (const auto& [pid, sol] : inf.static_parts)
      if (auto bad = brute_check(concrete_partition(inf, inf.partitions[pid], nullptr), sol, run.rng))
        run.violation(g.text() + "static part: " + *bad);
    // A spread of safe concretizations per gradual partition.
    std::map<int, TermPtr> base;
    for (const auto& part : inf.partitions) {
      if (!part.gradual()) continue;
      const auto& first = inf.scs.at(part.id).front();
      for (size_t j = 0; j < part.occurrences.size(); ++j)
        base[part.occurrences[j]] = inf.candidates.at(inf.occurrences[part.occurrences[j]].source).at(first.choice[j]);
    }
    for (const auto& part : inf.partitions) {
      if (!part.gradual()) continue;
      const auto& scs = inf.scs.at(part.id);
      std::set<size_t> picks = {0, scs.size() - 1};
      while (picks.size() < std::min<size_t>(scs.size(), 12))
        picks.insert(std::uniform_int_distribution<size_t>(0, scs.size() - 1)(run.rng));
      for (size_t i : picks) {
        const auto& sc = scs[i];
        if (auto bad = brute_check(concrete_partition(inf, part, &sc.choice), sc.solution, run.rng))
          run.violation(g.text() + "SC " + sc_text(inf, part.id, sc.choice) + ": " + *bad);
        std::map<int, TermPtr> by_occ = base;
        for (size_t j = 0; j < part.occurrences.size(); ++j)
          by_occ[part.occurrences[j]] = inf.candidates.at(inf.occurrences[part.occurrences[j]].source).at(sc.choice[j]);
        Recheck rc = recheck(inf, {}, by_occ, o);
        if (!rc.ok)
          run.violation(g.text() + "SC " + sc_text(inf, part.id, sc.choice) + " fails recheck: " + rc.errors.front().message);
      }
    }
    return true;
  });
}

PropertyResult prop_completeness(const PropertyConfig& cfg) {
  Runner run("completeness", cfg);
  return run.run([&] {
    GenProgram g = generate_program(run.rng, GenOptions{GenMode::Gradual});
    Program p = load_program(g.text());
    EngineOptions o = run.opts(cfg.cap);
    o.first_only = true;
    Inference a = ginfer(p, o);
    Inference b = oracle_ginfer(p, o);
    if (a.verdict == "type-error" && b.verdict == "type-error") return true;
    bool ea = !a.ok, eb = !b.ok;
    if (!ea) ++run.r.nontrivial;
    if (ea != eb)
      run.violation(g.text() + "ginfer " + a.verdict + " but oracle " + b.verdict);
    return true;
  });
}

PropertyResult prop_conservative_extension(const PropertyConfig& cfg) {
  Runner run("conservative extension", cfg);
  return run.run([&] {
    GenProgram g = generate_program(run.rng, GenOptions{GenMode::Static});
    Program p = load_program(g.text());
    EngineOptions o = run.opts(cfg.cap);
    Inference a = ginfer(p, o);
    auto plain = infer(p, o);
    if (plain) ++run.r.nontrivial;
    if (a.ok != plain.has_value()) {
      run.violation(g.text() + "ginfer " + a.verdict + ", infer " + (plain ? "succeeds" : "fails"));
      return true;
    }
    if (!plain) return true;
    if (a.types.size() != 1) {
      run.violation(g.text() + std::to_string(a.types.size()) + " inferred types, expected exactly one");
      return true;
    }
    for (const auto& [name, t] : *plain) {
      auto it = a.types.front().find(name);
      if (it == a.types.front().end() || !type_equal(it->second, t))
        run.violation(g.text() + name + ": ginfer " + (it == a.types.front().end() ? "-" : show(it->second)) +
                      " vs infer " + show(t));
    }
    return true;
  });
}

PropertyResult prop_partition_equivalence(const PropertyConfig& cfg) {
  Runner run("partition equivalence", cfg);
  return run.run([&] {
    GenProgram g = generate_program(run.rng, GenOptions{GenMode::Gradual});
    Program p = load_program(g.text());
    EngineOptions o = run.opts(cfg.cap);
    Inference a = ginfer(p, o);
    Inference b = oracle_ginfer(p, o);
    if (a.ok != b.ok) {
      run.violation(g.text() + "ginfer " + a.verdict + " but oracle " + b.verdict);
      return true;
    }
    if (!a.ok) return true;
    ++run.r.nontrivial;
    std::map<std::pair<int, int>, int> in_b;
    for (const auto& o2 : b.occurrences) in_b[{o2.constraint, o2.source}] = o2.id;
    if (in_b.size() != a.occurrences.size()) {
      run.violation(g.text() + "occurrence counts differ");
      return true;
    }
    for (const auto& occ : a.occurrences) {
      auto it = in_b.find({occ.constraint, occ.source});
      if (it == in_b.end()) {
        run.violation(g.text() + "occurrence " + std::to_string(occ.id) + " missing from the oracle");
        continue;
      }
      // The oracle skips the sensibility filter; compare on the candidates both enumerate.
      std::set<std::string> sensible;
      const auto& cs = a.candidates.at(occ.source);
      for (size_t i = 0; i < cs.size(); ++i) sensible.insert(conj_key(cs.at(i)));
      std::set<std::string> ka = occurrence_keys(a, occ.id), kb;
      for (const auto& k : occurrence_keys(b, it->second))
        if (sensible.count(k)) kb.insert(k);
      if (ka != kb) run.violation(g.text() + "occurrence " + std::to_string(occ.id) + " SC sets differ");
    }
    return true;
  });
}

PropertyResult prop_embedding(const PropertyConfig& cfg, bool with_true) {
  Runner run(with_true ? "embedding" : "embedding (true excluded)", cfg);
  return run.run([&] {
    GenProgram g = generate_program(run.rng, GenOptions{GenMode::Embedding});
    Program p = load_program(g.embedded().text());
    EngineOptions o = run.opts(cfg.cap);
    o.first_only = true;
    o.with_true = with_true;
    Inference a = ginfer(p, o);
    ++run.r.nontrivial;
    if (!a.ok) run.violation(g.embedded().text() + "verdict " + a.verdict);
    return true;
  });
}

PropertyResult prop_static_gradual_guarantee(const PropertyConfig& cfg) {
  Runner run("static gradual guarantee", cfg);
  return run.run([&] {
    GenOptions go{GenMode::Gradual};
    go.max_holes = 1;
    GenProgram g = generate_program(run.rng, go);
    auto slots = g.precise_slots();
    if (slots.empty()) return false;
    EngineOptions o = run.opts(cfg.cap);
    o.first_only = true;
    Inference before = ginfer(load_program(g.text()), o);
    GenProgram w = g;
    auto wslots = w.precise_slots();
    size_t pick = std::uniform_int_distribution<size_t>(0, wslots.size() - 1)(run.rng);
    wslots[pick]->hole = true;
    Inference after = ginfer(load_program(w.text()), o);
    if (!before.ok) return true;
    ++run.r.nontrivial;
    if (!after.ok) run.violation(g.text() + "weakened to\n" + w.text() + "verdict " + after.verdict);
    return true;
  });
}

namespace {

Solution random_subsolution(const Solution& a, std::mt19937& rng, double keep) {
  Solution out;
  std::bernoulli_distribution coin(keep);
  for (const auto& [k, qs] : a.sets) {
    auto& dst = out.sets[k];
    for (const auto& q : qs)
      if (coin(rng)) dst.push_back(q);
  }
  return out;
}

bool subset_of(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b) {
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b) found |= term_equal(x, y);
    if (!found) return false;
  }
  return true;
}

std::vector<Constraint> hole_free(const ConstraintSet& cs) {
  std::vector<Constraint> out;
  for (const auto& c : cs.constraints) out.push_back(erase_holes(c));
  return out;
}

}  // namespace

PropertyResult prop_weaken_monotone(const PropertyConfig& cfg) {
  Runner run("weaken monotonicity", cfg);
  SmtSession smt(cfg.engine.smt, default_measures(), cfg.engine.cache);
  return run.run([&] {
    GenProgram g = generate_program(run.rng, GenOptions{GenMode::Gradual});
    Program p = load_program(g.text());
    ConstraintSet cs = generate(p);
    auto cons = hole_free(cs);
    std::vector<const Constraint*> headed;
    for (const auto& c : cons)
      if (c.kind == ConstraintKind::Sub && c.head_kvar()) headed.push_back(&c);
    if (headed.empty()) return false;
    const Constraint& c = *headed[std::uniform_int_distribution<size_t>(0, headed.size() - 1)(run.rng)];
    Solution a0 = initial_solution(cs.kvars, engine_templates(p, cfg.engine), p.measures);
    Solution big = random_subsolution(a0, run.rng, 0.8);
    Solution small = random_subsolution(big, run.rng, 0.6);
    int k = *c.head_kvar();
    auto w_small = weaken(c, small, smt);
    auto w_big = weaken(c, big, smt);
    if (!w_small || !w_big) {
      run.violation(g.text() + "weaken gave nothing for a κ-headed constraint");
      return true;
    }
    if (!big.sets[k].empty()) ++run.r.nontrivial;
    if (!subset_of(w_big->sets[k], big.sets[k]) || !subset_of(w_small->sets[k], small.sets[k]))
      run.violation(g.text() + "weaken added qualifiers to k" + std::to_string(k));
    if (!subset_of(w_small->sets[k], w_big->sets[k]))
      run.violation(g.text() + "weaken not monotone at k" + std::to_string(k) + ": " + show(c));
    for (const auto& [other, qs] : big.sets)
      if (other != k && !(w_big->sets[other].size() == qs.size()))
        run.violation(g.text() + "weaken touched k" + std::to_string(other));
    return true;
  });
}

PropertyResult prop_solve_termination(const PropertyConfig& cfg) {
  Runner run("solve termination", cfg);
  SmtSession smt(cfg.engine.smt, default_measures(), cfg.engine.cache);
  return run.run([&] {
    GenProgram g = generate_program(run.rng, GenOptions{GenMode::Gradual});
    Program p = load_program(g.text());
    ConstraintSet cs = generate(p);
    auto cons = hole_free(cs);
    Solution a0 = initial_solution(cs.kvars, engine_templates(p, cfg.engine), p.measures);
    long total_q = 0;
    for (const auto& [k, qs] : a0.sets) total_q += static_cast<long>(qs.size());
    SolveStats st;
    auto sol = solve(a0, cons, smt, &st);
    if (st.iterations > 0) ++run.r.nontrivial;
    long bound_checks = (2 * total_q + 2) * static_cast<long>(cons.size());
    if (st.iterations > total_q || st.removed > total_q || st.checks > bound_checks)
      run.violation(g.text() + "iterations " + std::to_string(st.iterations) + ", removed " + std::to_string(st.removed) +
                    ", checks " + std::to_string(st.checks) + " with sum |Q| = " + std::to_string(total_q));
    if (sol)
      for (const auto& c : cons)
        if (!satisfied(c, *sol, smt)) run.violation(g.text() + "returned solution violates " + show(c));
    return true;
  });
}

namespace {

// Random VC over x, y, z : Int, b : Bool, xs : List.
struct VcGen {
  std::mt19937& rng;
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  TermPtr int_term() {
    switch (pick(0, 5)) {
      case 0: return int_const(pick(-2, 2));
      case 1: return measure("len", var("xs"));
      case 2: return arith(pick(0, 1) ? ArithOp::Add : ArithOp::Sub, var(ivar()), int_const(pick(0, 2)));
      case 3: return arith(ArithOp::Sub, var(ivar()), var(ivar()));
      default: return var(ivar());
    }
  }
  std::string ivar() {
    static const char* vs[] = {"x", "y", "z"};
    return vs[pick(0, 2)];
  }
  TermPtr atom() {
    if (pick(0, 7) == 0) return pick(0, 1) ? var("b") : neg(var("b"));
    static const CmpOp ops[] = {CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne};
    return cmp(ops[pick(0, 5)], int_term(), int_term());
  }
  VC make() {
    VC vc;
    vc.sorts = {{"x", Sort::Int}, {"y", Sort::Int}, {"z", Sort::Int}, {"b", Sort::Bool}, {"xs", Sort::List}};
    int n = pick(0, 3);
    for (int i = 0; i < n; ++i) vc.hypotheses.push_back(atom());
    vc.antecedent = pick(0, 2) ? atom() : mk_true();
    switch (pick(0, 3)) {
      case 0:  // often valid: restate a hypothesis, possibly weakened
        if (!vc.hypotheses.empty()) {
          vc.consequent = disj({vc.hypotheses[0], atom()});
          break;
        }
        [[fallthrough]];
      case 1: vc.consequent = conj(atom(), atom()); break;
      default: vc.consequent = atom();
    }
    return vc;
  }
};

}  // namespace

PropertyResult prop_vc_brute_force(const PropertyConfig& cfg) {
  Runner run("VC validity vs brute force", cfg);
  SmtSession smt(cfg.engine.smt, default_measures(), cfg.engine.cache);
  VcGen gen{run.rng};
  return run.run([&] {
    VC vc = gen.make();
    auto b = brute_valid(vc);
    Validity v = smt.check_valid(vc);
    if (b.counterexample) {
      ++run.r.nontrivial;
      if (v != Validity::Invalid)
        run.violation(show(vc) + ": solver says valid, countermodel " + b.counterexample->show());
    }
    return true;
  });
}

}  // namespace gliq::testing
