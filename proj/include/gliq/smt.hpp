#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gliq/term.hpp"
#include "gliq/types.hpp"

namespace gliq {

enum class Validity { Valid, Invalid, Unknown };

// hypotheses ⇒ antecedent ⇒ consequent; κ-free and hole-free.
struct VC {
  std::vector<TermPtr> hypotheses;
  TermPtr antecedent = mk_true();
  TermPtr consequent = mk_true();
  SortEnv sorts;
};

// Throws std::logic_error on κ or holes.
VC embed_sub(const Constraint& c);
std::string show(const VC& vc, const std::string& binder = "v");

// Sort check of a base refinement (static part) under env, ν:base.
bool check_wf(const Env& env, const RBase& t, const MeasureTable& measures);

class SmtError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SmtOptions {
  std::string command = "z3 -in";
  int timeout_ms = 2000;
};

struct SmtStats {
  long queries = 0;
  long cache_hits = 0;
  long unknowns = 0;
  long restarts = 0;
};

// Shared across sessions; keyed on canonical query text.
class SmtCache {
 public:
  bool lookup(const std::string& key, int& out);
  void store(const std::string& key, int value);
  size_t size();

 private:
  std::mutex mu_;
  std::unordered_map<std::string, int> map_;
};

class SolverProcess;

// One solver process per logic; one in-flight query. Not thread-safe:
// give each worker its own session and share the cache.
class SmtSession {
 public:
  SmtSession(SmtOptions opts, MeasureTable measures, std::shared_ptr<SmtCache> cache = nullptr);
  ~SmtSession();
  SmtSession(const SmtSession&) = delete;
  SmtSession& operator=(const SmtSession&) = delete;

  Validity check_valid(const VC& vc);
  bool valid(const VC& vc) { return check_valid(vc) == Validity::Valid; }

  // ∀ program vars ∃ν (and measure applications). p may mention ν.
  bool is_local(const TermPtr& p, Sort binder, const SortEnv& scope);
  // p1 ⇒ p2 (both over ν:binder and scope).
  bool is_specific(const TermPtr& p1, const TermPtr& p2, Sort binder, const SortEnv& scope);
  // false only when the solver proves unsat.
  bool maybe_satisfiable(const TermPtr& p, const SortEnv& sorts);

  const SmtStats& stats() const { return stats_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const SmtOptions& options() const { return opts_; }
  const MeasureTable& measures() const { return measures_; }
  std::shared_ptr<SmtCache> cache() const { return cache_; }

 private:
  enum class Answer { Sat, Unsat, Unknown };
  Answer run(bool quantified, const std::string& body, const std::string& key);

  SmtOptions opts_;
  MeasureTable measures_;
  std::shared_ptr<SmtCache> cache_;
  std::unique_ptr<SolverProcess> qf_, quant_;
  SmtStats stats_;
  std::vector<std::string> warnings_;
};

// SMT-LIB rendering of a κ-free term (exposed for tests and VC display).
std::string to_smtlib(const TermPtr& t);
std::string smt_name(const std::string& var);

}  // namespace gliq
