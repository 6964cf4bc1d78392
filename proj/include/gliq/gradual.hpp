#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gliq/constraint_gen.hpp"
#include "gliq/liquid_solver.hpp"
#include "gliq/program.hpp"
#include "gliq/smt.hpp"
#include "gliq/templates.hpp"

namespace gliq {

struct EngineOptions {
  int depth = 1;
  bool partition = true;
  bool sensibility = true;
  bool templates_minimal = false;
  // Candidates include `true`, i.e. the whole powerset of the qualifiers.
  bool with_true = false;
  // Templates to leave out, by their printed form (Template::show).
  std::vector<std::string> drop_templates;
  size_t max_types = 50;
  int jobs = 1;
  // Stop each partition at its first safe concretization (enough to decide
  // whether the result is empty). The cap then bounds the search instead.
  bool first_only = false;
  // Refuse to enumerate more concretizations than this in one partition.
  size_t enumeration_cap = 2'000'000;
  SmtOptions smt;
  std::shared_ptr<SmtCache> cache;  // created when null
};

// One (constraint, gradual source) pair.
struct Occurrence {
  int id = 0;
  int source = 0;
  int constraint = 0;
  int partition = -1;
  Span span;  // blame span of the constraint
  std::string def;
};

struct Partition {
  int id = 0;
  std::vector<int> constraints;
  std::vector<int> kvars;
  std::vector<int> occurrences;
  bool gradual() const { return !occurrences.empty(); }
};

struct SafeConcretization {
  int partition = 0;
  size_t index = 0;            // position in the partition's enumeration
  std::vector<size_t> choice;  // per partition occurrence, index into the source's candidates
  Solution solution;
};

// Why an occurrence has no safe concretization: the first empty stage.
enum class Stage { All, Sensible, Local, Specific, Valid, None };
std::string_view stage_name(Stage s);

struct OccurrenceResult {
  std::vector<size_t> scs;  // distinct candidate indices, ascending
  Stage emptied = Stage::None;
};

struct TypeError {
  int constraint = 0;
  Span span;
  std::string def;
  std::string vc;
  std::string message;
};

struct Metrics {
  int depth = 1;
  int grad = 0;
  int occs = 0;
  size_t cands = 0, sens = 0, local = 0, precise = 0;
  int parts = 0;
  int gradual_parts = 0;
  long instan = 0;
  std::vector<size_t> sols;  // per occurrence
  size_t statics = 0;
  double time = 0;
};

struct Inference {
  bool ok = false;
  // "ok", "type-error" (a hole-free part fails) or "no-concretization".
  std::string verdict;
  Program program;
  ConstraintSet cs;
  std::vector<bool> relevant;  // per constraint
  std::vector<int> dropped;    // trivially valid constraints
  std::vector<Occurrence> occurrences;
  std::vector<Partition> partitions;
  std::map<int, CandidateSet> candidates;  // per source
  std::map<int, std::vector<SafeConcretization>> scs;  // per partition
  std::map<int, Solution> static_parts;     // hole-free partitions, solved once
  std::vector<OccurrenceResult> per_occurrence;
  std::map<int, std::vector<size_t>> static_solutions;  // per source, candidate indices
  std::vector<std::map<std::string, RTypePtr>> types;   // inferred, capped
  std::vector<TypeError> errors;
  std::vector<std::string> warnings;
  Metrics metrics;
  SmtStats smt;
};

using ScCallback = std::function<void(const Inference&, const SafeConcretization&)>;

// Whole pipeline: generate, slice, partition, enumerate, solve.
Inference ginfer(const Program& p, const EngineOptions& opts, const ScCallback& on_sc = nullptr);

// Reference implementation: one global product, no sensibility filter.
// Throws std::runtime_error when the product exceeds opts.enumeration_cap.
Inference oracle_ginfer(const Program& p, EngineOptions opts);

// Plain liquid inference for hole-free programs.
std::optional<std::map<std::string, RTypePtr>> infer(const Program& p, const EngineOptions& opts);

// The qualifier templates the engine uses for this program.
std::vector<Template> engine_templates(const Program& p, const EngineOptions& opts);

// Holes of sources in `by_source` become `static ∧ q`; the rest stay.
Constraint concretize(const Constraint& c, const std::map<int, TermPtr>& by_source);
Constraint erase_holes(const Constraint& c);
std::vector<int> hole_sources(const Constraint& c);

// Re-runs the hole-free checker with user choices. Keys of `by_occurrence`
// are occurrence ids of `inf`; every other hole takes `by_source`. Holes
// outside any occurrence fall back to their static part; an occurrence with
// no choice at all is std::invalid_argument.
struct Recheck {
  bool ok = false;
  std::vector<TypeError> errors;
};
Recheck recheck(const Inference& inf, const std::map<int, TermPtr>& by_source,
                const std::map<int, TermPtr>& by_occurrence, const EngineOptions& opts);

// Concretization inclusion between gradual types of the same shape: a is at least as precise as b.
bool type_precision(const RTypePtr& a, const RTypePtr& b, SmtSession& smt);

}  // namespace gliq
