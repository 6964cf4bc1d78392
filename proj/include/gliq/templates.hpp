#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gliq/term.hpp"

namespace gliq {

class SmtSession;
struct Program;

enum class TemplateOrigin { Builtin, Spec, User };

// Pattern over ν and slot variables `*0`, `*1`, ... (see slot_var).
struct Template {
  TermPtr body;
  std::vector<Sort> slots;
  TemplateOrigin origin = TemplateOrigin::Builtin;
  Sort binder = Sort::Int;  // declared binder sort (user templates)

  std::string show() const;  // ⋆ rendered as `*`
};

std::string slot_var(size_t i);

using Scope = std::vector<std::pair<std::string, Sort>>;

// The fixed set: ν ⊙ ⋆, ν ⊙ 0, and the five length templates.
std::vector<Template> builtin_templates();
// The six ordering templates 0<ν, 0≤ν, ν<0, ν≤0, ν<⋆, ν≤⋆.
std::vector<Template> minimal_templates();
std::vector<Template> abstract_from_specs(const Program& p);
// Appends `extra` to `base`, dropping structural duplicates.
std::vector<Template> merge_templates(std::vector<Template> base, const std::vector<Template>& extra);

// Builds a template from an atom: ν stays, other variables become slots.
Template generalize(const TermPtr& atom, const SortEnv& sorts, TemplateOrigin origin);

// Fills slots with in-scope variables (and measure applications for Int
// slots); keeps well-sorted, deduplicated instances in template-then-scope order.
std::vector<TermPtr> instantiate(const std::vector<Template>& ts, const Scope& scope, Sort binder,
                                 const MeasureTable& measures);

// Rejects trivially true or contradictory candidates (v < v, v < x && x <= v, ...).
bool sensible(const TermPtr& q, const SortEnv& sorts, const MeasureTable& measures);

struct CandidateSet {
  std::vector<TermPtr> all;
  std::vector<size_t> sensible, local, specific;  // indices into `all`, nested

  size_t size() const { return specific.size(); }
  const TermPtr& at(size_t i) const { return all[specific[i]]; }
};

struct CandidateOptions {
  int depth = 1;
  bool sensibility = true;
  // Also enumerate the empty conjunction `true` (first, before any qualifier).
  bool with_true = false;
};

CandidateSet candidates(const std::vector<TermPtr>& qualifiers, Sort binder, const SortEnv& scope,
                        const TermPtr& static_part, const CandidateOptions& opts, SmtSession& smt);

// Canonical textual key for a conjunction (atoms canonicalized and sorted).
std::string conj_key(const TermPtr& p);

}  // namespace gliq
