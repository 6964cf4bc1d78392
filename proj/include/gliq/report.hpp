#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliq/gradual.hpp"

namespace gliq {

inline constexpr int kReportSchema = 1;

// Everything the explorer and the CLI need, with predicates as surface strings.
struct ReportDocument {
  struct Candidates {
    size_t all = 0, sensible = 0, local = 0, specific = 0;
    std::vector<std::string> list;  // the specific stage, enumeration order
  };
  struct Source {
    int id = 0;
    Span span;
    std::string binder, sort, static_part, owner;
    std::vector<int> occurrences;
    Candidates candidates;
    std::vector<std::string> static_solutions;
  };
  struct Occurrence {
    int id = 0, source = 0, constraint = 0, partition = 0;
    Span span;
    std::string def;
    std::vector<size_t> sc_indices;  // into the source's candidate list
    std::vector<std::string> scs;
    std::string emptied;  // "" when SCs exist
  };
  struct Sc {
    size_t index = 0;
    std::vector<std::string> choice;  // per partition occurrence
  };
  struct Part {
    int id = 0;
    std::vector<int> constraints, kvars, occurrences;
    std::vector<Sc> scs;
  };
  struct Error {
    int constraint = 0;
    Span span;
    std::string def, vc, message;
  };
  struct MetricsRow {
    int nd = 0, grad = 0, occs = 0;
    size_t cands = 0, sens = 0, local = 0, precise = 0;
    int parts = 0, grad_parts = 0;
    long instan = 0;
    std::vector<size_t> sols;
    size_t statics = 0;
    double time = 0;  // seconds, two decimals
  };

  int schema = kReportSchema;
  std::string file, program;
  std::string verdict;
  bool ok = false;
  nlohmann::json options;
  std::vector<Source> sources;
  std::vector<Occurrence> occurrences;
  std::vector<Part> partitions;
  std::vector<std::map<std::string, std::string>> types;
  std::vector<Error> errors;
  std::vector<std::string> warnings;
  MetricsRow metrics;
  nlohmann::json smt;
};

nlohmann::json options_json(const EngineOptions& opts);
ReportDocument build_report(const Inference& inf, const EngineOptions& opts);

nlohmann::json to_json(const ReportDocument& doc);
// Throws std::invalid_argument on schema mismatch or malformed input.
ReportDocument report_from_json(const nlohmann::json& j);
std::string serialize(const ReportDocument& doc);  // pretty, stable key order

// Recomputes the metrics row from the per-source/per-occurrence data.
// Returns the names of the columns that disagree.
std::vector<std::string> check_metrics(const ReportDocument& doc);

std::string render_summary(const ReportDocument& doc);
// Why an occurrence has no safe concretization, for the stage that emptied it.
std::string explain_stage(const std::string& stage);
// Self-contained page. `live` enables recheck against the serving process.
std::string export_html(const ReportDocument& doc, bool live = false);

nlohmann::json span_json(const Span& s);
nlohmann::json error_json(const TypeError& e);

// {"sources": {"0": "pred"}, "occurrences": {"2": "pred"}}. Throws
// SourceError for unparsable predicates, std::invalid_argument otherwise.
struct RecheckRequest {
  std::map<int, TermPtr> by_source;
  std::map<int, TermPtr> by_occurrence;
};
RecheckRequest parse_recheck(const nlohmann::json& j, const Inference& inf);
nlohmann::json recheck_json(const Recheck& r);

}  // namespace gliq
