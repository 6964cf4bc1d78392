#include "gliq/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "gliq/frontend.hpp"

namespace gliq {

using nlohmann::json;

json span_json(const Span& s) { return json{{"line", s.line}, {"col", s.col}, {"end_line", s.end_line}, {"end_col", s.end_col}}; }

namespace {

Span span_from(const json& j) {
  return Span{j.at("line").get<int>(), j.at("col").get<int>(), j.at("end_line").get<int>(), j.at("end_col").get<int>()};
}

double two_decimals(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

json error_json(const TypeError& e) {
  return json{{"constraint", e.constraint}, {"span", span_json(e.span)}, {"def", e.def}, {"vc", e.vc}, {"message", e.message}};
}

json options_json(const EngineOptions& opts) {
  return json{{"depth", opts.depth},
              {"partition", opts.partition},
              {"sensibility", opts.sensibility},
              {"with_true", opts.with_true},
              {"templates", opts.templates_minimal ? "minimal" : "builtin"},
              {"drop_templates", opts.drop_templates},
              {"max_types", opts.max_types}};
}

ReportDocument build_report(const Inference& inf, const EngineOptions& opts) {
  ReportDocument doc;
  const Program& p = inf.program;
  doc.file = p.file;
  doc.program = p.text;
  doc.verdict = inf.verdict;
  doc.ok = inf.ok;
  doc.options = options_json(opts);

  for (const auto& s : p.sources) {
    ReportDocument::Source rs;
    rs.id = s.id;
    rs.span = s.span;
    rs.binder = s.binder;
    rs.sort = std::string(sort_name(s.sort));
    rs.static_part = show(s.static_part, s.binder);
    rs.owner = s.owner;
    const auto& cs = inf.candidates.at(s.id);
    rs.candidates = {cs.all.size(), cs.sensible.size(), cs.local.size(), cs.specific.size(), {}};
    for (size_t i = 0; i < cs.size(); ++i) rs.candidates.list.push_back(show(cs.at(i), s.binder));
    for (size_t q : inf.static_solutions.at(s.id)) rs.static_solutions.push_back(rs.candidates.list[q]);
    doc.sources.push_back(std::move(rs));
  }
  for (const auto& o : inf.occurrences) {
    ReportDocument::Occurrence ro;
    ro.id = o.id;
    ro.source = o.source;
    ro.constraint = o.constraint;
    ro.partition = o.partition;
    ro.span = o.span;
    ro.def = o.def;
    const auto& r = inf.per_occurrence[o.id];
    ro.sc_indices = r.scs;
    for (size_t q : r.scs) ro.scs.push_back(doc.sources[o.source].candidates.list[q]);
    if (r.emptied != Stage::None) ro.emptied = std::string(stage_name(r.emptied));
    doc.sources[o.source].occurrences.push_back(o.id);
    doc.occurrences.push_back(std::move(ro));
  }
  for (const auto& part : inf.partitions) {
    ReportDocument::Part rp;
    rp.id = part.id;
    rp.constraints = part.constraints;
    rp.kvars = part.kvars;
    rp.occurrences = part.occurrences;
    auto it = inf.scs.find(part.id);
    if (it != inf.scs.end())
      for (const auto& sc : it->second) {
        ReportDocument::Sc rsc;
        rsc.index = sc.index;
        for (size_t j = 0; j < sc.choice.size(); ++j) {
          int src = inf.occurrences[part.occurrences[j]].source;
          rsc.choice.push_back(doc.sources[src].candidates.list[sc.choice[j]]);
        }
        rp.scs.push_back(std::move(rsc));
      }
    doc.partitions.push_back(std::move(rp));
  }
  for (const auto& t : inf.types) {
    std::map<std::string, std::string> row;
    for (const auto& [n, ty] : t) row[n] = show(ty);
    doc.types.push_back(std::move(row));
  }
  for (const auto& e : inf.errors)
    doc.errors.push_back({e.constraint, e.span, e.def, e.vc, e.message});
  doc.warnings = inf.warnings;

  const auto& m = inf.metrics;
  doc.metrics = {m.depth, m.grad, m.occs, m.cands, m.sens, m.local, m.precise, m.parts, m.gradual_parts,
                 m.instan, m.sols, m.statics, two_decimals(m.time)};
  doc.smt = json{{"queries", inf.smt.queries}, {"cache_hits", inf.smt.cache_hits}, {"unknowns", inf.smt.unknowns},
                 {"restarts", inf.smt.restarts}};
  return doc;
}

json to_json(const ReportDocument& d) {
  json j;
  j["schema"] = d.schema;
  j["file"] = d.file;
  j["program"] = d.program;
  j["verdict"] = d.verdict;
  j["ok"] = d.ok;
  j["options"] = d.options;
  j["sources"] = json::array();
  for (const auto& s : d.sources) {
    j["sources"].push_back(json{{"id", s.id},
                                {"span", span_json(s.span)},
                                {"binder", s.binder},
                                {"sort", s.sort},
                                {"static", s.static_part},
                                {"owner", s.owner},
                                {"occurrences", s.occurrences},
                                {"candidates",
                                 {{"all", s.candidates.all},
                                  {"sensible", s.candidates.sensible},
                                  {"local", s.candidates.local},
                                  {"specific", s.candidates.specific},
                                  {"list", s.candidates.list}}},
                                {"static_solutions", s.static_solutions}});
  }
  j["occurrences"] = json::array();
  for (const auto& o : d.occurrences) {
    j["occurrences"].push_back(json{{"id", o.id},
                                    {"source", o.source},
                                    {"constraint", o.constraint},
                                    {"partition", o.partition},
                                    {"span", span_json(o.span)},
                                    {"def", o.def},
                                    {"sc_indices", o.sc_indices},
                                    {"scs", o.scs},
                                    {"emptied", o.emptied.empty() ? json(nullptr) : json(o.emptied)}});
  }
  j["partitions"] = json::array();
  for (const auto& p : d.partitions) {
    json scs = json::array();
    for (const auto& sc : p.scs) scs.push_back(json{{"index", sc.index}, {"choice", sc.choice}});
    j["partitions"].push_back(json{{"id", p.id},
                                   {"constraints", p.constraints},
                                   {"kvars", p.kvars},
                                   {"occurrences", p.occurrences},
                                   {"gradual", !p.occurrences.empty()},
                                   {"scs", scs}});
  }
  j["types"] = d.types;
  j["errors"] = json::array();
  for (const auto& e : d.errors)
    j["errors"].push_back(json{{"constraint", e.constraint}, {"span", span_json(e.span)}, {"def", e.def}, {"vc", e.vc},
                               {"message", e.message}});
  j["warnings"] = d.warnings;
  const auto& m = d.metrics;
  j["metrics"] = json{{"ND", m.nd},          {"GRAD", m.grad},     {"OCCS", m.occs},
                      {"CANDS", m.cands},    {"SENS", m.sens},     {"LOCAL", m.local},
                      {"PRECISE", m.precise}, {"PARTS", m.parts},  {"GRAD_PARTS", m.grad_parts},
                      {"INSTAN", m.instan},  {"SOLS", m.sols},     {"STATIC", m.statics},
                      {"TIME", m.time}};
  j["smt"] = d.smt;
  return j;
}

ReportDocument report_from_json(const json& j) {
  try {
    ReportDocument d;
    d.schema = j.at("schema").get<int>();
    if (d.schema != kReportSchema)
      throw std::invalid_argument("report schema " + std::to_string(d.schema) + " is not supported (expected " +
                                  std::to_string(kReportSchema) + ")");
    d.file = j.at("file").get<std::string>();
    d.program = j.at("program").get<std::string>();
    d.verdict = j.at("verdict").get<std::string>();
    d.ok = j.at("ok").get<bool>();
    d.options = j.at("options");
    for (const auto& s : j.at("sources")) {
      ReportDocument::Source rs;
      rs.id = s.at("id");
      rs.span = span_from(s.at("span"));
      rs.binder = s.at("binder");
      rs.sort = s.at("sort");
      rs.static_part = s.at("static");
      rs.owner = s.at("owner");
      rs.occurrences = s.at("occurrences").get<std::vector<int>>();
      const auto& c = s.at("candidates");
      rs.candidates = {c.at("all"), c.at("sensible"), c.at("local"), c.at("specific"),
                       c.at("list").get<std::vector<std::string>>()};
      rs.static_solutions = s.at("static_solutions").get<std::vector<std::string>>();
      d.sources.push_back(std::move(rs));
    }
    for (const auto& o : j.at("occurrences")) {
      ReportDocument::Occurrence ro;
      ro.id = o.at("id");
      ro.source = o.at("source");
      ro.constraint = o.at("constraint");
      ro.partition = o.at("partition");
      ro.span = span_from(o.at("span"));
      ro.def = o.at("def");
      ro.sc_indices = o.at("sc_indices").get<std::vector<size_t>>();
      ro.scs = o.at("scs").get<std::vector<std::string>>();
      if (!o.at("emptied").is_null()) ro.emptied = o.at("emptied");
      d.occurrences.push_back(std::move(ro));
    }
    for (const auto& p : j.at("partitions")) {
      ReportDocument::Part rp;
      rp.id = p.at("id");
      rp.constraints = p.at("constraints").get<std::vector<int>>();
      rp.kvars = p.at("kvars").get<std::vector<int>>();
      rp.occurrences = p.at("occurrences").get<std::vector<int>>();
      for (const auto& sc : p.at("scs")) rp.scs.push_back({sc.at("index"), sc.at("choice").get<std::vector<std::string>>()});
      d.partitions.push_back(std::move(rp));
    }
    d.types = j.at("types").get<std::vector<std::map<std::string, std::string>>>();
    for (const auto& e : j.at("errors"))
      d.errors.push_back({e.at("constraint"), span_from(e.at("span")), e.at("def"), e.at("vc"), e.at("message")});
    d.warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto& m = j.at("metrics");
    d.metrics = {m.at("ND"),     m.at("GRAD"),       m.at("OCCS"),   m.at("CANDS"),
                 m.at("SENS"),   m.at("LOCAL"),      m.at("PRECISE"), m.at("PARTS"),
                 m.at("GRAD_PARTS"), m.at("INSTAN"), m.at("SOLS").get<std::vector<size_t>>(),
                 m.at("STATIC"), m.at("TIME")};
    d.smt = j.at("smt");
    return d;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

std::string serialize(const ReportDocument& doc) { return to_json(doc).dump(2) + "\n"; }

std::vector<std::string> check_metrics(const ReportDocument& d) {
  std::vector<std::string> bad;
  const auto& m = d.metrics;
  size_t cands = 0, sens = 0, local = 0, precise = 0, statics = 0;
  for (const auto& s : d.sources) {
    cands += s.candidates.all;
    sens += s.candidates.sensible;
    local += s.candidates.local;
    precise += s.candidates.specific;
    statics += s.static_solutions.size();
    if (s.candidates.list.size() != s.candidates.specific) bad.push_back("candidate list of ?" + std::to_string(s.id));
  }
  std::vector<size_t> sols;
  for (const auto& o : d.occurrences) sols.push_back(o.scs.size());
  int grad_parts = 0;
  for (const auto& p : d.partitions) grad_parts += p.occurrences.empty() ? 0 : 1;
  long instan = 0;
  for (const auto& p : d.partitions) {
    if (p.occurrences.empty()) continue;
    long prod = 1;
    for (int o : p.occurrences) prod *= static_cast<long>(d.sources[d.occurrences[o].source].candidates.specific);
    instan += prod;
  }
  if (m.grad != static_cast<int>(d.sources.size())) bad.push_back("GRAD");
  if (m.occs != static_cast<int>(d.occurrences.size())) bad.push_back("OCCS");
  if (m.cands != cands) bad.push_back("CANDS");
  if (m.sens != sens) bad.push_back("SENS");
  if (m.local != local) bad.push_back("LOCAL");
  if (m.precise != precise) bad.push_back("PRECISE");
  if (m.parts != static_cast<int>(d.partitions.size())) bad.push_back("PARTS");
  if (m.grad_parts != grad_parts) bad.push_back("GRAD_PARTS");
  if (m.instan != instan) bad.push_back("INSTAN");
  if (m.sols != sols) bad.push_back("SOLS");
  if (m.statics != statics) bad.push_back("STATIC");
  return bad;
}

std::string explain_stage(const std::string& stage) {
  if (stage == "all") return "no candidate refinements could be formed from the qualifiers in scope";
  if (stage == "sensible") return "every candidate was rejected as nonsensical";
  if (stage == "local") return "no candidate is satisfiable together with the static part";
  if (stage == "specific") return "no candidate is at least as specific as the static part";
  if (stage == "valid") return "no candidate makes the constraints at this occurrence valid";
  return stage;
}

std::string render_summary(const ReportDocument& d) {
  std::ostringstream os;
  if (d.verdict == "ok") {
    os << d.file << ": " << (d.sources.empty() ? "well-typed" : "gradually well-typed") << "\n";
  } else if (d.verdict == "type-error") {
    os << d.file << ": type error\n";
  } else {
    os << d.file << ": no safe concretization\n";
  }
  for (const auto& e : d.errors) os << "  " << d.file << ":" << e.span.str() << ": in " << e.def << ": " << e.message << "\n";
  for (const auto& s : d.sources) {
    os << "? #" << s.id << " at " << s.span.str() << " in " << s.owner << " ({" << s.binder << ":" << s.sort << " | "
       << (s.static_part == "true" ? "?" : s.static_part + " && ?") << "}): " << s.occurrences.size() << " occurrence"
       << (s.occurrences.size() == 1 ? "" : "s") << ", " << s.candidates.specific << " candidates\n";
    for (int oid : s.occurrences) {
      const auto& o = d.occurrences[oid];
      os << "  occurrence " << o.id << " at " << o.span.str() << " in " << o.def << ": ";
      if (o.scs.empty()) {
        os << "no safe concretization: " << explain_stage(o.emptied) << " (emptied at the " << o.emptied << " stage)\n";
        continue;
      }
      os << o.scs.size() << " safe concretization" << (o.scs.size() == 1 ? "" : "s") << ": ";
      for (size_t i = 0; i < o.scs.size(); ++i) os << (i ? " | " : "") << o.scs[i];
      os << "\n";
    }
    os << "  static solutions: ";
    if (s.static_solutions.empty()) os << "none";
    for (size_t i = 0; i < s.static_solutions.size(); ++i) os << (i ? " | " : "") << s.static_solutions[i];
    os << "\n";
  }
  if (!d.types.empty()) {
    os << "inferred types" << (d.types.size() > 1 ? " (first of " + std::to_string(d.types.size()) + ")" : "") << ":\n";
    for (const auto& [n, t] : d.types.front()) os << "  " << n << " :: " << t << "\n";
  }
  for (const auto& w : d.warnings) os << "warning: " << w << "\n";
  const auto& m = d.metrics;
  std::ostringstream sols;
  sols << '[';
  for (size_t i = 0; i < m.sols.size(); ++i) sols << (i ? "," : "") << m.sols[i];
  sols << ']';
  os << "ND GRAD OCCS CANDS SENS LOCAL PRECISE PARTS INSTAN SOLS STATIC TIME\n"
     << m.nd << ' ' << m.grad << ' ' << m.occs << ' ' << m.cands << ' ' << m.sens << ' ' << m.local << ' ' << m.precise
     << ' ' << m.grad_parts << '/' << m.parts << ' ' << m.instan << ' ' << sols.str() << ' ' << m.statics << ' '
     << std::fixed << std::setprecision(2) << m.time << "\n";
  return os.str();
}

RecheckRequest parse_recheck(const json& j, const Inference& inf) {
  if (!j.is_object()) throw std::invalid_argument("recheck request must be a JSON object");
  RecheckRequest out;
  auto read = [&](const char* field, auto binder_of, std::map<int, TermPtr>& into) {
    if (!j.contains(field)) return;
    const auto& m = j.at(field);
    if (!m.is_object()) throw std::invalid_argument(std::string("'") + field + "' must map ids to predicate strings");
    for (const auto& [key, val] : m.items()) {
      int id = 0;
      try {
        size_t used = 0;
        id = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw std::invalid_argument(std::string("'") + field + "' key '" + key + "' is not an id");
      }
      if (!val.is_string()) throw std::invalid_argument(std::string("'") + field + "' values must be strings");
      const GradualSource* src = binder_of(id);
      if (!src) throw std::invalid_argument(std::string("unknown ") + (field[0] == 's' ? "source" : "occurrence") + " " + key);
      TermPtr p;
      try {
        p = parse_predicate(val.template get<std::string>(), src->binder, inf.program.measures);
      } catch (const SourceError& e) {
        // positions inside the predicate mean nothing to the caller; blame the hole
        throw SourceError(src->span, e.what());
      }
      SortEnv sorts;
      for (const auto& [v, s] : inf.cs.source_scopes.at(src->id)) sorts[v] = s;
      sorts[kNu] = src->sort;
      for (const auto& v : free_vars(p))
        if (!sorts.count(v)) throw SourceError(src->span, "'" + v + "' is not in scope at this refinement");
      if (sort_of(p, sorts, inf.program.measures) != Sort::Bool)
        throw SourceError(src->span, "predicate is not well-sorted");
      into[id] = p;
    }
  };
  const auto& sources = inf.program.sources;
  read("sources", [&](int id) -> const GradualSource* {
    return id >= 0 && id < static_cast<int>(sources.size()) ? &sources[id] : nullptr;
  }, out.by_source);
  read("occurrences", [&](int id) -> const GradualSource* {
    if (id < 0 || id >= static_cast<int>(inf.occurrences.size())) return nullptr;
    return &sources[inf.occurrences[id].source];
  }, out.by_occurrence);
  return out;
}

json recheck_json(const Recheck& r) {
  json errs = json::array();
  for (const auto& e : r.errors) errs.push_back(error_json(e));
  return json{{"ok", r.ok}, {"errors", errs}};
}

}  // namespace gliq
