// gliq command line: check a program, or serve its report to the explorer.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gliq/frontend.hpp"
#include "gliq/gradual.hpp"
#include "gliq/report.hpp"
#include "gliq/service.hpp"

namespace {

enum Exit { kOk = 0, kTypeFailure = 1, kUsage = 2 };

struct Common {
  std::string file;
  gliq::EngineOptions opts;
  bool no_partition = false, no_sensibility = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("FILE", c.file, "program to check")->required();
  cmd->add_option("--depth,-d", c.opts.depth, "max qualifiers per candidate conjunction")->check(CLI::Range(1, 4));
  cmd->add_option("--smt-cmd", c.opts.smt.command, "solver command line (reads SMT-LIB on stdin)");
  cmd->add_option("--timeout-ms", c.opts.smt.timeout_ms, "per-query solver timeout")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-partition", c.no_partition, "enumerate one global product");
  cmd->add_flag("--no-sensibility", c.no_sensibility, "keep nonsensical candidates");
  cmd->add_flag("--templates-minimal", c.opts.templates_minimal, "compare-only qualifier templates");
  cmd->add_flag("--with-true", c.opts.with_true, "also try the empty conjunction `true` for each hole");
  cmd->add_option("--drop-template", c.opts.drop_templates, "leave out a template, written as printed (e.g. \"v == len * + 1\")");
  cmd->add_option("--jobs,-j", c.opts.jobs, "parallel solver sessions")->check(CLI::Range(1, 64));
  cmd->add_option("--max-types", c.opts.max_types, "inferred type combinations to keep");
}

void finish(Common& c) {
  c.opts.partition = !c.no_partition;
  c.opts.sensibility = !c.no_sensibility;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

void report_source_error(const std::string& file, const gliq::SourceError& e) {
  std::cerr << file;
  if (e.span().valid()) std::cerr << ":" << e.span().str();
  std::cerr << ": error: " << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gliq: gradual liquid type inference"};
  app.require_subcommand(1);

  Common check_args;
  std::string json_path, html_path;
  auto* check = app.add_subcommand("check", "infer gradual refinements and report safe concretizations");
  add_common(check, check_args);
  check->add_option("--json", json_path, "write the JSON report here");
  check->add_option("--html", html_path, "write a self-contained HTML explorer here");

  Common serve_args;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "run inference and serve the explorer API");
  add_common(serve, serve_args);
  serve->add_option("--port,-p", port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "address to bind");

  std::string summary_path;
  auto* show = app.add_subcommand("show", "print the summary of a saved JSON report");
  show->add_option("REPORT", summary_path, "report written by check --json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (*show) {
    try {
      std::ifstream in(summary_path);
      auto doc = gliq::report_from_json(nlohmann::json::parse(in));
      std::cout << gliq::render_summary(doc);
      return doc.ok ? kOk : kTypeFailure;
    } catch (const std::exception& e) {
      std::cerr << "gliq: " << summary_path << ": " << e.what() << "\n";
      return kUsage;
    }
  }

  Common& c = *check ? check_args : serve_args;
  finish(c);
  gliq::Program program;
  try {
    program = gliq::load_file(c.file);
  } catch (const gliq::SourceError& e) {
    report_source_error(c.file, e);
    return kTypeFailure;
  } catch (const std::exception& e) {
    std::cerr << "gliq: " << e.what() << "\n";
    return kUsage;
  }

  if (*serve) {
    gliq::Service service(std::move(program), c.opts);
    std::cerr << "gliq: serving " << c.file << " on http://" << host << ":" << port << "/\n";
    if (!service.listen(host, port)) {
      std::cerr << "gliq: cannot listen on " << host << ":" << port << "\n";
      return kUsage;
    }
    return kOk;
  }

  gliq::Inference inf;
  try {
    inf = gliq::ginfer(program, c.opts);
  } catch (const gliq::SourceError& e) {
    report_source_error(c.file, e);
    return kTypeFailure;
  } catch (const gliq::SmtError& e) {
    std::cerr << "gliq: SMT solver unavailable or failing (" << c.opts.smt.command << "): " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "gliq: " << e.what() << "\n";
    return kUsage;
  }

  auto doc = gliq::build_report(inf, c.opts);
  std::cout << gliq::render_summary(doc);
  if (!json_path.empty() && !write_file(json_path, gliq::serialize(doc))) {
    std::cerr << "gliq: cannot write " << json_path << "\n";
    return kUsage;
  }
  if (!html_path.empty() && !write_file(html_path, gliq::export_html(doc))) {
    std::cerr << "gliq: cannot write " << html_path << "\n";
    return kUsage;
  }
  return inf.ok ? kOk : kTypeFailure;
}
