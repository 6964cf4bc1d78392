#include "gliq/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>

namespace gliq {

// ---- embedding ------------------------------------------------------------

VC embed_sub(const Constraint& c) {
  if (c.kind != ConstraintKind::Sub) throw std::logic_error("embed_sub: not a Sub constraint");
  VC vc;
  auto concrete = [&](const GPred& p) {
    if (p.hole) throw std::logic_error("embed_sub: constraint still has a hole");
    if (!kvars_of(p.static_part).empty()) throw std::logic_error("embed_sub: constraint still has a liquid variable");
    return p.static_part;
  };
  for (const auto& b : c.env.bindings()) {
    if (!b.type->is_base()) continue;
    const auto& base = b.type->base();
    vc.sorts[b.name] = base.base;
    auto h = subst(concrete(base.refinement), Subst{{kNu, var(b.name)}});
    if (!is_true(h)) vc.hypotheses.push_back(h);
  }
  vc.sorts[kNu] = c.lhs.base;
  vc.antecedent = concrete(c.lhs.refinement);
  vc.consequent = concrete(c.rhs.refinement);
  return vc;
}

std::string show(const VC& vc, const std::string& binder) {
  std::ostringstream os;
  for (const auto& h : vc.hypotheses) os << show(h, binder) << " => ";
  os << show(vc.antecedent, binder) << " => " << show(vc.consequent, binder);
  return os.str();
}

bool check_wf(const Env& env, const RBase& t, const MeasureTable& measures) {
  SortEnv sorts = env.sorts();
  sorts[kNu] = t.base;
  auto s = sort_of(t.refinement.static_part, sorts, measures);
  return s == Sort::Bool;
}

// ---- SMT-LIB text ---------------------------------------------------------

std::string smt_name(const std::string& v) {
  if (v == kNu) return "nu";
  std::string out = "v_";
  for (unsigned char ch : v) {
    if (std::isalnum(ch) || ch == '_') {
      out += static_cast<char>(ch);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "!%02x", ch);
      out += buf;
    }
  }
  return out;
}

namespace {

std::string smt_sort(Sort s) {
  switch (s) {
    case Sort::Int: return "Int";
    case Sort::Bool: return "Bool";
    case Sort::List: return "List";
  }
  return "Int";
}

std::string nary(const char* op, const std::vector<TermPtr>& args) {
  std::string out = std::string("(") + op;
  for (const auto& a : args) out += " " + to_smtlib(a);
  return out + ")";
}

bool literal(const TermPtr& t) { return t->kind == TermKind::IntConst; }

}  // namespace

std::string to_smtlib(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::IntConst:
      return t->value < 0 ? "(- " + std::to_string(-t->value) + ")" : std::to_string(t->value);
    case TermKind::BoolConst:
      return t->value ? "true" : "false";
    case TermKind::Var:
      return smt_name(t->name);
    case TermKind::Measure:
      return "(m_" + t->name + " " + to_smtlib(t->args[0]) + ")";
    case TermKind::Arith:
      if (t->arith == ArithOp::Mul && !literal(t->args[0]) && !literal(t->args[1]))
        return nary("mul", t->args);
      return nary(t->arith == ArithOp::Add ? "+" : t->arith == ArithOp::Sub ? "-" : "*", t->args);
    case TermKind::Cmp:
      switch (t->cmp) {
        case CmpOp::Lt: return nary("<", t->args);
        case CmpOp::Le: return nary("<=", t->args);
        case CmpOp::Gt: return nary(">", t->args);
        case CmpOp::Ge: return nary(">=", t->args);
        case CmpOp::Eq: return nary("=", t->args);
        case CmpOp::Ne: return "(not " + nary("=", t->args) + ")";
      }
      break;
    case TermKind::Not: return nary("not", t->args);
    case TermKind::And: return nary("and", t->args);
    case TermKind::Or: return nary("or", t->args);
    case TermKind::Iff: return nary("=", t->args);
    case TermKind::Implies: return nary("=>", t->args);
    case TermKind::KVar:
      throw std::logic_error("to_smtlib: liquid variable k" + std::to_string(t->kvar));
  }
  return "true";
}

// ---- solver process -------------------------------------------------------

class SolverProcess {
 public:
  struct Died : std::runtime_error {
    using std::runtime_error::runtime_error;
  };
  struct TimedOut : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  SolverProcess(const std::string& cmd, const std::string& preamble) {
    static const bool sigpipe_ignored = [] {
      signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)sigpipe_ignored;
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw SmtError("pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw SmtError("fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], 0);
      dup2(from_child[1], 1);
      int devnull = open("/dev/null", O_WRONLY);
      if (devnull >= 0) dup2(devnull, 2);
      close(to_child[1]);
      close(from_child[0]);
      std::string sh = "exec " + cmd;
      execl("/bin/sh", "sh", "-c", sh.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
    fcntl(in_, F_SETFD, FD_CLOEXEC);
    fcntl(out_, F_SETFD, FD_CLOEXEC);
    send(preamble);
    // Round-trip once so a missing binary surfaces here.
    auto reply = exchange("", 10000);
    for (const auto& l : reply)
      if (l.rfind("(error", 0) == 0) throw SmtError("solver rejected preamble: " + l);
  }

  ~SolverProcess() {
    if (in_ >= 0) close(in_);
    if (out_ >= 0) close(out_);
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  // Sends text followed by an echo marker; returns output lines before the marker.
  std::vector<std::string> exchange(const std::string& text, int wait_ms) {
    send(text + "\n(echo \"gliq-done\")\n");
    std::vector<std::string> lines;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(wait_ms);
    while (true) {
      auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line == "gliq-done") return lines;
        if (!line.empty()) lines.push_back(line);
        continue;
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
      if (left <= 0) throw TimedOut("solver did not answer in time");
      pollfd pfd{out_, POLLIN, 0};
      int r = poll(&pfd, 1, static_cast<int>(left));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw Died("poll failed");
      }
      if (r == 0) continue;
      char chunk[4096];
      ssize_t n = read(out_, chunk, sizeof chunk);
      if (n <= 0) throw Died("solver exited");
      buf_.append(chunk, static_cast<size_t>(n));
    }
  }

 private:
  void send(const std::string& text) {
    size_t off = 0;
    while (off < text.size()) {
      ssize_t n = write(in_, text.data() + off, text.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Died("solver pipe closed");
      }
      off += static_cast<size_t>(n);
    }
  }

  pid_t pid_ = -1;
  int in_ = -1, out_ = -1;
  std::string buf_;
};

// ---- cache ----------------------------------------------------------------

bool SmtCache::lookup(const std::string& key, int& out) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return false;
  out = it->second;
  return true;
}

void SmtCache::store(const std::string& key, int value) {
  std::lock_guard<std::mutex> lock(mu_);
  map_[key] = value;
}

size_t SmtCache::size() {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

// ---- session --------------------------------------------------------------

SmtSession::SmtSession(SmtOptions opts, MeasureTable measures, std::shared_ptr<SmtCache> cache)
    : opts_(std::move(opts)), measures_(std::move(measures)), cache_(cache ? std::move(cache) : std::make_shared<SmtCache>()) {}

SmtSession::~SmtSession() = default;

namespace {

// Rename variables to c0, c1, ... by first occurrence so that VCs equal up to
// renaming share a cache entry.
struct Canon {
  Subst ren;
  SortEnv sorts;
  const SortEnv& src;
  explicit Canon(const SortEnv& s) : src(s) {}

  void visit(const TermPtr& t) {
    if (t->kind == TermKind::Var && !ren.count(t->name)) {
      std::string fresh = "c" + std::to_string(ren.size());
      auto it = src.find(t->name);
      if (it == src.end()) throw std::logic_error("unsorted variable " + t->name);
      sorts[fresh] = it->second;
      ren[t->name] = var(fresh);
    }
    for (const auto& a : t->args) visit(a);
  }
  TermPtr apply(const TermPtr& t) { return subst(t, ren); }
};

std::string declarations(const SortEnv& sorts) {
  std::string out;
  for (const auto& [n, s] : sorts) out += "(declare-const " + smt_name(n) + " " + smt_sort(s) + ")\n";
  return out;
}

std::string len_axioms(const std::vector<TermPtr>& terms) {
  std::vector<TermPtr> apps;
  for (const auto& t : terms)
    for (const auto& m : measure_apps(t))
      if (m->name == "len") {
        bool seen = false;
        for (const auto& a : apps) seen |= term_equal(a, m);
        if (!seen) apps.push_back(m);
      }
  std::string out;
  for (const auto& m : apps) out += "(assert (>= " + to_smtlib(m) + " 0))\n";
  return out;
}

std::string preamble(const SmtOptions& opts, const MeasureTable& measures, bool quantified) {
  std::ostringstream os;
  os << "(set-option :print-success false)\n";
  os << "(set-option :timeout " << opts.timeout_ms << ")\n";
  os << "(set-logic " << (quantified ? "UFLIA" : "QF_UFLIA") << ")\n";
  os << "(declare-sort List 0)\n";
  os << "(declare-fun mul (Int Int) Int)\n";
  for (const auto& [name, sig] : measures)
    os << "(declare-fun m_" << name << " (" << smt_sort(sig.arg) << ") " << smt_sort(sig.result) << ")\n";
  return os.str();
}

}  // namespace

SmtSession::Answer SmtSession::run(bool quantified, const std::string& body, const std::string& key) {
  int cached = 0;
  if (cache_->lookup(key, cached)) {
    ++stats_.cache_hits;
    return static_cast<Answer>(cached);
  }
  auto& proc = quantified ? quant_ : qf_;
  std::string query = "(push 1)\n" + body + "(check-sat)\n(pop 1)";
  int wait = opts_.timeout_ms + 3000;
  Answer ans = Answer::Unknown;
  for (int attempt = 0;; ++attempt) {
    try {
      if (!proc) proc = std::make_unique<SolverProcess>(opts_.command, preamble(opts_, measures_, quantified));
      auto lines = proc->exchange(query, wait);
      bool seen = false;
      for (const auto& l : lines) {
        if (l.rfind("(error", 0) == 0) throw SmtError("solver error: " + l + "\nquery:\n" + body);
        if (l == "sat") ans = Answer::Sat, seen = true;
        else if (l == "unsat") ans = Answer::Unsat, seen = true;
        else if (l == "unknown" || l == "timeout") ans = Answer::Unknown, seen = true;
      }
      if (!seen) throw SmtError("solver gave no answer");
      break;
    } catch (const SolverProcess::TimedOut&) {
      proc.reset();
      ++stats_.restarts;
      ans = Answer::Unknown;
      break;
    } catch (const SolverProcess::Died& e) {
      proc.reset();
      ++stats_.restarts;
      if (attempt >= 1) throw SmtError(std::string("solver crashed twice: ") + e.what());
    }
  }
  ++stats_.queries;
  if (ans == Answer::Unknown) ++stats_.unknowns;
  cache_->store(key, static_cast<int>(ans));
  return ans;
}

Validity SmtSession::check_valid(const VC& vc) {
  std::vector<TermPtr> hyps = vc.hypotheses;
  std::sort(hyps.begin(), hyps.end(), term_less);
  Canon canon(vc.sorts);
  for (const auto& h : hyps) canon.visit(h);
  canon.visit(vc.antecedent);
  canon.visit(vc.consequent);
  std::vector<TermPtr> all;
  std::string body;
  std::string asserts;
  for (const auto& h : hyps) {
    auto c = canon.apply(h);
    all.push_back(c);
    asserts += "(assert " + to_smtlib(c) + ")\n";
  }
  auto ante = canon.apply(vc.antecedent);
  auto cons = canon.apply(vc.consequent);
  all.push_back(ante);
  all.push_back(cons);
  asserts += "(assert " + to_smtlib(ante) + ")\n";
  asserts += "(assert (not " + to_smtlib(cons) + "))\n";
  body = declarations(canon.sorts) + len_axioms(all) + asserts;
  switch (run(false, body, "V\n" + body)) {
    case Answer::Unsat: return Validity::Valid;
    case Answer::Sat: return Validity::Invalid;
    default: return Validity::Unknown;
  }
}

bool SmtSession::is_specific(const TermPtr& p1, const TermPtr& p2, Sort binder, const SortEnv& scope) {
  VC vc;
  vc.sorts = scope;
  vc.sorts[kNu] = binder;
  vc.antecedent = p1;
  vc.consequent = p2;
  return check_valid(vc) == Validity::Valid;
}

bool SmtSession::maybe_satisfiable(const TermPtr& p, const SortEnv& sorts) {
  VC vc;
  vc.sorts = sorts;
  vc.antecedent = p;
  vc.consequent = mk_false();
  return check_valid(vc) != Validity::Valid;
}

bool SmtSession::is_local(const TermPtr& p, Sort binder, const SortEnv& scope) {
  // Measure applications become fresh existential integers (non-negative for len).
  std::vector<TermPtr> apps = measure_apps(p);
  TermPtr body = p;
  std::vector<std::pair<std::string, bool>> fresh;  // name, nonneg
  for (size_t i = 0; i < apps.size(); ++i) {
    std::string name = "m!" + std::to_string(i);
    fresh.emplace_back(name, apps[i]->name == "len");
    // Replace structurally: rebuild with a substitution on the application itself.
    std::function<TermPtr(const TermPtr&)> repl = [&](const TermPtr& t) -> TermPtr {
      if (term_equal(t, apps[i])) return var(name);
      if (t->args.empty()) return t;
      Term copy = *t;
      for (auto& a : copy.args) a = repl(a);
      return std::make_shared<const Term>(std::move(copy));
    };
    body = repl(body);
  }
  // Measure results are Int in every table we build; other result sorts fall back to Int.
  SortEnv all = scope;
  all[kNu] = binder;
  for (const auto& [n, nonneg] : fresh) all[n] = Sort::Int;
  Canon c2(all);
  c2.visit(body);
  auto renamed = c2.apply(body);
  std::string ex_vars, uni_vars, guards;
  for (const auto& [orig, nv] : c2.ren) {
    const std::string& cn = nv->name;
    std::string decl = "(" + smt_name(cn) + " " + smt_sort(c2.sorts[cn]) + ")";
    bool existential = orig == kNu || orig.rfind("m!", 0) == 0;
    if (existential) {
      ex_vars += decl;
      for (const auto& [n, nonneg] : fresh)
        if (n == orig && nonneg) guards += " (>= " + smt_name(cn) + " 0)";
    } else {
      uni_vars += decl;
    }
  }
  std::string inner = to_smtlib(renamed);
  if (!guards.empty()) inner = "(and" + guards + " " + inner + ")";
  if (!ex_vars.empty()) inner = "(exists (" + ex_vars + ") " + inner + ")";
  if (!uni_vars.empty()) inner = "(forall (" + uni_vars + ") " + inner + ")";
  std::string q = "(assert (not " + inner + "))\n";
  auto ans = run(true, q, "L\n" + q);
  if (ans == Answer::Unknown) {
    warnings_.push_back("locality check returned unknown for " + show(p, "v") + "; treated as not local");
    return false;
  }
  return ans == Answer::Unsat;
}

}  // namespace gliq
