#include "progen.hpp"

#include <algorithm>
#include <sstream>

namespace gliq::testing {

namespace {

std::string render_ann(const Ann& a, const std::string& binder, const char* sort) {
  if (!a.hole && a.pred.empty()) return sort;
  std::string body = a.hole ? (a.pred.empty() ? "?" : a.pred + " && ?") : a.pred;
  return std::string("{") + binder + ":" + sort + " | " + body + "}";
}

std::string render_sig(const FnSpec& fn, bool named) {
  std::string out;
  for (size_t i = 0; i < fn.args.size(); ++i) {
    std::string b = named ? fn.params[i] : "v";
    const auto& a = fn.args[i];
    if (named && (a.hole || !a.pred.empty())) {
      // x:{Int | p} binds the refinement to the parameter name
      out += b + ":{Int | " + (a.hole ? (a.pred.empty() ? "?" : a.pred + " && ?") : a.pred) + "} -> ";
    } else if (named) {
      out += b + ":Int -> ";
    } else {
      out += render_ann(a, "v", "Int") + " -> ";
    }
  }
  return out + render_ann(fn.result, "v", fn.bool_result ? "Bool" : "Int");
}

std::string lit(int n) { return n < 0 ? "(0 - " + std::to_string(-n) + ")" : std::to_string(n); }

class Builder {
 public:
  Builder(std::mt19937& rng, const GenOptions& opts) : rng_(rng), opts_(opts) {}

  GenProgram build() {
    GenProgram p;
    bool embed = opts_.mode == GenMode::Embedding;
    if (!embed) {
      int helpers = pick(0, 2);
      for (int i = 0; i < helpers; ++i) {
        FnSpec g;
        if (coin(0.6)) {
          g.name = "g" + std::to_string(i);
          g.args = {Ann{coin(0.5) ? zero_atom("v") : ""}};
          g.result = Ann{coin(0.5) ? zero_atom("v") : ""};
        } else {
          g.name = "p" + std::to_string(i);
          g.args = {Ann{}};
          g.bool_result = true;
        }
        p.assumes.push_back(g);
      }
    }
    int arity = embed ? 1 : pick(1, 2);
    p.f.name = "f";
    for (int i = 0; i < arity; ++i) {
      std::string x = i == 0 ? "x" : "y";
      std::vector<std::string> scope(p.f.params.begin(), p.f.params.end());
      p.f.params.push_back(x);
      p.f.args.push_back(Ann{embed || coin(0.5) ? "" : atom(x, scope)});
    }
    p.f.bool_result = embed && coin(0.3);
    p.f.result = Ann{embed || coin(0.5) ? "" : atom("v", p.f.params)};

    helpers_ = &p.assumes;
    fn_ = &p.f;
    scope_ = p.f.params;
    // Sizes spread over the whole range; small programs are the common case.
    int budget = pick(3, opts_.max_nodes) - 2;
    if (!embed && coin(0.6)) {
      std::vector<int> args;
      for (int i = 0; i < arity; ++i) args.push_back(pick(-3, 3));
      p.main_args = args;
      budget -= 1 + arity;
    }
    nodes_ = 0;
    p.body = p.f.bool_result ? gen_bool(budget) : gen_int(budget);
    p.nodes = nodes_ + (p.main_args ? 1 + arity : 0);

    if (opts_.mode == GenMode::Gradual) add_holes(p);
    return p;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string zero_atom(const std::string& b) {
    static const char* forms[] = {"0 < %", "0 <= %", "% < 0", "% <= 0"};
    std::string f = forms[pick(0, 3)];
    return f.replace(f.find('%'), 1, b);
  }
  // One instance of the minimal qualifiers over binder b and scope.
  std::string atom(const std::string& b, const std::vector<std::string>& scope) {
    if (scope.empty() || coin(0.5)) return zero_atom(b);
    return b + (coin(0.5) ? " < " : " <= ") + scope[static_cast<size_t>(pick(0, static_cast<int>(scope.size()) - 1))];
  }

  void add_holes(GenProgram& p) {
    std::vector<Ann*> slots;
    for (auto& a : p.f.args) slots.push_back(&a);
    slots.push_back(&p.f.result);
    for (auto& g : p.assumes) {
      if (g.bool_result) continue;
      slots.push_back(&g.args[0]);
      slots.push_back(&g.result);
    }
    int want = pick(1, opts_.max_holes);
    std::shuffle(slots.begin(), slots.end(), rng_);
    for (int i = 0; i < want && i < static_cast<int>(slots.size()); ++i) {
      slots[static_cast<size_t>(i)]->hole = true;
      // keep the static part only when it is there already (it is local)
    }
  }

  std::string leaf() {
    ++nodes_;
    if (!scope_.empty() && coin(0.65)) return scope_[static_cast<size_t>(pick(0, static_cast<int>(scope_.size()) - 1))];
    return std::to_string(pick(0, 3));
  }

  const FnSpec* helper(bool want_bool) {
    std::vector<const FnSpec*> c;
    for (const auto& g : *helpers_)
      if (g.bool_result == want_bool) c.push_back(&g);
    if (c.empty()) return nullptr;
    return c[static_cast<size_t>(pick(0, static_cast<int>(c.size()) - 1))];
  }

  std::string gen_int(int budget) {
    if (budget <= 1) return leaf();
    bool embed = opts_.mode == GenMode::Embedding;
    for (int tries = 0; tries < 8; ++tries) {
      switch (pick(0, 7)) {
        case 0:
        case 1: {
          if (budget < 3) break;
          ++nodes_;
          int l = pick(1, budget - 2);
          std::string a = gen_int(l);
          std::string b = gen_int(budget - 1 - l);
          return "(" + a + (coin(0.5) ? " + " : " - ") + b + ")";
        }
        case 2: {
          if (embed || budget < 3 || !coin(0.35)) break;
          ++nodes_;
          int l = pick(1, budget - 2);
          std::string a = gen_int(l);
          std::string b = gen_int(budget - 1 - l);
          return "(" + a + " / " + b + ")";
        }
        case 3: {
          const FnSpec* g = helper(false);
          if (!g || budget < 2) break;
          ++nodes_;
          return "(" + g->name + " " + gen_int(budget - 1) + ")";
        }
        case 4:
        case 5: {
          if (budget < 4) break;
          ++nodes_;
          int c = pick(1, budget - 3);
          std::string cond = gen_bool(c);
          int rest = budget - 1 - c;
          int t = pick(1, rest - 1);
          std::string a = gen_int(t);
          std::string b = gen_int(rest - t);
          return "(if " + cond + " then " + a + " else " + b + ")";
        }
        case 6: {
          if (budget < 3) break;
          ++nodes_;
          std::string z = "z" + std::to_string(lets_++);
          int l = pick(1, budget - 2);
          std::string bound = gen_int(l);
          scope_.push_back(z);
          std::string body = gen_int(budget - 1 - l);
          scope_.pop_back();
          return "(let " + z + " = " + bound + " in " + body + ")";
        }
        case 7: {
          if (fn_->bool_result) break;
          int k = static_cast<int>(fn_->params.size());
          if (budget < k + 1 || !coin(0.4)) break;
          ++nodes_;
          std::string out = "(" + fn_->name;
          int left = budget - 1;
          for (int i = 0; i < k; ++i) {
            int share = i + 1 == k ? left : pick(1, left - (k - 1 - i));
            out += " " + gen_int(share);
            left -= share;
          }
          return out + ")";
        }
      }
    }
    return leaf();
  }

  std::string gen_bool(int budget) {
    if (budget >= 3) {
      switch (pick(0, 3)) {
        case 0:
        case 1: {
          ++nodes_;
          static const char* ops[] = {" < ", " <= ", " == ", " /= ", " > ", " >= "};
          int l = pick(1, budget - 2);
          std::string a = gen_int(l);
          std::string b = gen_int(budget - 1 - l);
          return "(" + a + ops[pick(0, 5)] + b + ")";
        }
        case 2: {
          const FnSpec* g = helper(true);
          if (!g) break;
          ++nodes_;
          return "(" + g->name + " " + gen_int(budget - 1) + ")";
        }
        case 3: {
          if (budget < 5) break;
          ++nodes_;
          int l = pick(2, budget - 3);
          std::string a = gen_bool(l);
          std::string b = gen_bool(budget - 1 - l);
          return "(" + a + (coin(0.5) ? " && " : " || ") + b + ")";
        }
      }
    }
    if (budget >= 2) {
      const FnSpec* g = helper(true);
      if (g && coin(0.5)) {
        ++nodes_;
        return "(" + g->name + " " + gen_int(budget - 1) + ")";
      }
    }
    if (budget >= 3) {
      ++nodes_;
      std::string a = gen_int(1), b = gen_int(1);
      return "(" + a + " < " + b + ")";
    }
    ++nodes_;
    return coin(0.5) ? "true" : "false";
  }

  std::mt19937& rng_;
  GenOptions opts_;
  const std::vector<FnSpec>* helpers_ = nullptr;
  const FnSpec* fn_ = nullptr;
  std::vector<std::string> scope_;
  int nodes_ = 0;
  int lets_ = 0;
};

}  // namespace

int GenProgram::holes() const {
  int n = f.result.hole;
  for (const auto& a : f.args) n += a.hole;
  for (const auto& g : assumes) {
    n += g.result.hole;
    for (const auto& a : g.args) n += a.hole;
  }
  return n;
}

std::string GenProgram::text() const {
  std::ostringstream os;
  for (const auto& g : assumes) os << "assume " << g.name << " :: " << render_sig(g, false) << "\n";
  os << "sig f :: " << render_sig(f, true) << "\n";
  os << "def f";
  for (const auto& x : f.params) os << " " << x;
  os << " = " << body << "\n";
  if (main_args) {
    os << "sig main :: Int\ndef main = f";
    for (int a : *main_args) os << " " << lit(a);
    os << "\n";
  }
  return os.str();
}

GenProgram GenProgram::embedded() const {
  GenProgram p = *this;
  for (auto& a : p.f.args) a = Ann{"", true};
  p.f.result = Ann{"", true};
  return p;
}

std::vector<Ann*> GenProgram::precise_slots() {
  std::vector<Ann*> out;
  auto consider = [&](Ann& a) {
    if (!a.hole && !a.pred.empty()) out.push_back(&a);
  };
  for (auto& a : f.args) consider(a);
  consider(f.result);
  for (auto& g : assumes) {
    for (auto& a : g.args) consider(a);
    consider(g.result);
  }
  return out;
}

GenProgram generate_program(std::mt19937& rng, const GenOptions& opts) { return Builder(rng, opts).build(); }

}  // namespace gliq::testing
