#include "brute.hpp"

#include <sstream>
#include <stdexcept>

namespace gliq::testing {

namespace {

std::string app_key(const Term& t) { return t.name + "(" + show(t.args[0]) + ")"; }

struct Slot {
  std::string key;
  long long lo, hi;
};

void collect(const TermPtr& t, const SortEnv& sorts, std::map<std::string, Slot>& out) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = sorts.find(t->name);
      if (it == sorts.end()) throw std::logic_error("brute: unsorted variable " + t->name);
      if (it->second == Sort::Bool) out.emplace(t->name, Slot{t->name, 0, 1});
      else if (it->second == Sort::Int) out.emplace(t->name, Slot{t->name, kLo, kHi});
      // lists only matter through their measures
      return;
    }
    case TermKind::Measure: {
      std::string k = app_key(*t);
      out.emplace(k, t->name == "len" ? Slot{k, 0, kHi} : Slot{k, kLo, kHi});
      return;
    }
    case TermKind::KVar: throw std::logic_error("brute: liquid variable");
    default:
      for (const auto& a : t->args) collect(a, sorts, out);
  }
}

BruteResult search(const TermPtr& goal, const SortEnv& sorts, long limit, std::mt19937* rng) {
  std::map<std::string, Slot> slots;
  collect(goal, sorts, slots);
  std::vector<Slot> vs;
  for (auto& [k, s] : slots) vs.push_back(s);
  double points = 1;
  for (const auto& s : vs) points *= static_cast<double>(s.hi - s.lo + 1);

  BruteResult r;
  Model m;
  auto check = [&]() {
    ++r.models;
    if (!holds(goal, m)) {
      r.counterexample = m;
      return true;
    }
    return false;
  };
  if (points <= static_cast<double>(limit)) {
    for (const auto& s : vs) m.values[s.key] = s.lo;
    while (true) {
      if (check()) return r;
      size_t i = 0;
      for (; i < vs.size(); ++i) {
        auto& v = m.values[vs[i].key];
        if (v < vs[i].hi) {
          ++v;
          break;
        }
        v = vs[i].lo;
      }
      if (i == vs.size()) return r;
    }
  }
  r.exhaustive = false;
  std::mt19937 local(12345);
  std::mt19937& g = rng ? *rng : local;
  for (long n = 0; n < limit; ++n) {
    for (const auto& s : vs) m.values[s.key] = std::uniform_int_distribution<long long>(s.lo, s.hi)(g);
    if (check()) return r;
  }
  return r;
}

}  // namespace

std::string Model::show() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : values) {
    os << (first ? "" : ", ") << k << "=" << v;
    first = false;
  }
  return os.str();
}

long long eval(const TermPtr& t, const Model& m) {
  auto get = [&](const std::string& k) {
    auto it = m.values.find(k);
    if (it == m.values.end()) throw std::logic_error("brute: no value for " + k);
    return it->second;
  };
  const auto& a = t->args;
  switch (t->kind) {
    case TermKind::IntConst: return t->value;
    case TermKind::BoolConst: return t->value ? 1 : 0;
    case TermKind::Var: return get(t->name);
    case TermKind::Measure: return get(app_key(*t));
    case TermKind::Arith: {
      long long x = eval(a[0], m), y = eval(a[1], m);
      switch (t->arith) {
        case ArithOp::Add: return x + y;
        case ArithOp::Sub: return x - y;
        case ArithOp::Mul: return x * y;
      }
      break;
    }
    case TermKind::Cmp: {
      long long x = eval(a[0], m), y = eval(a[1], m);
      switch (t->cmp) {
        case CmpOp::Lt: return x < y;
        case CmpOp::Le: return x <= y;
        case CmpOp::Gt: return x > y;
        case CmpOp::Ge: return x >= y;
        case CmpOp::Eq: return x == y;
        case CmpOp::Ne: return x != y;
      }
      break;
    }
    case TermKind::Not: return !eval(a[0], m);
    case TermKind::And:
      for (const auto& x : a)
        if (!eval(x, m)) return 0;
      return 1;
    case TermKind::Or:
      for (const auto& x : a)
        if (eval(x, m)) return 1;
      return 0;
    case TermKind::Iff: return (eval(a[0], m) != 0) == (eval(a[1], m) != 0);
    case TermKind::Implies: return !eval(a[0], m) || eval(a[1], m);
    case TermKind::KVar: throw std::logic_error("brute: liquid variable");
  }
  throw std::logic_error("brute: unknown term");
}

bool holds(const TermPtr& t, const Model& m) { return eval(t, m) != 0; }

BruteResult brute_valid(const VC& vc, long limit, std::mt19937* rng) {
  std::vector<TermPtr> hyps = vc.hypotheses;
  hyps.push_back(vc.antecedent);
  return search(implies(conj(hyps), vc.consequent), vc.sorts, limit, rng);
}

BruteResult brute_valid(const TermPtr& t, const SortEnv& sorts, long limit, std::mt19937* rng) {
  return search(t, sorts, limit, rng);
}

}  // namespace gliq::testing
