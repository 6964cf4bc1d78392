#include <gtest/gtest.h>

#include "gliq/frontend.hpp"
#include "gliq/smt.hpp"

using namespace gliq;

namespace {

TermPtr P(const std::string& s, const std::string& binder = "v") { return parse_predicate(s, binder, default_measures()); }

VC vc(std::vector<TermPtr> hyps, TermPtr ante, TermPtr cons, SortEnv sorts) {
  VC v;
  v.hypotheses = std::move(hyps);
  v.antecedent = std::move(ante);
  v.consequent = std::move(cons);
  v.sorts = std::move(sorts);
  return v;
}

}  // namespace

class Smt : public ::testing::Test {
 protected:
  std::shared_ptr<SmtCache> cache = std::make_shared<SmtCache>();
  SmtSession smt{SmtOptions{}, default_measures(), cache};
};

TEST_F(Smt, Validity) {
  SortEnv s{{"x", Sort::Int}, {kNu, Sort::Int}};
  EXPECT_TRUE(smt.valid(vc({P("0 < x")}, P("v == x"), P("0 < v"), s)));
  EXPECT_FALSE(smt.valid(vc({P("0 <= x")}, P("v == x"), P("0 < v"), s)));
  EXPECT_TRUE(smt.valid(vc({}, mk_false(), P("v < 0"), s)));
}

TEST_F(Smt, MeasuresAreNonNegative) {
  SortEnv s{{"xs", Sort::List}, {kNu, Sort::Int}};
  EXPECT_TRUE(smt.valid(vc({}, P("v == len xs"), P("0 <= v"), s)));
}

TEST_F(Smt, CacheAnswersRepeatedQueries) {
  SortEnv s{{"x", Sort::Int}, {kNu, Sort::Int}};
  auto q = vc({P("0 < x")}, P("v == x + 1"), P("1 < v"), s);
  EXPECT_TRUE(smt.valid(q));
  long before = smt.stats().cache_hits;
  EXPECT_TRUE(smt.valid(q));
  EXPECT_EQ(smt.stats().cache_hits, before + 1);
  EXPECT_GT(cache->size(), 0u);
}

TEST_F(Smt, Locality) {
  SortEnv scope{{"x", Sort::Int}, {"xs", Sort::List}};
  EXPECT_TRUE(smt.is_local(P("0 < v"), Sort::Int, scope));
  EXPECT_TRUE(smt.is_local(P("v < x"), Sort::Int, scope));
  EXPECT_FALSE(smt.is_local(P("0 < x"), Sort::Int, scope));
  EXPECT_FALSE(smt.is_local(P("v < 0 && 0 < v"), Sort::Int, scope));
  // the measure is existential, so an empty list does not refute it
  EXPECT_TRUE(smt.is_local(P("0 <= v && v < len xs"), Sort::Int, scope));
}

TEST_F(Smt, Specificity) {
  SortEnv scope{{"x", Sort::Int}};
  EXPECT_TRUE(smt.is_specific(P("v < 0"), P("v <= 0"), Sort::Int, scope));
  EXPECT_FALSE(smt.is_specific(P("v <= 0"), P("v < 0"), Sort::Int, scope));
  EXPECT_TRUE(smt.is_specific(P("v < x"), mk_true(), Sort::Int, scope));
}

TEST_F(Smt, Satisfiability) {
  SortEnv s{{"x", Sort::Int}};
  EXPECT_TRUE(smt.maybe_satisfiable(P("0 < x", "v"), s));
  EXPECT_FALSE(smt.maybe_satisfiable(conj(P("0 < x"), P("x < 0")), s));
}

TEST(SmtText, Rendering) {
  EXPECT_EQ(to_smtlib(P("0 < x")), "(< 0 " + smt_name("x") + ")");
  auto t = to_smtlib(P("v == len xs + 1"));
  EXPECT_NE(t.find("len"), std::string::npos);
  EXPECT_NE(smt_name(kNu), kNu);  // ν is not a valid SMT-LIB symbol as is
}

TEST(SmtText, EmbedRejectsKVars) {
  Constraint c;
  c.lhs = RBase{Sort::Int, precise(mk_true())};
  c.rhs = RBase{Sort::Int, precise(kvar_app(0))};
  EXPECT_THROW(embed_sub(c), std::logic_error);
}

TEST(SmtProcess, MissingSolverRaises) {
  SmtOptions o;
  o.command = "/nonexistent/solver -in";
  SmtSession s(o, default_measures());
  SortEnv e{{"x", Sort::Int}, {kNu, Sort::Int}};
  EXPECT_THROW(s.valid(vc({}, P("v == x"), P("v == x"), e)), SmtError);
}
