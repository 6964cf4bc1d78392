#include <gtest/gtest.h>

#include "brute.hpp"
#include "gliq/term.hpp"

using namespace gliq;

TEST(Term, ConjFlattensAndDropsTrue) {
  auto x = var("x");
  auto a = cmp(CmpOp::Lt, int_const(0), x);
  auto b = cmp(CmpOp::Le, x, int_const(3));
  auto c = conj({mk_true(), conj(a, b), mk_true()});
  EXPECT_EQ(conjuncts(c).size(), 2u);
  EXPECT_TRUE(is_true(conj(std::vector<TermPtr>{})));
}

TEST(Term, SubstIsSimultaneous) {
  auto t = arith(ArithOp::Add, var("x"), var("y"));
  auto r = subst(t, Subst{{"x", var("y")}, {"y", var("x")}});
  EXPECT_EQ(show(r), "y + x");
}

TEST(Term, SubstComposesIntoKVarPending) {
  auto k = kvar_app(3, Subst{{"a", var("x")}});
  auto r = subst(k, Subst{{"x", int_const(1)}});
  ASSERT_EQ(r->kind, TermKind::KVar);
  EXPECT_EQ(show(r->pending.at("a")), "1");
  EXPECT_EQ(kvars_of(conj(r, kvar_app(5))), (std::set<int>{3, 5}));
}

TEST(Term, FreeVarsAndMentions) {
  auto t = conj(cmp(CmpOp::Lt, var(kNu), measure("len", var("xs"))), cmp(CmpOp::Ge, var(kNu), int_const(0)));
  EXPECT_EQ(free_vars(t), (std::set<std::string>{kNu, "xs"}));
  EXPECT_TRUE(mentions(t, "xs"));
  EXPECT_FALSE(mentions(t, "ys"));
  EXPECT_EQ(measure_apps(t).size(), 1u);
}

TEST(Term, CanonicalAtomPutsBinderLeft) {
  auto a = canonical_atom(cmp(CmpOp::Lt, int_const(0), var(kNu)));
  EXPECT_EQ(show(a), "v > 0");
  auto b = canonical_atom(cmp(CmpOp::Ge, var("x"), var(kNu)));
  EXPECT_EQ(show(b, "i"), "i <= x");
}

TEST(Term, ShowUsesBinderAndParenthesizes) {
  auto t = cmp(CmpOp::Eq, var(kNu), arith(ArithOp::Add, measure("len", var("xs")), int_const(1)));
  EXPECT_EQ(show(t, "i"), "i == len xs + 1");
  auto d = disj({cmp(CmpOp::Lt, var("x"), int_const(0)), neg(cmp(CmpOp::Eq, var("x"), int_const(1)))});
  EXPECT_NE(show(d).find("||"), std::string::npos);
}

TEST(Term, SortChecking) {
  auto m = default_measures();
  SortEnv env{{"x", Sort::Int}, {"xs", Sort::List}, {"b", Sort::Bool}};
  EXPECT_EQ(sort_of(measure("len", var("xs")), env, m), Sort::Int);
  EXPECT_FALSE(sort_of(measure("len", var("x")), env, m).has_value());
  EXPECT_FALSE(sort_of(arith(ArithOp::Add, var("b"), var("x")), env, m).has_value());
  EXPECT_FALSE(sort_of(var("nope"), env, m).has_value());
  EXPECT_EQ(sort_of(iff(var("b"), cmp(CmpOp::Lt, int_const(0), var("x"))), env, m), Sort::Bool);
}

TEST(Term, EqualityAndOrdering) {
  auto a = cmp(CmpOp::Lt, var("x"), int_const(1));
  auto b = cmp(CmpOp::Lt, var("x"), int_const(1));
  auto c = cmp(CmpOp::Lt, var("x"), int_const(2));
  EXPECT_TRUE(term_equal(a, b));
  EXPECT_FALSE(term_equal(a, c));
  EXPECT_NE(term_less(a, c), term_less(c, a));
}

TEST(Brute, EvaluatesOverSmallDomain) {
  using namespace gliq::testing;
  SortEnv s{{"x", Sort::Int}};
  auto valid = disj({cmp(CmpOp::Lt, var("x"), int_const(0)), cmp(CmpOp::Ge, var("x"), int_const(0))});
  auto r = brute_valid(valid, s);
  EXPECT_TRUE(r.exhaustive);
  EXPECT_FALSE(r.counterexample.has_value());
  auto invalid = cmp(CmpOp::Lt, var("x"), int_const(3));
  EXPECT_TRUE(brute_valid(invalid, s).counterexample.has_value());
}
