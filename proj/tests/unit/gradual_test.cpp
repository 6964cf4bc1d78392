#include <gtest/gtest.h>

#include <set>

#include "gliq/frontend.hpp"
#include "gliq/gradual.hpp"
#include "samples.hpp"

using namespace gliq;
using gliq::testing::minimal_options;
using gliq::testing::sample;

namespace {

// SC sets compared modulo atom orientation and conjunct order.
std::set<std::string> sc_set(const Inference& inf, int occ) {
  const auto& o = inf.occurrences.at(static_cast<size_t>(occ));
  const auto& cands = inf.candidates.at(o.source);
  std::set<std::string> out;
  for (size_t i : inf.per_occurrence.at(static_cast<size_t>(occ)).scs) out.insert(conj_key(cands.at(i)));
  return out;
}

std::set<std::string> keys(const Inference& inf, std::initializer_list<const char*> preds) {
  const auto& src = inf.program.sources.at(0);
  std::set<std::string> out;
  for (const char* p : preds) out.insert(conj_key(parse_predicate(p, src.binder, inf.program.measures)));
  return out;
}

}  // namespace

TEST(Gradual, DivIfBranchesGetDifferentRefinements) {
  auto inf = ginfer(sample("divif.gl"), minimal_options());
  ASSERT_TRUE(inf.ok) << inf.verdict;
  ASSERT_EQ(inf.occurrences.size(), 2u);
  EXPECT_EQ(sc_set(inf, 0), keys(inf, {"0 < x"}));
  EXPECT_EQ(sc_set(inf, 1), keys(inf, {"x < 0", "x <= 0"}));
  EXPECT_EQ(inf.metrics.instan, 8);  // two partitions of 4
}

TEST(Gradual, OracleEnumeratesTheFullProduct) {
  auto inf = oracle_ginfer(sample("divif.gl"), minimal_options());
  EXPECT_EQ(inf.metrics.instan, 16);
  size_t joint = 0;
  for (const auto& [part, scs] : inf.scs) joint += scs.size();
  EXPECT_EQ(joint, 2u);
}

TEST(Gradual, OracleCapIsEnforced) {
  auto opts = minimal_options();
  opts.enumeration_cap = 10;
  EXPECT_THROW(oracle_ginfer(sample("divif.gl"), opts), std::runtime_error);
}

TEST(Gradual, OnlyPosHasNoConcretization) {
  auto inf = ginfer(sample("onlypos.gl"), minimal_options());
  EXPECT_FALSE(inf.ok);
  EXPECT_EQ(inf.verdict, "no-concretization");
  ASSERT_EQ(inf.per_occurrence.size(), 1u);
  EXPECT_TRUE(inf.per_occurrence[0].scs.empty());
  EXPECT_NE(inf.per_occurrence[0].emptied, Stage::None);
}

TEST(Gradual, StaticProgramIsOneStaticRun) {
  auto inf = ginfer(sample("divif_client.gl"), EngineOptions{});
  EXPECT_TRUE(inf.ok);
  EXPECT_TRUE(inf.occurrences.empty());
  EXPECT_EQ(inf.metrics.grad, 0);
  ASSERT_FALSE(inf.types.empty());
}

TEST(Gradual, NoPartitionGivesSameOccurrenceSets) {
  auto a = ginfer(sample("divif.gl"), minimal_options());
  auto o = minimal_options();
  o.partition = false;
  auto b = ginfer(sample("divif.gl"), o);
  ASSERT_EQ(a.occurrences.size(), b.occurrences.size());
  for (size_t i = 0; i < a.occurrences.size(); ++i) EXPECT_EQ(sc_set(a, static_cast<int>(i)), sc_set(b, static_cast<int>(i)));
  EXPECT_EQ(b.metrics.instan, 16);
}

TEST(Gradual, WorkersAgreeWithSequential) {
  auto o = EngineOptions{};
  o.depth = 2;
  auto a = ginfer(sample("indexing.gl"), o);
  o.jobs = 3;
  auto b = ginfer(sample("indexing.gl"), o);
  ASSERT_EQ(a.per_occurrence.size(), b.per_occurrence.size());
  for (size_t i = 0; i < a.per_occurrence.size(); ++i) EXPECT_EQ(a.per_occurrence[i].scs, b.per_occurrence[i].scs);
  EXPECT_EQ(a.metrics.sols, b.metrics.sols);
}

TEST(Gradual, FirstOnlyStopsEarly) {
  auto o = EngineOptions{};
  o.depth = 2;
  o.first_only = true;
  auto inf = ginfer(sample("indexing.gl"), o);
  EXPECT_TRUE(inf.ok);
  for (const auto& [part, scs] : inf.scs) EXPECT_LE(scs.size(), 1u);
}

TEST(Gradual, CallbackSeesEverySc) {
  size_t seen = 0;
  auto inf = ginfer(sample("divif.gl"), minimal_options(), [&](const Inference&, const SafeConcretization&) { ++seen; });
  size_t total = 0;
  for (const auto& [part, scs] : inf.scs) total += scs.size();
  EXPECT_EQ(seen, total);
}

TEST(Gradual, RecheckAcceptsScAndRejectsOthers) {
  auto p = sample("divif.gl");
  auto opts = minimal_options();
  auto inf = ginfer(p, opts);
  auto pos = parse_predicate("0 < x", "x", p.measures);
  auto neg = parse_predicate("x < 0", "x", p.measures);
  EXPECT_TRUE(recheck(inf, {}, {{0, pos}, {1, neg}}, opts).ok);
  auto bad = recheck(inf, {{0, pos}}, {}, opts);  // 0 < x in the else branch fails
  EXPECT_FALSE(bad.ok);
  ASSERT_EQ(bad.errors.size(), 1u);
  EXPECT_EQ(bad.errors[0].span, inf.occurrences[1].span);
  EXPECT_THROW(recheck(inf, {}, {{0, pos}}, opts), std::invalid_argument);
}

TEST(Gradual, TypePrecision) {
  SmtSession smt(SmtOptions{}, default_measures());
  auto precise_t = parse_type("x:{Int | 0 < x} -> Int");
  auto grad_t = parse_type("x:{Int | 0 <= x && ?} -> Int");
  auto unknown_t = parse_type("x:{Int | ?} -> Int");
  EXPECT_TRUE(type_precision(precise_t, grad_t, smt));
  EXPECT_TRUE(type_precision(grad_t, unknown_t, smt));
  EXPECT_FALSE(type_precision(unknown_t, grad_t, smt));
  EXPECT_FALSE(type_precision(grad_t, precise_t, smt));
}

TEST(Gradual, IndexingFactsAtDepthTwo) {
  auto o = EngineOptions{};
  o.depth = 2;
  auto inf = ginfer(sample("indexing.gl"), o);
  ASSERT_TRUE(inf.ok);
  ASSERT_EQ(inf.occurrences.size(), 3u);
  EXPECT_EQ(inf.metrics.statics, 0u);
  // occurrences are ordered: nil branch, recursive call, client
  EXPECT_EQ(inf.occurrences[1].def, "index");
  EXPECT_EQ(inf.occurrences[2].def, "client");
  auto rec = sc_set(inf, 1), client = sc_set(inf, 2);
  EXPECT_TRUE(rec.count(*keys(inf, {"0 <= i && i < len xs"}).begin()));
  EXPECT_TRUE(client.count(*keys(inf, {"0 < i && i <= len xs"}).begin()));
  EXPECT_FALSE(client.count(*keys(inf, {"0 <= i && i < len xs"}).begin()));
}
