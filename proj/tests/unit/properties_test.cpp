#include <gtest/gtest.h>

#include "properties.hpp"

// Short runs of each program-level property so regressions show up in ctest
// quickly. Full counts live in the acceptance binary.

using namespace gliq::testing;

class Property : public ::testing::Test {
 protected:
  PropertyConfig cfg;
  void SetUp() override {
    cfg.count = 12;
    cfg.seed = 11;
    cfg.cap = 500;
  }
  static void expect(const PropertyResult& r) {
    EXPECT_TRUE(r.passed()) << r.line();
    for (const auto& e : r.examples) ADD_FAILURE() << e;
  }
};

TEST_F(Property, Soundness) { expect(prop_soundness(cfg)); }
TEST_F(Property, Completeness) { expect(prop_completeness(cfg)); }
TEST_F(Property, ConservativeExtension) { expect(prop_conservative_extension(cfg)); }
TEST_F(Property, PartitionEquivalence) { expect(prop_partition_equivalence(cfg)); }
TEST_F(Property, Embedding) {
  cfg.cap = 2000;
  expect(prop_embedding(cfg, true));
}
TEST_F(Property, StaticGradualGuarantee) {
  cfg.count = 8;
  cfg.cap = 2000;
  expect(prop_static_gradual_guarantee(cfg));
}
