// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include <gtest/gtest.h>

#include "tgv/driver.hpp"
#include "tgv/errors.hpp"
#include "tgv/fixtures.hpp"

namespace tgv {
namespace {

CompareResult run(const FixturePair& p, uint64_t seed = 1) {
  Config cfg;
  cfg.seed = seed;
  return compare(p.a, p.b, cfg);
}

class Suite : public ::testing::TestWithParam<const char*> {};

TEST_P(Suite, FixtureIsEquivalent) {
  auto p = gen_pair(parse_fixture_spec(GetParam(), 1));
  auto r = run(p);
  EXPECT_EQ(r.outcome, Outcome::Equivalent) << emit_report(r, ReportFormat::Text);
  EXPECT_FALSE(r.report);
  ASSERT_TRUE(r.graph);
  EXPECT_TRUE(r.graph->congruence_holds());
  EXPECT_TRUE(r.graph->value_coherence_violations({1e-2, 1e-2}).empty());
  EXPECT_GE(r.stats.unique_rules, 1u);
}

INSTANTIATE_TEST_SUITE_P(Fixtures, Suite,
                         ::testing::Values("fig2-linear", "split-chunk", "transposed-weights", "fused-qkv",
                                           "attention-fused", "gpt2-fragment", "tiny-transformer(2)"),
                         [](const auto& info) {
                           std::string n = info.param;
                           for (auto& ch : n) {
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           }
                           return n;
                         });

TEST(Driver, Fig2SingleRule) {
  auto r = run(gen_pair(parse_fixture_spec("fig2-linear", 1)));
  ASSERT_EQ(r.catalogue.size(), 1u);
  const auto& rule = r.catalogue[0];
  EXPECT_EQ(rule.validation, Validation::EmpiricallyValidated);
  EXPECT_EQ(rule.rule_class, RuleClass::OpaqueHeavy);
  EXPECT_EQ(rule.instances, 1);
  ASSERT_EQ(r.verdict_log.size(), 1u);
  EXPECT_EQ(r.verdict_log[0].rfind("1 OpaqueHeavy EmpiricallyValidated", 0), 0u);
}

TEST(Driver, SeedRulesSkipSynthesis) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear", 1));
  auto first = run(p);
  Config cfg;
  cfg.seed = 1;
  cfg.seed_rules = first.catalogue;
  for (auto& rule : cfg.seed_rules) rule.instances = 0;
  auto again = compare(p.a, p.b, cfg);
  EXPECT_EQ(again.outcome, Outcome::Equivalent);
  EXPECT_EQ(again.stats.synth_attempts, 0u);
  EXPECT_GE(again.stats.apply_successes, 1u);
}

TEST(Driver, RejectedSeedRuleIsNotApplied) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear", 1));
  Rule bogus;
  bogus.lhs = parse_pattern("(add (mm ?a ?b) ?c)");
  bogus.rhs = parse_pattern("(linear ?a (transpose{dim0=0,dim1=1} ?b) (gelu ?c))");
  Config cfg;
  cfg.seed = 1;
  cfg.seed_rules = {bogus};
  auto r = compare(p.a, p.b, cfg);
  EXPECT_EQ(r.outcome, Outcome::Equivalent);
  // The bogus rule never fires, so the real one is synthesized.
  EXPECT_GE(r.stats.synth_attempts, 1u);
  ASSERT_EQ(r.catalogue.size(), 1u);
  EXPECT_FALSE(alpha_equivalent(r.catalogue[0], bogus));
}

TEST(Driver, RulesReusedAcrossLayers) {
  auto r = run(gen_pair(parse_fixture_spec("tiny-transformer(2)", 1)));
  EXPECT_EQ(r.outcome, Outcome::Equivalent);
  EXPECT_GT(r.stats.rule_instances, r.stats.unique_rules);
  EXPECT_GE(r.stats.apply_successes, 1u);
}

TEST(Driver, NonDivisibleSplitIsNeverEquivalent) {
  auto spec = parse_fixture_spec("split-chunk", 1);
  spec.hidden = 10;
  auto r = run(gen_pair(spec));
  EXPECT_NE(r.outcome, Outcome::Equivalent);
  bool rejected = false;
  for (const auto& rule : r.catalogue) rejected |= rule.validation == Validation::Rejected;
  EXPECT_TRUE(rejected);
}

struct BugCase {
  BugKind bug;
  int level;
};

class Bugs : public ::testing::TestWithParam<BugCase> {};

TEST_P(Bugs, DetectedAndLocalized) {
  auto p = gen_pair(parse_fixture_spec("tiny-transformer", 1));
  inject_bug(p, GetParam().bug);
  auto r = run(p);
  EXPECT_EQ(r.outcome, Outcome::NotEquivalent);
  ASSERT_TRUE(r.report);
  EXPECT_EQ(localization_level(p, *r.report), GetParam().level) << emit_report(r, ReportFormat::Text);
  EXPECT_FALSE(r.report->path.empty());
}

INSTANTIATE_TEST_SUITE_P(Injected, Bugs,
                         ::testing::Values(BugCase{BugKind::GeluApproxSwap, 0}, BugCase{BugKind::MissingAttnScale, 0},
                                           BugCase{BugKind::WrongRotationTranspose, 1},
                                           BugCase{BugKind::MissingClip, 0},
                                           BugCase{BugKind::WrongSplitSemantics, 1}),
                         [](const auto& info) {
                           std::string n(bug_name(info.param.bug));
                           for (auto& ch : n) {
                             if (ch == '-') ch = '_';
                           }
                           return n;
                         });

TEST(Driver, ReportsAreDeterministic) {
  auto p = gen_pair(parse_fixture_spec("gpt2-fragment", 3));
  auto r1 = run(p, 5), r2 = run(p, 5);
  EXPECT_EQ(emit_report(r1, ReportFormat::Text), emit_report(r2, ReportFormat::Text));
  EXPECT_EQ(emit_report(r1, ReportFormat::Lines), emit_report(r2, ReportFormat::Lines));
  EXPECT_EQ(render_catalogue(r1.catalogue), render_catalogue(r2.catalogue));
}

TEST(Driver, ReportContents) {
  auto p = gen_pair(parse_fixture_spec("tiny-transformer", 1));
  inject_bug(p, BugKind::GeluApproxSwap);
  auto r = run(p);
  auto text = emit_report(r, ReportFormat::Text);
  EXPECT_NE(text.find("verdict: NOT_EQUIVALENT"), std::string::npos);
  EXPECT_NE(text.find("verdict log:"), std::string::npos);
  auto lines = emit_report(r, ReportFormat::Lines);
  EXPECT_EQ(lines.rfind("verdict NOT_EQUIVALENT", 0), 0u);
  EXPECT_NE(lines.find("mismatch A "), std::string::npos);
  EXPECT_NE(lines.find("gelu"), std::string::npos);
}

TEST(Driver, MergesAreSound) {
  auto p = gen_pair(parse_fixture_spec("gpt2-fragment", 1));
  auto r = run(p);
  ASSERT_TRUE(r.graph);
  for (uint64_t s = 100; s < 103; ++s) {
    auto fresh = gen_pair(parse_fixture_spec("gpt2-fragment", s));
    EXPECT_EQ(soundness_violations(*r.graph, fresh.a, fresh.b, {1e-2, 1e-2}), 0u) << s;
  }
}

TEST(Fixtures, SpecParsing) {
  EXPECT_EQ(parse_fixture_spec("tiny-transformer(3)").layers, 3);
  EXPECT_EQ(parse_fixture_spec("tiny-transformer:4").layers, 4);
  EXPECT_THROW(parse_fixture_spec("tiny-transformer(5)"), Error);
  EXPECT_THROW(parse_fixture_spec("no-such"), Error);
  EXPECT_EQ(suite_specs().size(), 7u);
  for (auto b : all_bugs()) EXPECT_EQ(bug_from_name(bug_name(b)), b);
}

TEST(Fixtures, BugsChangeOutputs) {
  for (auto b : all_bugs()) {
    auto p = gen_pair(parse_fixture_spec("tiny-transformer", 2));
    EXPECT_LT(output_divergence(p.a, p.b), 1e-9);
    inject_bug(p, b);
    EXPECT_GT(output_divergence(p.a, p.b), 1e-4) << bug_name(b);
  }
  auto plain = gen_pair(parse_fixture_spec("fig2-linear"));
  EXPECT_THROW(inject_bug(plain, BugKind::MissingClip), Error);
}

}  // namespace
}  // namespace tgv
