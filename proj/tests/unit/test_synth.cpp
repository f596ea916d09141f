// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tgv/fixtures.hpp"
#include "tgv/interp.hpp"
#include "tgv/relation.hpp"
#include "tgv/synth.hpp"

namespace tgv {
namespace {

using testing::matched_graph;

TEST(Frontier, Fig2StreamOrder) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto g = EGraph::init(join_graphs(p.a, p.b), run_graph(p.a), run_graph(p.b));
  // Joint order: i1 w1 b1 mm add | i2 w2 b2 linear.
  FrontierEnumerator e(g);
  const auto& s = e.stream(g.class_of_joint(4));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].frontier, (std::vector<ClassId>{4}));
  EXPECT_EQ(s[1].frontier, (std::vector<ClassId>{2, 3}));
  EXPECT_EQ(s[2].frontier, (std::vector<ClassId>{0, 1, 2}));
  EXPECT_EQ(render(e.pattern(4, 2)), "(add (mm ?#0 ?#1) ?#2)");
  for (size_t i = 1; i < s.size(); ++i) EXPECT_LE(s[i - 1].metric, s[i].metric);
}

TEST(Frontier, StreamsAreDeterministicAndBounded) {
  auto p = gen_pair(parse_fixture_spec("gpt2-fragment"));
  auto g = matched_graph(p);
  SynthBudget b;
  b.max_stream = 16;
  for (auto c : g.classes()) {
    FrontierEnumerator e1(g, b), e2(g, b);
    const auto& s1 = e1.stream(c);
    const auto& s2 = e2.stream(c);
    ASSERT_EQ(s1.size(), s2.size());
    EXPECT_LE(s1.size(), 1 + b.max_stream * g.eclass(c).members.size());
    for (size_t i = 0; i < s1.size(); ++i) {
      EXPECT_EQ(s1[i].frontier, s2[i].frontier);
      EXPECT_LE(s1[i].frontier.size(), b.max_frontier);
    }
  }
}

TEST(Synth, Fig2RuleAfterInputMatching) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto g = matched_graph(p);
  auto r = synthesize_rule(g, g.class_of_joint(4), g.class_of_joint(8));
  ASSERT_TRUE(r);
  EXPECT_EQ(render(r->rule.lhs), "(add (mm ?a ?b) ?c)");
  EXPECT_EQ(render(r->rule.rhs), "(linear ?a (transpose{dim0=0,dim1=1} ?b) ?c)");
  EXPECT_EQ(r->frontier.size(), 3u);
  EXPECT_EQ(r->rule.prov_u, g.class_of_joint(4));
  // Ranks and matching dimensions only; nothing is pinned.
  for (const auto& c : r->rule.pre) {
    EXPECT_TRUE(c.kind == ShapeConstraint::Kind::DimEq || c.kind == ShapeConstraint::Kind::RankEq) << render(c);
  }
}

TEST(Synth, NoRuleWithoutSharedFrontier) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto g = EGraph::init(join_graphs(p.a, p.b), run_graph(p.a), run_graph(p.b));
  // Before input matching the two sides share no classes.
  EXPECT_FALSE(synthesize_rule(g, g.class_of_joint(3), g.class_of_joint(8)));
  EXPECT_FALSE(synthesize_rule(g, g.class_of_joint(4), g.class_of_joint(4)));
}

TEST(Synth, LargerBudgetFindsSameRule) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto g = matched_graph(p);
  SynthBudget big;
  big.max_frontier *= 2;
  big.max_stream *= 2;
  big.max_depth *= 2;
  auto r1 = synthesize_rule(g, g.class_of_joint(4), g.class_of_joint(8));
  auto r2 = synthesize_rule(g, g.class_of_joint(4), g.class_of_joint(8), big);
  ASSERT_TRUE(r1 && r2);
  EXPECT_TRUE(alpha_equivalent(r1->rule, r2->rule));
  EXPECT_TRUE(generality_audit(r1->rule, g, g.class_of_joint(4), g.class_of_joint(8)).ok);
}

TEST(Synth, SplitChunkPreconditionsPinDimension) {
  auto p = gen_pair(parse_fixture_spec("split-chunk"));
  auto g = matched_graph(p);
  // Joint order: x sp item0 item1 item2 | x ch item0 item1 item2.
  auto r = synthesize_rule(g, g.class_of_joint(1), g.class_of_joint(6));
  ASSERT_TRUE(r);
  EXPECT_EQ(render(r->rule.lhs), "(split{axis=1,size=4} ?a)");
  EXPECT_EQ(render(r->rule.rhs), "(chunk{chunks=3,dim=1} ?a)");
  std::vector<std::string> pre;
  for (const auto& c : r->rule.pre) pre.push_back(render(c));
  EXPECT_NE(std::find(pre.begin(), pre.end(), "dim(?a,1)=12"), pre.end());
  EXPECT_NE(std::find(pre.begin(), pre.end(), "dim(?a,1)%3=0"), pre.end());
  EXPECT_NE(std::find(pre.begin(), pre.end(), "dim(?a,1)%4=0"), pre.end());
}

TEST(Synth, HarvestReshapeAddsNumel) {
  std::map<std::string, TensorValue> env{{"a", TensorValue::zeros({2, 3})}};
  auto lhs = parse_pattern("(reshape{shape=[6]} ?a)");
  auto rhs = parse_pattern("(reshape{shape=[6]} (transpose{dim0=0,dim1=1} (transpose{dim0=0,dim1=1} ?a)))");
  auto pre = harvest_preconditions(lhs, rhs, env);
  bool numel = false;
  for (const auto& c : pre) numel |= render(c) == "numel(?a)=6";
  EXPECT_TRUE(numel);
}

TEST(Synth, AuditFlagsOverSpecificRule) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto g = matched_graph(p);
  Rule narrow;
  narrow.lhs = parse_pattern("(add (mm ?a ?b) ?a)");
  narrow.rhs = parse_pattern("(linear ?a (transpose{dim0=0,dim1=1} ?b) ?a)");
  auto audit = generality_audit(narrow, g, g.class_of_joint(4), g.class_of_joint(8));
  EXPECT_FALSE(audit.ok);
  ASSERT_TRUE(audit.witness);
  EXPECT_EQ(render(audit.witness->lhs), "(add (mm ?a ?b) ?c)");
}

}  // namespace
}  // namespace tgv
