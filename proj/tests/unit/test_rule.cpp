// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tgv/errors.hpp"
#include "tgv/rule.hpp"

namespace tgv {
namespace {

Rule make(const char* lhs, const char* rhs, std::vector<const char*> pre = {}) {
  Rule r;
  r.lhs = parse_pattern(lhs);
  r.rhs = parse_pattern(rhs);
  for (auto p : pre) r.pre.push_back(parse_constraint(p));
  return r;
}

TEST(Pattern, RenderParseRoundTrip) {
  for (const char* text : {"?a", "(constant{shape=[],value=0.5})", "(transpose{dim0=0,dim1=1} ?c)",
                           "(linear ?a (transpose{dim0=0,dim1=1} ?c) ?b)",
                           "(gelu{approximate=tanh} (add ?x (mul ?y (constant{shape=[2],value=-1.25}))))"}) {
    EXPECT_EQ(render(parse_pattern(text)), text);
  }
  EXPECT_THROW(parse_pattern("(nosuchop ?a)"), Error);
  EXPECT_THROW(parse_pattern("(add ?a"), Error);
}

TEST(Pattern, Metrics) {
  auto p = parse_pattern("(add (mm ?a ?c) ?b)");
  EXPECT_EQ(free_vars(p), (std::vector<std::string>{"a", "c", "b"}));
  EXPECT_EQ(pattern_depth(p), 2);
  EXPECT_EQ(pattern_size(p), 5u);
  EXPECT_TRUE(contains_op(p, OpKind::Mm));
  EXPECT_FALSE(contains_op(p, OpKind::LayerNorm));
}

TEST(Pattern, FoldsAddOfMmIntoAddmm) {
  EXPECT_EQ(render(fold_compounds(parse_pattern("(add (mm ?a ?c) ?b)"))), "(addmm ?b ?a ?c)");
  EXPECT_EQ(render(fold_compounds(parse_pattern("(add ?b (mm ?a ?c))"))), "(add ?b (mm ?a ?c))");
}

TEST(Pattern, EvaluatesUnderEnvironment) {
  Rng rng(2);
  std::map<std::string, TensorValue> env{{"a", testing::randn(rng, {3, 4})},
                                         {"b", testing::randn(rng, {5})},
                                         {"c", testing::randn(rng, {4, 5})}};
  auto lhs = eval_pattern(parse_pattern("(add (mm ?a ?c) ?b)"), env);
  auto rhs = eval_pattern(parse_pattern("(addmm ?b ?a ?c)"), env);
  EXPECT_TRUE(values_match(lhs, rhs, {1e-12, 0}));
  EXPECT_THROW(eval_pattern(parse_pattern("?zz"), env), Error);
}

TEST(Constraint, RenderParseAndHold) {
  for (const char* text : {"rank(?a)=2", "dim(?a,1)=dim(?c,0)", "dim(?a,1)=12", "dim(?a,1)%3=0",
                           "numel(?a)=numel(?b)", "numel(?a)=24", "dim(?t.1,0)=4"}) {
    EXPECT_EQ(render(parse_constraint(text)), text);
  }
  ShapeEnv env{{"a", TensorValue::zeros({2, 12})}, {"c", TensorValue::zeros({12, 3})},
               {"b", TensorValue::zeros({24})}};
  EXPECT_TRUE(constraint_holds(parse_constraint("rank(?a)=2"), env));
  EXPECT_TRUE(constraint_holds(parse_constraint("dim(?a,1)=dim(?c,0)"), env));
  EXPECT_TRUE(constraint_holds(parse_constraint("dim(?a,1)%3=0"), env));
  EXPECT_FALSE(constraint_holds(parse_constraint("dim(?a,1)%5=0"), env));
  EXPECT_TRUE(constraint_holds(parse_constraint("numel(?a)=numel(?b)"), env));
  EXPECT_FALSE(constraint_holds(parse_constraint("dim(?a,4)=1"), env));
}

TEST(Rule, AlphaEquivalenceIgnoresNamesAndOrientation) {
  auto r = make("(addmm ?b ?a ?c)", "(linear ?a (transpose{dim0=0,dim1=1} ?c) ?b)");
  auto renamed = make("(linear ?x (transpose{dim0=0,dim1=1} ?y) ?z)", "(addmm ?z ?x ?y)");
  EXPECT_TRUE(alpha_equivalent(r, renamed));
  auto collapsed = make("(addmm ?b ?a ?a)", "(linear ?a (transpose{dim0=0,dim1=1} ?a) ?b)");
  EXPECT_FALSE(alpha_equivalent(r, collapsed));
}

TEST(Rule, InstanceOfGeneralRule) {
  auto general = make("(addmm ?b ?a ?c)", "(linear ?a (transpose{dim0=0,dim1=1} ?c) ?b)");
  auto specific = make("(linear (layernorm ?a ?g ?h) (transpose{dim0=0,dim1=1} ?c) ?b)",
                       "(addmm ?b (layernorm ?a ?g ?h) ?c)");
  EXPECT_TRUE(is_instance_of(specific, general));
  EXPECT_FALSE(is_instance_of(general, specific));
}

TEST(Rule, CanonicalNames) {
  auto r = canonical_names(make("(add ?q ?p)", "(add ?p ?q)", {"rank(?p)=1"}));
  EXPECT_EQ(render(r.lhs), "(add ?a ?b)");
  EXPECT_EQ(render(r.rhs), "(add ?b ?a)");
  EXPECT_EQ(render(r.pre[0]), "rank(?b)=1");
}

TEST(Rule, CatalogueRoundTrip) {
  auto r1 = make("(split{axis=1,size=4} ?a)", "(chunk{chunks=3,dim=1} ?a)",
                 {"rank(?a)=2", "dim(?a,1)=12", "dim(?a,1)%3=0"});
  r1.id = 1;
  r1.validation = Validation::FormallyVerified;
  r1.rule_class = RuleClass::TensorRearrangement;
  r1.prov_u = 4;
  r1.prov_v = 9;
  r1.instances = 2;
  auto r2 = make("(gelu{approximate=tanh} ?a)", "(gelu ?a)");
  r2.id = 2;
  r2.validation = Validation::Rejected;
  r2.rule_class = RuleClass::OpaqueHeavy;
  r2.reason = "counterexample at trial 0";
  r2.cex_hash = 0xdeadbeefULL;
  auto text = render_catalogue({r1, r2});
  auto back = parse_catalogue("# saved\n" + text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(render_catalogue(back), text);
  EXPECT_EQ(back[1].cex_hash, 0xdeadbeefULL);
}

}  // namespace
}  // namespace tgv
