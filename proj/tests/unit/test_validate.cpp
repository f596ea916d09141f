// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "tgv/validate.hpp"

namespace tgv {
namespace {

Rule make(const char* lhs, const char* rhs, std::vector<const char*> pre = {}) {
  Rule r;
  r.lhs = parse_pattern(lhs);
  r.rhs = parse_pattern(rhs);
  for (auto p : pre) r.pre.push_back(parse_constraint(p));
  return r;
}

const char* kAttnA = "(transpose{dim0=1,dim1=2} (scaled_dot_product_attention{scale=0.5} (transpose{dim0=1,dim1=2} ?a) "
                     "(transpose{dim0=1,dim1=2} ?b) (transpose{dim0=1,dim1=2} ?c)))";
const char* kAttnB = "(fused_attention{scale=0.5} ?a ?b ?c)";

TEST(Precheck, RejectsMalformedRules) {
  EXPECT_TRUE(precheck(make("?a", "?b")));
  EXPECT_TRUE(precheck(make("(gelu ?a)", "(gelu ?a)")));
  EXPECT_TRUE(precheck(make("(gelu ?a)", "(gelu ?b)")));
  EXPECT_TRUE(precheck(make("(add ?a ?b)", "(gelu ?a)")));
  EXPECT_TRUE(precheck(make("(transpose{dim0=0,dim1=3} ?a)", "(transpose{dim0=3,dim1=0} ?a)", {"rank(?a)=2"})));
  EXPECT_TRUE(precheck(make("(add ?a ?b)", "(add ?b ?a)", {"rank(?z)=2"})));
  EXPECT_FALSE(precheck(make("(add ?a ?b)", "(add ?b ?a)")));
  EXPECT_FALSE(precheck(make(kAttnA, kAttnB)));
}

TEST(Classify, ByOperatorSet) {
  EXPECT_EQ(classify(make("(add ?a ?b)", "(add ?b ?a)")), RuleClass::ScalarLogic);
  EXPECT_EQ(classify(make("(split{axis=1,size=4} ?a)", "(chunk{chunks=3,dim=1} ?a)")),
            RuleClass::TensorRearrangement);
  EXPECT_EQ(classify(make("(add (mm ?a ?b) ?c)", "(linear ?a (transpose{dim0=0,dim1=1} ?b) ?c)")),
            RuleClass::OpaqueHeavy);
  EXPECT_EQ(classify(make(kAttnA, kAttnB)), RuleClass::OpaqueHeavy);
}

TEST(Scalar, VerifiesIdentities) {
  Rng rng(1);
  auto zero = make("(add ?a (mul ?b (constant{shape=[],value=0})))", "?a");
  auto v = verify_scalar(zero, rng);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->level, Validation::FormallyVerified);
  auto assoc = make("(add (add ?a ?b) ?c)", "(add ?a (add ?b ?c))");
  ASSERT_TRUE(verify_scalar(assoc, rng));
  EXPECT_EQ(verify_scalar(assoc, rng)->level, Validation::FormallyVerified);
  auto distrib = make("(mul ?a (add ?b ?c))", "(add (mul ?a ?b) (mul ?c ?a))");
  EXPECT_EQ(verify_scalar(distrib, rng)->level, Validation::FormallyVerified);
}

TEST(Scalar, RefutesNonIdentities) {
  Rng rng(2);
  auto v = verify_scalar(make("(add ?a ?b)", "(mul ?a ?b)"), rng);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->level, Validation::Rejected);
  EXPECT_NE(v->cex_hash, 0u);
}

TEST(Rearrangement, SplitChunk) {
  ValidationConfig cfg;
  Rng rng(3);
  auto ok = make("(split{axis=1,size=512} ?a)", "(chunk{chunks=3,dim=1} ?a)",
                 {"rank(?a)=2", "dim(?a,1)=1536", "dim(?a,1)%3=0", "dim(?a,1)%512=0"});
  auto v = verify_rearrangement(ok, cfg, rng);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->level, Validation::FormallyVerified);

  auto bad = make("(split{axis=1,size=500} ?a)", "(chunk{chunks=3,dim=1} ?a)", {"rank(?a)=2", "dim(?a,1)=1536"});
  v = verify_rearrangement(bad, cfg, rng);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->level, Validation::Rejected);
}

TEST(Rearrangement, DoubleTranspose) {
  ValidationConfig cfg;
  Rng rng(4);
  auto r = make("(transpose{dim0=0,dim1=2} (transpose{dim0=2,dim1=0} ?a))", "?a", {"rank(?a)=3"});
  auto v = verify_rearrangement(r, cfg, rng);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->level, Validation::FormallyVerified);
}

TEST(Shapes, SolverHonoursConstraints) {
  Rng rng(5);
  std::vector<ShapeConstraint> cs{parse_constraint("rank(?a)=2"), parse_constraint("dim(?a,1)=dim(?b,0)"),
                                  parse_constraint("dim(?a,0)%4=0")};
  auto s = solve_shapes(cs, {"a", "b"}, rng);
  ASSERT_TRUE(s);
  auto a = s->at({"a", -1}), b = s->at({"b", -1});
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1], b[0]);
  EXPECT_EQ(a[0] % 4, 0);
}

TEST(Shapes, UnsatisfiableIsEmpty) {
  Rng rng(6);
  std::vector<ShapeConstraint> cs{parse_constraint("dim(?a,1)=10"), parse_constraint("dim(?a,1)%3=0")};
  EXPECT_FALSE(solve_shapes(cs, {"a"}, rng));
  std::vector<ShapeConstraint> numel{parse_constraint("rank(?a)=1"), parse_constraint("numel(?a)=7"),
                                     parse_constraint("dim(?a,0)%2=0")};
  EXPECT_FALSE(solve_shapes(numel, {"a"}, rng));
}

TEST(Fuzz, AcceptsAttentionLayouts) {
  ValidationConfig cfg;
  std::vector<const char*> pre{"rank(?a)=4", "rank(?b)=4", "rank(?c)=4"};
  for (auto c : {"dim(?a,0)=dim(?b,0)", "dim(?a,1)=dim(?b,1)", "dim(?a,2)=dim(?b,2)", "dim(?a,3)=dim(?b,3)",
                 "dim(?a,0)=dim(?c,0)", "dim(?a,1)=dim(?c,1)", "dim(?a,2)=dim(?c,2)", "dim(?a,3)=dim(?c,3)"}) {
    pre.push_back(c);
  }
  auto v = validate(make(kAttnA, kAttnB, pre), cfg);
  EXPECT_EQ(v.level, Validation::EmpiricallyValidated) << v.reason;
  EXPECT_EQ(v.rule_class, RuleClass::OpaqueHeavy);
  EXPECT_GT(v.trials, 0);
}

TEST(Fuzz, RejectsGeluApproximation) {
  ValidationConfig cfg;
  auto v = validate(make("(gelu{approximate=tanh} ?a)", "(gelu ?a)"), cfg);
  EXPECT_EQ(v.level, Validation::Rejected);
  EXPECT_NE(v.reason.find("counterexample"), std::string::npos) << v.reason;
  EXPECT_NE(v.cex_hash, 0u);
}

TEST(Fuzz, EmbeddingIndicesStayInRange) {
  ValidationConfig cfg;
  auto r = make("(embedding ?a ?b)", "(transpose{dim0=0,dim1=1} (transpose{dim0=1,dim1=0} (embedding ?a ?b)))",
                {"rank(?a)=1", "rank(?b)=2"});
  auto v = validate(r, cfg);
  EXPECT_TRUE(v.accepted()) << v.reason;
}

TEST(Validate, VacuousRuleIsRejected) {
  ValidationConfig cfg;
  auto r = make("(split{axis=1,size=4} ?a)", "(chunk{chunks=3,dim=1} ?a)",
                {"rank(?a)=2", "dim(?a,1)=10", "dim(?a,1)%3=0", "dim(?a,1)%4=0"});
  auto v = validate(r, cfg);
  EXPECT_EQ(v.level, Validation::Rejected);
  EXPECT_NE(v.reason.find("vacuous"), std::string::npos) << v.reason;
}

TEST(Validate, VerdictIsSymmetricAndDeterministic) {
  ValidationConfig cfg;
  cfg.seed = 42;
  for (auto [l, r] : std::vector<std::pair<const char*, const char*>>{
           {"(add (mm ?a ?b) ?c)", "(linear ?a (transpose{dim0=0,dim1=1} ?b) ?c)"},
           {"(gelu{approximate=tanh} ?a)", "(gelu ?a)"},
           {"(add ?a ?b)", "(add ?b ?a)"}}) {
    auto fwd = validate(make(l, r), cfg);
    auto rev = validate(make(r, l), cfg);
    auto again = validate(make(l, r), cfg);
    EXPECT_EQ(fwd.level, rev.level) << l;
    EXPECT_EQ(fwd.cex_hash, rev.cex_hash) << l;
    EXPECT_EQ(fwd.reason, again.reason) << l;
    EXPECT_EQ(fwd.trials, again.trials) << l;
  }
}

TEST(Validate, FormalVerdictsSurviveHeavyFuzzing) {
  ValidationConfig cfg;
  cfg.trials = 256;
  for (auto [l, r, pre] : std::vector<std::tuple<const char*, const char*, std::vector<const char*>>>{
           {"(add (add ?a ?b) ?c)",
            "(add ?a (add ?b ?c))",
            {"rank(?a)=1", "rank(?b)=1", "rank(?c)=1", "dim(?a,0)=dim(?b,0)", "dim(?a,0)=dim(?c,0)"}},
           {"(split{axis=1,size=4} ?a)", "(chunk{chunks=3,dim=1} ?a)", {"rank(?a)=2", "dim(?a,1)=12"}},
           {"(transpose{dim0=0,dim1=1} (transpose{dim0=0,dim1=1} ?a))", "?a", {"rank(?a)=2"}}}) {
    auto rule = make(l, r, pre);
    ASSERT_EQ(validate(rule, ValidationConfig{}).level, Validation::FormallyVerified) << l;
    Rng rng(7);
    auto v = fuzz_validate(rule, cfg, rng);
    EXPECT_EQ(v.level, Validation::EmpiricallyValidated) << l << ": " << v.reason;
  }
}

TEST(Validate, LogLine) {
  auto r = make("(gelu{approximate=tanh} ?a)", "(gelu ?a)");
  r.id = 3;
  r.rule_class = RuleClass::OpaqueHeavy;
  r.validation = Validation::Rejected;
  r.cex_hash = 0xabcULL;
  EXPECT_EQ(verdict_log_line(r), "3 OpaqueHeavy Rejected 0000000000000abc");
}

}  // namespace
}  // namespace tgv
