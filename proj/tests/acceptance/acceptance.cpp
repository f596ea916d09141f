// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tgv/apply.hpp"
#include "tgv/driver.hpp"
#include "tgv/fixtures.hpp"
#include "tgv/synth.hpp"

using namespace tgv;

namespace {

constexpr uint64_t kSeed = 1;

struct Check {
  bool ok = true;
  std::ostringstream why;
  void fail(const std::string& msg) {
    if (!ok) why << "; ";
    ok = false;
    why << msg;
  }
};

Config base_config() {
  Config cfg;
  cfg.seed = kSeed;
  return cfg;
}

std::set<std::string> rule_keys(const std::vector<Rule>& catalogue) {
  std::set<std::string> out;
  for (const auto& r : catalogue) {
    if (r.validation == Validation::Rejected) continue;
    auto c = canonical_names(r);
    out.insert(render(c.lhs) + " <=> " + render(c.rhs));
  }
  return out;
}

const Rule* find_rule(const std::vector<Rule>& cat, OpKind op) {
  for (const auto& r : cat) {
    if (contains_op(r.lhs, op) || contains_op(r.rhs, op)) return &r;
  }
  return nullptr;
}

// 1. Every suite fixture verifies as equivalent within the time budget.
void criterion1(Check& c) {
  for (const auto& spec : suite_specs(kSeed)) {
    auto p = gen_pair(spec);
    auto t0 = std::chrono::steady_clock::now();
    auto r = compare(p.a, p.b, base_config());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.outcome != Outcome::Equivalent) c.fail(spec.name + " is " + std::string(outcome_name(r.outcome)));
    if (secs >= 30.0) c.fail(spec.name + " took " + std::to_string(secs) + "s");
  }
}

// 2. Synthesized rules are the general forms.
void criterion2(Check& c) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear", kSeed));
  auto cfg = base_config();
  size_t audits = 0;
  cfg.on_rule = [&](const EGraph& g, ClassId u, ClassId v, const Rule& rule) {
    ++audits;
    if (!generality_audit(rule, g, u, v).ok) c.fail("fig2 rule " + std::to_string(rule.id) + " is over-specific");
  };
  auto r = compare(p.a, p.b, cfg);
  if (r.catalogue.size() != 1) {
    c.fail("fig2 produced " + std::to_string(r.catalogue.size()) + " rules");
  } else {
    Rule folded = r.catalogue[0];
    folded.lhs = fold_compounds(folded.lhs);
    folded.rhs = fold_compounds(folded.rhs);
    Rule expect;
    expect.lhs = parse_pattern("(linear ?a (transpose{dim0=0,dim1=1} ?c) ?b)");
    expect.rhs = parse_pattern("(addmm ?b ?a ?c)");
    if (!alpha_equivalent(folded, expect)) c.fail("fig2 rule is " + render(folded.lhs) + " <=> " + render(folded.rhs));
  }
  if (audits == 0) c.fail("observer never called");

  // On gpt2 the linear rule must not capture the layernorm feeding it, and a
  // rule that does is flagged by the audit.
  auto q = gen_pair(parse_fixture_spec("gpt2-fragment", kSeed));
  Rule narrow;
  narrow.lhs = parse_pattern("(addmm ?a (layernorm ?b ?g ?h) ?c)");
  narrow.rhs = parse_pattern("(linear (layernorm ?b ?g ?h) (transpose{dim0=0,dim1=1} ?c) ?a)");
  bool narrow_checked = false;
  auto cfg2 = base_config();
  cfg2.on_rule = [&](const EGraph& g, ClassId u, ClassId v, const Rule& rule) {
    if (!generality_audit(rule, g, u, v).ok) c.fail("gpt2 rule " + std::to_string(rule.id) + " is over-specific");
    if (!contains_op(rule.lhs, OpKind::Addmm) && !contains_op(rule.rhs, OpKind::Addmm)) return;
    if (contains_op(rule.lhs, OpKind::LayerNorm) || contains_op(rule.rhs, OpKind::LayerNorm)) {
      c.fail("gpt2 linear rule mentions layernorm");
    }
    if (!apply_rules({narrow}, g, u, v)) return;
    narrow_checked = true;
    auto audit = generality_audit(narrow, g, u, v);
    if (audit.ok) c.fail("layernorm-specialized rule passed the audit");
  };
  auto r2 = compare(q.a, q.b, cfg2);
  if (r2.outcome != Outcome::Equivalent) c.fail("gpt2 not equivalent");
  if (!narrow_checked) c.fail("layernorm-specialized rule never matched a provenance pair");
}

// 3. gpt2 rearrangement is formally verified, attention empirically.
void criterion3(Check& c) {
  auto p = gen_pair(parse_fixture_spec("gpt2-fragment", kSeed));
  auto r = compare(p.a, p.b, base_config());
  auto* split = find_rule(r.catalogue, OpKind::Split);
  auto* attn = find_rule(r.catalogue, OpKind::FusedAttention);
  if (!split || split->validation != Validation::FormallyVerified) c.fail("split/chunk rule not formally verified");
  if (!attn || attn->validation != Validation::EmpiricallyValidated) c.fail("attention rule not empirically validated");
  auto logged = [&](const Rule* rule, const char* level) {
    if (!rule) return false;
    auto prefix = std::to_string(rule->id) + " ";
    for (const auto& line : r.verdict_log) {
      if (line.rfind(prefix, 0) == 0 && line.find(level) != std::string::npos) return true;
    }
    return false;
  };
  if (!logged(split, "FormallyVerified")) c.fail("split verdict missing from log");
  if (!logged(attn, "EmpiricallyValidated")) c.fail("attention verdict missing from log");
}

// 4. Deeper models reuse the same rules; applications grow with depth.
void criterion4(Check& c) {
  auto p1 = gen_pair(parse_fixture_spec("tiny-transformer(1)", kSeed));
  auto p4 = gen_pair(parse_fixture_spec("tiny-transformer(4)", kSeed));
  auto r1 = compare(p1.a, p1.b, base_config());
  auto r4 = compare(p4.a, p4.b, base_config());
  if (r1.outcome != Outcome::Equivalent || r4.outcome != Outcome::Equivalent) c.fail("not equivalent");
  if (rule_keys(r1.catalogue) != rule_keys(r4.catalogue)) {
    c.fail("unique rules differ: " + std::to_string(r1.stats.unique_rules) + " vs " +
           std::to_string(r4.stats.unique_rules));
  }
  if (r4.stats.rule_instances < 4 * r1.stats.rule_instances) {
    c.fail("instances " + std::to_string(r4.stats.rule_instances) + " < 4 x " +
           std::to_string(r1.stats.rule_instances));
  }
  c.why << (c.ok ? "" : "; ") << "instances " << r1.stats.rule_instances << " -> " << r4.stats.rule_instances;
}

// 5. Injected bugs are refuted and localized.
void criterion5(Check& c) {
  const std::map<BugKind, int> golden{{BugKind::GeluApproxSwap, 0},
                                      {BugKind::MissingAttnScale, 0},
                                      {BugKind::WrongRotationTranspose, 1},
                                      {BugKind::MissingClip, 0},
                                      {BugKind::WrongSplitSemantics, 1}};
  int l0 = 0;
  for (auto bug : all_bugs()) {
    auto p = gen_pair(parse_fixture_spec("tiny-transformer", kSeed));
    inject_bug(p, bug);
    auto r = compare(p.a, p.b, base_config());
    std::string name(bug_name(bug));
    if (r.outcome != Outcome::NotEquivalent) {
      c.fail(name + " is " + std::string(outcome_name(r.outcome)));
      continue;
    }
    if (!r.report) {
      c.fail(name + " has no report");
      continue;
    }
    int level = localization_level(p, *r.report);
    if (level == 0) ++l0;
    if (level != golden.at(bug)) c.fail(name + " localized at L" + std::to_string(level));
  }
  if (l0 < 3) c.fail("only " + std::to_string(l0) + " bugs at L0");
}

// 6. Every merge holds on independently drawn inputs.
void criterion6(Check& c) {
  for (const char* name : {"gpt2-fragment", "tiny-transformer(2)", "fused-qkv"}) {
    auto p = gen_pair(parse_fixture_spec(name, kSeed));
    auto r = compare(p.a, p.b, base_config());
    if (!r.graph) {
      c.fail(std::string(name) + " has no graph");
      continue;
    }
    for (uint64_t s = 1000; s < 1008; ++s) {
      auto fresh = gen_pair(parse_fixture_spec(name, s));
      if (auto n = soundness_violations(*r.graph, fresh.a, fresh.b, {1e-2, 1e-2})) {
        c.fail(std::string(name) + " seed " + std::to_string(s) + ": " + std::to_string(n) + " violations");
      }
    }
  }
}

// 7. Final e-graphs are congruence-closed, checked against a naive pairwise scan.
void criterion7(Check& c) {
  for (const auto& spec : suite_specs(kSeed)) {
    auto p = gen_pair(spec);
    auto r = compare(p.a, p.b, base_config());
    const auto& g = *r.graph;
    size_t n = g.num_enodes(), broken = 0;
    for (ENodeId x = 0; x < static_cast<ENodeId>(n); ++x) {
      const auto& ex = g.enode(x);
      for (ENodeId y = x + 1; y < static_cast<ENodeId>(n); ++y) {
        const auto& ey = g.enode(y);
        if (ex.op != ey.op || ex.leaf_tag != ey.leaf_tag || !(ex.attrs == ey.attrs)) continue;
        if (ex.children.size() != ey.children.size()) continue;
        bool same = true;
        for (size_t k = 0; k < ex.children.size() && same; ++k) same = g.equiv(ex.children[k], ey.children[k]);
        if (same && !g.equiv(x, y)) ++broken;
      }
    }
    if (broken) c.fail(spec.name + ": " + std::to_string(broken) + " congruent pairs unmerged");
    if (!g.congruence_holds()) c.fail(spec.name + ": congruence_holds is false");
  }
}

// 8. A split that does not divide evenly is never proven equivalent.
void criterion8(Check& c) {
  auto spec = parse_fixture_spec("split-chunk", kSeed);
  spec.hidden = 10;
  auto p = gen_pair(spec);
  auto r = compare(p.a, p.b, base_config());
  if (r.outcome == Outcome::Equivalent) c.fail("reported equivalent");
  bool rejected = false;
  for (const auto& rule : r.catalogue) rejected |= rule.validation == Validation::Rejected;
  if (!rejected) c.fail("no rule rejected");
  c.why << (c.ok ? "" : "; ") << "outcome " << outcome_name(r.outcome);
}

// 9. Two runs produce byte-identical reports and catalogues.
void criterion9(Check& c) {
  for (const char* name : {"gpt2-fragment", "tiny-transformer(2)"}) {
    auto p = gen_pair(parse_fixture_spec(name, kSeed));
    auto r1 = compare(p.a, p.b, base_config());
    auto r2 = compare(p.a, p.b, base_config());
    if (emit_report(r1, ReportFormat::Text) != emit_report(r2, ReportFormat::Text)) c.fail(std::string(name) + " text");
    if (emit_report(r1, ReportFormat::Lines) != emit_report(r2, ReportFormat::Lines)) {
      c.fail(std::string(name) + " lines");
    }
    if (render_catalogue(r1.catalogue) != render_catalogue(r2.catalogue)) c.fail(std::string(name) + " catalogue");
  }
  auto p = gen_pair(parse_fixture_spec("tiny-transformer", kSeed));
  inject_bug(p, BugKind::GeluApproxSwap);
  if (emit_report(compare(p.a, p.b, base_config()), ReportFormat::Lines) !=
      emit_report(compare(p.a, p.b, base_config()), ReportFormat::Lines)) {
    c.fail("bug report");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"suite fixtures equivalent", criterion1},    {"rule generality", criterion2},
      {"verification levels", criterion3},          {"rule reuse across depth", criterion4},
      {"bug detection and localization", criterion5}, {"merge soundness", criterion6},
      {"congruence closure", criterion7},            {"non-divisible split", criterion8},
      {"determinism", criterion9}};
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.fail(std::string("exception: ") + e.what());
    }
    failed += c.ok ? 0 : 1;
    auto detail = c.why.str();
    std::printf("criterion %zu: %s %s%s%s\n", i + 1, c.ok ? "PASS" : "FAIL", criteria[i].first,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
