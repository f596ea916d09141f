// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tgv/egraph.hpp"
#include "tgv/graph.hpp"
#include "tgv/relation.hpp"
#include "tgv/rule.hpp"
#include "tgv/synth.hpp"
#include "tgv/validate.hpp"

namespace tgv {

/// Called after a rule is synthesized and validated, with the e-graph as it
/// was when the pair (u, v) was considered.
using RuleObserver = std::function<void(const EGraph& g, ClassId u, ClassId v, const Rule& rule)>;

struct Config {
  int max_iterations = 2;
  Tolerance match_tol{1e-2, 1e-2};
  ValidationConfig validation;  // atol 1e-4, 32 trials
  CandidateBudget candidates;
  SynthBudget synth;
  size_t max_candidates = 512;
  size_t max_synth_attempts = 128;
  uint64_t seed = 0;
  std::vector<Rule> seed_rules;
  std::set<OpKind> transparent{OpKind::Reshape, OpKind::Transpose, OpKind::GetItem};
  RuleObserver on_rule;
};

enum class Outcome : uint8_t { Equivalent, NotEquivalent, Inconclusive };
std::string_view outcome_name(Outcome o);

struct NodeRef {
  Source side = Source::A;
  NodeId id = 0;
  OpKind op = OpKind::Input;
  Attrs attrs;
  std::string value;  // short summary

  std::string label() const;  // "A:12 gelu{approximate=tanh}"
};

struct MismatchReport {
  NodeRef a;
  NodeRef b;
  std::string level_hint;          // "L0" when both frontier nodes stop cleanly, else "L1"
  std::vector<std::string> path;   // traversal from the outputs, both sides
  std::vector<std::string> skipped;  // transparent nodes passed over at the stop
  std::string reason;
};

struct Stats {
  int iterations = 0;
  size_t candidates = 0;
  size_t blocked = 0;
  size_t synth_attempts = 0;
  size_t synth_accepted = 0;
  size_t synth_rejected = 0;
  size_t apply_successes = 0;
  size_t unique_rules = 0;
  size_t rule_instances = 0;
  size_t formally_verified = 0;
  size_t empirically_validated = 0;
  size_t merges_input = 0;
  size_t merges_rule = 0;
  size_t merges_congruence = 0;
};

struct CompareResult {
  Outcome outcome = Outcome::Inconclusive;
  std::optional<MismatchReport> report;
  std::vector<Rule> catalogue;  // every synthesized rule, accepted or not, by id
  std::vector<std::string> verdict_log;
  Stats stats;
  JointGraph joint;
  std::optional<EGraph> graph;
};

CompareResult compare(const ComputationGraph& a, const ComputationGraph& b, const Config& cfg = {});

/// Backward traversal from the unmerged output pairs. Precondition: some
/// output pair is unmerged.
MismatchReport localize(const EGraph& g, const JointGraph& jg, const Config& cfg = {});

enum class ReportFormat : uint8_t { Text, Lines };
std::string emit_report(const CompareResult& r, ReportFormat format);

/// Re-evaluates every e-node's term on the fresh graphs (same structure, new
/// values) and counts members whose value disagrees with their class's first
/// evaluable member.
size_t soundness_violations(const EGraph& g, const ComputationGraph& fresh_a, const ComputationGraph& fresh_b,
                            const Tolerance& tol);

}  // namespace tgv
