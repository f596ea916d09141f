// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tgv/egraph.hpp"
#include "tgv/rule.hpp"

namespace tgv {

struct SynthBudget {
  size_t max_frontier = 8;
  size_t max_stream = 512;
  int max_depth = 6;
};

/// One element of a class's frontier stream. Atoms have member == -1;
/// otherwise `picks` index into the child streams (one level shallower).
struct FrontierEntry {
  std::vector<ClassId> frontier;  // sorted canonical ids
  ENodeId member = -1;
  std::vector<uint32_t> picks;
  int metric = 0;  // sum of picks
};

/// Memoized, lazily materialized frontier streams. Order per class: the
/// atom {c} first, then for each member e-node (insertion order) the
/// Cartesian product of child streams in diagonal order, members merged by
/// (diagonal, member order). Leaves yield only their atom.
class FrontierEnumerator {
 public:
  FrontierEnumerator(const EGraph& g, SynthBudget budget = {});

  const std::vector<FrontierEntry>& stream(ClassId c) { return stream(c, budget_.max_depth); }
  const std::vector<FrontierEntry>& stream(ClassId c, int depth);

  /// Pattern of the entry; variables are named "#<class id>".
  Pattern pattern(ClassId c, int depth, size_t index);
  Pattern pattern(ClassId c, size_t index) { return pattern(c, budget_.max_depth, index); }

  const SynthBudget& budget() const { return budget_; }

 private:
  const EGraph& g_;
  SynthBudget budget_;
  std::map<std::pair<ClassId, int>, std::vector<FrontierEntry>> memo_;
};

/// Convenience: the first `limit` entries of a class's stream as
/// (frontier, pattern) pairs.
std::vector<std::pair<std::vector<ClassId>, Pattern>> enumerate_frontier_patterns(const EGraph& g, ClassId c,
                                                                                  size_t limit,
                                                                                  SynthBudget budget = {});

struct SynthResult {
  Rule rule;
  std::vector<ClassId> frontier;
  std::map<std::string, ClassId> binding;  // variable -> frontier class
  size_t index_u = 0;
  size_t index_v = 0;
};

/// Most general rule relating u and v: the shared frontier minimizing
/// (i + j, i) over the two streams, with shape preconditions harvested from
/// the frontier values.
std::optional<SynthResult> synthesize_rule(const EGraph& g, ClassId u, ClassId v, SynthBudget budget = {});

/// Preconditions for a rule given the concrete values bound to its variables.
std::vector<ShapeConstraint> harvest_preconditions(const Pattern& lhs, const Pattern& rhs,
                                                   const std::map<std::string, TensorValue>& env);

struct AuditResult {
  bool ok = true;
  std::optional<Rule> witness;  // the more general rule, when over-specific
};

/// Whether a more general rule exists for (u, v) than the one given.
AuditResult generality_audit(const Rule& rule, const EGraph& g, ClassId u, ClassId v, SynthBudget budget = {});

}  // namespace tgv
