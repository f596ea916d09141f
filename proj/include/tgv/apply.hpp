// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgv/egraph.hpp"
#include "tgv/rule.hpp"

namespace tgv {

using Substitution = std::map<std::string, ClassId>;

/// All substitutions extending `partial` under which `p` matches some member
/// of class `c`. Deterministic order, no duplicates.
std::vector<Substitution> match_pattern(const EGraph& g, const Pattern& p, ClassId c, const Substitution& partial = {});

/// True iff every precondition holds on the values the substitution binds.
bool preconditions_hold(const EGraph& g, const Rule& rule, const Substitution& s);

struct ApplyHit {
  size_t rule_index = 0;
  Substitution subst;
  bool swapped = false;  // rhs matched at u
};

/// First rule (in order) with a substitution matching one side at u and the
/// other at v with its preconditions satisfied.
std::optional<ApplyHit> apply_rules(const std::vector<Rule>& rules, const EGraph& g, ClassId u, ClassId v,
                                    size_t max_substitutions = 256);

}  // namespace tgv
