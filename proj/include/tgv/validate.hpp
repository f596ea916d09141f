// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgv/random.hpp"
#include "tgv/rule.hpp"

namespace tgv {

struct Verdict {
  Validation level = Validation::Unvalidated;
  std::optional<RuleClass> rule_class;
  int trials = 0;
  std::string reason;
  uint64_t cex_hash = 0;

  bool accepted() const {
    return level == Validation::FormallyVerified || level == Validation::EmpiricallyValidated;
  }
};

struct ValidationConfig {
  Tolerance tol{1e-4, 0.0};
  int trials = 32;
  int retries = 8;
  int shape_instances = 5;
  int64_t dim_lo = 1;
  int64_t dim_hi = 16;
  uint64_t seed = 0;
};

/// Returns a rejection reason, or nothing when the rule is well formed.
std::optional<std::string> precheck(const Rule& rule);

RuleClass classify(const Rule& rule);

/// Shapes per (variable, tuple element); element -1 for plain tensors.
using ShapeAssignment = std::map<std::pair<std::string, int>, Shape>;

/// Solves the constraints with sizes drawn from [lo, hi]. `vars` lists the
/// variables that need shapes even when unconstrained (default rank 2).
std::optional<ShapeAssignment> solve_shapes(const std::vector<ShapeConstraint>& constraints,
                                             const std::vector<std::string>& vars, Rng& rng, int64_t lo = 1,
                                             int64_t hi = 16);

/// Decision procedure over polynomial normal forms of add/mul/constant
/// terms. Nothing means "unknown" (fall through to fuzzing).
std::optional<Verdict> verify_scalar(const Rule& rule, Rng& rng);

/// Evaluates both sides on tensors whose elements are distinct ids under
/// several solved shape instantiations. Nothing means the lowering did not
/// apply.
std::optional<Verdict> verify_rearrangement(const Rule& rule, const ValidationConfig& cfg, Rng& rng);

Verdict fuzz_validate(const Rule& rule, const ValidationConfig& cfg, Rng& rng);

/// Full pipeline. Deterministic for a given config seed and independent of
/// the rule's orientation and variable names.
Verdict validate(const Rule& rule, const ValidationConfig& cfg);

/// `<rule-id> <class> <verdict> [cex-hash]`
std::string verdict_log_line(const Rule& rule);

}  // namespace tgv
