// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgv/driver.hpp"
#include "tgv/graph.hpp"

namespace tgv {

enum class BugKind : uint8_t { GeluApproxSwap, MissingAttnScale, WrongRotationTranspose, MissingClip, WrongSplitSemantics };
std::string_view bug_name(BugKind b);
std::optional<BugKind> bug_from_name(std::string_view name);
std::vector<BugKind> all_bugs();

/// Names: fig2-linear, split-chunk, transposed-weights, fused-qkv,
/// attention-fused, gpt2-fragment, tiny-transformer. Zero dims mean the
/// fixture's defaults.
struct FixtureSpec {
  std::string name;
  uint64_t seed = 0;
  int layers = 1;  // tiny-transformer only
  int64_t seq = 0;
  int64_t hidden = 0;
  int64_t heads = 0;
};

/// Accepts "name", "tiny-transformer(3)" and "tiny-transformer:3".
FixtureSpec parse_fixture_spec(std::string_view text, uint64_t seed = 0);

/// The seven non-injected specs of the equivalence suite.
std::vector<FixtureSpec> suite_specs(uint64_t seed = 0);

struct FixturePair {
  ComputationGraph a;
  ComputationGraph b;
  std::map<NodeId, std::string> block_a;  // functional block per node
  std::map<NodeId, std::string> block_b;
  std::map<std::string, NodeId> named_a;  // landmarks used by bug injection
  std::map<std::string, NodeId> named_b;
  std::vector<NodeId> roots_a;  // nodes counting as the exact bug site
  std::vector<NodeId> roots_b;
};

/// Deterministic in the spec; graph structure and node ids do not depend on
/// the seed. Throws EngineError if the pair fails its own differential check.
FixturePair gen_pair(const FixtureSpec& spec);

/// Applies one semantic mutation to side B. Throws StructureError when the
/// target is absent and EngineError if the outputs do not diverge.
void inject_bug(FixturePair& pair, BugKind bug);

/// Largest output difference between the two sides under the interpreter.
double output_divergence(const ComputationGraph& a, const ComputationGraph& b);

/// 0 when the report names a root node, 1 when it lands in a root's block,
/// 2 otherwise.
int localization_level(const FixturePair& pair, const MismatchReport& report);

}  // namespace tgv
