// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tgv/ops.hpp"
#include "tgv/tensor.hpp"

namespace tgv {

using NodeId = int64_t;

enum class Source : uint8_t { A = 0, B = 1, Aux = 2 };
std::string_view source_name(Source s);

struct Node {
  NodeId id = 0;
  OpKind op = OpKind::Input;
  Attrs attrs;
  std::vector<NodeId> children;
};

/// A validated DAG of operator applications. Input leaves carry their bound
/// values; constants carry theirs in attributes.
struct ComputationGraph {
  std::map<NodeId, Node> nodes;
  std::map<NodeId, TensorValue> inputs;  // ordered by id
  std::vector<NodeId> outputs;

  const Node& node(NodeId id) const;
};

/// Parses and validates the JSON graph format. Throws ParseError,
/// SchemaError or CycleError.
ComputationGraph parse_graph(std::string_view text);

/// Inverse of parse_graph; deterministic (nodes sorted by id).
std::string serialize_graph(const ComputationGraph& g);

/// Structural validation shared by the parser and the fixture generator.
/// Normalizes negative axes in place.
void validate_graph(ComputationGraph& g);

/// Children-before-parents order; ties broken by ascending id.
std::vector<NodeId> topo_order(const ComputationGraph& g);

/// Longest path from any leaf, per node (leaves have depth 0).
std::map<NodeId, int> node_depths(const ComputationGraph& g);

struct JointNode {
  Source side = Source::A;
  NodeId original = 0;  // id in the source graph
  OpKind op = OpKind::Input;
  Attrs attrs;
  std::vector<int64_t> children;  // joint indices
  int depth = 0;
};

/// Disjoint union of two graphs. Joint index = position in `nodes`; side A
/// nodes come first, each side in topological order.
struct JointGraph {
  ComputationGraph graph_a;
  ComputationGraph graph_b;
  std::vector<JointNode> nodes;
  std::vector<int64_t> outputs_a;  // joint indices
  std::vector<int64_t> outputs_b;
  std::map<NodeId, int64_t> index_a;  // original id -> joint index
  std::map<NodeId, int64_t> index_b;

  int64_t index_of(Source side, NodeId id) const;
  size_t edge_count() const;
};

JointGraph join_graphs(const ComputationGraph& a, const ComputationGraph& b);

/// JSON encoding of a tensor value: {"shape":[..],"dtype":"f64","data":[..]}.
/// Exposed for tools and tests.
std::string tensor_to_json(const TensorValue& v);
TensorValue tensor_from_json(std::string_view text);

}  // namespace tgv
