// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>

#include "tgv/graph.hpp"
#include "tgv/ops.hpp"
#include "tgv/tensor.hpp"

namespace tgv {

inline constexpr double kDefaultLayerNormEps = 1e-5;

/// Reference semantics of every operator in the vocabulary. Deterministic
/// sequential summation order. Throws ShapeError, DomainError, AttrError.
///
/// Layouts: scaled_dot_product_attention takes [..., seq, dim] (typically
/// [batch, heads, seq, dim]); fused_attention takes [batch, seq, heads, dim],
/// or [batch, seq, heads*dim] together with the `heads` attribute.
TensorValue eval_op(OpKind op, const Attrs& attrs, std::span<const TensorValue> inputs);

/// Evaluates every node in topological order. `bindings` overrides the
/// graph's own input values when present.
std::map<NodeId, TensorValue> run_graph(const ComputationGraph& g, const std::map<NodeId, TensorValue>& bindings);

/// run_graph with the graph's bound input values.
std::map<NodeId, TensorValue> run_graph(const ComputationGraph& g);

}  // namespace tgv
