// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgv/egraph.hpp"
#include "tgv/tensor.hpp"

namespace tgv {

/// Layout transformation over source values:
///   E -> transpose(E, i, j) | concat(E, ..., E, axis) | reshape(E, shape)
///      | split(E, size, axis)[index]
struct TransformExpr {
  enum class Kind : uint8_t { Source, Transpose, Concat, Reshape, SplitItem };
  Kind kind = Kind::Source;
  Attrs attrs;     // dim0/dim1 | axis | shape | size/axis/index
  int source = 0;  // Source leaves: index into the source list
  std::vector<TransformExpr> children;

  static TransformExpr src(int index = 0);
  bool is_identity() const { return kind == Kind::Source; }
  friend bool operator==(const TransformExpr&, const TransformExpr&) = default;
};

std::string render(const TransformExpr& t);
size_t transform_size(const TransformExpr& t);  // operator count
int transform_depth(const TransformExpr& t);

TensorValue apply_transform(const TransformExpr& t, std::span<const TensorValue> sources);

/// Inverse of a single-source transform, given the source shape; none for
/// transforms that drop elements (split items).
std::optional<TransformExpr> invert_transform(const TransformExpr& t, const Shape& source_shape);

struct TransformBudget {
  int max_depth = 2;
  int max_concat = 4;
};

/// Smallest single-source t with apply(t, b) matching a; ties broken by
/// constructor order (transpose, concat, reshape, split). Returns the
/// identity when a already matches b.
std::optional<TransformExpr> synthesize_transform(const TensorValue& a, const TensorValue& b,
                                                  const TransformBudget& budget = {},
                                                  const Tolerance& tol = {0.0, 0.0});

/// a == concat(parts..., axis) for some ordered choice of 2..max_concat
/// partner values (indices into `partners`).
std::optional<std::pair<TransformExpr, std::vector<int>>> synthesize_concat(const TensorValue& a,
                                                                            std::span<const TensorValue> partners,
                                                                            int max_concat = 4);

/// Adds aux nodes realizing t over the source classes; returns the top class.
ClassId insert_auxiliary(EGraph& g, std::span<const ClassId> sources, const TransformExpr& t);

struct CandidateRelation {
  ClassId u = -1;  // side A class
  ClassId v = -1;  // side B class
  // When set, apply(via, value(v)) reproduces value(u) (or the reverse when
  // via_on_u is true).
  std::optional<TransformExpr> via;
  bool via_on_u = false;
  int depth = 0;
};

std::string describe(const CandidateRelation& c);

/// Leaf-level heuristics: exact value matches, matches modulo one
/// transpose, and sub-tensor matches of fused parameters via split.
std::vector<CandidateRelation> match_inputs(const EGraph& g, const Tolerance& tol);

struct CandidateBudget {
  size_t max_direct = 512;
  size_t max_transform_attempts = 64;
  TransformBudget grammar;
};

struct CandidateStats {
  size_t compared = 0;  // pairs that reached values_match
  size_t blocked = 0;   // cross-side pairs skipped by signature blocking
  size_t transform_attempts = 0;
};

/// Cross-side class pairs with equal dependency signatures and matching
/// values, ordered by (max depth, u, v); followed by transformed candidates
/// for classes without a direct partner.
std::vector<CandidateRelation> find_candidate_relations(const EGraph& g, const Tolerance& tol,
                                                        const CandidateBudget& budget = {},
                                                        CandidateStats* stats = nullptr);

}  // namespace tgv
