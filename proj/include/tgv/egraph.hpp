// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgv/graph.hpp"
#include "tgv/ops.hpp"
#include "tgv/tensor.hpp"

namespace tgv {

// Every e-node gets a dense id; a class is named by the id of its root e-node,
// so class ids and e-node ids share one space.
using ClassId = int64_t;
using ENodeId = int64_t;

enum class MergeReason : uint8_t { Input, Congruence, Rule };
std::string_view merge_reason_name(MergeReason r);

inline constexpr uint8_t kTagA = 1;
inline constexpr uint8_t kTagB = 2;
inline constexpr uint8_t kTagAux = 4;

struct ENode {
  OpKind op = OpKind::Input;
  Attrs attrs;
  std::vector<ClassId> children;  // canonical after rebuild
  // Distinguishes leaves: inputs get a unique tag, constants the side index
  // (so identical constants are shared within a side only). -1 otherwise.
  int64_t leaf_tag = -1;
  Source source = Source::Aux;
  int64_t origin = -1;  // joint index for captured nodes, -1 for aux
  // The concrete child e-nodes this node was built over. Captured nodes use
  // their original children; aux nodes the child class roots at creation.
  std::vector<ENodeId> term_children;
  int depth = 0;
};

struct EClass {
  std::vector<ENodeId> members;  // insertion order
  std::vector<ENodeId> parents;
  std::optional<TensorValue> value;
  uint8_t tags = 0;
  bool has_leaf = false;
  int depth = 0;  // minimum member depth
};

struct MergeRecord {
  ENodeId x = 0;
  ENodeId y = 0;
  MergeReason reason = MergeReason::Rule;
};

class EGraph {
 public:
  /// Builds the joint e-graph: one class per joint node (within-side
  /// hash-consing may share structurally identical nodes) with values attached.
  static EGraph init(const JointGraph& jg, const std::map<NodeId, TensorValue>& values_a,
                     const std::map<NodeId, TensorValue>& values_b);

  ClassId find(ClassId id) const;
  bool equiv(ClassId a, ClassId b) const { return find(a) == find(b); }

  /// Unions two classes. Returns false if they were already equal.
  bool merge(ClassId a, ClassId b, MergeReason reason = MergeReason::Rule);

  /// Restores congruence and refreshes values along changed parents. Returns
  /// the number of congruence merges.
  size_t rebuild();

  /// Adds (or finds) an aux e-node over canonicalized children. The value is
  /// computed eagerly when every child has one; eval errors leave it unset.
  ClassId add_node(OpKind op, Attrs attrs, std::vector<ClassId> children);

  const ENode& enode(ENodeId id) const;
  const EClass& eclass(ClassId id) const;  // canonicalizes
  const std::optional<TensorValue>& value(ClassId id) const { return eclass(id).value; }
  bool has_tag(ClassId id, uint8_t tag) const { return (eclass(id).tags & tag) != 0; }

  size_t num_enodes() const { return nodes_.size(); }
  std::vector<ClassId> classes() const;  // canonical ids, ascending

  ENodeId enode_of_joint(int64_t joint_index) const { return joint_enode_.at(joint_index); }
  ClassId class_of_joint(int64_t joint_index) const { return find(joint_enode_.at(joint_index)); }
  size_t num_joint() const { return joint_enode_.size(); }

  /// Sorted ids of the leaf groups reachable from the class. Leaf classes
  /// that were merged with each other, or with a transform of another leaf,
  /// share a group.
  const std::vector<int64_t>& dependency_signature(ClassId id) const;

  const std::vector<MergeRecord>& merge_log() const { return log_; }

  /// True iff no two e-nodes with equal canonical keys live in distinct classes.
  bool congruence_holds() const;

  /// Members whose recomputed value (from child class values) disagrees with
  /// the class value.
  std::vector<ENodeId> value_coherence_violations(const Tolerance& tol) const;

  /// Deterministic listing of canonical classes, members and value shapes.
  std::string dump() const;

  /// Key used for hash-consing: op, attrs, leaf tag and canonical children.
  struct Key {
    OpKind op;
    Attrs attrs;
    int64_t leaf_tag;
    std::vector<ClassId> children;
    auto operator<=>(const Key& o) const {
      if (auto c = op <=> o.op; c != 0) return c;
      if (attrs < o.attrs) return std::strong_ordering::less;
      if (o.attrs < attrs) return std::strong_ordering::greater;
      if (auto c = leaf_tag <=> o.leaf_tag; c != 0) return c;
      return children <=> o.children;
    }
    bool operator==(const Key& o) const = default;
  };

 private:
  ENodeId push_enode(ENode n);
  Key key_of(const ENode& n) const;
  void canonicalize(ENode& n) const;
  std::vector<int64_t> reachable_groups(ClassId c) const;
  int64_t group_find(int64_t g) const;
  void refresh_values(const std::vector<ClassId>& changed);
  std::optional<TensorValue> eval_member(ENodeId id) const;

  std::vector<ENode> nodes_;
  mutable std::vector<ClassId> parent_;  // union-find over e-node ids
  std::map<ClassId, EClass> classes_;    // canonical only
  std::map<Key, ENodeId> memo_;
  std::vector<ClassId> worklist_;
  std::vector<ENodeId> joint_enode_;
  mutable std::vector<int64_t> group_;  // leaf-group union-find, by e-node id
  mutable std::map<ClassId, std::vector<int64_t>> sig_cache_;
  std::vector<MergeRecord> log_;
};

}  // namespace tgv
