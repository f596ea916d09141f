// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/egraph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "tgv/errors.hpp"
#include "tgv/interp.hpp"

namespace tgv {

std::string_view merge_reason_name(MergeReason r) {
  switch (r) {
    case MergeReason::Input:
      return "input";
    case MergeReason::Congruence:
      return "congruence";
    default:
      return "rule";
  }
}

EGraph EGraph::init(const JointGraph& jg, const std::map<NodeId, TensorValue>& values_a,
                    const std::map<NodeId, TensorValue>& values_b) {
  EGraph g;
  g.joint_enode_.reserve(jg.nodes.size());
  for (size_t i = 0; i < jg.nodes.size(); ++i) {
    const auto& jn = jg.nodes[i];
    ENode n;
    n.op = jn.op;
    n.attrs = jn.attrs;
    n.source = jn.side;
    n.origin = static_cast<int64_t>(i);
    n.depth = jn.depth;
    if (jn.op == OpKind::Input) n.leaf_tag = static_cast<int64_t>(i);
    if (jn.op == OpKind::Constant) n.leaf_tag = static_cast<int64_t>(jn.side);
    for (auto c : jn.children) {
      n.term_children.push_back(g.joint_enode_.at(c));
      n.children.push_back(g.find(g.joint_enode_.at(c)));
    }
    auto it = g.memo_.find(g.key_of(n));
    if (it != g.memo_.end()) {
      g.joint_enode_.push_back(it->second);
      continue;
    }
    const auto& values = jn.side == Source::A ? values_a : values_b;
    auto vit = values.find(jn.original);
    auto id = g.push_enode(std::move(n));
    if (vit != values.end()) g.classes_.at(id).value = vit->second;
    g.joint_enode_.push_back(id);
  }
  return g;
}

ENodeId EGraph::push_enode(ENode n) {
  auto id = static_cast<ENodeId>(nodes_.size());
  EClass cls;
  cls.members.push_back(id);
  cls.tags = n.source == Source::A ? kTagA : n.source == Source::B ? kTagB : kTagAux;
  cls.has_leaf = is_leaf_op(n.op);
  cls.depth = n.depth;
  for (auto c : n.children) classes_.at(find(c)).parents.push_back(id);
  memo_.emplace(key_of(n), id);
  nodes_.push_back(std::move(n));
  parent_.push_back(id);
  group_.push_back(id);
  classes_.emplace(id, std::move(cls));
  return id;
}

EGraph::Key EGraph::key_of(const ENode& n) const { return Key{n.op, n.attrs, n.leaf_tag, n.children}; }

void EGraph::canonicalize(ENode& n) const {
  for (auto& c : n.children) c = find(c);
}

ClassId EGraph::find(ClassId id) const {
  if (id < 0 || id >= static_cast<ClassId>(parent_.size())) {
    throw UsageError("unknown e-class id " + std::to_string(id));
  }
  ClassId root = id;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[id] != root) {
    auto next = parent_[id];
    parent_[id] = root;
    id = next;
  }
  return root;
}

const ENode& EGraph::enode(ENodeId id) const {
  if (id < 0 || id >= static_cast<ENodeId>(nodes_.size())) throw UsageError("unknown e-node id " + std::to_string(id));
  return nodes_[id];
}

const EClass& EGraph::eclass(ClassId id) const { return classes_.at(find(id)); }

std::vector<ClassId> EGraph::classes() const {
  std::vector<ClassId> out;
  out.reserve(classes_.size());
  for (const auto& [id, _] : classes_) out.push_back(id);
  return out;
}

ClassId EGraph::add_node(OpKind op, Attrs attrs, std::vector<ClassId> children) {
  ENode n;
  n.op = op;
  n.attrs = std::move(attrs);
  for (auto& c : children) c = find(c);
  n.children = children;
  n.term_children = children;
  auto it = memo_.find(key_of(n));
  if (it != memo_.end()) return find(it->second);
  std::vector<TensorValue> args;
  int depth = 0;
  bool all_values = true;
  for (auto c : children) {
    const auto& cls = classes_.at(c);
    depth = std::max(depth, cls.depth + 1);
    if (cls.value) {
      args.push_back(*cls.value);
    } else {
      all_values = false;
    }
  }
  n.depth = depth;
  std::optional<TensorValue> value;
  if (all_values) {
    try {
      value = eval_op(op, n.attrs, args);
    } catch (const Error&) {
      value.reset();
    }
  }
  auto id = push_enode(std::move(n));
  classes_.at(id).value = std::move(value);
  return id;
}

int64_t EGraph::group_find(int64_t g) const {
  while (group_[g] != g) {
    group_[g] = group_[group_[g]];
    g = group_[g];
  }
  return g;
}

std::vector<int64_t> EGraph::reachable_groups(ClassId c) const {
  std::set<int64_t> groups;
  std::set<ClassId> seen;
  std::vector<ClassId> stack{find(c)};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    for (auto m : classes_.at(cur).members) {
      const auto& n = nodes_[m];
      if (is_leaf_op(n.op)) {
        groups.insert(group_find(m));
        continue;
      }
      for (auto ch : n.children) stack.push_back(find(ch));
    }
  }
  return {groups.begin(), groups.end()};
}

const std::vector<int64_t>& EGraph::dependency_signature(ClassId id) const {
  auto c = find(id);
  auto it = sig_cache_.find(c);
  if (it != sig_cache_.end()) return it->second;
  return sig_cache_.emplace(c, reachable_groups(c)).first->second;
}

bool EGraph::merge(ClassId a, ClassId b, MergeReason reason) {
  auto ra = find(a), rb = find(b);
  if (ra == rb) return false;
  log_.push_back({a, b, reason});
  // A leaf class that absorbs a computation over other leaves ties their
  // groups together, so both sides see the same dependency signature.
  auto tie_groups = [this](ClassId leafy, ClassId other) {
    if (!classes_.at(leafy).has_leaf) return;
    auto reach = reachable_groups(other);
    for (auto m : classes_.at(leafy).members) {
      if (!is_leaf_op(nodes_[m].op)) continue;
      for (auto gr : reach) {
        auto x = group_find(m), y = group_find(gr);
        if (x != y) group_[std::max(x, y)] = std::min(x, y);
      }
    }
  };
  tie_groups(ra, rb);
  tie_groups(rb, ra);
  auto root = std::min(ra, rb), other = std::max(ra, rb);
  auto node = classes_.extract(other);
  EClass& dst = classes_.at(root);
  EClass& src = node.mapped();
  dst.members.insert(dst.members.end(), src.members.begin(), src.members.end());
  dst.parents.insert(dst.parents.end(), src.parents.begin(), src.parents.end());
  if (!dst.value) dst.value = std::move(src.value);
  dst.tags |= src.tags;
  dst.has_leaf = dst.has_leaf || src.has_leaf;
  dst.depth = std::min(dst.depth, src.depth);
  parent_[other] = root;
  worklist_.push_back(root);
  sig_cache_.clear();
  return true;
}

size_t EGraph::rebuild() {
  size_t merges = 0;
  std::vector<ClassId> changed;
  for (;;) {
    while (!worklist_.empty()) {
      std::set<ClassId> todo;
      for (auto c : worklist_) todo.insert(find(c));
      worklist_.clear();
      for (auto c : todo) {
        changed.push_back(c);
        auto parents = classes_.at(find(c)).parents;
        for (auto p : parents) {
          auto& pn = nodes_[p];
          auto old = memo_.find(key_of(pn));
          if (old != memo_.end() && old->second == p) memo_.erase(old);
          canonicalize(pn);
          auto [it, inserted] = memo_.emplace(key_of(pn), p);
          if (!inserted && find(it->second) != find(p)) {
            merge(it->second, p, MergeReason::Congruence);
            ++merges;
          }
        }
        auto& cls = classes_.at(find(c));
        std::sort(cls.parents.begin(), cls.parents.end());
        cls.parents.erase(std::unique(cls.parents.begin(), cls.parents.end()), cls.parents.end());
      }
    }
    // Full sweep: confirms the fixpoint and catches keys left stale by
    // duplicate memo entries.
    memo_.clear();
    for (ENodeId id = 0; id < static_cast<ENodeId>(nodes_.size()); ++id) {
      canonicalize(nodes_[id]);
      auto [it, inserted] = memo_.emplace(key_of(nodes_[id]), id);
      if (!inserted && find(it->second) != find(id)) {
        merge(it->second, id, MergeReason::Congruence);
        ++merges;
      }
    }
    if (worklist_.empty()) break;
  }
  refresh_values(changed);
  return merges;
}

std::optional<TensorValue> EGraph::eval_member(ENodeId id) const {
  const auto& n = nodes_[id];
  std::vector<TensorValue> args;
  for (auto c : n.children) {
    const auto& v = classes_.at(find(c)).value;
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  try {
    return eval_op(n.op, n.attrs, args);
  } catch (const Error& e) {
    throw EngineError("re-executing e-node " + std::to_string(id) + " (" + std::string(op_name(n.op)) + "): " + e.what());
  }
}

void EGraph::refresh_values(const std::vector<ClassId>& changed) {
  std::deque<ClassId> queue;
  std::set<ClassId> seeded;
  for (auto c : changed) {
    if (seeded.insert(find(c)).second) queue.push_back(find(c));
  }
  size_t budget = 16 * nodes_.size() + 64;
  while (!queue.empty() && budget > 0) {
    auto c = find(queue.front());
    queue.pop_front();
    auto parents = classes_.at(c).parents;
    for (auto p : parents) {
      --budget;
      auto pc = find(p);
      auto& cls = classes_.at(pc);
      if (cls.has_leaf) continue;
      // The class root is always one of its members; re-execute that one so
      // refreshes cannot oscillate between members.
      auto v = eval_member(pc);
      if (!v) continue;
      if (!cls.value || !(*v == *cls.value)) {
        cls.value = std::move(v);
        queue.push_back(pc);
      }
    }
  }
}

bool EGraph::congruence_holds() const {
  std::map<Key, ClassId> seen;
  for (const auto& n : nodes_) {
    ENode copy = n;
    canonicalize(copy);
    auto id = static_cast<ENodeId>(&n - nodes_.data());
    auto [it, inserted] = seen.emplace(key_of(copy), find(id));
    if (!inserted && it->second != find(id)) return false;
  }
  return true;
}

std::vector<ENodeId> EGraph::value_coherence_violations(const Tolerance& tol) const {
  std::vector<ENodeId> bad;
  for (const auto& [id, cls] : classes_) {
    if (!cls.value) continue;
    for (auto m : cls.members) {
      if (is_leaf_op(nodes_[m].op)) continue;
      try {
        auto v = eval_member(m);
        if (v && !values_match(*v, *cls.value, tol)) bad.push_back(m);
      } catch (const EngineError&) {
        bad.push_back(m);
      }
    }
  }
  return bad;
}

std::string EGraph::dump() const {
  std::ostringstream out;
  for (const auto& [id, cls] : classes_) {
    out << "class " << id << " [";
    std::string tags;
    if (cls.tags & kTagA) tags += "A,";
    if (cls.tags & kTagB) tags += "B,";
    if (cls.tags & kTagAux) tags += "aux,";
    if (!tags.empty()) tags.pop_back();
    out << tags << "] " << (cls.value ? describe(*cls.value) : std::string("no-value")) << "\n";
    for (auto m : cls.members) {
      const auto& n = nodes_[m];
      out << "  n" << m << " " << op_name(n.op) << format_attrs(n.attrs);
      if (n.leaf_tag >= 0) out << "#" << n.leaf_tag;
      out << "(";
      for (size_t i = 0; i < n.children.size(); ++i) out << (i ? "," : "") << find(n.children[i]);
      out << ")\n";
    }
  }
  return out.str();
}

}  // namespace tgv
