// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <functional>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tgv/egraph.hpp"
#include "tgv/errors.hpp"
#include "tgv/fixtures.hpp"
#include "tgv/interp.hpp"

namespace tgv {
namespace {

using testing::attrs;

EGraph build(const ComputationGraph& a, const ComputationGraph& b) {
  return EGraph::init(join_graphs(a, b), run_graph(a), run_graph(b));
}

// Random DAG over [2,2] tensors: a few inputs, one constant, then unary and
// binary ops drawn from a small vocabulary.
ComputationGraph random_graph(Rng& rng, int nodes) {
  testing::GraphBuilder b;
  std::vector<NodeId> pool;
  for (int i = 0; i < 3; ++i) pool.push_back(b.input(testing::randn(rng, {2, 2})));
  Attrs c = attrs({{"value", 0.5}, {"shape", std::vector<int64_t>{2, 2}}});
  pool.push_back(b.op(OpKind::Constant, {}, c));
  while (static_cast<int>(pool.size()) < nodes) {
    auto pick = [&] { return pool[rng.below(pool.size())]; };
    switch (rng.below(4)) {
      case 0:
        pool.push_back(b.op(OpKind::Add, {pick(), pick()}));
        break;
      case 1:
        pool.push_back(b.op(OpKind::Mul, {pick(), pick()}));
        break;
      case 2:
        pool.push_back(b.op(OpKind::Gelu, {pick()}));
        break;
      default:
        pool.push_back(b.op(OpKind::Transpose, {pick()}, attrs({{"dim0", int64_t{0}}, {"dim1", int64_t{1}}})));
        break;
    }
  }
  return b.done({pool.back()});
}

// Naive congruence closure over joint nodes: repeatedly scan all pairs.
std::vector<int64_t> naive_closure(const JointGraph& jg, const std::vector<std::pair<int64_t, int64_t>>& merges) {
  size_t n = jg.nodes.size();
  std::vector<int64_t> uf(n);
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int64_t(int64_t)> find = [&](int64_t x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
  auto unite = [&](int64_t x, int64_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    uf[std::max(x, y)] = std::min(x, y);
    return true;
  };
  for (auto [x, y] : merges) unite(x, y);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        const auto& a = jg.nodes[i];
        const auto& b = jg.nodes[j];
        if (a.op != b.op || !(a.attrs == b.attrs) || a.children.size() != b.children.size()) continue;
        if (a.op == OpKind::Input) continue;
        if (a.op == OpKind::Constant && a.side != b.side) continue;
        bool same = true;
        for (size_t k = 0; k < a.children.size() && same; ++k) same = find(a.children[k]) == find(b.children[k]);
        if (same && unite(static_cast<int64_t>(i), static_cast<int64_t>(j))) changed = true;
      }
    }
  }
  std::vector<int64_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = find(static_cast<int64_t>(i));
  return out;
}

std::set<std::set<int64_t>> partition(const std::vector<int64_t>& label) {
  std::map<int64_t, std::set<int64_t>> groups;
  for (size_t i = 0; i < label.size(); ++i) groups[label[i]].insert(static_cast<int64_t>(i));
  std::set<std::set<int64_t>> out;
  for (auto& [k, s] : groups) out.insert(s);
  return out;
}

TEST(EGraph, CongruenceMatchesNaiveOracle) {
  auto start = std::chrono::steady_clock::now();
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto a = random_graph(rng, 5 + static_cast<int>(rng.below(11)));
    auto b = random_graph(rng, 5 + static_cast<int>(rng.below(11)));
    auto jg = join_graphs(a, b);
    ASSERT_LE(jg.nodes.size(), 30u);
    auto g = EGraph::init(jg, run_graph(a), run_graph(b));
    std::vector<std::pair<int64_t, int64_t>> merges;
    int k = static_cast<int>(rng.below(6));
    for (int i = 0; i < k; ++i) {
      auto x = static_cast<int64_t>(rng.below(jg.nodes.size()));
      auto y = static_cast<int64_t>(rng.below(jg.nodes.size()));
      merges.push_back({x, y});
      g.merge(g.class_of_joint(x), g.class_of_joint(y));
    }
    g.rebuild();
    ASSERT_TRUE(g.congruence_holds()) << "seed " << seed;
    std::vector<int64_t> label(jg.nodes.size());
    for (size_t i = 0; i < jg.nodes.size(); ++i) label[i] = g.class_of_joint(static_cast<int64_t>(i));
    ASSERT_EQ(partition(label), partition(naive_closure(jg, merges))) << "seed " << seed;
  }
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 10.0);
}

TEST(EGraph, FindAndMergeBasics) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto g = build(p.a, p.b);
  EXPECT_EQ(g.classes().size(), 9u);
  EXPECT_EQ(g.find(3), 3);
  EXPECT_THROW(g.find(999), UsageError);
  EXPECT_FALSE(g.merge(2, 2));
  // Joint order: i1 w1 b1 mm add | i2 w2 b2 linear.
  EXPECT_TRUE(g.merge(0, 5));
  EXPECT_EQ(g.find(0), g.find(5));
  EXPECT_TRUE(g.merge(7, 2));
  EXPECT_FALSE(g.merge(2, 7));
  EXPECT_EQ(g.find(7), 2);
  EXPECT_EQ(g.rebuild(), 0u);
  EXPECT_EQ(g.rebuild(), 0u);
}

TEST(EGraph, HashConsesWithinASideOnly) {
  testing::GraphBuilder b;
  auto x = b.input(testing::iota({2, 2}));
  auto w = b.input(testing::iota({2, 2}, 3));
  auto m1 = b.op(OpKind::Mm, {x, w});
  auto m2 = b.op(OpKind::Mm, {x, w});
  auto g1 = b.done({b.op(OpKind::Add, {m1, m2})});
  auto g = build(g1, g1);
  // Two mm nodes share a class per side; nothing is shared across sides.
  EXPECT_EQ(g.classes().size(), 8u);
}

TEST(EGraph, AddNodeMemoAndMissingValues) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto g = build(p.a, p.b);
  auto t = attrs({{"dim0", int64_t{0}}, {"dim1", int64_t{1}}});
  ClassId w2 = g.class_of_joint(p.a.nodes.size() + 1);
  ClassId aux = g.add_node(OpKind::Transpose, t, {w2});
  EXPECT_TRUE(g.has_tag(aux, kTagAux));
  ASSERT_TRUE(g.value(aux).has_value());
  EXPECT_TRUE(*g.value(aux) == *g.value(g.class_of_joint(1)));
  EXPECT_EQ(g.add_node(OpKind::Transpose, t, {w2}), aux);
  // An ill-typed node gets a class but no value.
  ClassId bad = g.add_node(OpKind::Mm, {}, {w2, w2});
  EXPECT_FALSE(g.value(bad).has_value());
}

TEST(EGraph, MergeKeepsSmallerIdsValueAndRefreshesParents) {
  testing::GraphBuilder ba;
  auto xa = ba.input(TensorValue::from({1}, {1.0}));
  auto ga = ba.done({ba.op(OpKind::Gelu, {xa})});
  testing::GraphBuilder bb;
  auto xb = bb.input(TensorValue::from({1}, {1.001}));
  auto gb = bb.done({bb.op(OpKind::Gelu, {xb})});
  auto g = build(ga, gb);
  g.merge(g.class_of_joint(2), g.class_of_joint(0));
  EXPECT_EQ(g.rebuild(), 1u);
  EXPECT_EQ(g.value(g.class_of_joint(2))->data[0], 1.0);
  EXPECT_EQ(g.class_of_joint(1), g.class_of_joint(3));
  EXPECT_TRUE(g.value_coherence_violations({1e-2, 1e-2}).empty());
}

TEST(EGraph, DependencySignaturesAlignAfterInputMerges) {
  auto p = gen_pair(parse_fixture_spec("fig2-linear"));
  auto jg = join_graphs(p.a, p.b);
  auto g = EGraph::init(jg, run_graph(p.a), run_graph(p.b));
  auto leaf = g.class_of_joint(0);
  EXPECT_EQ(g.dependency_signature(leaf).size(), 1u);
  auto add = g.class_of_joint(jg.outputs_a[0]);
  auto lin = g.class_of_joint(jg.outputs_b[0]);
  EXPECT_EQ(g.dependency_signature(add).size(), 3u);
  EXPECT_NE(g.dependency_signature(add), g.dependency_signature(lin));
  // i1~i2, b1~b2, w1~transpose(w2).
  auto idx = [&](Source s, NodeId id) { return g.class_of_joint(jg.index_of(s, id)); };
  g.merge(idx(Source::A, 1), idx(Source::B, 1));
  g.merge(idx(Source::A, 3), idx(Source::B, 3));
  auto aux = g.add_node(OpKind::Transpose, attrs({{"dim0", int64_t{0}}, {"dim1", int64_t{1}}}), {idx(Source::B, 2)});
  g.merge(idx(Source::A, 2), aux);
  g.rebuild();
  EXPECT_EQ(g.dependency_signature(add), g.dependency_signature(lin));
  EXPECT_FALSE(g.equiv(add, lin));
}

TEST(EGraph, DumpIsDeterministic) {
  auto p = gen_pair(parse_fixture_spec("gpt2-fragment"));
  EXPECT_EQ(build(p.a, p.b).dump(), build(p.a, p.b).dump());
  auto q = gen_pair(parse_fixture_spec("fig2-linear"));
  auto d = build(q.a, q.b).dump();
  EXPECT_NE(d.find("class 0 [A] f64[4,6]"), std::string::npos) << d;
}

}  // namespace
}  // namespace tgv
