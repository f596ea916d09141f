// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "tgv/errors.hpp"
#include "tgv/interp.hpp"
#include "tgv/random.hpp"

namespace tgv {

std::string_view bug_name(BugKind b) {
  switch (b) {
    case BugKind::GeluApproxSwap:
      return "gelu-approx-swap";
    case BugKind::MissingAttnScale:
      return "missing-attn-scale";
    case BugKind::WrongRotationTranspose:
      return "wrong-rotation-transpose";
    case BugKind::MissingClip:
      return "missing-clip";
    case BugKind::WrongSplitSemantics:
      return "wrong-split-semantics";
  }
  return "?";
}

std::vector<BugKind> all_bugs() {
  return {BugKind::GeluApproxSwap, BugKind::MissingAttnScale, BugKind::WrongRotationTranspose, BugKind::MissingClip,
          BugKind::WrongSplitSemantics};
}

std::optional<BugKind> bug_from_name(std::string_view name) {
  for (auto b : all_bugs()) {
    if (bug_name(b) == name) return b;
  }
  return std::nullopt;
}

FixtureSpec parse_fixture_spec(std::string_view text, uint64_t seed) {
  static const std::regex re(R"(([a-z0-9-]+)(?:\((\d+)\)|:(\d+))?)");
  std::cmatch m;
  if (!std::regex_match(text.begin(), text.end(), m, re)) throw UsageError("bad fixture spec: " + std::string(text));
  FixtureSpec s;
  s.name = m[1].str();
  s.seed = seed;
  if (m[2].matched) s.layers = std::stoi(m[2].str());
  if (m[3].matched) s.layers = std::stoi(m[3].str());
  static const std::vector<std::string> known{"fig2-linear",     "split-chunk",   "transposed-weights", "fused-qkv",
                                              "attention-fused", "gpt2-fragment", "tiny-transformer"};
  if (std::find(known.begin(), known.end(), s.name) == known.end()) throw UsageError("unknown fixture: " + s.name);
  if (s.layers < 1 || s.layers > 4) throw UsageError("layers must be in [1, 4]");
  return s;
}

std::vector<FixtureSpec> suite_specs(uint64_t seed) {
  std::vector<FixtureSpec> out;
  for (const char* n : {"fig2-linear", "split-chunk", "transposed-weights", "fused-qkv", "attention-fused",
                        "gpt2-fragment", "tiny-transformer(2)"}) {
    out.push_back(parse_fixture_spec(n, seed));
  }
  return out;
}

namespace {

class Builder {
 public:
  explicit Builder(std::map<NodeId, std::string>& blocks, std::map<std::string, NodeId>& named)
      : blocks_(blocks), named_(named) {}

  std::string block = "main";

  NodeId input(TensorValue v) {
    auto id = add(OpKind::Input, {}, {});
    g.inputs[id] = std::move(v);
    return id;
  }
  NodeId constant(double value, Shape shape = {}) {
    Attrs a;
    a.set("value", value);
    a.set("shape", std::vector<int64_t>(shape.begin(), shape.end()));
    return add(OpKind::Constant, std::move(a), {});
  }
  NodeId add(OpKind op, Attrs attrs, std::vector<NodeId> children) {
    NodeId id = next_++;
    g.nodes[id] = Node{id, op, std::move(attrs), std::move(children)};
    blocks_[id] = block;
    return id;
  }
  NodeId name(const std::string& n, NodeId id) {
    named_[n] = id;
    return id;
  }

  ComputationGraph g;

 private:
  std::map<NodeId, std::string>& blocks_;
  std::map<std::string, NodeId>& named_;
  NodeId next_ = 1;
};

Attrs attrs_of(std::initializer_list<std::pair<const char*, AttrValue>> kv) {
  Attrs a;
  for (const auto& [k, v] : kv) a.set(k, v);
  return a;
}

TensorValue randn(Rng& rng, Shape shape, double scale = 1.0, double shift = 0.0) {
  auto t = TensorValue::zeros(std::move(shape));
  for (auto& x : t.data) x = shift + scale * rng.normal();
  return t;
}

TensorValue transpose2d(const TensorValue& w) {
  auto t = TensorValue::zeros({w.shape[1], w.shape[0]});
  for (int64_t i = 0; i < w.shape[0]; ++i) {
    for (int64_t j = 0; j < w.shape[1]; ++j) t.data[j * w.shape[0] + i] = w.data[i * w.shape[1] + j];
  }
  return t;
}

TensorValue rows(const TensorValue& w, int64_t begin, int64_t count) {
  int64_t inner = w.rank() > 1 ? w.shape[1] : 1;
  Shape s = w.shape;
  s[0] = count;
  auto t = TensorValue::zeros(s);
  std::copy(w.data.begin() + begin * inner, w.data.begin() + (begin + count) * inner, t.data.begin());
  return t;
}

struct Pair {
  Builder a, b;
  Pair(FixturePair& p) : a(p.block_a, p.named_a), b(p.block_b, p.named_b) {}
  void set_block(const std::string& s) { a.block = b.block = s; }
  // Same value bound on both sides.
  std::pair<NodeId, NodeId> input(const TensorValue& v) { return {a.input(v), b.input(v)}; }
};

void fig2_linear(FixturePair& p, Rng& rng, const FixtureSpec& s) {
  int64_t S = s.seq ? s.seq : 4, E = s.hidden ? s.hidden : 6, O = 5;
  Pair P(p);
  auto x = randn(rng, {S, E});
  auto w = randn(rng, {E, O}, 1.0 / std::sqrt(static_cast<double>(E)));
  auto bias = randn(rng, {O});
  auto i1 = P.a.input(x), w1 = P.a.input(w), b1 = P.a.input(bias);
  auto mm = P.a.add(OpKind::Mm, {}, {i1, w1});
  P.a.g.outputs = {P.a.add(OpKind::Add, {}, {mm, b1})};
  auto i2 = P.b.input(x), w2 = P.b.input(transpose2d(w)), b2 = P.b.input(bias);
  P.b.g.outputs = {P.b.add(OpKind::Linear, {}, {i2, w2, b2})};
  p.a = std::move(P.a.g);
  p.b = std::move(P.b.g);
}

void split_chunk(FixturePair& p, Rng& rng, const FixtureSpec& s) {
  int64_t S = s.seq ? s.seq : 4, E = s.hidden ? s.hidden : 12;
  int64_t size = (E + 2) / 3;
  Pair P(p);
  auto [xa, xb] = P.input(randn(rng, {S, E}));
  auto sp = P.a.add(OpKind::Split, attrs_of({{"size", size}, {"axis", int64_t{1}}}), {xa});
  auto ch = P.b.add(OpKind::Chunk, attrs_of({{"chunks", int64_t{3}}, {"dim", int64_t{1}}}), {xb});
  int64_t parts = (E + size - 1) / size;
  for (int64_t i = 0; i < std::min<int64_t>(parts, 3); ++i) {
    P.a.g.outputs.push_back(P.a.add(OpKind::GetItem, attrs_of({{"index", i}}), {sp}));
    P.b.g.outputs.push_back(P.b.add(OpKind::GetItem, attrs_of({{"index", i}}), {ch}));
  }
  p.a = std::move(P.a.g);
  p.b = std::move(P.b.g);
}

void transposed_weights(FixturePair& p, Rng& rng, const FixtureSpec& s) {
  int64_t S = s.seq ? s.seq : 4, E = s.hidden ? s.hidden : 6, O = 5;
  Pair P(p);
  auto x = randn(rng, {2, S, E});
  auto w = randn(rng, {E, O}, 1.0 / std::sqrt(static_cast<double>(E)));
  auto xa = P.a.input(x), wa = P.a.input(w);
  P.a.g.outputs = {P.a.add(OpKind::Matmul, {}, {xa, wa})};
  auto xb = P.b.input(x), wb = P.b.input(transpose2d(w));
  P.b.g.outputs = {P.b.add(OpKind::Linear, {}, {xb, wb})};
  p.a = std::move(P.a.g);
  p.b = std::move(P.b.g);
}

void fused_qkv(FixturePair& p, Rng& rng, const FixtureSpec& s) {
  int64_t S = s.seq ? s.seq : 3, E = s.hidden ? s.hidden : 4;
  Pair P(p);
  auto x = randn(rng, {S, E});
  auto w = randn(rng, {3 * E, E}, 1.0 / std::sqrt(static_cast<double>(E)));
  auto bias = randn(rng, {3 * E});
  auto xa = P.a.input(x), wa = P.a.input(w), ba = P.a.input(bias);
  auto lin = P.a.add(OpKind::Linear, {}, {xa, wa, ba});
  auto sp = P.a.add(OpKind::Split, attrs_of({{"size", E}, {"axis", int64_t{1}}}), {lin});
  auto xb = P.b.input(x);
  for (int64_t i = 0; i < 3; ++i) {
    P.a.g.outputs.push_back(P.a.add(OpKind::GetItem, attrs_of({{"index", i}}), {sp}));
    auto wi = P.b.input(rows(w, i * E, E));
    auto bi = P.b.input(rows(bias, i * E, E));
    P.b.g.outputs.push_back(P.b.add(OpKind::Linear, {}, {xb, wi, bi}));
  }
  p.a = std::move(P.a.g);
  p.b = std::move(P.b.g);
}

void attention_fused(FixturePair& p, Rng& rng, const FixtureSpec& s) {
  int64_t S = s.seq ? s.seq : 4, H = s.heads ? s.heads : 2, E = s.hidden ? s.hidden : 8, D = E / H;
  Pair P(p);
  auto t12 = attrs_of({{"dim0", int64_t{1}}, {"dim1", int64_t{2}}});
  std::vector<NodeId> ta, b_in;
  for (int i = 0; i < 3; ++i) {
    auto [a, b] = P.input(randn(rng, {1, S, H, D}));
    ta.push_back(P.a.add(OpKind::Transpose, t12, {a}));
    b_in.push_back(b);
  }
  auto att = P.a.add(OpKind::ScaledDotProductAttention, {}, ta);
  P.a.g.outputs = {P.a.add(OpKind::Transpose, t12, {att})};
  P.b.g.outputs = {P.b.add(OpKind::FusedAttention, {}, b_in)};
  p.a = std::move(P.a.g);
  p.b = std::move(P.b.g);
}

// GPT-2 style blocks. Side A follows the Conv1D layout (addmm with [in,out]
// weights, split, sdpa over [B,H,S,D]); side B uses linear, chunk and a fused
// attention kernel over [B,S,H,D].
void transformer(FixturePair& p, Rng& rng, const FixtureSpec& s, int layers, bool final_ln) {
  int64_t S = s.seq ? s.seq : 5, E = s.hidden ? s.hidden : 8, H = s.heads ? s.heads : 2;
  int64_t D = E / H, M = 2 * E, V = 11;
  if (E % H != 0 || D % 2 != 0) throw UsageError("hidden must split into heads of even size");
  Pair P(p);
  auto& A = P.a;
  auto& B = P.b;
  auto scale = [](int64_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };
  auto t = [](int64_t x, int64_t y) { return attrs_of({{"dim0", x}, {"dim1", y}}); };
  auto shape = [](std::vector<int64_t> v) { return attrs_of({{"shape", v}}); };

  P.set_block("embed");
  auto ids = TensorValue::zeros({S}, DType::I64);
  for (auto& x : ids.data) x = static_cast<double>(rng.below(static_cast<uint64_t>(V)));
  auto [ida, idb] = P.input(ids);
  auto [wtea, wteb] = P.input(randn(rng, {V, E}));
  auto [wpea, wpeb] = P.input(randn(rng, {S, E}, 0.1));
  NodeId ha = A.add(OpKind::Add, {}, {A.add(OpKind::Embedding, {}, {ida, wtea}), wpea});
  NodeId hb = B.add(OpKind::Add, {}, {B.add(OpKind::Embedding, {}, {idb, wteb}), wpeb});

  // Linear layer: A gets addmm(bias, x, W[in,out]), B gets linear(x, W^T, bias).
  auto dense = [&](NodeId xa, NodeId xb, int64_t in, int64_t out, NodeId* ra, NodeId* rb) {
    auto w = randn(rng, {in, out}, scale(in));
    auto bias = randn(rng, {out}, 0.1);
    auto wa = A.input(w), ba = A.input(bias);
    auto wb = B.input(transpose2d(w)), bb = B.input(bias);
    *ra = A.add(OpKind::Addmm, {}, {ba, xa, wa});
    *rb = B.add(OpKind::Linear, {}, {xb, wb, bb});
  };
  auto layernorm = [&](NodeId xa, NodeId xb, NodeId* ra, NodeId* rb) {
    auto [ga, gb] = P.input(randn(rng, {E}, 0.1, 1.0));
    auto [ba, bb] = P.input(randn(rng, {E}, 0.1));
    *ra = A.add(OpKind::LayerNorm, {}, {xa, ga, ba});
    *rb = B.add(OpKind::LayerNorm, {}, {xb, gb, bb});
  };
  // Rotary stand-in: swap the two halves' interleaving within each head.
  auto rotate = [&](Builder& X, NodeId x, const std::string& tag) {
    auto r = X.add(OpKind::Reshape, shape({1, S, H, 2, D / 2}), {x});
    auto tr = X.name(tag, X.add(OpKind::Transpose, t(3, 4), {r}));
    return X.add(OpKind::Reshape, shape({1, S, H, D}), {tr});
  };

  for (int l = 0; l < layers; ++l) {
    std::string L = "L" + std::to_string(l) + ".";
    P.set_block(L + "attn");
    NodeId la, lb, qa, qb;
    layernorm(ha, hb, &la, &lb);
    dense(la, lb, E, 3 * E, &qa, &qb);
    auto ca = A.name(L + "clip", A.add(OpKind::Mul, {}, {qa, A.constant(0.5)}));
    auto cb = B.name(L + "clip", B.add(OpKind::Mul, {}, {qb, B.constant(0.5)}));
    auto sp = A.add(OpKind::Split, attrs_of({{"size", E}, {"axis", int64_t{1}}}), {ca});
    auto ch = B.name(L + "chunk", B.add(OpKind::Chunk, attrs_of({{"chunks", int64_t{3}}, {"dim", int64_t{1}}}), {cb}));
    std::vector<NodeId> qkv_a, qkv_b;
    for (int64_t i = 0; i < 3; ++i) {
      auto ga = A.add(OpKind::GetItem, attrs_of({{"index", i}}), {sp});
      auto gb = B.name(L + "item" + std::to_string(i), B.add(OpKind::GetItem, attrs_of({{"index", i}}), {ch}));
      auto ra = A.add(OpKind::Reshape, shape({1, S, H, D}), {ga});
      auto rb = B.add(OpKind::Reshape, shape({1, S, H, D}), {gb});
      if (i < 2) {
        std::string tag = L + (i == 0 ? "rot_q" : "rot_k");
        ra = rotate(A, ra, tag);
        rb = rotate(B, rb, tag);
      }
      qkv_a.push_back(A.add(OpKind::Transpose, t(1, 2), {ra}));
      qkv_b.push_back(rb);
    }
    auto att_a = A.name(L + "attn",
                        A.add(OpKind::ScaledDotProductAttention, attrs_of({{"scale", 1.0}}), qkv_a));
    auto att_b = B.name(L + "attn", B.add(OpKind::FusedAttention, attrs_of({{"scale", 1.0}}), qkv_b));
    auto oa = A.add(OpKind::Reshape, shape({S, E}), {A.add(OpKind::Transpose, t(1, 2), {att_a})});
    auto ob = B.add(OpKind::Reshape, shape({S, E}), {att_b});
    NodeId pa, pb;
    dense(oa, ob, E, E, &pa, &pb);
    ha = A.add(OpKind::Add, {}, {ha, pa});
    hb = B.add(OpKind::Add, {}, {hb, pb});

    P.set_block(L + "mlp");
    NodeId na, nb, ua, ub, da, db;
    layernorm(ha, hb, &na, &nb);
    dense(na, nb, E, M, &ua, &ub);
    auto tanh = attrs_of({{"approximate", std::string("tanh")}});
    auto gea = A.name(L + "gelu", A.add(OpKind::Gelu, tanh, {ua}));
    auto geb = B.name(L + "gelu", B.add(OpKind::Gelu, tanh, {ub}));
    dense(gea, geb, M, E, &da, &db);
    ha = A.add(OpKind::Add, {}, {ha, da});
    hb = B.add(OpKind::Add, {}, {hb, db});
  }
  if (final_ln) {
    P.set_block("final");
    layernorm(ha, hb, &ha, &hb);
  }
  A.g.outputs = {ha};
  B.g.outputs = {hb};
  p.a = std::move(A.g);
  p.b = std::move(B.g);
}

double divergence(const ComputationGraph& a, const ComputationGraph& b) { return output_divergence(a, b); }

}  // namespace

double output_divergence(const ComputationGraph& a, const ComputationGraph& b) {
  auto va = run_graph(a);
  auto vb = run_graph(b);
  if (a.outputs.size() != b.outputs.size()) throw UsageError("output counts differ");
  double worst = 0.0;
  for (size_t i = 0; i < a.outputs.size(); ++i) {
    worst = std::max(worst, max_abs_diff(va.at(a.outputs[i]), vb.at(b.outputs[i])));
  }
  return worst;
}

FixturePair gen_pair(const FixtureSpec& spec) {
  FixturePair p;
  Rng rng(spec.seed * 0x9e3779b97f4a7c15ULL + 0x5eed);
  if (spec.name == "fig2-linear") {
    fig2_linear(p, rng, spec);
  } else if (spec.name == "split-chunk") {
    split_chunk(p, rng, spec);
  } else if (spec.name == "transposed-weights") {
    transposed_weights(p, rng, spec);
  } else if (spec.name == "fused-qkv") {
    fused_qkv(p, rng, spec);
  } else if (spec.name == "attention-fused") {
    attention_fused(p, rng, spec);
  } else if (spec.name == "gpt2-fragment") {
    transformer(p, rng, spec, 1, false);
  } else if (spec.name == "tiny-transformer") {
    transformer(p, rng, spec, spec.layers, true);
  } else {
    throw UsageError("unknown fixture: " + spec.name);
  }
  validate_graph(p.a);
  validate_graph(p.b);
  double d = divergence(p.a, p.b);
  if (!(d <= 1e-9)) throw EngineError("fixture " + spec.name + " fails its differential check (" + std::to_string(d) + ")");
  return p;
}

void inject_bug(FixturePair& p, BugKind bug) {
  auto& g = p.b;
  auto need = [&](const std::string& name) {
    auto it = p.named_b.find(name);
    if (it == p.named_b.end() || !g.nodes.count(it->second)) {
      throw StructureError(std::string(bug_name(bug)) + ": side B has no " + name);
    }
    return it->second;
  };
  p.roots_a.clear();
  p.roots_b.clear();
  switch (bug) {
    case BugKind::GeluApproxSwap: {
      auto id = need("L0.gelu");
      auto& n = g.nodes.at(id);
      bool tanh = n.attrs.get_string("approximate", "exact") == "tanh";
      n.attrs.set("approximate", std::string(tanh ? "exact" : "tanh"));
      p.roots_b = {id};
      if (p.named_a.count("L0.gelu")) p.roots_a = {p.named_a.at("L0.gelu")};
      break;
    }
    case BugKind::MissingAttnScale: {
      auto id = need("L0.attn");
      g.nodes.at(id).attrs.erase("scale");
      p.roots_b = {id};
      if (p.named_a.count("L0.attn")) p.roots_a = {p.named_a.at("L0.attn")};
      break;
    }
    case BugKind::WrongRotationTranspose: {
      auto id = need("L0.rot_k");
      auto& n = g.nodes.at(id);
      n.attrs.set("dim0", int64_t{2});
      n.attrs.set("dim1", int64_t{3});
      p.roots_b = {id};
      break;
    }
    case BugKind::MissingClip: {
      auto clip = need("L0.clip");
      auto chunk = need("L0.chunk");
      auto& n = g.nodes.at(clip);
      NodeId src = n.children[0];
      NodeId c = n.children[1];
      g.nodes.at(chunk).children[0] = src;
      g.nodes.erase(clip);
      g.nodes.erase(c);
      p.block_b.erase(clip);
      p.block_b.erase(c);
      p.named_b.erase("L0.clip");
      p.roots_b = {chunk};
      if (p.named_a.count("L0.clip")) p.roots_a = {p.named_a.at("L0.clip")};
      break;
    }
    case BugKind::WrongSplitSemantics: {
      auto q = need("L0.item0");
      auto k = need("L0.item1");
      g.nodes.at(q).attrs.set("index", int64_t{1});
      g.nodes.at(k).attrs.set("index", int64_t{0});
      p.roots_b = {q, k};
      break;
    }
  }
  validate_graph(g);
  double d = output_divergence(p.a, p.b);
  if (!(d > 1e-4)) {
    throw EngineError(std::string(bug_name(bug)) + " does not change the outputs observably (" + std::to_string(d) + ")");
  }
}

int localization_level(const FixturePair& p, const MismatchReport& r) {
  auto in = [](const std::vector<NodeId>& v, NodeId id) { return std::find(v.begin(), v.end(), id) != v.end(); };
  if (in(p.roots_a, r.a.id) || in(p.roots_b, r.b.id)) return 0;
  auto block = [](const std::map<NodeId, std::string>& m, NodeId id) {
    auto it = m.find(id);
    return it == m.end() ? std::string() : it->second;
  };
  std::set<std::string> root_blocks;
  for (auto id : p.roots_a) root_blocks.insert(block(p.block_a, id));
  for (auto id : p.roots_b) root_blocks.insert(block(p.block_b, id));
  if (root_blocks.count(block(p.block_a, r.a.id)) || root_blocks.count(block(p.block_b, r.b.id))) return 1;
  return 2;
}

}  // namespace tgv
