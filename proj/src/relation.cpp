// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/relation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tgv/errors.hpp"
#include "tgv/interp.hpp"

namespace tgv {

TransformExpr TransformExpr::src(int index) {
  TransformExpr t;
  t.kind = Kind::Source;
  t.source = index;
  return t;
}

namespace {

TransformExpr unary(TransformExpr::Kind kind, Attrs attrs, TransformExpr child) {
  TransformExpr t;
  t.kind = kind;
  t.attrs = std::move(attrs);
  t.children.push_back(std::move(child));
  return t;
}

std::string_view kind_name(TransformExpr::Kind k) {
  switch (k) {
    case TransformExpr::Kind::Transpose:
      return "transpose";
    case TransformExpr::Kind::Concat:
      return "concat";
    case TransformExpr::Kind::Reshape:
      return "reshape";
    case TransformExpr::Kind::SplitItem:
      return "split";
    default:
      return "src";
  }
}

Attrs split_attrs(const Attrs& a) { return Attrs{{"size", a.get_int("size")}, {"axis", a.get_int("axis")}}; }

TensorValue apply_step(TransformExpr::Kind kind, const Attrs& attrs, std::span<const TensorValue> args) {
  switch (kind) {
    case TransformExpr::Kind::Transpose:
      return eval_op(OpKind::Transpose, attrs, args);
    case TransformExpr::Kind::Concat:
      return eval_op(OpKind::Concat, attrs, args);
    case TransformExpr::Kind::Reshape:
      return eval_op(OpKind::Reshape, attrs, args);
    case TransformExpr::Kind::SplitItem: {
      auto parts = eval_op(OpKind::Split, split_attrs(attrs), args);
      TensorValue tuple[] = {parts};
      return eval_op(OpKind::GetItem, Attrs{{"index", attrs.get_int("index")}}, tuple);
    }
    default:
      throw UsageError("source has no step semantics");
  }
}

std::vector<int64_t> divisors_below(int64_t n) {
  std::vector<int64_t> out;
  for (int64_t s = 1; s < n; ++s) {
    if (n % s == 0) out.push_back(s);
  }
  return out;
}

// Candidate unary steps over a value of the given shape, in constructor
// order. Reshape targets are the goal shape and its single-swap variants.
std::vector<std::pair<TransformExpr::Kind, Attrs>> unary_steps(const Shape& shape, const Shape& goal) {
  std::vector<std::pair<TransformExpr::Kind, Attrs>> steps;
  auto r = static_cast<int64_t>(shape.size());
  for (int64_t i = 0; i < r; ++i) {
    for (int64_t j = i + 1; j < r; ++j) steps.push_back({TransformExpr::Kind::Transpose, Attrs{{"dim0", i}, {"dim1", j}}});
  }
  if (numel(shape) == numel(goal)) {
    std::vector<Shape> targets{goal};
    for (size_t i = 0; i < goal.size(); ++i) {
      for (size_t j = i + 1; j < goal.size(); ++j) {
        Shape s = goal;
        std::swap(s[i], s[j]);
        if (std::find(targets.begin(), targets.end(), s) == targets.end()) targets.push_back(s);
      }
    }
    for (const auto& t : targets) {
      if (t != shape) steps.push_back({TransformExpr::Kind::Reshape, Attrs{{"shape", t}}});
    }
  }
  for (int64_t axis = 0; axis < r; ++axis) {
    for (auto s : divisors_below(shape[axis])) {
      for (int64_t idx = 0; idx < shape[axis] / s; ++idx) {
        steps.push_back({TransformExpr::Kind::SplitItem, Attrs{{"size", s}, {"axis", axis}, {"index", idx}}});
      }
    }
  }
  return steps;
}

void flatten_chain(const TransformExpr& t, std::vector<const TransformExpr*>& steps) {
  if (t.kind == TransformExpr::Kind::Source) return;
  if (t.children.size() != 1) throw UsageError("not a single-source chain");
  flatten_chain(t.children[0], steps);
  steps.push_back(&t);
}

}  // namespace

std::string render(const TransformExpr& t) {
  if (t.kind == TransformExpr::Kind::Source) return "$" + std::to_string(t.source);
  std::string out = std::string(kind_name(t.kind)) + format_attrs(t.attrs) + "(";
  for (size_t i = 0; i < t.children.size(); ++i) out += (i ? "," : "") + render(t.children[i]);
  return out + ")";
}

size_t transform_size(const TransformExpr& t) {
  size_t n = t.kind == TransformExpr::Kind::Source ? 0 : 1;
  for (const auto& c : t.children) n += transform_size(c);
  return n;
}

int transform_depth(const TransformExpr& t) {
  int d = 0;
  for (const auto& c : t.children) d = std::max(d, transform_depth(c) + 1);
  return d;
}

TensorValue apply_transform(const TransformExpr& t, std::span<const TensorValue> sources) {
  if (t.kind == TransformExpr::Kind::Source) {
    if (t.source < 0 || t.source >= static_cast<int>(sources.size())) throw UsageError("transform source out of range");
    return sources[t.source];
  }
  std::vector<TensorValue> args;
  for (const auto& c : t.children) args.push_back(apply_transform(c, sources));
  return apply_step(t.kind, t.attrs, args);
}

std::optional<TransformExpr> invert_transform(const TransformExpr& t, const Shape& source_shape) {
  std::vector<const TransformExpr*> steps;
  try {
    flatten_chain(t, steps);
  } catch (const UsageError&) {
    return std::nullopt;
  }
  // Shapes before each step, to invert reshapes.
  std::vector<Shape> before;
  Shape cur = source_shape;
  for (const auto* s : steps) {
    before.push_back(cur);
    if (s->kind == TransformExpr::Kind::Transpose) {
      std::swap(cur[s->attrs.get_int("dim0")], cur[s->attrs.get_int("dim1")]);
    } else if (s->kind == TransformExpr::Kind::Reshape) {
      cur = s->attrs.get_ints("shape");
    } else {
      return std::nullopt;
    }
  }
  TransformExpr inv = TransformExpr::src(0);
  for (size_t i = steps.size(); i-- > 0;) {
    if (steps[i]->kind == TransformExpr::Kind::Transpose) {
      inv = unary(TransformExpr::Kind::Transpose, steps[i]->attrs, std::move(inv));
    } else {
      inv = unary(TransformExpr::Kind::Reshape, Attrs{{"shape", before[i]}}, std::move(inv));
    }
  }
  return inv;
}

std::optional<TransformExpr> synthesize_transform(const TensorValue& a, const TensorValue& b,
                                                  const TransformBudget& budget, const Tolerance& tol) {
  if (a.is_tuple || b.is_tuple || a.dtype != b.dtype) return std::nullopt;
  if (values_match(b, a, tol)) return TransformExpr::src(0);
  auto na = a.size(), nb = b.size();
  if (na == 0 || nb == 0 || nb % na != 0) return std::nullopt;
  std::vector<std::pair<TransformExpr, TensorValue>> level{{TransformExpr::src(0), b}};
  for (int depth = 1; depth <= budget.max_depth; ++depth) {
    std::vector<std::pair<TransformExpr, TensorValue>> next;
    for (const auto& [t, val] : level) {
      for (const auto& [kind, attrs] : unary_steps(val.shape, a.shape)) {
        TensorValue arg[] = {val};
        TensorValue out;
        try {
          out = apply_step(kind, attrs, arg);
        } catch (const Error&) {
          continue;
        }
        if (out.size() % na != 0) continue;
        auto cand = unary(kind, attrs, t);
        if (values_match(out, a, tol)) return cand;
        if (depth < budget.max_depth) next.emplace_back(std::move(cand), std::move(out));
      }
    }
    level = std::move(next);
  }
  return std::nullopt;
}

namespace {

bool slice_matches(const TensorValue& a, int64_t axis, int64_t offset, const TensorValue& p) {
  if (p.rank() != a.rank() || p.dtype != a.dtype) return false;
  for (int64_t i = 0; i < a.rank(); ++i) {
    if (i != axis && p.shape[i] != a.shape[i]) return false;
  }
  int64_t len = p.shape[axis];
  if (len == 0 || offset + len > a.shape[axis]) return false;
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= a.shape[i];
  for (int64_t i = axis + 1; i < a.rank(); ++i) inner *= a.shape[i];
  int64_t dim = a.shape[axis];
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t j = 0; j < len; ++j) {
      for (int64_t k = 0; k < inner; ++k) {
        if (a.data[(o * dim + offset + j) * inner + k] != p.data[(o * len + j) * inner + k]) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::optional<std::pair<TransformExpr, std::vector<int>>> synthesize_concat(const TensorValue& a,
                                                                            std::span<const TensorValue> partners,
                                                                            int max_concat) {
  if (a.is_tuple) return std::nullopt;
  for (int64_t axis = 0; axis < a.rank(); ++axis) {
    std::vector<int> chosen;
    int64_t offset = 0;
    while (offset < a.shape[axis] && static_cast<int>(chosen.size()) < max_concat) {
      int hit = -1;
      for (size_t i = 0; i < partners.size(); ++i) {
        if (!partners[i].is_tuple && slice_matches(a, axis, offset, partners[i])) {
          hit = static_cast<int>(i);
          break;
        }
      }
      if (hit < 0) break;
      chosen.push_back(hit);
      offset += partners[hit].shape[axis];
    }
    if (offset == a.shape[axis] && chosen.size() >= 2) {
      TransformExpr t;
      t.kind = TransformExpr::Kind::Concat;
      t.attrs.set("axis", axis);
      for (size_t i = 0; i < chosen.size(); ++i) t.children.push_back(TransformExpr::src(static_cast<int>(i)));
      return std::make_pair(t, chosen);
    }
  }
  return std::nullopt;
}

ClassId insert_auxiliary(EGraph& g, std::span<const ClassId> sources, const TransformExpr& t) {
  switch (t.kind) {
    case TransformExpr::Kind::Source:
      return g.find(sources[t.source]);
    case TransformExpr::Kind::Transpose:
      return g.add_node(OpKind::Transpose, t.attrs, {insert_auxiliary(g, sources, t.children[0])});
    case TransformExpr::Kind::Reshape:
      return g.add_node(OpKind::Reshape, t.attrs, {insert_auxiliary(g, sources, t.children[0])});
    case TransformExpr::Kind::SplitItem: {
      auto parts = g.add_node(OpKind::Split, split_attrs(t.attrs), {insert_auxiliary(g, sources, t.children[0])});
      return g.add_node(OpKind::GetItem, Attrs{{"index", t.attrs.get_int("index")}}, {parts});
    }
    case TransformExpr::Kind::Concat: {
      std::vector<ClassId> kids;
      for (const auto& c : t.children) kids.push_back(insert_auxiliary(g, sources, c));
      return g.add_node(OpKind::Concat, t.attrs, kids);
    }
  }
  throw UsageError("bad transform");
}

std::string describe(const CandidateRelation& c) {
  std::string s = "(" + std::to_string(c.u) + ", " + std::to_string(c.v) + ")";
  if (c.via) s += (c.via_on_u ? " v = " : " u = ") + render(*c.via);
  return s;
}

namespace {

bool single_side(const EClass& cls, uint8_t tag) {
  uint8_t sides = cls.tags & (kTagA | kTagB);
  return sides == tag;
}

// Sorted element multiset, used to prune layout comparisons between leaves.
std::vector<double> sorted_data(const TensorValue& v) {
  auto d = v.data;
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

std::vector<CandidateRelation> match_inputs(const EGraph& g, const Tolerance& tol) {
  std::vector<ClassId> as, bs;
  for (auto c : g.classes()) {
    const auto& cls = g.eclass(c);
    if (!cls.has_leaf || !cls.value || cls.value->is_tuple) continue;
    if (single_side(cls, kTagA)) as.push_back(c);
    if (single_side(cls, kTagB)) bs.push_back(c);
  }
  std::vector<CandidateRelation> out;
  std::set<ClassId> matched;
  for (auto u : as) {
    for (auto v : bs) {
      if (values_match(*g.value(u), *g.value(v), tol)) {
        out.push_back({u, v, std::nullopt, false, 0});
        matched.insert(u);
        matched.insert(v);
      }
    }
  }
  std::map<ClassId, std::vector<double>> sorted;
  for (auto c : as) sorted[c] = sorted_data(*g.value(c));
  for (auto c : bs) sorted[c] = sorted_data(*g.value(c));
  // One layout step, in either direction; leaf parameters are compared
  // exactly since a layout change never perturbs values.
  TransformBudget one{1, 4};
  Tolerance exact{0.0, 0.0};
  auto related = [&](ClassId big, ClassId small) {
    const auto& x = sorted.at(big);
    const auto& y = sorted.at(small);
    return std::includes(x.begin(), x.end(), y.begin(), y.end());
  };
  for (auto u : as) {
    if (matched.count(u)) continue;
    for (auto v : bs) {
      if (matched.count(v)) continue;
      const auto& vu = *g.value(u);
      const auto& vv = *g.value(v);
      if (vu.dtype != vv.dtype) continue;
      if (vv.size() >= vu.size() && related(v, u)) {
        if (auto t = synthesize_transform(vu, vv, one, exact); t && !t->is_identity()) {
          out.push_back({u, v, t, false, 0});
          continue;
        }
      }
      if (vu.size() >= vv.size() && related(u, v)) {
        if (auto t = synthesize_transform(vv, vu, one, exact); t && !t->is_identity()) {
          out.push_back({u, v, t, true, 0});
        }
      }
    }
  }
  return out;
}

std::vector<CandidateRelation> find_candidate_relations(const EGraph& g, const Tolerance& tol,
                                                        const CandidateBudget& budget, CandidateStats* stats) {
  CandidateStats local;
  CandidateStats& st = stats ? *stats : local;
  std::vector<ClassId> as, bs;
  std::map<ClassId, ValueSignature> vsig;
  for (auto c : g.classes()) {
    const auto& cls = g.eclass(c);
    if (!cls.value) continue;
    bool a = single_side(cls, kTagA), b = single_side(cls, kTagB);
    if (!a && !b) continue;
    vsig.emplace(c, value_signature(*cls.value));
    (a ? as : bs).push_back(c);
  }
  using Key = std::pair<std::vector<int64_t>, uint64_t>;
  std::map<Key, std::vector<ClassId>> b_buckets;
  std::map<uint64_t, size_t> b_by_value;
  for (auto v : bs) {
    b_buckets[{g.dependency_signature(v), vsig.at(v).bucket()}].push_back(v);
    ++b_by_value[vsig.at(v).bucket()];
  }
  auto depth_of = [&](ClassId u, ClassId v) { return std::max(g.eclass(u).depth, g.eclass(v).depth); };
  std::vector<CandidateRelation> direct;
  for (auto u : as) {
    auto bucket = vsig.at(u).bucket();
    auto it = b_buckets.find({g.dependency_signature(u), bucket});
    size_t same_value = b_by_value.count(bucket) ? b_by_value.at(bucket) : 0;
    size_t unblocked = it == b_buckets.end() ? 0 : it->second.size();
    st.blocked += same_value - unblocked;
    if (it == b_buckets.end()) continue;
    for (auto v : it->second) {
      if (!signatures_compatible(vsig.at(u), vsig.at(v), tol)) continue;
      ++st.compared;
      if (values_match(*g.value(u), *g.value(v), tol)) direct.push_back({u, v, std::nullopt, false, depth_of(u, v)});
    }
  }
  auto order = [](const CandidateRelation& x, const CandidateRelation& y) {
    return std::tie(x.depth, x.u, x.v) < std::tie(y.depth, y.u, y.v);
  };
  std::sort(direct.begin(), direct.end(), order);
  if (direct.size() > budget.max_direct) direct.resize(budget.max_direct);

  std::set<ClassId> paired;
  for (const auto& c : direct) {
    paired.insert(c.u);
    paired.insert(c.v);
  }
  std::vector<CandidateRelation> pending;
  for (auto u : as) {
    if (paired.count(u) || g.eclass(u).has_leaf) continue;
    for (auto v : bs) {
      if (paired.count(v) || g.eclass(v).has_leaf) continue;
      if (g.dependency_signature(u) != g.dependency_signature(v)) continue;
      pending.push_back({u, v, std::nullopt, false, depth_of(u, v)});
    }
  }
  std::sort(pending.begin(), pending.end(), order);
  std::vector<CandidateRelation> transformed;
  for (auto& c : pending) {
    if (st.transform_attempts >= budget.max_transform_attempts) break;
    const auto& vu = *g.value(c.u);
    const auto& vv = *g.value(c.v);
    if (vu.is_tuple || vv.is_tuple || vu.size() == 0 || vv.size() % vu.size() != 0) continue;
    ++st.transform_attempts;
    auto t = synthesize_transform(vu, vv, budget.grammar, tol);
    if (t && !t->is_identity()) {
      c.via = std::move(t);
      transformed.push_back(c);
    }
  }
  direct.insert(direct.end(), transformed.begin(), transformed.end());
  return direct;
}

}  // namespace tgv
