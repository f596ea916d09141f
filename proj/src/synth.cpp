// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/synth.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "tgv/errors.hpp"

namespace tgv {

FrontierEnumerator::FrontierEnumerator(const EGraph& g, SynthBudget budget) : g_(g), budget_(budget) {}

namespace {

std::vector<ClassId> set_union(const std::vector<ClassId>& a, const std::vector<ClassId>& b) {
  std::vector<ClassId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

const std::vector<FrontierEntry>& FrontierEnumerator::stream(ClassId c, int depth) {
  c = g_.find(c);
  auto key = std::make_pair(c, depth);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  std::vector<FrontierEntry> out;
  out.push_back({{c}, -1, {}, 0});
  if (depth > 0) {
    // Members with identical canonical form would repeat each other's streams.
    std::set<EGraph::Key> seen;
    std::vector<ENodeId> members;
    for (auto m : g_.eclass(c).members) {
      const auto& n = g_.enode(m);
      if (is_leaf_op(n.op)) continue;
      EGraph::Key k{n.op, n.attrs, n.leaf_tag, {}};
      for (auto ch : n.children) k.children.push_back(g_.find(ch));
      if (seen.insert(std::move(k)).second) members.push_back(m);
    }
    struct Tagged {
      FrontierEntry entry;
      size_t member_order;
      size_t position;
    };
    std::vector<Tagged> all;
    const size_t tuple_cap = budget_.max_stream * 8;
    for (size_t mi = 0; mi < members.size(); ++mi) {
      const auto& n = g_.enode(members[mi]);
      std::vector<const std::vector<FrontierEntry>*> kids;
      for (auto ch : n.children) kids.push_back(&stream(ch, depth - 1));
      const size_t arity = kids.size();
      std::vector<int> suffix_max(arity + 1, 0);
      for (size_t j = arity; j-- > 0;) suffix_max[j] = suffix_max[j + 1] + static_cast<int>(kids[j]->size()) - 1;
      size_t produced = 0, tuples = 0;
      std::vector<uint32_t> picks(arity, 0);
      bool stop = false;
      // Tuples with pick sum == k, lexicographic on the first pick.
      std::function<void(size_t, int, int)> gen = [&](size_t pos, int rem, int k) {
        if (stop) return;
        if (pos == arity) {
          if (rem != 0) return;
          if (++tuples > tuple_cap) {
            stop = true;
            return;
          }
          std::vector<ClassId> f;
          for (size_t j = 0; j < arity; ++j) f = set_union(f, (*kids[j])[picks[j]].frontier);
          if (f.empty() || f.size() > budget_.max_frontier) return;
          all.push_back({{std::move(f), members[mi], picks, k}, mi, produced});
          if (++produced >= budget_.max_stream) stop = true;
          return;
        }
        int hi = std::min(rem, static_cast<int>(kids[pos]->size()) - 1);
        for (int p = 0; p <= hi && !stop; ++p) {
          if (rem - p > suffix_max[pos + 1]) continue;
          picks[pos] = static_cast<uint32_t>(p);
          gen(pos + 1, rem - p, k);
        }
      };
      for (int k = 0; k <= suffix_max[0] && !stop; ++k) gen(0, k, k);
    }
    std::stable_sort(all.begin(), all.end(), [](const Tagged& x, const Tagged& y) {
      return std::tie(x.entry.metric, x.member_order, x.position) < std::tie(y.entry.metric, y.member_order, y.position);
    });
    for (auto& t : all) {
      if (out.size() >= budget_.max_stream) break;
      out.push_back(std::move(t.entry));
    }
  }
  return memo_.emplace(key, std::move(out)).first->second;
}

Pattern FrontierEnumerator::pattern(ClassId c, int depth, size_t index) {
  c = g_.find(c);
  const auto& s = stream(c, depth);
  if (index >= s.size()) throw UsageError("frontier index out of range");
  const auto& e = s[index];
  if (e.member < 0) return Pattern::make_var("#" + std::to_string(c));
  const auto& n = g_.enode(e.member);
  auto picks = e.picks;
  std::vector<Pattern> kids;
  for (size_t j = 0; j < n.children.size(); ++j) kids.push_back(pattern(n.children[j], depth - 1, picks[j]));
  return Pattern::make_op(n.op, n.attrs, std::move(kids));
}

std::vector<std::pair<std::vector<ClassId>, Pattern>> enumerate_frontier_patterns(const EGraph& g, ClassId c,
                                                                                  size_t limit, SynthBudget budget) {
  FrontierEnumerator e(g, budget);
  const auto& s = e.stream(c);
  std::vector<std::pair<std::vector<ClassId>, Pattern>> out;
  for (size_t i = 0; i < s.size() && i < limit; ++i) out.emplace_back(s[i].frontier, e.pattern(c, i));
  return out;
}

namespace {

Pattern rename_vars(const Pattern& p, const std::map<std::string, std::string>& names) {
  if (p.is_var()) return Pattern::make_var(names.at(p.var));
  Pattern out = p;
  for (auto& c : out.children) c = rename_vars(c, names);
  return out;
}

std::string nth_name(size_t i) {
  std::string s(1, static_cast<char>('a' + i % 26));
  if (i >= 26) s += std::to_string(i / 26);
  return s;
}

}  // namespace

std::vector<ShapeConstraint> harvest_preconditions(const Pattern& lhs, const Pattern& rhs,
                                                   const std::map<std::string, TensorValue>& env) {
  std::vector<ShapeConstraint> out;
  std::vector<std::pair<DimRef, int64_t>> dims;
  auto vars = free_vars(lhs);
  for (const auto& v : free_vars(rhs)) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  }
  auto add_tensor = [&](const std::string& var, int elem, const TensorValue& t) {
    ShapeConstraint rc;
    rc.kind = ShapeConstraint::Kind::RankEq;
    rc.a = {var, elem, 0};
    rc.value = t.rank();
    out.push_back(rc);
    for (int64_t ax = 0; ax < t.rank(); ++ax) dims.push_back({{var, elem, ax}, t.shape[ax]});
  };
  for (const auto& v : vars) {
    auto it = env.find(v);
    if (it == env.end()) continue;
    if (it->second.is_tuple) {
      for (size_t e = 0; e < it->second.elements.size(); ++e) add_tensor(v, static_cast<int>(e), it->second.elements[e]);
    } else {
      add_tensor(v, -1, it->second);
    }
  }

  // Sizes that operator attributes fix absolutely, and the divisors they imply.
  std::set<int64_t> pinned;
  std::map<int64_t, std::set<int64_t>> divisors;
  std::function<void(const Pattern&)> walk = [&](const Pattern& p) {
    for (const auto& c : p.children) walk(c);
    if (p.kind != Pattern::Kind::Op || p.children.empty()) return;
    TensorValue in;
    try {
      in = eval_pattern(p.children[0], env);
    } catch (const Error&) {
      return;
    }
    if (in.is_tuple) return;
    auto dim_at = [&](int64_t axis) -> std::optional<int64_t> {
      if (axis < 0 || axis >= in.rank()) return std::nullopt;
      return in.shape[axis];
    };
    if (p.op == OpKind::Split) {
      if (auto d = dim_at(p.attrs.get_int("axis"))) {
        pinned.insert(*d);
        divisors[*d].insert(p.attrs.get_int("size"));
      }
    } else if (p.op == OpKind::Chunk) {
      if (auto d = dim_at(p.attrs.get_int("dim"))) {
        pinned.insert(*d);
        divisors[*d].insert(p.attrs.get_int("chunks"));
      }
    } else if (p.op == OpKind::Reshape) {
      for (auto d : in.shape) pinned.insert(d);
      pinned.insert(in.size());
      if (p.children[0].is_var() && !env.at(p.children[0].var).is_tuple) {
        ShapeConstraint nc;
        nc.kind = ShapeConstraint::Kind::NumelEqConst;
        nc.a = {p.children[0].var, -1, 0};
        nc.value = in.size();
        out.push_back(nc);
      }
    } else if (p.op == OpKind::FusedAttention && p.attrs.has("heads") && in.rank() > 0) {
      pinned.insert(in.shape.back());
      divisors[in.shape.back()].insert(p.attrs.get_int("heads"));
    }
  };
  walk(lhs);
  walk(rhs);

  std::map<int64_t, std::vector<DimRef>> groups;
  for (const auto& [ref, value] : dims) groups[value].push_back(ref);
  for (const auto& [value, refs] : groups) {
    if (pinned.count(value)) {
      for (const auto& r : refs) {
        ShapeConstraint c;
        c.kind = ShapeConstraint::Kind::DimEqConst;
        c.a = r;
        c.value = value;
        out.push_back(c);
        for (auto d : divisors[value]) {
          ShapeConstraint dc;
          dc.kind = ShapeConstraint::Kind::Divisible;
          dc.a = r;
          dc.value = d;
          out.push_back(dc);
        }
      }
    } else {
      for (size_t k = 1; k < refs.size(); ++k) {
        ShapeConstraint c;
        c.kind = ShapeConstraint::Kind::DimEq;
        c.a = refs[0];
        c.b = refs[k];
        out.push_back(c);
      }
    }
  }
  return out;
}

std::optional<SynthResult> synthesize_rule(const EGraph& g, ClassId u, ClassId v, SynthBudget budget) {
  u = g.find(u);
  v = g.find(v);
  if (u == v) return std::nullopt;
  FrontierEnumerator e(g, budget);
  const auto& su = e.stream(u);
  const auto& sv = e.stream(v);
  std::map<std::vector<ClassId>, size_t> first_v;
  for (size_t j = 0; j < sv.size(); ++j) first_v.emplace(sv[j].frontier, j);
  std::optional<std::pair<size_t, size_t>> best;
  for (size_t i = 0; i < su.size(); ++i) {
    if (best && i > best->first + best->second) break;
    auto it = first_v.find(su[i].frontier);
    if (it == first_v.end()) continue;
    auto cand = std::make_pair(i, it->second);
    if (!best || std::make_pair(i + cand.second, i) < std::make_pair(best->first + best->second, best->first)) best = cand;
  }
  if (!best) return std::nullopt;
  auto lhs = e.pattern(u, best->first);
  auto rhs = e.pattern(v, best->second);
  auto vars = free_vars(lhs);
  for (const auto& x : free_vars(rhs)) {
    if (std::find(vars.begin(), vars.end(), x) == vars.end()) vars.push_back(x);
  }
  SynthResult r;
  std::map<std::string, std::string> names;
  std::map<std::string, TensorValue> env;
  for (size_t i = 0; i < vars.size(); ++i) {
    auto name = nth_name(i);
    names[vars[i]] = name;
    ClassId cls = std::stoll(vars[i].substr(1));
    r.binding[name] = cls;
    if (const auto& val = g.value(cls)) env[name] = *val;
  }
  r.rule.lhs = rename_vars(lhs, names);
  r.rule.rhs = rename_vars(rhs, names);
  r.rule.pre = harvest_preconditions(r.rule.lhs, r.rule.rhs, env);
  r.rule.prov_u = u;
  r.rule.prov_v = v;
  r.frontier = su[best->first].frontier;
  r.index_u = best->first;
  r.index_v = best->second;
  return r;
}

AuditResult generality_audit(const Rule& rule, const EGraph& g, ClassId u, ClassId v, SynthBudget budget) {
  auto best = synthesize_rule(g, u, v, budget);
  if (!best) return {};
  if (alpha_equivalent(rule, best->rule)) return {};
  if (is_instance_of(rule, best->rule)) return {false, best->rule};
  return {};
}

}  // namespace tgv
