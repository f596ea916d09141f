// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/apply.hpp"

#include <set>

namespace tgv {

std::vector<Substitution> match_pattern(const EGraph& g, const Pattern& p, ClassId c, const Substitution& partial) {
  c = g.find(c);
  if (p.is_var()) {
    auto it = partial.find(p.var);
    if (it != partial.end()) {
      if (g.find(it->second) == c) return {partial};
      return {};
    }
    Substitution s = partial;
    s[p.var] = c;
    return {s};
  }
  std::vector<Substitution> out;
  std::set<Substitution> seen;
  for (auto m : g.eclass(c).members) {
    const auto& n = g.enode(m);
    if (p.kind == Pattern::Kind::Lit) {
      if (n.op == OpKind::Constant && n.attrs == p.attrs) return {partial};
      continue;
    }
    if (n.op != p.op || !(n.attrs == p.attrs) || n.children.size() != p.children.size()) continue;
    std::vector<Substitution> acc{partial};
    for (size_t j = 0; j < p.children.size() && !acc.empty(); ++j) {
      std::vector<Substitution> next;
      for (const auto& s : acc) {
        for (auto& t : match_pattern(g, p.children[j], n.children[j], s)) next.push_back(std::move(t));
      }
      acc = std::move(next);
    }
    for (auto& s : acc) {
      if (seen.insert(s).second) out.push_back(std::move(s));
    }
  }
  return out;
}

bool preconditions_hold(const EGraph& g, const Rule& rule, const Substitution& s) {
  ShapeEnv env;
  for (const auto& [name, cls] : s) {
    const auto& v = g.value(cls);
    if (!v) return rule.pre.empty();
    env[name] = *v;
  }
  for (const auto& c : rule.pre) {
    if (!env.count(c.a.var)) return false;
    if (!constraint_holds(c, env)) return false;
  }
  return true;
}

std::optional<ApplyHit> apply_rules(const std::vector<Rule>& rules, const EGraph& g, ClassId u, ClassId v,
                                    size_t max_substitutions) {
  for (size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    for (bool swapped : {false, true}) {
      const auto& at_u = swapped ? r.rhs : r.lhs;
      const auto& at_v = swapped ? r.lhs : r.rhs;
      size_t tried = 0;
      for (const auto& s : match_pattern(g, at_u, u)) {
        for (const auto& full : match_pattern(g, at_v, v, s)) {
          if (++tried > max_substitutions) break;
          if (preconditions_hold(g, r, full)) return ApplyHit{i, full, swapped};
        }
        if (tried > max_substitutions) break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace tgv
