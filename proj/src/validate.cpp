// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>

#include "tgv/errors.hpp"
#include "tgv/graph.hpp"
#include "tgv/interp.hpp"

namespace tgv {

namespace {

void walk(const Pattern& p, const std::function<void(const Pattern&)>& f) {
  f(p);
  for (const auto& c : p.children) walk(c, f);
}

std::set<std::string> var_set(const Pattern& p) {
  auto v = free_vars(p);
  return {v.begin(), v.end()};
}

std::map<std::string, int64_t> known_ranks(const Rule& rule) {
  std::map<std::string, int64_t> ranks;
  for (const auto& c : rule.pre) {
    if (c.kind == ShapeConstraint::Kind::RankEq && c.a.elem < 0) ranks[c.a.var] = c.value;
  }
  return ranks;
}

std::string hex(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::optional<std::string> precheck(const Rule& rule) {
  if (rule.lhs.is_var() && rule.rhs.is_var()) return "trivial: both sides are variables";
  if (rule.lhs == rule.rhs) return "trivial: identical sides";
  if (var_set(rule.lhs) != var_set(rule.rhs)) return "free-variable mismatch between sides";
  auto ranks = known_ranks(rule);
  std::optional<std::string> problem;
  auto check = [&](const Pattern& p) {
    if (problem || p.is_var()) return;
    try {
      if (p.kind == Pattern::Kind::Lit) {
        validate_attrs(OpKind::Constant, p.attrs);
        return;
      }
      if (is_leaf_op(p.op)) {
        problem = "leaf operator inside a pattern";
        return;
      }
      auto ar = op_arity(p.op);
      auto n = static_cast<int>(p.children.size());
      if (n < ar.min || (ar.max >= 0 && n > ar.max)) {
        problem = "inconsistent attributes: bad arity for " + std::string(op_name(p.op));
        return;
      }
      validate_attrs(p.op, p.attrs);
      // Axis attributes must fit the rank a precondition gives the operand.
      if (!p.children.empty() && p.children[0].is_var()) {
        auto it = ranks.find(p.children[0].var);
        if (it != ranks.end()) {
          std::vector<int64_t> axes;
          if (p.op == OpKind::Transpose) axes = {p.attrs.get_int("dim0"), p.attrs.get_int("dim1")};
          if (p.op == OpKind::Split || p.op == OpKind::Concat) axes = {p.attrs.get_int("axis")};
          if (p.op == OpKind::Chunk || p.op == OpKind::Softmax) axes = {p.attrs.get_int("dim")};
          for (auto ax : axes) {
            if (ax < 0 || ax >= it->second) {
              problem = "inconsistent attributes: axis " + std::to_string(ax) + " of " + std::string(op_name(p.op)) +
                        " exceeds rank " + std::to_string(it->second) + " of ?" + p.children[0].var;
            }
          }
        }
      }
    } catch (const Error& e) {
      problem = std::string("inconsistent attributes: ") + e.what();
    }
  };
  walk(rule.lhs, check);
  walk(rule.rhs, check);
  auto vars = var_set(rule.lhs);
  for (const auto& c : rule.pre) {
    if (!vars.count(c.a.var) ||
        ((c.kind == ShapeConstraint::Kind::DimEq || c.kind == ShapeConstraint::Kind::NumelEq) && !vars.count(c.b.var))) {
      return "precondition mentions an unknown variable";
    }
  }
  return problem;
}

RuleClass classify(const Rule& rule) {
  static const std::set<OpKind> opaque{OpKind::FusedAttention, OpKind::ScaledDotProductAttention, OpKind::Embedding,
                                       OpKind::Softmax,        OpKind::Linear,                    OpKind::LayerNorm,
                                       OpKind::Gelu,           OpKind::Addmm,                     OpKind::Mm,
                                       OpKind::Matmul};
  bool heavy = false, rearr = false;
  auto visit = [&](const Pattern& p) {
    if (p.kind != Pattern::Kind::Op) return;
    heavy = heavy || opaque.count(p.op) > 0;
    rearr = rearr || is_rearrangement(p.op);
  };
  walk(rule.lhs, visit);
  walk(rule.rhs, visit);
  if (heavy) return RuleClass::OpaqueHeavy;
  if (rearr) return RuleClass::TensorRearrangement;
  return RuleClass::ScalarLogic;
}

std::optional<ShapeAssignment> solve_shapes(const std::vector<ShapeConstraint>& constraints,
                                             const std::vector<std::string>& vars, Rng& rng, int64_t lo, int64_t hi) {
  using Slot = std::pair<std::string, int>;
  std::map<Slot, int64_t> ranks;
  for (const auto& c : constraints) {
    if (c.kind != ShapeConstraint::Kind::RankEq) continue;
    Slot s{c.a.var, c.a.elem};
    auto [it, inserted] = ranks.emplace(s, c.value);
    if (!inserted && it->second != c.value) return std::nullopt;
  }
  auto touch = [&](const DimRef& r, bool axis_used) {
    Slot s{r.var, r.elem};
    auto it = ranks.find(s);
    if (it == ranks.end()) {
      ranks[s] = axis_used ? std::max<int64_t>(2, r.axis + 1) : 2;
      return true;
    }
    return !axis_used || r.axis < it->second;
  };
  for (const auto& c : constraints) {
    switch (c.kind) {
      case ShapeConstraint::Kind::DimEq:
        if (!touch(c.a, true) || !touch(c.b, true)) return std::nullopt;
        break;
      case ShapeConstraint::Kind::DimEqConst:
      case ShapeConstraint::Kind::Divisible:
        if (!touch(c.a, true)) return std::nullopt;
        break;
      case ShapeConstraint::Kind::NumelEq:
        touch(c.a, false);
        touch(c.b, false);
        break;
      case ShapeConstraint::Kind::NumelEqConst:
        touch(c.a, false);
        break;
      default:
        break;
    }
  }
  for (const auto& v : vars) {
    bool any = false;
    for (const auto& [s, r] : ranks) any = any || s.first == v;
    if (!any) ranks[{v, -1}] = 2;
  }
  // A variable is either a tensor or a tuple, never both.
  std::map<std::string, std::pair<bool, bool>> kinds;
  for (const auto& [s, r] : ranks) (s.second < 0 ? kinds[s.first].first : kinds[s.first].second) = true;
  for (const auto& [v, k] : kinds) {
    if (k.first && k.second) return std::nullopt;
  }

  std::map<std::tuple<std::string, int, int64_t>, int> slot_index;
  for (const auto& [s, r] : ranks) {
    for (int64_t ax = 0; ax < r; ++ax) {
      int id = static_cast<int>(slot_index.size());
      slot_index[{s.first, s.second, ax}] = id;
    }
  }
  std::vector<int> uf(slot_index.size());
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int x) { return uf[x] == x ? x : uf[x] = find(uf[x]); };
  auto idx = [&](const DimRef& r) { return slot_index.at({r.var, r.elem, r.axis}); };
  for (const auto& c : constraints) {
    if (c.kind == ShapeConstraint::Kind::DimEq) {
      int x = find(idx(c.a)), y = find(idx(c.b));
      if (x != y) uf[std::max(x, y)] = std::min(x, y);
    }
  }
  std::map<int, int64_t> fixed;
  std::map<int, std::vector<int64_t>> divs;
  for (const auto& c : constraints) {
    if (c.kind == ShapeConstraint::Kind::DimEqConst) {
      if (c.value < 0) return std::nullopt;
      auto [it, inserted] = fixed.emplace(find(idx(c.a)), c.value);
      if (!inserted && it->second != c.value) return std::nullopt;
    } else if (c.kind == ShapeConstraint::Kind::Divisible) {
      if (c.value <= 0) return std::nullopt;
      divs[find(idx(c.a))].push_back(c.value);
    }
  }
  std::vector<int> roots;
  for (size_t i = 0; i < uf.size(); ++i) {
    if (find(static_cast<int>(i)) == static_cast<int>(i)) roots.push_back(static_cast<int>(i));
  }
  std::map<int, std::vector<int64_t>> choices;
  bool any_free = false;
  for (auto r : roots) {
    auto ok = [&](int64_t v) {
      for (auto d : divs[r]) {
        if (v % d != 0) return false;
      }
      return true;
    };
    if (fixed.count(r)) {
      if (!ok(fixed[r])) return std::nullopt;
      choices[r] = {fixed[r]};
      continue;
    }
    for (int64_t v = lo; v <= hi; ++v) {
      if (ok(v)) choices[r].push_back(v);
    }
    if (choices[r].empty()) return std::nullopt;
    any_free = any_free || choices[r].size() > 1;
  }
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::map<int, int64_t> value;
    for (auto r : roots) value[r] = choices[r][rng.below(choices[r].size())];
    ShapeAssignment out;
    for (const auto& [s, r] : ranks) out[s] = Shape(static_cast<size_t>(r), 0);
    for (const auto& [key, id] : slot_index) {
      out[{std::get<0>(key), std::get<1>(key)}][std::get<2>(key)] = value[find(id)];
    }
    bool good = true;
    for (const auto& c : constraints) {
      if (c.kind == ShapeConstraint::Kind::NumelEq) {
        good = good && numel(out.at({c.a.var, c.a.elem})) == numel(out.at({c.b.var, c.b.elem}));
      } else if (c.kind == ShapeConstraint::Kind::NumelEqConst) {
        good = good && numel(out.at({c.a.var, c.a.elem})) == c.value;
      }
    }
    if (good) return out;
    if (!any_free) break;
  }
  return std::nullopt;
}

namespace {

using Mono = std::vector<std::pair<std::string, int>>;
using Poly = std::map<Mono, double>;
constexpr size_t kMaxMonomials = 4096;

std::optional<Poly> lower(const Pattern& p) {
  if (p.is_var()) return Poly{{Mono{{p.var, 1}}, 1.0}};
  if (p.kind == Pattern::Kind::Lit) {
    double c = p.attrs.get_real("value");
    if (c == 0.0) return Poly{};
    return Poly{{Mono{}, c}};
  }
  if (p.op == OpKind::Add || p.op == OpKind::ReduceAdd) {
    Poly acc;
    for (const auto& c : p.children) {
      auto q = lower(c);
      if (!q) return std::nullopt;
      for (const auto& [m, k] : *q) acc[m] += k;
    }
    return acc;
  }
  if (p.op == OpKind::Mul) {
    auto x = lower(p.children[0]);
    auto y = lower(p.children[1]);
    if (!x || !y || x->size() * y->size() > kMaxMonomials) return std::nullopt;
    Poly acc;
    for (const auto& [mx, kx] : *x) {
      for (const auto& [my, ky] : *y) {
        std::map<std::string, int> e;
        for (const auto& [v, n] : mx) e[v] += n;
        for (const auto& [v, n] : my) e[v] += n;
        acc[Mono(e.begin(), e.end())] += kx * ky;
      }
    }
    return acc;
  }
  return std::nullopt;
}

double eval_poly(const Poly& p, const std::map<std::string, double>& point) {
  double s = 0.0;
  for (const auto& [m, k] : p) {
    double t = k;
    for (const auto& [v, n] : m) t *= std::pow(point.at(v), n);
    s += t;
  }
  return s;
}

}  // namespace

std::optional<Verdict> verify_scalar(const Rule& rule, Rng& rng) {
  auto l = lower(rule.lhs);
  auto r = lower(rule.rhs);
  if (!l || !r) return std::nullopt;
  Poly diff;
  std::set<Mono> monos;
  for (const auto& [m, k] : *l) monos.insert(m);
  for (const auto& [m, k] : *r) monos.insert(m);
  for (const auto& m : monos) {
    double a = l->count(m) ? l->at(m) : 0.0;
    double b = r->count(m) ? r->at(m) : 0.0;
    if (std::fabs(a - b) > 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)})) diff[m] = a - b;
  }
  Verdict v;
  v.rule_class = RuleClass::ScalarLogic;
  if (diff.empty()) {
    v.level = Validation::FormallyVerified;
    return v;
  }
  // A nonzero polynomial is nonzero at some small integer point.
  auto vars = free_vars(rule.lhs);
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::map<std::string, double> point;
    std::string text;
    for (const auto& x : vars) {
      point[x] = static_cast<double>(rng.between(-3, 3));
      text += x + "=" + std::to_string(static_cast<int>(point[x])) + ";";
    }
    if (std::fabs(eval_poly(diff, point)) > 1e-9) {
      v.level = Validation::Rejected;
      v.reason = "counterexample " + text;
      v.cex_hash = fnv1a(text);
      return v;
    }
  }
  return std::nullopt;
}

namespace {

bool only_rearrangement(const Pattern& p) {
  bool ok = true;
  walk(p, [&](const Pattern& q) {
    if (q.kind == Pattern::Kind::Op && !is_rearrangement(q.op)) ok = false;
  });
  return ok;
}

std::vector<std::string> all_vars(const Rule& rule) {
  auto vars = free_vars(rule.lhs);
  for (const auto& v : free_vars(rule.rhs)) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  }
  std::sort(vars.begin(), vars.end());
  return vars;
}

// Builds per-variable values from a shape assignment using `fill` for each
// dense tensor.
std::map<std::string, TensorValue> build_env(const ShapeAssignment& shapes,
                                             const std::function<TensorValue(const std::string&, const Shape&)>& fill) {
  std::map<std::string, TensorValue> env;
  std::map<std::string, std::vector<TensorValue>> tuples;
  for (const auto& [slot, shape] : shapes) {
    if (slot.second < 0) {
      env[slot.first] = fill(slot.first, shape);
    } else {
      auto& elems = tuples[slot.first];
      if (static_cast<int>(elems.size()) <= slot.second) elems.resize(static_cast<size_t>(slot.second) + 1);
      elems[slot.second] = fill(slot.first, shape);
    }
  }
  for (auto& [name, elems] : tuples) env[name] = TensorValue::tuple(std::move(elems));
  return env;
}

std::string env_text(const std::map<std::string, TensorValue>& env) {
  std::string text;
  for (const auto& [name, v] : env) {
    text += name + ":";
    if (v.is_tuple) {
      for (const auto& e : v.elements) text += tensor_to_json(e) + ";";
    } else {
      text += tensor_to_json(v) + ";";
    }
  }
  return text;
}

}  // namespace

std::optional<Verdict> verify_rearrangement(const Rule& rule, const ValidationConfig& cfg, Rng& rng) {
  if (!only_rearrangement(rule.lhs) || !only_rearrangement(rule.rhs)) return std::nullopt;
  auto vars = all_vars(rule);
  Verdict v;
  v.rule_class = RuleClass::TensorRearrangement;
  int checked = 0;
  for (int inst = 0; inst < cfg.shape_instances; ++inst) {
    auto shapes = solve_shapes(rule.pre, vars, rng, cfg.dim_lo, cfg.dim_hi);
    if (!shapes) {
      v.level = Validation::Rejected;
      v.reason = "vacuous: preconditions unsatisfiable";
      return v;
    }
    // Distinct ids stand for distinct symbolic elements.
    double next_id = 1.0;
    auto env = build_env(*shapes, [&](const std::string&, const Shape& s) {
      auto t = TensorValue::zeros(s);
      for (auto& x : t.data) x = next_id++;
      return t;
    });
    TensorValue lv, rv;
    try {
      lv = eval_pattern(rule.lhs, env);
      rv = eval_pattern(rule.rhs, env);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    if (!(lv == rv)) {
      v.level = Validation::Rejected;
      v.reason = "symbolic mismatch under shapes";
      for (const auto& [slot, s] : *shapes) v.reason += " ?" + slot.first + "=" + format_shape(s);
      v.cex_hash = fnv1a(env_text(env));
      return v;
    }
  }
  if (checked == 0) return std::nullopt;
  v.level = Validation::FormallyVerified;
  return v;
}

Verdict fuzz_validate(const Rule& rule, const ValidationConfig& cfg, Rng& rng) {
  auto vars = all_vars(rule);
  // Index operands of embeddings are sampled inside the table's row range.
  std::map<std::string, std::string> index_of_table;
  auto find_index_vars = [&](const Pattern& p) {
    if (p.kind == Pattern::Kind::Op && p.op == OpKind::Embedding && p.children[0].is_var()) {
      index_of_table[p.children[0].var] = p.children[1].is_var() ? p.children[1].var : std::string();
    }
  };
  walk(rule.lhs, find_index_vars);
  walk(rule.rhs, find_index_vars);

  Verdict v;
  v.rule_class = classify(rule);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    bool done = false;
    std::string last_error;
    for (int attempt = 0; attempt <= cfg.retries && !done; ++attempt) {
      auto shapes = solve_shapes(rule.pre, vars, rng, cfg.dim_lo, cfg.dim_hi);
      if (!shapes) {
        v.level = Validation::Rejected;
        v.reason = "vacuous: preconditions unsatisfiable";
        return v;
      }
      auto env = build_env(*shapes, [&](const std::string& name, const Shape& s) {
        auto t = TensorValue::zeros(s);
        auto it = index_of_table.find(name);
        if (it != index_of_table.end()) {
          int64_t rows = 1;
          if (!it->second.empty()) {
            auto table = shapes->find({it->second, -1});
            if (table != shapes->end() && !table->second.empty()) rows = table->second[0];
          }
          t.dtype = DType::I64;
          for (auto& x : t.data) x = static_cast<double>(rng.below(static_cast<uint64_t>(std::max<int64_t>(rows, 1))));
        } else {
          for (auto& x : t.data) x = rng.normal();
        }
        return t;
      });
      TensorValue lv, rv;
      try {
        lv = eval_pattern(rule.lhs, env);
        rv = eval_pattern(rule.rhs, env);
      } catch (const Error& e) {
        last_error = e.what();
        continue;
      }
      if (!values_match(lv, rv, cfg.tol)) {
        v.level = Validation::Rejected;
        char buf[64];
        std::snprintf(buf, sizeof buf, "counterexample at trial %d (max diff %.3g)", trial, max_abs_diff(lv, rv));
        v.reason = buf;
        v.cex_hash = fnv1a(env_text(env));
        v.trials = trial + 1;
        return v;
      }
      done = true;
    }
    if (!done) {
      v.level = Validation::Rejected;
      v.reason = "invalid-rule: evaluation failed on sampled inputs (" + last_error + ")";
      return v;
    }
  }
  v.level = Validation::EmpiricallyValidated;
  v.trials = cfg.trials;
  return v;
}

Verdict validate(const Rule& rule, const ValidationConfig& cfg) {
  if (auto why = precheck(rule)) {
    Verdict v;
    v.level = Validation::Rejected;
    v.reason = *why;
    return v;
  }
  // Validate a canonical orientation so the verdict does not depend on which
  // side was called lhs or on variable names.
  Rule fwd = canonical_names(rule);
  Rule swapped = rule;
  std::swap(swapped.lhs, swapped.rhs);
  swapped = canonical_names(swapped);
  auto key = [](const Rule& r) {
    std::string s = render(r.lhs) + " <=> " + render(r.rhs) + " |";
    std::vector<std::string> pre;
    for (const auto& c : r.pre) pre.push_back(render(c));
    std::sort(pre.begin(), pre.end());
    for (const auto& p : pre) s += " " + p;
    return s;
  };
  auto kf = key(fwd), ks = key(swapped);
  const Rule& canon = kf <= ks ? fwd : swapped;
  Rng rng(cfg.seed ^ fnv1a(std::min(kf, ks)));

  auto cls = classify(canon);
  {
    Rng probe(cfg.seed);
    if (!solve_shapes(canon.pre, all_vars(canon), probe, cfg.dim_lo, cfg.dim_hi)) {
      Verdict v;
      v.level = Validation::Rejected;
      v.rule_class = cls;
      v.reason = "vacuous: preconditions unsatisfiable";
      return v;
    }
  }
  std::optional<Verdict> sym;
  if (cls == RuleClass::ScalarLogic) sym = verify_scalar(canon, rng);
  if (cls == RuleClass::TensorRearrangement) sym = verify_rearrangement(canon, cfg, rng);
  Verdict v = sym ? *sym : fuzz_validate(canon, cfg, rng);
  v.rule_class = cls;
  return v;
}

std::string verdict_log_line(const Rule& rule) {
  std::string line = std::to_string(rule.id) + " " +
                     (rule.rule_class ? std::string(rule_class_name(*rule.rule_class)) : std::string("-")) + " " +
                     std::string(validation_name(rule.validation));
  if (rule.cex_hash) line += " " + hex(rule.cex_hash);
  return line;
}

}  // namespace tgv
