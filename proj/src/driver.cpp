// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/driver.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "tgv/apply.hpp"
#include "tgv/errors.hpp"
#include "tgv/interp.hpp"

namespace tgv {

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Equivalent:
      return "EQUIVALENT";
    case Outcome::NotEquivalent:
      return "NOT_EQUIVALENT";
    case Outcome::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

std::string NodeRef::label() const {
  return std::string(source_name(side)) + ":" + std::to_string(id) + " " + std::string(op_name(op)) +
         format_attrs(attrs);
}

namespace {

std::string rule_key(const Rule& r) {
  Rule fwd = canonical_names(r);
  Rule swapped = r;
  std::swap(swapped.lhs, swapped.rhs);
  swapped = canonical_names(swapped);
  auto key = [](const Rule& x) {
    std::string s = render(x.lhs) + " <=> " + render(x.rhs) + " |";
    std::vector<std::string> pre;
    for (const auto& c : x.pre) pre.push_back(render(c));
    std::sort(pre.begin(), pre.end());
    for (const auto& p : pre) s += " " + p;
    return s;
  };
  return std::min(key(fwd), key(swapped));
}

class Session {
 public:
  Session(const Config& cfg, CompareResult& out) : cfg_(cfg), out_(out) {}

  void run(const ComputationGraph& a, const ComputationGraph& b) {
    if (a.outputs.size() != b.outputs.size()) throw UsageError("graphs have different numbers of outputs");
    auto va = run_graph(a);
    auto vb = run_graph(b);
    out_.joint = join_graphs(a, b);
    out_.graph = EGraph::init(out_.joint, va, vb);
    g_ = &*out_.graph;
    vcfg_ = cfg_.validation;
    vcfg_.seed = cfg_.seed;
    load_seed_rules();

    for (int it = 0; it < cfg_.max_iterations; ++it) {
      ++out_.stats.iterations;
      match_leaves();
      propose_and_merge();
      if (outputs_merged()) break;
    }
    finish();
  }

 private:
  void load_seed_rules() {
    for (auto r : cfg_.seed_rules) {
      if (r.validation == Validation::Unvalidated) {
        auto v = validate(r, vcfg_);
        r.validation = v.level;
        r.rule_class = v.rule_class;
        r.trials = v.trials;
        r.reason = v.reason;
        r.cex_hash = v.cex_hash;
      }
      r.instances = 0;
      if (r.validation == Validation::FormallyVerified || r.validation == Validation::EmpiricallyValidated) {
        active_.push_back(r);
      }
    }
  }

  void merge(ClassId x, ClassId y, MergeReason why) {
    if (!g_->merge(x, y, why)) return;
    if (why == MergeReason::Input) ++out_.stats.merges_input;
    if (why == MergeReason::Rule) ++out_.stats.merges_rule;
    out_.stats.merges_congruence += g_->rebuild();
  }

  void match_leaves() {
    for (const auto& c : match_inputs(*g_, cfg_.match_tol)) {
      ClassId u = g_->find(c.u), v = g_->find(c.v);
      if (u == v) continue;
      if (!c.via) {
        merge(u, v, MergeReason::Input);
        continue;
      }
      // via maps the "base" side's value onto the other side's.
      ClassId base = c.via_on_u ? u : v;
      ClassId other = c.via_on_u ? v : u;
      auto base_shape = g_->value(base)->shape;
      std::vector<ClassId> src{base};
      ClassId w = insert_auxiliary(*g_, src, *c.via);
      merge(other, w, MergeReason::Input);
      if (auto inv = invert_transform(*c.via, base_shape)) {
        std::vector<ClassId> back{g_->find(other)};
        ClassId w2 = insert_auxiliary(*g_, back, *inv);
        merge(g_->find(base), w2, MergeReason::Input);
      }
    }
  }

  void propose_and_merge() {
    CandidateStats cs;
    auto cands = find_candidate_relations(*g_, cfg_.match_tol, cfg_.candidates, &cs);
    out_.stats.blocked += cs.blocked;
    if (cands.size() > cfg_.max_candidates) cands.resize(cfg_.max_candidates);
    out_.stats.candidates += cands.size();
    size_t attempts = 0;
    for (const auto& c : cands) {
      ClassId u = g_->find(c.u), v = g_->find(c.v);
      if (c.via) {
        // Relate the class to a transformed view of its partner.
        ClassId base = c.via_on_u ? u : v;
        std::vector<ClassId> src{base};
        ClassId w = insert_auxiliary(*g_, src, *c.via);
        out_.stats.merges_congruence += g_->rebuild();
        (c.via_on_u ? u : v) = g_->find(w);
        u = g_->find(u);
        v = g_->find(v);
      }
      if (u == v) continue;
      if (auto hit = apply_rules(active_, *g_, u, v)) {
        ++active_[hit->rule_index].instances;
        ++out_.stats.apply_successes;
        merge(u, v, MergeReason::Rule);
        continue;
      }
      if (attempts >= cfg_.max_synth_attempts) continue;
      ++attempts;
      ++out_.stats.synth_attempts;
      auto sr = synthesize_rule(*g_, u, v, cfg_.synth);
      if (!sr) continue;
      Rule rule = sr->rule;
      auto key = rule_key(rule);
      if (auto it = known_.find(key); it != known_.end()) {
        // Same rule under another candidate: reuse its verdict.
        const Rule& prev = out_.catalogue[it->second];
        if (prev.validation == Validation::Rejected) continue;
        rule.validation = prev.validation;
      } else {
        auto v_ = validate(rule, vcfg_);
        rule.id = static_cast<int>(out_.catalogue.size()) + 1;
        rule.validation = v_.level;
        rule.rule_class = v_.rule_class;
        rule.trials = v_.trials;
        rule.reason = v_.reason;
        rule.cex_hash = v_.cex_hash;
        known_[key] = out_.catalogue.size();
        out_.catalogue.push_back(rule);
        out_.verdict_log.push_back(verdict_log_line(rule));
        if (cfg_.on_rule) cfg_.on_rule(*g_, u, v, rule);
        if (!v_.accepted()) {
          ++out_.stats.synth_rejected;
          continue;
        }
        ++out_.stats.synth_accepted;
        rule.instances = 0;
        active_.push_back(rule);
        catalogue_slot_[active_.size() - 1] = out_.catalogue.size() - 1;
        ++active_.back().instances;
        merge(u, v, MergeReason::Rule);
        continue;
      }
      // Known accepted rule whose preconditions did not admit this pair.
    }
  }

  bool outputs_merged() const {
    const auto& jg = out_.joint;
    for (size_t i = 0; i < jg.outputs_a.size(); ++i) {
      if (!g_->equiv(g_->class_of_joint(jg.outputs_a[i]), g_->class_of_joint(jg.outputs_b[i]))) return false;
    }
    return true;
  }

  void finish() {
    // Instance counts live on the active copies.
    for (const auto& [slot, idx] : catalogue_slot_) out_.catalogue[idx].instances = active_[slot].instances;
    auto& st = out_.stats;
    for (const auto& r : out_.catalogue) {
      if (r.validation == Validation::FormallyVerified) ++st.formally_verified;
      if (r.validation == Validation::EmpiricallyValidated) ++st.empirically_validated;
      if (r.validation == Validation::FormallyVerified || r.validation == Validation::EmpiricallyValidated) {
        ++st.unique_rules;
        st.rule_instances += static_cast<size_t>(r.instances);
      }
    }
    for (size_t i = 0; i < active_.size(); ++i) {
      if (!catalogue_slot_.count(i)) st.rule_instances += static_cast<size_t>(active_[i].instances);
    }

    if (outputs_merged()) {
      out_.outcome = Outcome::Equivalent;
      return;
    }
    auto report = localize(*g_, out_.joint, cfg_);
    const auto& jg = out_.joint;
    bool diverged = false;
    for (size_t i = 0; i < jg.outputs_a.size(); ++i) {
      const auto& x = g_->value(g_->class_of_joint(jg.outputs_a[i]));
      const auto& y = g_->value(g_->class_of_joint(jg.outputs_b[i]));
      if (x && y && !values_match(*x, *y, cfg_.match_tol)) diverged = true;
    }
    ClassId ca = g_->class_of_joint(jg.index_of(Source::A, report.a.id));
    ClassId cb = g_->class_of_joint(jg.index_of(Source::B, report.b.id));
    const Rule* refuted = nullptr;
    for (const auto& r : out_.catalogue) {
      if (r.validation != Validation::Rejected || r.cex_hash == 0 || r.prov_u < 0) continue;
      ClassId pu = g_->find(r.prov_u), pv = g_->find(r.prov_v);
      if ((pu == ca && pv == cb) || (pu == cb && pv == ca)) {
        refuted = &r;
        break;
      }
    }
    if (diverged) {
      out_.outcome = Outcome::NotEquivalent;
      report.reason = "output values diverge";
    } else if (refuted) {
      out_.outcome = Outcome::NotEquivalent;
      report.reason = "rule " + std::to_string(refuted->id) + " relating the pair was refuted: " + refuted->reason;
    } else {
      out_.outcome = Outcome::Inconclusive;
      report.reason = "no validated rule relates the outputs";
    }
    out_.report = std::move(report);
  }

  const Config& cfg_;
  CompareResult& out_;
  EGraph* g_ = nullptr;
  ValidationConfig vcfg_;
  std::vector<Rule> active_;
  std::map<size_t, size_t> catalogue_slot_;  // active index -> catalogue index
  std::map<std::string, size_t> known_;
};

struct WalkResult {
  int64_t frontier = -1;  // joint index
  std::vector<int64_t> path;
  std::vector<int64_t> skipped;
  bool clean = true;
};

std::vector<size_t> primary_order(OpKind op, size_t n) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  // addmm(bias, x, w): the data-carrying input is x.
  if (op == OpKind::Addmm && n == 3) order = {1, 0, 2};
  return order;
}

bool matched(const EGraph& g, ClassId c) {
  const auto& cls = g.eclass(c);
  bool a = cls.tags & kTagA, b = cls.tags & kTagB, aux = cls.tags & kTagAux;
  return (a && b) || (aux && (a || b));
}

WalkResult walk_back(const EGraph& g, const JointGraph& jg, int64_t start, const std::set<OpKind>& transparent) {
  WalkResult w;
  int64_t cur = start;
  w.path.push_back(cur);
  while (true) {
    const auto& n = jg.nodes[cur];
    int64_t next = -1;
    for (auto i : primary_order(n.op, n.children.size())) {
      auto ch = n.children[i];
      // An unmatched leaf is explained by its consumer.
      if (is_leaf_op(jg.nodes[ch].op)) continue;
      if (!matched(g, g.class_of_joint(ch))) {
        next = ch;
        break;
      }
    }
    if (next < 0) break;
    cur = next;
    w.path.push_back(cur);
  }
  // A transparent stop only relays its input; report the consumer.
  size_t k = w.path.size() - 1;
  while (k > 0 && transparent.count(jg.nodes[w.path[k]].op)) {
    w.skipped.push_back(w.path[k]);
    --k;
    w.clean = false;
  }
  w.frontier = w.path[k];
  return w;
}

NodeRef ref_of(const EGraph& g, const JointGraph& jg, int64_t j) {
  const auto& n = jg.nodes[j];
  NodeRef r;
  r.side = n.side;
  r.id = n.original;
  r.op = n.op;
  r.attrs = n.attrs;
  const auto& v = g.value(g.class_of_joint(j));
  r.value = v ? describe(*v) : "<no value>";
  return r;
}

std::string joint_label(const JointGraph& jg, int64_t j) {
  const auto& n = jg.nodes[j];
  return std::string(source_name(n.side)) + ":" + std::to_string(n.original) + " " + std::string(op_name(n.op));
}

}  // namespace

CompareResult compare(const ComputationGraph& a, const ComputationGraph& b, const Config& cfg) {
  CompareResult out;
  Session s(cfg, out);
  s.run(a, b);
  return out;
}

MismatchReport localize(const EGraph& g, const JointGraph& jg, const Config& cfg) {
  std::optional<std::tuple<int, WalkResult, WalkResult>> best;
  for (size_t i = 0; i < jg.outputs_a.size(); ++i) {
    auto oa = jg.outputs_a[i], ob = jg.outputs_b[i];
    if (g.equiv(g.class_of_joint(oa), g.class_of_joint(ob))) continue;
    auto wa = walk_back(g, jg, oa, cfg.transparent);
    auto wb = walk_back(g, jg, ob, cfg.transparent);
    int depth = jg.nodes[wa.frontier].depth + jg.nodes[wb.frontier].depth;
    if (!best || depth < std::get<0>(*best)) best.emplace(depth, std::move(wa), std::move(wb));
  }
  if (!best) throw UsageError("localize: all outputs are merged");
  const auto& [depth, wa, wb] = *best;
  MismatchReport r;
  r.a = ref_of(g, jg, wa.frontier);
  r.b = ref_of(g, jg, wb.frontier);
  bool clean = wa.clean && wb.clean;
  for (auto j : {wa.frontier, wb.frontier}) {
    for (auto ch : jg.nodes[j].children) clean = clean && matched(g, g.class_of_joint(ch));
  }
  r.level_hint = clean ? "L0" : "L1";
  for (auto j : wa.path) r.path.push_back(joint_label(jg, j));
  for (auto j : wb.path) r.path.push_back(joint_label(jg, j));
  for (auto j : wa.skipped) r.skipped.push_back(joint_label(jg, j));
  for (auto j : wb.skipped) r.skipped.push_back(joint_label(jg, j));
  return r;
}

std::string emit_report(const CompareResult& r, ReportFormat format) {
  std::ostringstream os;
  const auto& s = r.stats;
  if (format == ReportFormat::Text) {
    os << "verdict: " << outcome_name(r.outcome) << "\n";
    os << "iterations: " << s.iterations << "\n";
    os << "rules: " << s.unique_rules << " unique, " << s.rule_instances << " instances\n";
    os << "validation: " << s.formally_verified << " formally verified, " << s.empirically_validated
       << " empirically validated, " << s.synth_rejected << " rejected\n";
    os << "synthesis: " << s.synth_attempts << " attempts, " << s.synth_accepted << " accepted\n";
    os << "rule applications: " << s.apply_successes << "\n";
    os << "candidates: " << s.candidates << " considered, " << s.blocked << " blocked\n";
    os << "merges: " << s.merges_input << " input, " << s.merges_rule << " rule, " << s.merges_congruence
       << " congruence\n";
    if (r.report) {
      const auto& m = *r.report;
      os << "\nmismatch: " << m.a.label() << " <-> " << m.b.label() << "\n";
      os << "  reason: " << m.reason << "\n";
      os << "  level hint: " << m.level_hint << "\n";
      os << "  A value: " << m.a.value << "\n";
      os << "  B value: " << m.b.value << "\n";
      os << "  path:";
      for (const auto& p : m.path) os << " [" << p << "]";
      os << "\n";
      if (!m.skipped.empty()) {
        os << "  skipped:";
        for (const auto& p : m.skipped) os << " [" << p << "]";
        os << "\n";
      }
    }
    if (!r.verdict_log.empty()) {
      os << "\nverdict log:\n";
      for (const auto& l : r.verdict_log) os << "  " << l << "\n";
    }
    if (!r.catalogue.empty()) os << "\n" << render_catalogue(r.catalogue);
    return os.str();
  }
  os << "verdict " << outcome_name(r.outcome) << "\n";
  os << "stat iterations " << s.iterations << "\n";
  os << "stat unique_rules " << s.unique_rules << "\n";
  os << "stat rule_instances " << s.rule_instances << "\n";
  os << "stat formally_verified " << s.formally_verified << "\n";
  os << "stat empirically_validated " << s.empirically_validated << "\n";
  os << "stat rejected " << s.synth_rejected << "\n";
  os << "stat synth_attempts " << s.synth_attempts << "\n";
  os << "stat synth_accepted " << s.synth_accepted << "\n";
  os << "stat apply_successes " << s.apply_successes << "\n";
  os << "stat candidates " << s.candidates << "\n";
  os << "stat blocked " << s.blocked << "\n";
  os << "stat merges_input " << s.merges_input << "\n";
  os << "stat merges_rule " << s.merges_rule << "\n";
  os << "stat merges_congruence " << s.merges_congruence << "\n";
  if (r.report) {
    const auto& m = *r.report;
    os << "mismatch A " << m.a.id << " " << op_name(m.a.op) << "\n";
    os << "mismatch B " << m.b.id << " " << op_name(m.b.op) << "\n";
    os << "level " << m.level_hint << "\n";
    for (const auto& p : m.path) os << "path " << p << "\n";
    for (const auto& p : m.skipped) os << "skipped " << p << "\n";
  }
  for (const auto& l : r.verdict_log) os << "rule-verdict " << l << "\n";
  for (const auto& rule : r.catalogue) {
    os << "rule " << rule.id << " " << render(rule.lhs) << " <=> " << render(rule.rhs) << "\n";
  }
  return os.str();
}

size_t soundness_violations(const EGraph& g, const ComputationGraph& fresh_a, const ComputationGraph& fresh_b,
                            const Tolerance& tol) {
  auto jg = join_graphs(fresh_a, fresh_b);
  if (jg.nodes.size() != g.num_joint()) throw UsageError("fresh graphs do not match the e-graph's structure");
  auto va = run_graph(fresh_a);
  auto vb = run_graph(fresh_b);
  std::vector<std::optional<TensorValue>> memo(g.num_enodes());
  std::vector<bool> done(g.num_enodes(), false);
  std::function<const std::optional<TensorValue>&(ENodeId)> eval = [&](ENodeId id) -> const std::optional<TensorValue>& {
    if (done[id]) return memo[id];
    done[id] = true;
    const auto& n = g.enode(id);
    if (is_leaf_op(n.op)) {
      if (n.origin >= 0) {
        const auto& jn = jg.nodes[n.origin];
        const auto& vals = jn.side == Source::A ? va : vb;
        memo[id] = vals.at(jn.original);
      }
      return memo[id];
    }
    std::vector<TensorValue> args;
    for (auto ch : n.term_children) {
      const auto& v = eval(ch);
      if (!v) return memo[id];
      args.push_back(*v);
    }
    try {
      memo[id] = eval_op(n.op, n.attrs, args);
    } catch (const Error&) {
    }
    return memo[id];
  };
  size_t bad = 0;
  for (auto c : g.classes()) {
    const std::optional<TensorValue>* ref = nullptr;
    for (auto m : g.eclass(c).members) {
      const auto& v = eval(m);
      if (!v) continue;
      if (!ref) {
        ref = &v;
        continue;
      }
      if (!values_match(**ref, *v, tol)) ++bad;
    }
  }
  return bad;
}

}  // namespace tgv
