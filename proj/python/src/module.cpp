// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tgv/driver.hpp"
#include "tgv/errors.hpp"
#include "tgv/fixtures.hpp"
#include "tgv/graph.hpp"
#include "tgv/validate.hpp"

namespace py = pybind11;
using namespace tgv;

namespace {

py::dict stats_dict(const Stats& s) {
  py::dict d;
  d["iterations"] = s.iterations;
  d["candidates"] = s.candidates;
  d["blocked"] = s.blocked;
  d["synth_attempts"] = s.synth_attempts;
  d["synth_accepted"] = s.synth_accepted;
  d["synth_rejected"] = s.synth_rejected;
  d["apply_successes"] = s.apply_successes;
  d["unique_rules"] = s.unique_rules;
  d["rule_instances"] = s.rule_instances;
  d["formally_verified"] = s.formally_verified;
  d["empirically_validated"] = s.empirically_validated;
  d["merges_input"] = s.merges_input;
  d["merges_rule"] = s.merges_rule;
  d["merges_congruence"] = s.merges_congruence;
  return d;
}

py::object mismatch_dict(const std::optional<MismatchReport>& r) {
  if (!r) return py::none();
  py::dict d;
  d["a"] = r->a.label();
  d["b"] = r->b.label();
  d["a_id"] = r->a.id;
  d["b_id"] = r->b.id;
  d["level_hint"] = r->level_hint;
  d["path"] = r->path;
  d["skipped"] = r->skipped;
  d["reason"] = r->reason;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Equivalence checking for tensor computation graphs";

  py::register_exception<Error>(m, "TgvError", PyExc_RuntimeError);

  py::class_<ComputationGraph>(m, "Graph")
      .def_static("from_json", [](const std::string& text) { return parse_graph(text); }, py::arg("text"))
      .def("to_json", [](const ComputationGraph& g) { return serialize_graph(g); })
      .def_property_readonly("num_nodes", [](const ComputationGraph& g) { return g.nodes.size(); })
      .def_property_readonly("outputs", [](const ComputationGraph& g) { return g.outputs; })
      .def("__repr__", [](const ComputationGraph& g) {
        return "<Graph nodes=" + std::to_string(g.nodes.size()) + " outputs=" + std::to_string(g.outputs.size()) + ">";
      });

  py::class_<CompareResult>(m, "Result")
      .def_property_readonly("outcome", [](const CompareResult& r) { return std::string(outcome_name(r.outcome)); })
      .def_property_readonly("mismatch", [](const CompareResult& r) { return mismatch_dict(r.report); })
      .def_property_readonly("stats", [](const CompareResult& r) { return stats_dict(r.stats); })
      .def_property_readonly("verdict_log", [](const CompareResult& r) { return r.verdict_log; })
      .def_property_readonly("catalogue", [](const CompareResult& r) { return render_catalogue(r.catalogue); })
      .def("report", [](const CompareResult& r, const std::string& format) {
        if (format == "text") return emit_report(r, ReportFormat::Text);
        if (format == "lines") return emit_report(r, ReportFormat::Lines);
        throw UsageError("report format must be 'text' or 'lines'");
      }, py::arg("format") = "text");

  m.def(
      "compare",
      [](const ComputationGraph& a, const ComputationGraph& b, uint64_t seed, int max_iterations, double atol,
         double rtol, double val_atol, int trials, const std::string& seed_rules) {
        Config cfg;
        cfg.seed = seed;
        cfg.max_iterations = max_iterations;
        cfg.match_tol = {atol, rtol};
        cfg.validation.tol.atol = val_atol;
        cfg.validation.trials = trials;
        if (!seed_rules.empty()) cfg.seed_rules = parse_catalogue(seed_rules);
        py::gil_scoped_release release;
        return compare(a, b, cfg);
      },
      py::arg("a"), py::arg("b"), py::kw_only(), py::arg("seed") = 0, py::arg("max_iterations") = 2,
      py::arg("atol") = 1e-2, py::arg("rtol") = 1e-2, py::arg("val_atol") = 1e-4, py::arg("trials") = 32,
      py::arg("seed_rules") = "");

  m.def(
      "fixture",
      [](const std::string& name, uint64_t seed, const std::optional<std::string>& bug) {
        auto pair = gen_pair(parse_fixture_spec(name, seed));
        if (bug) {
          auto kind = bug_from_name(*bug);
          if (!kind) throw UsageError("unknown bug: " + *bug);
          inject_bug(pair, *kind);
        }
        return py::make_tuple(pair.a, pair.b);
      },
      py::arg("name"), py::arg("seed") = 0, py::arg("bug") = py::none());

  m.def("fixture_names", [] {
    std::vector<std::string> out;
    for (const auto& s : suite_specs()) out.push_back(s.name);
    return out;
  });
  m.def("bug_names", [] {
    std::vector<std::string> out;
    for (auto b : all_bugs()) out.emplace_back(bug_name(b));
    return out;
  });

  m.def(
      "validate_rule",
      [](const std::string& lhs, const std::string& rhs, const std::vector<std::string>& pre, uint64_t seed,
         int trials, double atol) {
        Rule r;
        r.lhs = parse_pattern(lhs);
        r.rhs = parse_pattern(rhs);
        for (const auto& c : pre) r.pre.push_back(parse_constraint(c));
        ValidationConfig cfg;
        cfg.seed = seed;
        cfg.trials = trials;
        cfg.tol.atol = atol;
        auto v = validate(r, cfg);
        py::dict d;
        d["level"] = std::string(validation_name(v.level));
        d["rule_class"] = v.rule_class ? py::cast(std::string(rule_class_name(*v.rule_class))) : py::none();
        d["trials"] = v.trials;
        d["reason"] = v.reason;
        d["cex_hash"] = v.cex_hash;
        return d;
      },
      py::arg("lhs"), py::arg("rhs"), py::arg("pre") = std::vector<std::string>{}, py::kw_only(),
      py::arg("seed") = 0, py::arg("trials") = 32, py::arg("atol") = 1e-4);
}
