// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tgv/driver.hpp"
#include "tgv/errors.hpp"
#include "tgv/fixtures.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tgv::UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tgv::UsageError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tgv: equivalence checking for tensor computation graphs"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "Check two graphs for equivalence");
  std::string graph_a, graph_b, seed_rules, emit_rules, report = "text";
  tgv::Config cfg;
  verify->add_option("--graph-a", graph_a, "First graph (JSON)")->required();
  verify->add_option("--graph-b", graph_b, "Second graph (JSON)")->required();
  verify->add_option("--seed-rules", seed_rules, "Rule catalogue to start from");
  verify->add_option("--emit-rules", emit_rules, "Write the rule catalogue here");
  verify->add_option("--max-iters", cfg.max_iterations)->check(CLI::PositiveNumber);
  verify->add_option("--atol", cfg.match_tol.atol, "Value-match absolute tolerance");
  verify->add_option("--rtol", cfg.match_tol.rtol, "Value-match relative tolerance");
  verify->add_option("--val-atol", cfg.validation.tol.atol, "Rule validation tolerance");
  verify->add_option("--trials", cfg.validation.trials)->check(CLI::PositiveNumber);
  verify->add_option("--seed", cfg.seed);
  verify->add_option("--report", report)->check(CLI::IsMember({"text", "lines"}));

  auto* fixtures = app.add_subcommand("fixtures", "Fixture generators");
  fixtures->require_subcommand(1);
  auto* gen = fixtures->add_subcommand("gen", "Write a fixture pair");
  std::string name, out_a, out_b, bug;
  uint64_t fseed = 0;
  gen->add_option("--name", name, "Fixture, e.g. gpt2-fragment or tiny-transformer(2)")->required();
  gen->add_option("--seed", fseed);
  gen->add_option("--out-a", out_a)->required();
  gen->add_option("--out-b", out_b)->required();
  gen->add_option("--bug", bug);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (verify->parsed()) {
      auto a = tgv::parse_graph(slurp(graph_a));
      auto b = tgv::parse_graph(slurp(graph_b));
      if (!seed_rules.empty()) cfg.seed_rules = tgv::parse_catalogue(slurp(seed_rules));
      auto result = tgv::compare(a, b, cfg);
      std::cout << tgv::emit_report(result, report == "lines" ? tgv::ReportFormat::Lines : tgv::ReportFormat::Text);
      if (!emit_rules.empty()) spit(emit_rules, tgv::render_catalogue(result.catalogue));
      switch (result.outcome) {
        case tgv::Outcome::Equivalent:
          return 0;
        case tgv::Outcome::NotEquivalent:
          return 1;
        case tgv::Outcome::Inconclusive:
          return 2;
      }
    }
    if (gen->parsed()) {
      auto pair = tgv::gen_pair(tgv::parse_fixture_spec(name, fseed));
      if (!bug.empty()) {
        auto kind = tgv::bug_from_name(bug);
        if (!kind) throw tgv::UsageError("unknown bug kind: " + bug);
        tgv::inject_bug(pair, *kind);
      }
      spit(out_a, tgv::serialize_graph(pair.a));
      spit(out_b, tgv::serialize_graph(pair.b));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
