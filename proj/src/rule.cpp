// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/rule.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

#include "tgv/errors.hpp"
#include "tgv/interp.hpp"

namespace tgv {

Pattern Pattern::make_var(std::string name) {
  Pattern p;
  p.kind = Kind::Var;
  p.var = std::move(name);
  return p;
}

Pattern Pattern::make_lit(Attrs constant_attrs) {
  Pattern p;
  p.kind = Kind::Lit;
  p.op = OpKind::Constant;
  p.attrs = std::move(constant_attrs);
  return p;
}

Pattern Pattern::make_op(OpKind op, Attrs attrs, std::vector<Pattern> children) {
  Pattern p;
  p.kind = Kind::Op;
  p.op = op;
  p.attrs = std::move(attrs);
  p.children = std::move(children);
  return p;
}

std::string render(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Var:
      return "?" + p.var;
    case Pattern::Kind::Lit:
      return "(constant" + format_attrs(p.attrs) + ")";
    case Pattern::Kind::Op: {
      std::string out = "(" + std::string(op_name(p.op)) + format_attrs(p.attrs);
      for (const auto& c : p.children) out += " " + render(c);
      return out + ")";
    }
  }
  return {};
}

namespace {

class SexprReader {
 public:
  explicit SexprReader(std::string_view text) : text_(text) {}

  Pattern read() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of pattern");
    if (text_[pos_] == '?') {
      ++pos_;
      auto name = atom();
      if (name.empty()) throw ParseError("empty variable name");
      return Pattern::make_var(name);
    }
    if (text_[pos_] != '(') throw ParseError("expected '(' or '?' in pattern at offset " + std::to_string(pos_));
    ++pos_;
    skip_ws();
    auto head = atom();
    auto brace = head.find('{');
    std::string name = head.substr(0, brace);
    Attrs attrs = brace == std::string::npos ? Attrs{} : parse_attrs(head.substr(brace));
    auto op = op_from_name(name);
    if (!op) throw SchemaError("unknown op '" + name + "' in pattern");
    std::vector<Pattern> children;
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size()) throw ParseError("unterminated pattern");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      children.push_back(read());
    }
    if (*op == OpKind::Constant) {
      if (!children.empty()) throw SchemaError("constant literal takes no children");
      return Pattern::make_lit(validate_attrs(OpKind::Constant, attrs));
    }
    return Pattern::make_op(*op, attrs, std::move(children));
  }

  void expect_end() {
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing text after pattern");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  // Atoms run until whitespace or a paren; braces and brackets may contain
  // commas but never spaces or parens.
  std::string atom() {
    size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  size_t pos_ = 0;
};

void collect_vars(const Pattern& p, std::vector<std::string>& out) {
  if (p.is_var()) {
    if (std::find(out.begin(), out.end(), p.var) == out.end()) out.push_back(p.var);
    return;
  }
  for (const auto& c : p.children) collect_vars(c, out);
}

}  // namespace

Pattern parse_pattern(std::string_view text) {
  SexprReader reader(text);
  auto p = reader.read();
  reader.expect_end();
  return p;
}

std::vector<std::string> free_vars(const Pattern& p) {
  std::vector<std::string> out;
  collect_vars(p, out);
  return out;
}

int pattern_depth(const Pattern& p) {
  int d = 0;
  for (const auto& c : p.children) d = std::max(d, pattern_depth(c) + 1);
  return d;
}

size_t pattern_size(const Pattern& p) {
  size_t n = 1;
  for (const auto& c : p.children) n += pattern_size(c);
  return n;
}

bool contains_op(const Pattern& p, OpKind op) {
  if (p.kind == Pattern::Kind::Op && p.op == op) return true;
  return std::any_of(p.children.begin(), p.children.end(), [op](const Pattern& c) { return contains_op(c, op); });
}

TensorValue eval_pattern(const Pattern& p, const std::map<std::string, TensorValue>& env) {
  switch (p.kind) {
    case Pattern::Kind::Var: {
      auto it = env.find(p.var);
      if (it == env.end()) throw UsageError("unbound pattern variable ?" + p.var);
      return it->second;
    }
    case Pattern::Kind::Lit:
      return eval_op(OpKind::Constant, p.attrs, {});
    case Pattern::Kind::Op: {
      std::vector<TensorValue> args;
      args.reserve(p.children.size());
      for (const auto& c : p.children) args.push_back(eval_pattern(c, env));
      return eval_op(p.op, p.attrs, args);
    }
  }
  throw UsageError("bad pattern");
}

Pattern fold_compounds(const Pattern& p) {
  Pattern out = p;
  for (auto& c : out.children) c = fold_compounds(c);
  if (out.kind == Pattern::Kind::Op && out.op == OpKind::Add && out.children.size() == 2) {
    const auto& first = out.children[0];
    if (first.kind == Pattern::Kind::Op && first.op == OpKind::Mm) {
      return Pattern::make_op(OpKind::Addmm, {}, {out.children[1], first.children[0], first.children[1]});
    }
  }
  return out;
}

namespace {

std::string render_ref(const DimRef& r) {
  std::string s = "?" + r.var;
  if (r.elem >= 0) s += "." + std::to_string(r.elem);
  return s;
}

DimRef parse_ref(const std::string& text) {
  DimRef r;
  auto dot = text.find('.');
  r.var = text.substr(1, dot == std::string::npos ? std::string::npos : dot - 1);
  if (dot != std::string::npos) r.elem = std::stoi(text.substr(dot + 1));
  return r;
}

const TensorValue* resolve(const DimRef& r, const ShapeEnv& env) {
  auto it = env.find(r.var);
  if (it == env.end()) return nullptr;
  const TensorValue* v = &it->second;
  if (r.elem >= 0) {
    if (!v->is_tuple || r.elem >= static_cast<int>(v->elements.size())) return nullptr;
    v = &v->elements[r.elem];
  } else if (v->is_tuple) {
    return nullptr;
  }
  return v;
}

std::optional<int64_t> dim_of(const DimRef& r, const ShapeEnv& env) {
  auto v = resolve(r, env);
  if (!v || r.axis < 0 || r.axis >= v->rank()) return std::nullopt;
  return v->shape[r.axis];
}

}  // namespace

std::string render(const ShapeConstraint& c) {
  auto dim = [](const DimRef& r) { return "dim(" + render_ref(r) + "," + std::to_string(r.axis) + ")"; };
  switch (c.kind) {
    case ShapeConstraint::Kind::RankEq:
      return "rank(" + render_ref(c.a) + ")=" + std::to_string(c.value);
    case ShapeConstraint::Kind::DimEq:
      return dim(c.a) + "=" + dim(c.b);
    case ShapeConstraint::Kind::DimEqConst:
      return dim(c.a) + "=" + std::to_string(c.value);
    case ShapeConstraint::Kind::Divisible:
      return dim(c.a) + "%" + std::to_string(c.value) + "=0";
    case ShapeConstraint::Kind::NumelEq:
      return "numel(" + render_ref(c.a) + ")=numel(" + render_ref(c.b) + ")";
    case ShapeConstraint::Kind::NumelEqConst:
      return "numel(" + render_ref(c.a) + ")=" + std::to_string(c.value);
  }
  return {};
}

ShapeConstraint parse_constraint(std::string_view text) {
  static const std::string ref = R"((\?[A-Za-z0-9_]+(?:\.\d+)?))";
  static const std::regex rank_re("^rank\\(" + ref + "\\)=(\\d+)$");
  static const std::regex dimeq_re("^dim\\(" + ref + ",(\\d+)\\)=dim\\(" + ref + ",(\\d+)\\)$");
  static const std::regex dimc_re("^dim\\(" + ref + ",(\\d+)\\)=(\\d+)$");
  static const std::regex div_re("^dim\\(" + ref + ",(\\d+)\\)%(\\d+)=0$");
  static const std::regex numeq_re("^numel\\(" + ref + "\\)=numel\\(" + ref + "\\)$");
  static const std::regex numc_re("^numel\\(" + ref + "\\)=(\\d+)$");
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  }
  std::smatch m;
  ShapeConstraint c;
  if (std::regex_match(s, m, rank_re)) {
    c.kind = ShapeConstraint::Kind::RankEq;
    c.a = parse_ref(m[1]);
    c.value = std::stoll(m[2]);
  } else if (std::regex_match(s, m, dimeq_re)) {
    c.kind = ShapeConstraint::Kind::DimEq;
    c.a = parse_ref(m[1]);
    c.a.axis = std::stoll(m[2]);
    c.b = parse_ref(m[3]);
    c.b.axis = std::stoll(m[4]);
  } else if (std::regex_match(s, m, dimc_re)) {
    c.kind = ShapeConstraint::Kind::DimEqConst;
    c.a = parse_ref(m[1]);
    c.a.axis = std::stoll(m[2]);
    c.value = std::stoll(m[3]);
  } else if (std::regex_match(s, m, div_re)) {
    c.kind = ShapeConstraint::Kind::Divisible;
    c.a = parse_ref(m[1]);
    c.a.axis = std::stoll(m[2]);
    c.value = std::stoll(m[3]);
  } else if (std::regex_match(s, m, numeq_re)) {
    c.kind = ShapeConstraint::Kind::NumelEq;
    c.a = parse_ref(m[1]);
    c.b = parse_ref(m[2]);
  } else if (std::regex_match(s, m, numc_re)) {
    c.kind = ShapeConstraint::Kind::NumelEqConst;
    c.a = parse_ref(m[1]);
    c.value = std::stoll(m[2]);
  } else {
    throw ParseError("unrecognized shape constraint '" + std::string(text) + "'");
  }
  return c;
}

bool constraint_holds(const ShapeConstraint& c, const ShapeEnv& env) {
  switch (c.kind) {
    case ShapeConstraint::Kind::RankEq: {
      auto v = resolve(c.a, env);
      return v && v->rank() == c.value;
    }
    case ShapeConstraint::Kind::DimEq: {
      auto x = dim_of(c.a, env), y = dim_of(c.b, env);
      return x && y && *x == *y;
    }
    case ShapeConstraint::Kind::DimEqConst: {
      auto x = dim_of(c.a, env);
      return x && *x == c.value;
    }
    case ShapeConstraint::Kind::Divisible: {
      auto x = dim_of(c.a, env);
      return x && c.value > 0 && *x % c.value == 0;
    }
    case ShapeConstraint::Kind::NumelEq: {
      auto x = resolve(c.a, env), y = resolve(c.b, env);
      return x && y && numel(x->shape) == numel(y->shape);
    }
    case ShapeConstraint::Kind::NumelEqConst: {
      auto x = resolve(c.a, env);
      return x && numel(x->shape) == c.value;
    }
  }
  return false;
}

std::string_view rule_class_name(RuleClass c) {
  switch (c) {
    case RuleClass::ScalarLogic:
      return "ScalarLogic";
    case RuleClass::TensorRearrangement:
      return "TensorRearrangement";
    default:
      return "OpaqueHeavy";
  }
}

std::string_view validation_name(Validation v) {
  switch (v) {
    case Validation::Unvalidated:
      return "Unvalidated";
    case Validation::FormallyVerified:
      return "FormallyVerified";
    case Validation::EmpiricallyValidated:
      return "EmpiricallyValidated";
    default:
      return "Rejected";
  }
}

namespace {

bool alpha_eq(const Pattern& x, const Pattern& y, std::map<std::string, std::string>& fwd,
              std::map<std::string, std::string>& bwd) {
  if (x.kind != y.kind) return false;
  if (x.is_var()) {
    auto [f, fi] = fwd.emplace(x.var, y.var);
    auto [b, bi] = bwd.emplace(y.var, x.var);
    return f->second == y.var && b->second == x.var;
  }
  if (x.op != y.op || !(x.attrs == y.attrs) || x.children.size() != y.children.size()) return false;
  for (size_t i = 0; i < x.children.size(); ++i) {
    if (!alpha_eq(x.children[i], y.children[i], fwd, bwd)) return false;
  }
  return true;
}

bool instance(const Pattern& general, const Pattern& specific, std::map<std::string, Pattern>& sub) {
  if (general.is_var()) {
    auto [it, inserted] = sub.emplace(general.var, specific);
    return inserted || it->second == specific;
  }
  if (general.kind != specific.kind || general.op != specific.op || !(general.attrs == specific.attrs) ||
      general.children.size() != specific.children.size()) {
    return false;
  }
  for (size_t i = 0; i < general.children.size(); ++i) {
    if (!instance(general.children[i], specific.children[i], sub)) return false;
  }
  return true;
}

Pattern rename(const Pattern& p, const std::map<std::string, std::string>& names) {
  if (p.is_var()) return Pattern::make_var(names.at(p.var));
  Pattern out = p;
  for (auto& c : out.children) c = rename(c, names);
  return out;
}

std::string var_name(size_t i) {
  std::string s(1, static_cast<char>('a' + i % 26));
  if (i >= 26) s += std::to_string(i / 26);
  return s;
}

}  // namespace

bool alpha_equivalent(const Rule& x, const Rule& y) {
  {
    std::map<std::string, std::string> f, b;
    if (alpha_eq(x.lhs, y.lhs, f, b) && alpha_eq(x.rhs, y.rhs, f, b)) return true;
  }
  std::map<std::string, std::string> f, b;
  return alpha_eq(x.lhs, y.rhs, f, b) && alpha_eq(x.rhs, y.lhs, f, b);
}

bool is_instance_of(const Rule& specific, const Rule& general) {
  {
    std::map<std::string, Pattern> sub;
    if (instance(general.lhs, specific.lhs, sub) && instance(general.rhs, specific.rhs, sub)) return true;
  }
  std::map<std::string, Pattern> sub;
  return instance(general.lhs, specific.rhs, sub) && instance(general.rhs, specific.lhs, sub);
}

Rule canonical_names(const Rule& r) {
  auto vars = free_vars(r.lhs);
  for (const auto& v : free_vars(r.rhs)) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  }
  std::map<std::string, std::string> names;
  for (size_t i = 0; i < vars.size(); ++i) names[vars[i]] = var_name(i);
  Rule out = r;
  out.lhs = rename(r.lhs, names);
  out.rhs = rename(r.rhs, names);
  for (auto& c : out.pre) {
    if (names.count(c.a.var)) c.a.var = names.at(c.a.var);
    if (names.count(c.b.var)) c.b.var = names.at(c.b.var);
  }
  return out;
}

std::string render_rule(const Rule& r) {
  std::ostringstream out;
  out << "rule " << r.id << "\n";
  out << "  lhs: " << render(r.lhs) << "\n";
  out << "  rhs: " << render(r.rhs) << "\n";
  out << "  pre:";
  if (r.pre.empty()) {
    out << " -";
  } else {
    for (size_t i = 0; i < r.pre.size(); ++i) out << (i ? "; " : " ") << render(r.pre[i]);
  }
  out << "\n";
  out << "  class: " << (r.rule_class ? std::string(rule_class_name(*r.rule_class)) : std::string("-")) << "\n";
  out << "  validation: " << validation_name(r.validation);
  if (r.validation == Validation::EmpiricallyValidated) out << " trials=" << r.trials;
  if (r.cex_hash) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.cex_hash));
    out << " cex=" << buf;
  }
  out << "\n";
  if (!r.reason.empty()) out << "  reason: " << r.reason << "\n";
  if (r.prov_u >= 0) out << "  provenance: " << r.prov_u << " " << r.prov_v << "\n";
  out << "  instances: " << r.instances << "\n";
  out << "end\n";
  return out.str();
}

std::string render_catalogue(const std::vector<Rule>& rules) {
  std::string out;
  for (const auto& r : rules) out += render_rule(r);
  return out;
}

namespace {

std::string trim_copy(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<Rule> parse_catalogue(std::string_view text) {
  std::vector<Rule> rules;
  std::optional<Rule> cur;
  bool have_lhs = false, have_rhs = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = trim_copy(raw);
    if (line.empty() || line[0] == '#') continue;
    auto where = " (line " + std::to_string(lineno) + ")";
    if (line.rfind("rule", 0) == 0 && (line.size() == 4 || line[4] == ' ')) {
      if (cur) throw ParseError("nested rule block" + where);
      cur = Rule{};
      have_lhs = have_rhs = false;
      auto rest = trim_copy(std::string_view(line).substr(4));
      cur->id = rest.empty() ? static_cast<int>(rules.size()) : std::stoi(rest);
      continue;
    }
    if (!cur) throw ParseError("text outside a rule block" + where);
    if (line == "end") {
      if (!have_lhs || !have_rhs) throw ParseError("rule without lhs/rhs" + where);
      rules.push_back(std::move(*cur));
      cur.reset();
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'key: value'" + where);
    auto key = trim_copy(std::string_view(line).substr(0, colon));
    auto value = trim_copy(std::string_view(line).substr(colon + 1));
    if (key == "lhs") {
      cur->lhs = parse_pattern(value);
      have_lhs = true;
    } else if (key == "rhs") {
      cur->rhs = parse_pattern(value);
      have_rhs = true;
    } else if (key == "pre") {
      if (value == "-" || value.empty()) continue;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ';')) {
        if (!trim_copy(item).empty()) cur->pre.push_back(parse_constraint(item));
      }
    } else if (key == "class") {
      if (value == "ScalarLogic") cur->rule_class = RuleClass::ScalarLogic;
      if (value == "TensorRearrangement") cur->rule_class = RuleClass::TensorRearrangement;
      if (value == "OpaqueHeavy") cur->rule_class = RuleClass::OpaqueHeavy;
    } else if (key == "validation") {
      std::istringstream vs(value);
      std::string name, extra;
      vs >> name;
      if (name == "FormallyVerified") {
        cur->validation = Validation::FormallyVerified;
      } else if (name == "EmpiricallyValidated") {
        cur->validation = Validation::EmpiricallyValidated;
      } else if (name == "Rejected") {
        cur->validation = Validation::Rejected;
      } else {
        cur->validation = Validation::Unvalidated;
      }
      while (vs >> extra) {
        if (extra.rfind("trials=", 0) == 0) cur->trials = std::stoi(extra.substr(7));
        if (extra.rfind("cex=", 0) == 0) cur->cex_hash = std::stoull(extra.substr(4), nullptr, 16);
      }
    } else if (key == "reason") {
      cur->reason = value;
    } else if (key == "provenance") {
      std::istringstream ps(value);
      ps >> cur->prov_u >> cur->prov_v;
    } else if (key == "instances") {
      cur->instances = std::stoi(value);
    } else {
      throw ParseError("unknown rule field '" + key + "'" + where);
    }
  }
  if (cur) throw ParseError("unterminated rule block");
  return rules;
}

}  // namespace tgv
