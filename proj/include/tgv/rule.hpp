// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgv/egraph.hpp"
#include "tgv/ops.hpp"
#include "tgv/tensor.hpp"

namespace tgv {

/// Operator term with free variables. Literals are constant nodes and match
/// syntactically on their attributes.
struct Pattern {
  enum class Kind : uint8_t { Var, Lit, Op };
  Kind kind = Kind::Var;
  std::string var;
  OpKind op = OpKind::Constant;
  Attrs attrs;
  std::vector<Pattern> children;

  static Pattern make_var(std::string name);
  static Pattern make_lit(Attrs constant_attrs);
  static Pattern make_op(OpKind op, Attrs attrs, std::vector<Pattern> children);

  bool is_var() const { return kind == Kind::Var; }
  friend bool operator==(const Pattern&, const Pattern&) = default;
};

/// S-expression form: `?a`, `(constant{shape=[],value=0.5})`,
/// `(transpose{dim0=0,dim1=1} ?c)`.
std::string render(const Pattern& p);
Pattern parse_pattern(std::string_view text);

/// Variables in order of first appearance.
std::vector<std::string> free_vars(const Pattern& p);
int pattern_depth(const Pattern& p);
size_t pattern_size(const Pattern& p);
bool contains_op(const Pattern& p, OpKind op);

/// Evaluates the pattern with the reference interpreter.
TensorValue eval_pattern(const Pattern& p, const std::map<std::string, TensorValue>& env);

/// Presentation form: add(mm(a, c), b) is shown as the compound addmm(b, a, c).
Pattern fold_compounds(const Pattern& p);

/// A dimension of a variable's value; `elem` selects a tuple element (-1 for
/// plain tensors).
struct DimRef {
  std::string var;
  int elem = -1;
  int64_t axis = 0;
  auto operator<=>(const DimRef&) const = default;
};

struct ShapeConstraint {
  enum class Kind : uint8_t { RankEq, DimEq, DimEqConst, Divisible, NumelEq, NumelEqConst };
  Kind kind = Kind::DimEq;
  DimRef a;      // for RankEq / NumelEq*: only var and elem are used
  DimRef b;      // DimEq, NumelEq
  int64_t value = 0;  // RankEq, DimEqConst, Divisible, NumelEqConst

  auto operator<=>(const ShapeConstraint&) const = default;
};

std::string render(const ShapeConstraint& c);
ShapeConstraint parse_constraint(std::string_view text);

/// Shapes of the values a substitution binds, by variable. Tuple values list
/// their elements.
using ShapeEnv = std::map<std::string, TensorValue>;

/// True iff the constraint holds for the shapes of the given values.
bool constraint_holds(const ShapeConstraint& c, const ShapeEnv& env);

enum class RuleClass : uint8_t { ScalarLogic, TensorRearrangement, OpaqueHeavy };
std::string_view rule_class_name(RuleClass c);

enum class Validation : uint8_t { Unvalidated, FormallyVerified, EmpiricallyValidated, Rejected };
std::string_view validation_name(Validation v);

struct Rule {
  int id = 0;
  Pattern lhs;
  Pattern rhs;
  std::vector<ShapeConstraint> pre;
  ClassId prov_u = -1;  // provenance pair; -1 for seeded rules
  ClassId prov_v = -1;
  Validation validation = Validation::Unvalidated;
  std::optional<RuleClass> rule_class;
  int trials = 0;
  std::string reason;       // rejection reason
  uint64_t cex_hash = 0;    // counterexample hash, 0 when none
  int instances = 0;        // successful applications (including the first merge)
};

/// Equal up to consistent variable renaming, in either orientation.
bool alpha_equivalent(const Rule& x, const Rule& y);

/// True iff `specific` is obtained from `general` by substituting patterns for
/// variables (one substitution for both sides, either orientation).
bool is_instance_of(const Rule& specific, const Rule& general);

/// Renames variables to a, b, c, ... in order of first appearance (lhs then rhs).
Rule canonical_names(const Rule& r);

/// Line-oriented catalogue:
///   rule 3
///     lhs: (...)
///     rhs: (...)
///     pre: dim(?a,1)=12; dim(?a,1)%3=0
///     class: TensorRearrangement
///     validation: FormallyVerified
///     instances: 2
///   end
std::string render_rule(const Rule& r);
std::string render_catalogue(const std::vector<Rule>& rules);
std::vector<Rule> parse_catalogue(std::string_view text);

}  // namespace tgv
