// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tgv {

// The closed operator vocabulary. Order matters: it is used as a
// deterministic tie-breaker in several places.
enum class OpKind : uint8_t {
  Input,
  Constant,
  Add,
  Mul,
  Matmul,
  Mm,
  Addmm,
  Linear,
  Transpose,
  Reshape,
  Concat,
  Split,
  Chunk,
  GetItem,
  Embedding,
  LayerNorm,
  Gelu,
  Softmax,
  ScaledDotProductAttention,
  FusedAttention,
  ReduceAdd,
};

inline constexpr int kNumOpKinds = 21;

std::string_view op_name(OpKind op);
std::optional<OpKind> op_from_name(std::string_view name);

/// Leaves carry no children and are never expanded by pattern extraction.
bool is_leaf_op(OpKind op);

/// Ops whose semantics are hidden from symbolic reasoning.
bool is_opaque(OpKind op);

/// Ops that only move elements around (no arithmetic).
bool is_rearrangement(OpKind op);

/// Ops producing a tuple value.
bool is_multi_output(OpKind op);

struct Arity {
  int min;
  int max;  // -1 = unbounded
};
Arity op_arity(OpKind op);

using AttrValue = std::variant<int64_t, double, std::string, std::vector<int64_t>>;

/// Sorted attribute map. Attributes participate in node identity, so the
/// container is ordered and compared structurally.
class Attrs {
 public:
  Attrs() = default;
  Attrs(std::initializer_list<std::pair<const std::string, AttrValue>> init) : items_(init) {}

  bool has(const std::string& key) const { return items_.count(key) != 0; }
  void set(const std::string& key, AttrValue value) { items_[key] = std::move(value); }
  void erase(const std::string& key) { items_.erase(key); }

  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_real(const std::string& key) const;
  std::optional<double> get_real_opt(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<int64_t> get_ints(const std::string& key) const;

  const std::map<std::string, AttrValue>& items() const { return items_; }
  bool empty() const { return items_.empty(); }

  friend bool operator==(const Attrs& a, const Attrs& b) { return a.items_ == b.items_; }
  friend bool operator<(const Attrs& a, const Attrs& b) { return a.items_ < b.items_; }

 private:
  std::map<std::string, AttrValue> items_;
};

/// Compact deterministic rendering: `{dim0=1,dim1=2}` or empty string.
std::string format_attrs(const Attrs& attrs);
std::string format_attr_value(const AttrValue& v);

/// Parses the output of format_attrs (without surrounding braces handling
/// beyond what format_attrs produces).
Attrs parse_attrs(std::string_view text);

/// Checks attrs against the op's schema and returns them in canonical form
/// (integer literals for real-valued keys become reals, defaults that do
/// not change semantics are left absent). Throws SchemaError.
Attrs validate_attrs(OpKind op, const Attrs& attrs);

/// Normalizes negative axis attributes given the rank of the first input.
/// `input_rank` is the rank of the tensor the axis refers to.
Attrs normalize_axes(OpKind op, const Attrs& attrs, int64_t input_rank);

}  // namespace tgv
