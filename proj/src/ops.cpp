// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/ops.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tgv/errors.hpp"

namespace tgv {

namespace {

constexpr std::array<std::string_view, kNumOpKinds> kOpNames = {
    "input",     "constant", "add",       "mul",      "matmul",
    "mm",        "addmm",    "linear",    "transpose", "reshape",
    "concat",    "split",    "chunk",     "get_item", "embedding",
    "layernorm", "gelu",     "softmax",   "scaled_dot_product_attention",
    "fused_attention",       "reduce_add",
};

enum class AttrType { Int, Real, String, Ints };

struct AttrSpec {
  const char* key;
  AttrType type;
  bool required;
};

std::vector<AttrSpec> attr_schema(OpKind op) {
  switch (op) {
    case OpKind::Constant:
      return {{"value", AttrType::Real, true}, {"shape", AttrType::Ints, true}};
    case OpKind::Transpose:
      return {{"dim0", AttrType::Int, true}, {"dim1", AttrType::Int, true}};
    case OpKind::Reshape:
      return {{"shape", AttrType::Ints, true}};
    case OpKind::Concat:
      return {{"axis", AttrType::Int, true}};
    case OpKind::Split:
      return {{"size", AttrType::Int, true}, {"axis", AttrType::Int, true}};
    case OpKind::Chunk:
      return {{"chunks", AttrType::Int, true}, {"dim", AttrType::Int, true}};
    case OpKind::GetItem:
      return {{"index", AttrType::Int, true}};
    case OpKind::LayerNorm:
      return {{"eps", AttrType::Real, false}};
    case OpKind::Gelu:
      return {{"approximate", AttrType::String, false}};
    case OpKind::Softmax:
      return {{"dim", AttrType::Int, true}};
    case OpKind::ScaledDotProductAttention:
      return {{"scale", AttrType::Real, false}};
    case OpKind::FusedAttention:
      return {{"scale", AttrType::Real, false}, {"heads", AttrType::Int, false}};
    default:
      return {};
  }
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string_view op_name(OpKind op) { return kOpNames[static_cast<size_t>(op)]; }

std::optional<OpKind> op_from_name(std::string_view name) {
  for (size_t i = 0; i < kOpNames.size(); ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  return std::nullopt;
}

bool is_leaf_op(OpKind op) { return op == OpKind::Input || op == OpKind::Constant; }

bool is_opaque(OpKind op) { return op == OpKind::FusedAttention; }

bool is_rearrangement(OpKind op) {
  switch (op) {
    case OpKind::Transpose:
    case OpKind::Reshape:
    case OpKind::Concat:
    case OpKind::Split:
    case OpKind::Chunk:
    case OpKind::GetItem:
      return true;
    default:
      return false;
  }
}

bool is_multi_output(OpKind op) { return op == OpKind::Split || op == OpKind::Chunk; }

Arity op_arity(OpKind op) {
  switch (op) {
    case OpKind::Input:
    case OpKind::Constant:
      return {0, 0};
    case OpKind::Add:
    case OpKind::Mul:
    case OpKind::Matmul:
    case OpKind::Mm:
    case OpKind::Embedding:
      return {2, 2};
    case OpKind::Addmm:
    case OpKind::ScaledDotProductAttention:
    case OpKind::FusedAttention:
      return {3, 3};
    case OpKind::Linear:
      return {2, 3};
    case OpKind::LayerNorm:
      return {1, 3};
    case OpKind::Concat:
    case OpKind::ReduceAdd:
      return {1, -1};
    default:
      return {1, 1};
  }
}

int64_t Attrs::get_int(const std::string& key) const {
  auto it = items_.find(key);
  if (it == items_.end()) throw AttrError("missing attribute '" + key + "'");
  if (auto* v = std::get_if<int64_t>(&it->second)) return *v;
  throw AttrError("attribute '" + key + "' is not an integer");
}

int64_t Attrs::get_int(const std::string& key, int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double Attrs::get_real(const std::string& key) const {
  auto it = items_.find(key);
  if (it == items_.end()) throw AttrError("missing attribute '" + key + "'");
  if (auto* v = std::get_if<double>(&it->second)) return *v;
  if (auto* v = std::get_if<int64_t>(&it->second)) return static_cast<double>(*v);
  throw AttrError("attribute '" + key + "' is not a number");
}

std::optional<double> Attrs::get_real_opt(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_real(key);
}

std::string Attrs::get_string(const std::string& key, const std::string& fallback) const {
  auto it = items_.find(key);
  if (it == items_.end()) return fallback;
  if (auto* v = std::get_if<std::string>(&it->second)) return *v;
  throw AttrError("attribute '" + key + "' is not a string");
}

std::vector<int64_t> Attrs::get_ints(const std::string& key) const {
  auto it = items_.find(key);
  if (it == items_.end()) throw AttrError("missing attribute '" + key + "'");
  if (auto* v = std::get_if<std::vector<int64_t>>(&it->second)) return *v;
  throw AttrError("attribute '" + key + "' is not an integer list");
}

std::string format_attr_value(const AttrValue& v) {
  if (auto* i = std::get_if<int64_t>(&v)) return std::to_string(*i);
  if (auto* d = std::get_if<double>(&v)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    std::string s = buf;
    if (s.find_first_of(".eni") == std::string::npos) s += ".0";
    return s;
  }
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  const auto& list = std::get<std::vector<int64_t>>(v);
  std::string out = "[";
  for (size_t i = 0; i < list.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(list[i]);
  }
  return out + "]";
}

std::string format_attrs(const Attrs& attrs) {
  if (attrs.empty()) return "";
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : attrs.items()) {
    if (!first) out += ",";
    first = false;
    out += k + "=" + format_attr_value(v);
  }
  return out + "}";
}

Attrs parse_attrs(std::string_view text) {
  std::string body = trim(text);
  if (body.empty()) return {};
  if (body.front() != '{' || body.back() != '}') throw ParseError("attrs must be enclosed in braces");
  body = body.substr(1, body.size() - 2);
  Attrs out;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t eq = body.find('=', pos);
    if (eq == std::string::npos) throw ParseError("attr without '=' in " + std::string(text));
    std::string key = trim(std::string_view(body).substr(pos, eq - pos));
    size_t end;
    std::string value;
    if (eq + 1 < body.size() && body[eq + 1] == '[') {
      end = body.find(']', eq);
      if (end == std::string::npos) throw ParseError("unterminated list attr");
      value = body.substr(eq + 1, end - eq);
      ++end;
    } else {
      end = body.find(',', eq);
      if (end == std::string::npos) end = body.size();
      value = trim(std::string_view(body).substr(eq + 1, end - eq - 1));
    }
    if (value.empty()) throw ParseError("empty attr value for " + key);
    if (value.front() == '[') {
      std::vector<int64_t> list;
      std::string inner = value.substr(1, value.size() - 2);
      std::stringstream ss(inner);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) list.push_back(std::stoll(item));
      }
      out.set(key, list);
    } else if (std::isdigit(static_cast<unsigned char>(value[0])) || value[0] == '-' || value[0] == '+') {
      if (value.find_first_of(".eEn") != std::string::npos) {
        out.set(key, std::stod(value));
      } else {
        out.set(key, static_cast<int64_t>(std::stoll(value)));
      }
    } else {
      out.set(key, value);
    }
    pos = end;
    while (pos < body.size() && (body[pos] == ',' || std::isspace(static_cast<unsigned char>(body[pos])))) ++pos;
  }
  return out;
}

Attrs validate_attrs(OpKind op, const Attrs& attrs) {
  auto schema = attr_schema(op);
  Attrs out;
  for (const auto& [key, value] : attrs.items()) {
    const AttrSpec* spec = nullptr;
    for (const auto& s : schema) {
      if (key == s.key) spec = &s;
    }
    if (!spec) {
      throw SchemaError("unexpected attribute '" + key + "' for op " + std::string(op_name(op)));
    }
    bool ok = false;
    switch (spec->type) {
      case AttrType::Int:
        ok = std::holds_alternative<int64_t>(value);
        if (ok) out.set(key, value);
        break;
      case AttrType::Real:
        if (auto* i = std::get_if<int64_t>(&value)) {
          out.set(key, static_cast<double>(*i));
          ok = true;
        } else if (std::holds_alternative<double>(value)) {
          out.set(key, value);
          ok = true;
        }
        break;
      case AttrType::String:
        ok = std::holds_alternative<std::string>(value);
        if (ok) out.set(key, value);
        break;
      case AttrType::Ints:
        ok = std::holds_alternative<std::vector<int64_t>>(value);
        if (ok) out.set(key, value);
        break;
    }
    if (!ok) {
      throw SchemaError("attribute '" + key + "' of op " + std::string(op_name(op)) + " has the wrong type");
    }
  }
  for (const auto& s : schema) {
    if (s.required && !out.has(s.key)) {
      throw SchemaError("op " + std::string(op_name(op)) + " requires attribute '" + s.key + "'");
    }
  }
  if (op == OpKind::Gelu && out.has("approximate")) {
    auto mode = out.get_string("approximate", "exact");
    if (mode != "exact" && mode != "tanh") throw SchemaError("gelu approximate must be exact or tanh");
  }
  if (op == OpKind::Chunk && out.get_int("chunks") <= 0) throw SchemaError("chunk count must be positive");
  if (op == OpKind::Split && out.get_int("size") <= 0) throw SchemaError("split size must be positive");
  if (op == OpKind::GetItem && out.get_int("index") < 0) throw SchemaError("get_item index must be >= 0");
  if (op == OpKind::FusedAttention && out.has("heads") && out.get_int("heads") <= 0) {
    throw SchemaError("fused_attention heads must be positive");
  }
  if (op == OpKind::Constant) {
    for (auto d : out.get_ints("shape")) {
      if (d < 0) throw SchemaError("constant shape must be non-negative");
    }
  }
  if (op == OpKind::Reshape) {
    for (auto d : out.get_ints("shape")) {
      if (d < 0) throw SchemaError("reshape target must be materialized (non-negative)");
    }
  }
  return out;
}

Attrs normalize_axes(OpKind op, const Attrs& attrs, int64_t rank) {
  auto fix = [rank](int64_t axis, bool allow_end) -> int64_t {
    int64_t r = allow_end ? rank + 1 : rank;
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) throw SchemaError("axis out of range for rank " + std::to_string(rank));
    return axis;
  };
  Attrs out = attrs;
  switch (op) {
    case OpKind::Transpose:
      out.set("dim0", fix(attrs.get_int("dim0"), false));
      out.set("dim1", fix(attrs.get_int("dim1"), false));
      break;
    case OpKind::Concat:
    case OpKind::Split:
      out.set("axis", fix(attrs.get_int("axis"), false));
      break;
    case OpKind::Chunk:
    case OpKind::Softmax:
      out.set("dim", fix(attrs.get_int("dim"), false));
      break;
    default:
      break;
  }
  return out;
}

}  // namespace tgv
