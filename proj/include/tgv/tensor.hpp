// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tgv {

enum class DType : uint8_t { F64, I64 };

using Shape = std::vector<int64_t>;

int64_t numel(const Shape& shape);
std::string format_shape(const Shape& shape);

/// Dense row-major tensor, or a tuple of tensors for multi-output ops.
/// Integer tensors store their elements as doubles (exact below 2^53).
struct TensorValue {
  Shape shape;
  DType dtype = DType::F64;
  std::vector<double> data;
  bool is_tuple = false;
  std::vector<TensorValue> elements;

  static TensorValue zeros(Shape shape, DType dtype = DType::F64);
  static TensorValue from(Shape shape, std::vector<double> data, DType dtype = DType::F64);
  static TensorValue tuple(std::vector<TensorValue> elements);

  int64_t rank() const { return static_cast<int64_t>(shape.size()); }
  int64_t size() const { return static_cast<int64_t>(data.size()); }

  /// Bit-exact structural equality.
  friend bool operator==(const TensorValue& a, const TensorValue& b);
};

/// Short description used in reports ("f64[2,3]" or "(f64[2,4],f64[2,4])").
std::string describe(const TensorValue& v);

struct Tolerance {
  double atol = 1e-2;
  double rtol = 1e-2;
};

/// True iff shapes/dtypes agree and |a_i - b_i| <= atol + rtol * |b_i| for all
/// elements (tuples compared pointwise).
bool values_match(const TensorValue& a, const TensorValue& b, const Tolerance& tol);

/// Largest elementwise absolute difference; +inf on shape mismatch.
double max_abs_diff(const TensorValue& a, const TensorValue& b);

/// Coarse fingerprint used to prune candidate comparisons. Never used to
/// accept a relation on its own.
struct ValueSignature {
  std::vector<Shape> shapes;
  std::vector<DType> dtypes;
  double mean = 0.0;
  double max_abs = 0.0;

  /// Hash over the exact part of the signature (shapes and dtypes).
  uint64_t bucket() const;
  friend bool operator==(const ValueSignature&, const ValueSignature&) = default;
};

ValueSignature value_signature(const TensorValue& v);

/// Necessary condition for values_match(a, b, tol) given the two signatures.
bool signatures_compatible(const ValueSignature& a, const ValueSignature& b, const Tolerance& tol);

/// FNV-1a over a byte string; stable across platforms and runs.
uint64_t fnv1a(const std::string& bytes);

}  // namespace tgv
