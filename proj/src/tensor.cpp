// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/tensor.hpp"

#include <cmath>
#include <limits>

#include "tgv/errors.hpp"

namespace tgv {

int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string format_shape(const Shape& shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

TensorValue TensorValue::zeros(Shape shape, DType dtype) {
  TensorValue v;
  v.data.assign(static_cast<size_t>(numel(shape)), 0.0);
  v.shape = std::move(shape);
  v.dtype = dtype;
  return v;
}

TensorValue TensorValue::from(Shape shape, std::vector<double> data, DType dtype) {
  if (numel(shape) != static_cast<int64_t>(data.size())) {
    throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " + format_shape(shape));
  }
  TensorValue v;
  v.shape = std::move(shape);
  v.data = std::move(data);
  v.dtype = dtype;
  return v;
}

TensorValue TensorValue::tuple(std::vector<TensorValue> elements) {
  TensorValue v;
  v.is_tuple = true;
  v.elements = std::move(elements);
  return v;
}

bool operator==(const TensorValue& a, const TensorValue& b) {
  if (a.is_tuple != b.is_tuple) return false;
  if (a.is_tuple) return a.elements == b.elements;
  return a.dtype == b.dtype && a.shape == b.shape && a.data == b.data;
}

std::string describe(const TensorValue& v) {
  if (v.is_tuple) {
    std::string out = "(";
    for (size_t i = 0; i < v.elements.size(); ++i) {
      if (i) out += ",";
      out += describe(v.elements[i]);
    }
    return out + ")";
  }
  return std::string(v.dtype == DType::F64 ? "f64" : "i64") + format_shape(v.shape);
}

bool values_match(const TensorValue& a, const TensorValue& b, const Tolerance& tol) {
  if (a.is_tuple != b.is_tuple) return false;
  if (a.is_tuple) {
    if (a.elements.size() != b.elements.size()) return false;
    for (size_t i = 0; i < a.elements.size(); ++i) {
      if (!values_match(a.elements[i], b.elements[i], tol)) return false;
    }
    return true;
  }
  if (a.shape != b.shape || a.dtype != b.dtype) return false;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double diff = std::fabs(a.data[i] - b.data[i]);
    if (!(diff <= tol.atol + tol.rtol * std::fabs(b.data[i]))) return false;
  }
  return true;
}

double max_abs_diff(const TensorValue& a, const TensorValue& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.is_tuple != b.is_tuple) return kInf;
  if (a.is_tuple) {
    if (a.elements.size() != b.elements.size()) return kInf;
    double m = 0.0;
    for (size_t i = 0; i < a.elements.size(); ++i) m = std::max(m, max_abs_diff(a.elements[i], b.elements[i]));
    return m;
  }
  if (a.shape != b.shape) return kInf;
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = std::fabs(a.data[i] - b.data[i]);
    if (std::isnan(d)) return kInf;
    m = std::max(m, d);
  }
  return m;
}

namespace {

void accumulate(const TensorValue& v, ValueSignature& sig, double& sum, int64_t& count) {
  if (v.is_tuple) {
    for (const auto& e : v.elements) accumulate(e, sig, sum, count);
    return;
  }
  sig.shapes.push_back(v.shape);
  sig.dtypes.push_back(v.dtype);
  for (double x : v.data) {
    sum += x;
    sig.max_abs = std::max(sig.max_abs, std::fabs(x));
  }
  count += v.size();
}

}  // namespace

ValueSignature value_signature(const TensorValue& v) {
  ValueSignature sig;
  double sum = 0.0;
  int64_t count = 0;
  accumulate(v, sig, sum, count);
  if (v.is_tuple) sig.shapes.insert(sig.shapes.begin(), Shape{-1, static_cast<int64_t>(v.elements.size())});
  sig.mean = count ? sum / static_cast<double>(count) : 0.0;
  return sig;
}

uint64_t ValueSignature::bucket() const {
  std::string bytes;
  for (const auto& s : shapes) bytes += format_shape(s) + ";";
  for (auto d : dtypes) bytes += d == DType::F64 ? 'f' : 'i';
  return fnv1a(bytes);
}

bool signatures_compatible(const ValueSignature& a, const ValueSignature& b, const Tolerance& tol) {
  if (a.shapes != b.shapes || a.dtypes != b.dtypes) return false;
  double bound = tol.atol + tol.rtol * std::max(a.max_abs, b.max_abs);
  // Slack for the rounding in the two summations.
  bound += 1e-12 * (1.0 + std::max(a.max_abs, b.max_abs));
  return std::fabs(a.mean - b.mean) <= bound;
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace tgv
