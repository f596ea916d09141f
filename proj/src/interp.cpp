// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tgv/errors.hpp"

namespace tgv {

namespace {

std::vector<int64_t> strides_of(const Shape& shape) {
  std::vector<int64_t> s(shape.size(), 1);
  for (int64_t i = static_cast<int64_t>(shape.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * shape[i + 1];
  return s;
}

const TensorValue& dense(const TensorValue& v, const char* what) {
  if (v.is_tuple) throw ShapeError(std::string(what) + ": expected a tensor, got a tuple");
  return v;
}

DType result_dtype(const TensorValue& a, const TensorValue& b) {
  return a.dtype == DType::I64 && b.dtype == DType::I64 ? DType::I64 : DType::F64;
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.begin(), small.end(), big.end() - static_cast<std::ptrdiff_t>(small.size()));
}

// Elementwise binary op; the lower-rank operand may be a trailing-suffix
// broadcast (bias add, scalar multiply).
template <typename F>
TensorValue elementwise(const TensorValue& a, const TensorValue& b, F f, const char* name) {
  dense(a, name);
  dense(b, name);
  if (a.shape == b.shape) {
    TensorValue out = TensorValue::zeros(a.shape, result_dtype(a, b));
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = f(a.data[i], b.data[i]);
    return out;
  }
  if (is_suffix(b.shape, a.shape)) {
    TensorValue out = TensorValue::zeros(a.shape, result_dtype(a, b));
    size_t m = b.data.size();
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = f(a.data[i], b.data[m ? i % m : 0]);
    return out;
  }
  if (is_suffix(a.shape, b.shape)) {
    TensorValue out = TensorValue::zeros(b.shape, result_dtype(a, b));
    size_t m = a.data.size();
    for (size_t i = 0; i < b.data.size(); ++i) out.data[i] = f(a.data[m ? i % m : 0], b.data[i]);
    return out;
  }
  throw ShapeError(std::string(name) + ": incompatible shapes " + format_shape(a.shape) + " and " +
                   format_shape(b.shape));
}

TensorValue transpose(const TensorValue& x, int64_t d0, int64_t d1) {
  dense(x, "transpose");
  auto r = x.rank();
  if (d0 < 0 || d0 >= r || d1 < 0 || d1 >= r) throw AttrError("transpose: axis out of range");
  Shape out_shape = x.shape;
  std::swap(out_shape[d0], out_shape[d1]);
  TensorValue out = TensorValue::zeros(out_shape, x.dtype);
  auto in_strides = strides_of(x.shape);
  auto perm_strides = in_strides;
  std::swap(perm_strides[d0], perm_strides[d1]);
  std::vector<int64_t> idx(r, 0);
  for (int64_t flat = 0; flat < out.size(); ++flat) {
    int64_t src = 0;
    for (int64_t k = 0; k < r; ++k) src += idx[k] * perm_strides[k];
    out.data[flat] = x.data[src];
    for (int64_t k = r - 1; k >= 0; --k) {
      if (++idx[k] < out_shape[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

TensorValue reshape(const TensorValue& x, const Shape& shape) {
  dense(x, "reshape");
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + format_shape(x.shape) + " as " + format_shape(shape));
  }
  TensorValue out = x;
  out.shape = shape;
  return out;
}

// Copies x[..., start:start+len, ...] along `axis`.
TensorValue slice(const TensorValue& x, int64_t axis, int64_t start, int64_t len) {
  Shape out_shape = x.shape;
  out_shape[axis] = len;
  TensorValue out = TensorValue::zeros(out_shape, x.dtype);
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= x.shape[i];
  for (int64_t i = axis + 1; i < x.rank(); ++i) inner *= x.shape[i];
  int64_t dim = x.shape[axis];
  size_t w = 0;
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t j = start; j < start + len; ++j) {
      const double* src = x.data.data() + (o * dim + j) * inner;
      std::copy(src, src + inner, out.data.begin() + static_cast<std::ptrdiff_t>(w));
      w += static_cast<size_t>(inner);
    }
  }
  return out;
}

TensorValue split_sizes(const TensorValue& x, int64_t axis, const std::vector<int64_t>& sizes) {
  std::vector<TensorValue> parts;
  int64_t start = 0;
  for (auto s : sizes) {
    parts.push_back(slice(x, axis, start, s));
    start += s;
  }
  return TensorValue::tuple(std::move(parts));
}

TensorValue split(const TensorValue& x, int64_t size, int64_t axis) {
  dense(x, "split");
  if (axis < 0 || axis >= x.rank()) throw AttrError("split: axis out of range");
  if (size <= 0) throw AttrError("split: size must be positive");
  int64_t dim = x.shape[axis];
  std::vector<int64_t> sizes;
  for (int64_t start = 0; start < dim; start += size) sizes.push_back(std::min(size, dim - start));
  if (sizes.empty()) sizes.push_back(0);
  return split_sizes(x, axis, sizes);
}

// "Last chunk smaller": chunk length is ceil(dim / chunks); may yield fewer
// than `chunks` parts.
TensorValue chunk(const TensorValue& x, int64_t chunks, int64_t axis) {
  dense(x, "chunk");
  if (axis < 0 || axis >= x.rank()) throw AttrError("chunk: dim out of range");
  if (chunks <= 0) throw AttrError("chunk: chunks must be positive");
  int64_t dim = x.shape[axis];
  int64_t len = (dim + chunks - 1) / chunks;
  if (len == 0) return split_sizes(x, axis, {0});
  return split(x, len, axis);
}

TensorValue concat(std::span<const TensorValue> xs, int64_t axis) {
  const auto& first = dense(xs[0], "concat");
  if (axis < 0 || axis >= first.rank()) throw AttrError("concat: axis out of range");
  Shape out_shape = first.shape;
  out_shape[axis] = 0;
  for (const auto& x : xs) {
    dense(x, "concat");
    if (x.rank() != first.rank()) throw ShapeError("concat: rank mismatch");
    for (int64_t i = 0; i < x.rank(); ++i) {
      if (i != axis && x.shape[i] != first.shape[i]) throw ShapeError("concat: shape mismatch off the axis");
    }
    out_shape[axis] += x.shape[axis];
  }
  TensorValue out = TensorValue::zeros(out_shape, first.dtype);
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= first.shape[i];
  for (int64_t i = axis + 1; i < first.rank(); ++i) inner *= first.shape[i];
  size_t w = 0;
  for (int64_t o = 0; o < outer; ++o) {
    for (const auto& x : xs) {
      int64_t block = x.shape[axis] * inner;
      const double* src = x.data.data() + o * block;
      std::copy(src, src + block, out.data.begin() + static_cast<std::ptrdiff_t>(w));
      w += static_cast<size_t>(block);
    }
  }
  return out;
}

// Batched [.., m, k] x [.., k, n]; a rank-2 right operand broadcasts.
TensorValue matmul(const TensorValue& a, const TensorValue& b) {
  dense(a, "matmul");
  dense(b, "matmul");
  if (a.rank() < 2 || b.rank() < 2) throw ShapeError("matmul: operands must have rank >= 2");
  int64_t m = a.shape[a.rank() - 2], k = a.shape[a.rank() - 1];
  int64_t k2 = b.shape[b.rank() - 2], n = b.shape[b.rank() - 1];
  if (k != k2) throw ShapeError("matmul: inner dimensions differ (" + std::to_string(k) + " vs " + std::to_string(k2) + ")");
  Shape batch(a.shape.begin(), a.shape.end() - 2);
  Shape batch_b(b.shape.begin(), b.shape.end() - 2);
  bool broadcast_b = batch_b.empty();
  if (!broadcast_b && batch_b != batch) throw ShapeError("matmul: batch dimensions differ");
  Shape out_shape = batch;
  out_shape.push_back(m);
  out_shape.push_back(n);
  TensorValue out = TensorValue::zeros(out_shape);
  int64_t nb = numel(batch);
  for (int64_t bi = 0; bi < nb; ++bi) {
    const double* pa = a.data.data() + bi * m * k;
    const double* pb = b.data.data() + (broadcast_b ? 0 : bi * k * n);
    double* po = out.data.data() + bi * m * n;
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int64_t t = 0; t < k; ++t) acc += pa[i * k + t] * pb[t * n + j];
        po[i * n + j] = acc;
      }
    }
  }
  return out;
}

TensorValue mm(const TensorValue& a, const TensorValue& b) {
  if (dense(a, "mm").rank() != 2 || dense(b, "mm").rank() != 2) throw ShapeError("mm: operands must be matrices");
  return matmul(a, b);
}

TensorValue linear(const TensorValue& x, const TensorValue& w, const TensorValue* bias) {
  dense(x, "linear");
  dense(w, "linear");
  if (x.rank() < 1 || w.rank() != 2) throw ShapeError("linear: expects x[..., in] and w[out, in]");
  int64_t in = x.shape.back();
  int64_t outf = w.shape[0];
  if (w.shape[1] != in) throw ShapeError("linear: weight " + format_shape(w.shape) + " does not accept input " + format_shape(x.shape));
  if (bias && (dense(*bias, "linear").shape != Shape{outf})) throw ShapeError("linear: bias shape mismatch");
  Shape out_shape = x.shape;
  out_shape.back() = outf;
  TensorValue out = TensorValue::zeros(out_shape);
  int64_t rows = x.size() / std::max<int64_t>(in, 1);
  if (in == 0) rows = numel(Shape(x.shape.begin(), x.shape.end() - 1));
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t o = 0; o < outf; ++o) {
      double acc = 0.0;
      for (int64_t t = 0; t < in; ++t) acc += x.data[r * in + t] * w.data[o * in + t];
      out.data[r * outf + o] = acc + (bias ? bias->data[o] : 0.0);
    }
  }
  return out;
}

TensorValue embedding(const TensorValue& idx, const TensorValue& table) {
  dense(idx, "embedding");
  dense(table, "embedding");
  if (idx.dtype != DType::I64) throw DomainError("embedding: indices must be an i64 tensor");
  if (table.rank() != 2) throw ShapeError("embedding: table must be [rows, dim]");
  int64_t rows = table.shape[0], dim = table.shape[1];
  Shape out_shape = idx.shape;
  out_shape.push_back(dim);
  TensorValue out = TensorValue::zeros(out_shape);
  for (int64_t i = 0; i < idx.size(); ++i) {
    double v = idx.data[i];
    auto row = static_cast<int64_t>(v);
    if (v != static_cast<double>(row) || row < 0 || row >= rows) {
      throw DomainError("embedding: index " + std::to_string(v) + " outside [0, " + std::to_string(rows) + ")");
    }
    std::copy_n(table.data.begin() + row * dim, dim, out.data.begin() + i * dim);
  }
  return out;
}

TensorValue layernorm(const TensorValue& x, const TensorValue* gamma, const TensorValue* beta, double eps) {
  dense(x, "layernorm");
  if (x.rank() < 1) throw ShapeError("layernorm: rank-0 input");
  int64_t d = x.shape.back();
  if (gamma && dense(*gamma, "layernorm").shape != Shape{d}) throw ShapeError("layernorm: weight shape mismatch");
  if (beta && dense(*beta, "layernorm").shape != Shape{d}) throw ShapeError("layernorm: bias shape mismatch");
  TensorValue out = TensorValue::zeros(x.shape);
  int64_t rows = d ? x.size() / d : 0;
  for (int64_t r = 0; r < rows; ++r) {
    const double* p = x.data.data() + r * d;
    double mean = 0.0;
    for (int64_t i = 0; i < d; ++i) mean += p[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (int64_t i = 0; i < d; ++i) var += (p[i] - mean) * (p[i] - mean);
    var /= static_cast<double>(d);
    double inv = 1.0 / std::sqrt(var + eps);
    for (int64_t i = 0; i < d; ++i) {
      double y = (p[i] - mean) * inv;
      if (gamma) y *= gamma->data[i];
      if (beta) y += beta->data[i];
      out.data[r * d + i] = y;
    }
  }
  return out;
}

double gelu_scalar(double x, bool tanh_approx) {
  if (tanh_approx) {
    const double c = std::sqrt(2.0 / M_PI);
    return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
  }
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

TensorValue softmax(const TensorValue& x, int64_t dim) {
  dense(x, "softmax");
  if (dim < 0 || dim >= x.rank()) throw AttrError("softmax: dim out of range");
  TensorValue out = TensorValue::zeros(x.shape);
  int64_t outer = 1, inner = 1, n = x.shape[dim];
  for (int64_t i = 0; i < dim; ++i) outer *= x.shape[i];
  for (int64_t i = dim + 1; i < x.rank(); ++i) inner *= x.shape[i];
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      auto at = [&](int64_t j) { return (o * n + j) * inner + in; };
      double mx = -INFINITY;
      for (int64_t j = 0; j < n; ++j) mx = std::max(mx, x.data[at(j)]);
      double sum = 0.0;
      for (int64_t j = 0; j < n; ++j) sum += std::exp(x.data[at(j)] - mx);
      for (int64_t j = 0; j < n; ++j) out.data[at(j)] = std::exp(x.data[at(j)] - mx) / sum;
    }
  }
  return out;
}

// softmax(q k^T * scale) v over [..., seq, dim].
TensorValue sdpa(const TensorValue& q, const TensorValue& k, const TensorValue& v, std::optional<double> scale) {
  dense(q, "sdpa");
  dense(k, "sdpa");
  dense(v, "sdpa");
  if (q.rank() < 2 || k.rank() != q.rank() || v.rank() != q.rank()) throw ShapeError("sdpa: q, k, v must share rank >= 2");
  auto r = q.rank();
  Shape batch(q.shape.begin(), q.shape.end() - 2);
  if (Shape(k.shape.begin(), k.shape.end() - 2) != batch || Shape(v.shape.begin(), v.shape.end() - 2) != batch) {
    throw ShapeError("sdpa: batch dimensions differ");
  }
  int64_t sq = q.shape[r - 2], d = q.shape[r - 1];
  int64_t sk = k.shape[r - 2], dv = v.shape[r - 1];
  if (k.shape[r - 1] != d) throw ShapeError("sdpa: key dim differs from query dim");
  if (v.shape[r - 2] != sk) throw ShapeError("sdpa: value length differs from key length");
  double s = scale.value_or(1.0 / std::sqrt(static_cast<double>(d)));
  Shape out_shape = batch;
  out_shape.push_back(sq);
  out_shape.push_back(dv);
  TensorValue out = TensorValue::zeros(out_shape);
  std::vector<double> w(static_cast<size_t>(sk));
  for (int64_t b = 0; b < numel(batch); ++b) {
    const double* pq = q.data.data() + b * sq * d;
    const double* pk = k.data.data() + b * sk * d;
    const double* pv = v.data.data() + b * sk * dv;
    double* po = out.data.data() + b * sq * dv;
    for (int64_t i = 0; i < sq; ++i) {
      double mx = -INFINITY;
      for (int64_t j = 0; j < sk; ++j) {
        double acc = 0.0;
        for (int64_t t = 0; t < d; ++t) acc += pq[i * d + t] * pk[j * d + t];
        w[j] = acc * s;
        mx = std::max(mx, w[j]);
      }
      double sum = 0.0;
      for (int64_t j = 0; j < sk; ++j) {
        w[j] = std::exp(w[j] - mx);
        sum += w[j];
      }
      for (int64_t c = 0; c < dv; ++c) {
        double acc = 0.0;
        for (int64_t j = 0; j < sk; ++j) acc += w[j] / sum * pv[j * dv + c];
        po[i * dv + c] = acc;
      }
    }
  }
  return out;
}

// Attention computed directly in [batch, seq, heads, dim] layout, with no
// intermediate transposes.
TensorValue fused_attention(const TensorValue& q_in, const TensorValue& k_in, const TensorValue& v_in,
                            std::optional<double> scale, std::optional<int64_t> heads) {
  dense(q_in, "fused_attention");
  dense(k_in, "fused_attention");
  dense(v_in, "fused_attention");
  auto to4 = [&](const TensorValue& x) -> TensorValue {
    if (x.rank() == 4) return x;
    if (x.rank() == 3 && heads) {
      if (x.shape[2] % *heads != 0) throw ShapeError("fused_attention: hidden size not divisible by heads");
      return reshape(x, {x.shape[0], x.shape[1], *heads, x.shape[2] / *heads});
    }
    throw ShapeError("fused_attention: expects [b, s, h, d] or [b, s, h*d] with heads");
  };
  TensorValue q = to4(q_in), k = to4(k_in), v = to4(v_in);
  int64_t nb = q.shape[0], sq = q.shape[1], nh = q.shape[2], d = q.shape[3];
  int64_t sk = k.shape[1], dv = v.shape[3];
  if (k.shape[0] != nb || v.shape[0] != nb || k.shape[2] != nh || v.shape[2] != nh || k.shape[3] != d ||
      v.shape[1] != sk) {
    throw ShapeError("fused_attention: incompatible q/k/v shapes");
  }
  double s = scale.value_or(1.0 / std::sqrt(static_cast<double>(d)));
  TensorValue out = TensorValue::zeros({nb, sq, nh, dv});
  auto qi = [&](int64_t b, int64_t i, int64_t h, int64_t t) { return ((b * sq + i) * nh + h) * d + t; };
  auto ki = [&](int64_t b, int64_t j, int64_t h, int64_t t) { return ((b * sk + j) * nh + h) * d + t; };
  auto vi = [&](int64_t b, int64_t j, int64_t h, int64_t c) { return ((b * sk + j) * nh + h) * dv + c; };
  std::vector<double> w(static_cast<size_t>(sk));
  for (int64_t b = 0; b < nb; ++b) {
    for (int64_t h = 0; h < nh; ++h) {
      for (int64_t i = 0; i < sq; ++i) {
        double mx = -INFINITY;
        for (int64_t j = 0; j < sk; ++j) {
          double acc = 0.0;
          for (int64_t t = 0; t < d; ++t) acc += q.data[qi(b, i, h, t)] * k.data[ki(b, j, h, t)];
          w[j] = acc * s;
          mx = std::max(mx, w[j]);
        }
        double sum = 0.0;
        for (int64_t j = 0; j < sk; ++j) {
          w[j] = std::exp(w[j] - mx);
          sum += w[j];
        }
        for (int64_t c = 0; c < dv; ++c) {
          double acc = 0.0;
          for (int64_t j = 0; j < sk; ++j) acc += w[j] / sum * v.data[vi(b, j, h, c)];
          out.data[((b * sq + i) * nh + h) * dv + c] = acc;
        }
      }
    }
  }
  if (q_in.rank() == 3) return reshape(out, {nb, sq, nh * dv});
  return out;
}

}  // namespace

TensorValue eval_op(OpKind op, const Attrs& attrs, std::span<const TensorValue> in) {
  auto ar = op_arity(op);
  auto n = static_cast<int>(in.size());
  if (n < ar.min || (ar.max >= 0 && n > ar.max)) {
    throw ShapeError(std::string(op_name(op)) + ": wrong number of inputs (" + std::to_string(n) + ")");
  }
  switch (op) {
    case OpKind::Input:
      throw UsageError("input nodes have no operator semantics; bind a value");
    case OpKind::Constant: {
      auto shape = attrs.get_ints("shape");
      TensorValue out = TensorValue::zeros(shape);
      std::fill(out.data.begin(), out.data.end(), attrs.get_real("value"));
      return out;
    }
    case OpKind::Add:
      return elementwise(in[0], in[1], [](double a, double b) { return a + b; }, "add");
    case OpKind::Mul:
      return elementwise(in[0], in[1], [](double a, double b) { return a * b; }, "mul");
    case OpKind::Matmul:
      return matmul(in[0], in[1]);
    case OpKind::Mm:
      return mm(in[0], in[1]);
    case OpKind::Addmm: {
      auto prod = mm(in[1], in[2]);
      if (!is_suffix(dense(in[0], "addmm").shape, prod.shape)) throw ShapeError("addmm: bias does not broadcast");
      return elementwise(prod, in[0], [](double a, double b) { return a + b; }, "addmm");
    }
    case OpKind::Linear:
      return linear(in[0], in[1], in.size() > 2 ? &in[2] : nullptr);
    case OpKind::Transpose:
      return transpose(in[0], attrs.get_int("dim0"), attrs.get_int("dim1"));
    case OpKind::Reshape:
      return reshape(in[0], attrs.get_ints("shape"));
    case OpKind::Concat:
      return concat(in, attrs.get_int("axis"));
    case OpKind::Split:
      return split(in[0], attrs.get_int("size"), attrs.get_int("axis"));
    case OpKind::Chunk:
      return chunk(in[0], attrs.get_int("chunks"), attrs.get_int("dim"));
    case OpKind::GetItem: {
      if (!in[0].is_tuple) throw ShapeError("get_item: input is not a tuple");
      auto i = attrs.get_int("index");
      if (i < 0 || i >= static_cast<int64_t>(in[0].elements.size())) {
        throw ShapeError("get_item: index " + std::to_string(i) + " out of range");
      }
      return in[0].elements[i];
    }
    case OpKind::Embedding:
      return embedding(in[0], in[1]);
    case OpKind::LayerNorm:
      return layernorm(in[0], in.size() > 1 ? &in[1] : nullptr, in.size() > 2 ? &in[2] : nullptr,
                       attrs.get_real_opt("eps").value_or(kDefaultLayerNormEps));
    case OpKind::Gelu: {
      bool tanh_approx = attrs.get_string("approximate", "exact") == "tanh";
      TensorValue out = dense(in[0], "gelu");
      out.dtype = DType::F64;
      for (double& x : out.data) x = gelu_scalar(x, tanh_approx);
      return out;
    }
    case OpKind::Softmax:
      return softmax(in[0], attrs.get_int("dim"));
    case OpKind::ScaledDotProductAttention:
      return sdpa(in[0], in[1], in[2], attrs.get_real_opt("scale"));
    case OpKind::FusedAttention: {
      std::optional<int64_t> heads;
      if (attrs.has("heads")) heads = attrs.get_int("heads");
      return fused_attention(in[0], in[1], in[2], attrs.get_real_opt("scale"), heads);
    }
    case OpKind::ReduceAdd: {
      TensorValue acc = dense(in[0], "reduce_add");
      for (size_t i = 1; i < in.size(); ++i) {
        if (dense(in[i], "reduce_add").shape != acc.shape) throw ShapeError("reduce_add: shape mismatch");
        for (size_t j = 0; j < acc.data.size(); ++j) acc.data[j] += in[i].data[j];
      }
      return acc;
    }
  }
  throw AttrError("unhandled op");
}

std::map<NodeId, TensorValue> run_graph(const ComputationGraph& g, const std::map<NodeId, TensorValue>& bindings) {
  std::map<NodeId, TensorValue> values;
  for (auto id : topo_order(g)) {
    const auto& node = g.node(id);
    if (node.op == OpKind::Input) {
      auto it = bindings.find(id);
      if (it != bindings.end()) {
        values[id] = it->second;
      } else if (auto jt = g.inputs.find(id); jt != g.inputs.end()) {
        values[id] = jt->second;
      } else {
        throw UsageError("input node " + std::to_string(id) + " is unbound");
      }
      continue;
    }
    std::vector<TensorValue> args;
    args.reserve(node.children.size());
    for (auto c : node.children) args.push_back(values.at(c));
    try {
      values[id] = eval_op(node.op, node.attrs, args);
    } catch (const Error& e) {
      throw EngineError("node " + std::to_string(id) + " (" + std::string(op_name(node.op)) + "): " + e.what());
    }
  }
  return values;
}

std::map<NodeId, TensorValue> run_graph(const ComputationGraph& g) { return run_graph(g, {}); }

}  // namespace tgv
