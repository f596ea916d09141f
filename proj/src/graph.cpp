// Copyright (c) 2026 The tgverify Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgv/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "json.hpp"
#include "tgv/errors.hpp"

namespace tgv {

using json = nlohmann::json;

std::string_view source_name(Source s) {
  switch (s) {
    case Source::A:
      return "A";
    case Source::B:
      return "B";
    default:
      return "aux";
  }
}

const Node& ComputationGraph::node(NodeId id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw SchemaError("unknown node id " + std::to_string(id));
  return it->second;
}

namespace {

json tensor_json(const TensorValue& v) {
  if (v.is_tuple) throw SchemaError("tuple values cannot be serialized as graph inputs");
  json j;
  j["shape"] = v.shape;
  j["dtype"] = v.dtype == DType::F64 ? "f64" : "i64";
  json data = json::array();
  if (v.dtype == DType::I64) {
    for (double x : v.data) data.push_back(static_cast<int64_t>(x));
  } else {
    for (double x : v.data) data.push_back(x);
  }
  j["data"] = std::move(data);
  return j;
}

TensorValue tensor_from(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw ParseError("tensor must be an object with shape and data");
  }
  Shape shape;
  for (const auto& d : j.at("shape")) {
    if (!d.is_number_integer()) throw ParseError("tensor shape entries must be integers");
    shape.push_back(d.get<int64_t>());
    if (shape.back() < 0) throw ParseError("negative tensor dimension");
  }
  DType dtype = DType::F64;
  if (j.contains("dtype")) {
    auto s = j.at("dtype").get<std::string>();
    if (s == "i64") {
      dtype = DType::I64;
    } else if (s != "f64") {
      throw ParseError("unsupported dtype " + s);
    }
  }
  std::vector<double> data;
  for (const auto& x : j.at("data")) {
    if (!x.is_number()) throw ParseError("tensor data must be numeric");
    if (dtype == DType::I64 && !x.is_number_integer()) throw ParseError("i64 tensor holds a non-integer");
    data.push_back(x.get<double>());
  }
  try {
    return TensorValue::from(std::move(shape), std::move(data), dtype);
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  }
}

AttrValue attr_from_json(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<int64_t>();
  if (v.is_number_float()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::vector<int64_t> list;
    for (const auto& x : v) {
      if (!x.is_number_integer()) throw ParseError("list attribute '" + key + "' must hold integers");
      list.push_back(x.get<int64_t>());
    }
    return list;
  }
  throw ParseError("unsupported attribute value for '" + key + "'");
}

json attr_to_json(const AttrValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

struct RankInfo {
  int64_t rank = 0;
  bool tuple = false;
};

RankInfo infer_rank(OpKind op, const Attrs& attrs, const std::vector<RankInfo>& in) {
  auto first = [&]() -> int64_t { return in.empty() ? 0 : in[0].rank; };
  switch (op) {
    case OpKind::Constant:
      return {static_cast<int64_t>(attrs.get_ints("shape").size()), false};
    case OpKind::Add:
    case OpKind::Mul:
    case OpKind::Matmul:
    case OpKind::ReduceAdd: {
      int64_t r = 0;
      for (const auto& x : in) r = std::max(r, x.rank);
      return {r, false};
    }
    case OpKind::Mm:
    case OpKind::Addmm:
      return {2, false};
    case OpKind::Reshape:
      return {static_cast<int64_t>(attrs.get_ints("shape").size()), false};
    case OpKind::Split:
    case OpKind::Chunk:
      return {first(), true};
    case OpKind::GetItem:
      return {first(), false};
    case OpKind::Embedding:
      return {first() + 1, false};
    default:
      return {first(), false};
  }
}

}  // namespace

void validate_graph(ComputationGraph& g) {
  if (g.outputs.empty()) throw SchemaError("graph has no outputs");
  for (auto id : g.outputs) {
    if (!g.nodes.count(id)) throw SchemaError("output references missing node " + std::to_string(id));
  }
  for (auto& [id, node] : g.nodes) {
    if (node.id != id) throw SchemaError("node id mismatch");
    auto ar = op_arity(node.op);
    auto n = static_cast<int>(node.children.size());
    if (n < ar.min || (ar.max >= 0 && n > ar.max)) {
      throw SchemaError("op " + std::string(op_name(node.op)) + " at node " + std::to_string(id) + " has bad arity " +
                        std::to_string(n));
    }
    for (auto c : node.children) {
      if (!g.nodes.count(c)) {
        throw SchemaError("node " + std::to_string(id) + " references missing child " + std::to_string(c));
      }
    }
    node.attrs = validate_attrs(node.op, node.attrs);
    if (node.op == OpKind::Input && !g.inputs.count(id)) {
      throw SchemaError("input node " + std::to_string(id) + " has no bound value");
    }
  }
  for (const auto& [id, value] : g.inputs) {
    auto it = g.nodes.find(id);
    if (it == g.nodes.end() || it->second.op != OpKind::Input) {
      throw SchemaError("value bound to non-input node " + std::to_string(id));
    }
  }
  auto order = topo_order(g);  // throws CycleError
  std::map<NodeId, RankInfo> ranks;
  for (auto id : order) {
    auto& node = g.nodes.at(id);
    std::vector<RankInfo> in;
    for (auto c : node.children) in.push_back(ranks.at(c));
    if (node.op == OpKind::Input) {
      ranks[id] = {g.inputs.at(id).rank(), false};
      continue;
    }
    if (node.op == OpKind::GetItem && !in.empty() && !in[0].tuple) {
      throw SchemaError("get_item at node " + std::to_string(id) + " applied to a non-tuple");
    }
    for (size_t i = 0; i < in.size(); ++i) {
      if (in[i].tuple && node.op != OpKind::GetItem) {
        throw SchemaError("node " + std::to_string(id) + " consumes a tuple without get_item");
      }
    }
    if (!in.empty()) node.attrs = normalize_axes(node.op, node.attrs, in[0].rank);
    ranks[id] = infer_rank(node.op, node.attrs, in);
  }
  for (auto id : g.outputs) {
    if (ranks.at(id).tuple) throw SchemaError("output " + std::to_string(id) + " is a tuple; select elements");
  }
}

ComputationGraph parse_graph(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  ComputationGraph g;
  try {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("outputs")) {
      throw ParseError("graph must have nodes and outputs");
    }
    for (const auto& jn : j.at("nodes")) {
      Node node;
      node.id = jn.at("id").get<NodeId>();
      auto name = jn.at("op").get<std::string>();
      auto op = op_from_name(name);
      if (!op) throw SchemaError("unknown op '" + name + "'");
      node.op = *op;
      if (jn.contains("attrs")) {
        for (const auto& [k, v] : jn.at("attrs").items()) node.attrs.set(k, attr_from_json(k, v));
      }
      if (jn.contains("children")) {
        for (const auto& c : jn.at("children")) node.children.push_back(c.get<NodeId>());
      }
      if (g.nodes.count(node.id)) throw SchemaError("duplicate node id " + std::to_string(node.id));
      g.nodes.emplace(node.id, std::move(node));
    }
    if (j.contains("inputs")) {
      for (const auto& ji : j.at("inputs")) {
        auto id = ji.at("id").get<NodeId>();
        if (g.inputs.count(id)) throw SchemaError("input " + std::to_string(id) + " bound twice");
        g.inputs.emplace(id, tensor_from(ji.at("value")));
      }
    }
    for (const auto& o : j.at("outputs")) g.outputs.push_back(o.get<NodeId>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed graph: ") + e.what());
  }
  validate_graph(g);
  return g;
}

std::string serialize_graph(const ComputationGraph& g) {
  json j;
  json nodes = json::array();
  for (const auto& [id, node] : g.nodes) {
    json jn;
    jn["id"] = id;
    jn["op"] = std::string(op_name(node.op));
    json attrs = json::object();
    for (const auto& [k, v] : node.attrs.items()) attrs[k] = attr_to_json(v);
    jn["attrs"] = std::move(attrs);
    jn["children"] = node.children;
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  json inputs = json::array();
  for (const auto& [id, value] : g.inputs) {
    json ji;
    ji["id"] = id;
    ji["value"] = tensor_json(value);
    inputs.push_back(std::move(ji));
  }
  j["inputs"] = std::move(inputs);
  j["outputs"] = g.outputs;
  return j.dump();
}

std::vector<NodeId> topo_order(const ComputationGraph& g) {
  std::map<NodeId, int> pending;
  std::map<NodeId, std::vector<NodeId>> users;
  for (const auto& [id, node] : g.nodes) {
    std::set<NodeId> distinct(node.children.begin(), node.children.end());
    pending[id] = static_cast<int>(distinct.size());
    for (auto c : distinct) users[c].push_back(id);
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, n] : pending) {
    if (n == 0) ready.push(id);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    auto id = ready.top();
    ready.pop();
    order.push_back(id);
    for (auto u : users[id]) {
      if (--pending[u] == 0) ready.push(u);
    }
  }
  if (order.size() != g.nodes.size()) throw CycleError("computation graph contains a cycle");
  return order;
}

std::map<NodeId, int> node_depths(const ComputationGraph& g) {
  std::map<NodeId, int> depth;
  for (auto id : topo_order(g)) {
    int d = 0;
    for (auto c : g.node(id).children) d = std::max(d, depth.at(c) + 1);
    depth[id] = d;
  }
  return depth;
}

int64_t JointGraph::index_of(Source side, NodeId id) const {
  const auto& index = side == Source::A ? index_a : index_b;
  auto it = index.find(id);
  if (it == index.end()) throw UsageError("node " + std::to_string(id) + " not in joint graph");
  return it->second;
}

size_t JointGraph::edge_count() const {
  size_t n = 0;
  for (const auto& node : nodes) n += node.children.size();
  return n;
}

JointGraph join_graphs(const ComputationGraph& a, const ComputationGraph& b) {
  JointGraph jg;
  jg.graph_a = a;
  jg.graph_b = b;
  auto add_side = [&jg](const ComputationGraph& g, Source side, std::map<NodeId, int64_t>& index,
                        std::vector<int64_t>& outputs) {
    auto depths = node_depths(g);
    for (auto id : topo_order(g)) {
      const auto& node = g.node(id);
      JointNode jn;
      jn.side = side;
      jn.original = id;
      jn.op = node.op;
      jn.attrs = node.attrs;
      for (auto c : node.children) jn.children.push_back(index.at(c));
      jn.depth = depths.at(id);
      index[id] = static_cast<int64_t>(jg.nodes.size());
      jg.nodes.push_back(std::move(jn));
    }
    for (auto o : g.outputs) outputs.push_back(index.at(o));
  };
  add_side(a, Source::A, jg.index_a, jg.outputs_a);
  add_side(b, Source::B, jg.index_b, jg.outputs_b);
  return jg;
}

std::string tensor_to_json(const TensorValue& v) { return tensor_json(v).dump(); }

TensorValue tensor_from_json(std::string_view text) {
  try {
    return tensor_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid tensor JSON: ") + e.what());
  }
}

}  // namespace tgv
