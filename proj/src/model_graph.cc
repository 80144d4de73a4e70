// Copyright 2026 The Slicer Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slicer/model_graph.h"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "json.hpp"
#include "slicer/errors.h"

namespace slicer {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void ValidateOperator(const LayerNode& layer, const OperatorNode& op) {
  const std::string where = "layer '" + layer.id + "' operator '" + op.id + "'";
  if (op.input_size < 1) throw ValidationError(where + ": input_size must be >= 1");
  if (op.param_count < 0) throw ValidationError(where + ": param_count must be >= 0");
  if (op.memory_mib && *op.memory_mib < 0) throw ValidationError(where + ": negative memory");
  if (op.exec_time_ms && *op.exec_time_ms < 0) throw ValidationError(where + ": negative exec time");
}

void ValidateLayer(const LayerNode& layer) {
  if (layer.id.empty()) throw ValidationError("layer with empty id");
  switch (layer.topology) {
    case Topology::kChain:
      if (!layer.branches.empty()) {
        throw ValidationError("layer '" + layer.id + "': Chain topology cannot have branches");
      }
      break;
    case Topology::kParallel:
      if (!layer.chain_ops.empty()) {
        throw ValidationError("layer '" + layer.id + "': Parallel topology cannot have chain operators");
      }
      break;
    case Topology::kHybrid:
      break;
  }
  for (const auto& b : layer.branches) {
    if (b.empty()) throw ValidationError("layer '" + layer.id + "': empty branch");
  }
  for (const auto& op : layer.AllOperators()) ValidateOperator(layer, op);
  if (layer.parallel_fraction < 0.0 || layer.parallel_fraction > 1.0) {
    throw ValidationError("layer '" + layer.id + "': parallel_fraction outside [0,1]");
  }
  if (layer.memory_mib && *layer.memory_mib < 0) {
    throw ValidationError("layer '" + layer.id + "': negative memory");
  }
  if (layer.exec_time_ms && *layer.exec_time_ms < 0) {
    throw ValidationError("layer '" + layer.id + "': negative exec time");
  }
}

OperatorNode OperatorFromJson(const json& j) {
  OperatorNode op;
  op.id = j.at("id").get<std::string>();
  op.op_type = j.at("op_type").get<std::string>();
  op.input_size = j.value("input_size", std::int64_t{1});
  op.param_count = j.value("param_count", std::int64_t{0});
  if (j.contains("memory_mib")) op.memory_mib = j.at("memory_mib").get<double>();
  if (j.contains("exec_time_ms")) op.exec_time_ms = j.at("exec_time_ms").get<double>();
  return op;
}

ordered_json OperatorToJson(const OperatorNode& op) {
  ordered_json j;
  j["id"] = op.id;
  j["op_type"] = op.op_type;
  j["input_size"] = op.input_size;
  j["param_count"] = op.param_count;
  if (op.memory_mib) j["memory_mib"] = *op.memory_mib;
  if (op.exec_time_ms) j["exec_time_ms"] = *op.exec_time_ms;
  return j;
}

}  // namespace

std::string_view TopologyName(Topology t) {
  switch (t) {
    case Topology::kChain:
      return "Chain";
    case Topology::kParallel:
      return "Parallel";
    case Topology::kHybrid:
      return "Hybrid";
  }
  return "Chain";
}

Topology ParseTopology(std::string_view name) {
  if (name == "Chain") return Topology::kChain;
  if (name == "Parallel") return Topology::kParallel;
  if (name == "Hybrid") return Topology::kHybrid;
  throw ValidationError("unknown topology '" + std::string(name) + "'");
}

std::vector<OperatorNode> LayerNode::AllOperators() const {
  std::vector<OperatorNode> ops = chain_ops;
  for (const auto& b : branches) ops.insert(ops.end(), b.begin(), b.end());
  return ops;
}

ModelGraph::ModelGraph(std::string name, std::vector<LayerNode> layers, std::vector<Edge> edges)
    : name_(std::move(name)), layers_(std::move(layers)), edges_(std::move(edges)) {
  if (layers_.empty()) throw ValidationError("model has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    ValidateLayer(layers_[i]);
    if (!index_.emplace(layers_[i].id, i).second) {
      throw ValidationError("duplicate layer id '" + layers_[i].id + "'");
    }
  }
  std::vector<int> indeg(layers_.size(), 0), outdeg(layers_.size(), 0);
  for (const auto& e : edges_) {
    auto s = index_.find(e.src);
    auto d = index_.find(e.dst);
    if (s == index_.end() || d == index_.end()) {
      throw ValidationError("dangling edge " + e.src + " -> " + e.dst);
    }
    ++outdeg[s->second];
    ++indeg[d->second];
  }
  std::vector<std::string> sources, sinks;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (indeg[i] == 0) sources.push_back(layers_[i].id);
    if (outdeg[i] == 0) sinks.push_back(layers_[i].id);
  }
  // Cycle detection first: a cycle can leave zero sources.
  std::vector<std::string> ids;
  ids.reserve(layers_.size());
  for (const auto& l : layers_) ids.push_back(l.id);
  TopologicalOrder(ids, edges_);
  if (sources.size() != 1) {
    throw ValidationError("model must have exactly one source layer, found " +
                          std::to_string(sources.size()));
  }
  if (sinks.size() != 1) {
    throw ValidationError("model must have exactly one sink layer, found " +
                          std::to_string(sinks.size()));
  }
  source_ = sources.front();
  sink_ = sinks.front();
}

const LayerNode& ModelGraph::layer(std::string_view id) const { return layers_[index_of(id)]; }

std::size_t ModelGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw ValidationError("unknown layer '" + std::string(id) + "'");
  return it->second;
}

bool ModelGraph::contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

bool ModelGraph::fully_profiled() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const LayerNode& l) { return l.memory_mib && l.exec_time_ms; });
}

std::vector<std::string> TopologicalOrder(const std::vector<std::string>& nodes,
                                          const std::vector<Edge>& edges) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.size(); ++i) pos.emplace(nodes[i], i);
  std::vector<std::vector<std::size_t>> out(nodes.size());
  std::vector<int> indeg(nodes.size(), 0);
  for (const auto& e : edges) {
    auto s = pos.find(e.src);
    auto d = pos.find(e.dst);
    if (s == pos.end() || d == pos.end()) {
      throw ValidationError("dangling edge " + e.src + " -> " + e.dst);
    }
    out[s->second].push_back(d->second);
    ++indeg[d->second];
  }
  auto later = [&](std::size_t a, std::size_t b) { return nodes[a] > nodes[b]; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<std::string> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    std::size_t u = ready.top();
    ready.pop();
    order.push_back(nodes[u]);
    for (std::size_t v : out[u]) {
      if (--indeg[v] == 0) ready.push(v);
    }
  }
  if (order.size() != nodes.size()) throw ValidationError("cycle detected in layer graph");
  return order;
}

std::vector<std::string> TopologicalOrder(const ModelGraph& g) {
  std::vector<std::string> ids;
  ids.reserve(g.layers().size());
  for (const auto& l : g.layers()) ids.push_back(l.id);
  return TopologicalOrder(ids, g.edges());
}

ModelGraph ParseModel(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ValidationError("malformed model document: expected an object");
    std::vector<LayerNode> layers;
    for (const auto& jl : doc.at("layers")) {
      LayerNode l;
      l.id = jl.at("id").get<std::string>();
      l.topology = ParseTopology(jl.value("topology", std::string("Chain")));
      if (jl.contains("operators")) {
        for (const auto& jo : jl.at("operators")) l.chain_ops.push_back(OperatorFromJson(jo));
      }
      if (jl.contains("branches")) {
        for (const auto& jb : jl.at("branches")) {
          std::vector<OperatorNode> branch;
          for (const auto& jo : jb) branch.push_back(OperatorFromJson(jo));
          l.branches.push_back(std::move(branch));
        }
      }
      l.output_bytes = jl.value("output_bytes", std::uint64_t{0});
      l.parallel_fraction = jl.value("parallel_fraction", kDefaultParallelFraction);
      l.size_exponent = jl.value("size_exponent", 1.0);
      if (jl.contains("memory_mib")) l.memory_mib = jl.at("memory_mib").get<double>();
      if (jl.contains("exec_time_ms")) l.exec_time_ms = jl.at("exec_time_ms").get<double>();
      layers.push_back(std::move(l));
    }
    std::vector<Edge> edges;
    if (doc.contains("edges")) {
      for (const auto& je : doc.at("edges")) {
        edges.push_back(Edge{je.at("src").get<std::string>(), je.at("dst").get<std::string>(),
                             je.value("tensor_bytes", std::uint64_t{0})});
      }
    }
    return ModelGraph(doc.value("name", std::string()), std::move(layers), std::move(edges));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

std::string SerializeModel(const ModelGraph& g) {
  const auto order = TopologicalOrder(g);
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(order[i], i);

  ordered_json doc;
  doc["name"] = g.name();
  ordered_json layers = ordered_json::array();
  for (const auto& id : order) {
    const LayerNode& l = g.layer(id);
    ordered_json jl;
    jl["id"] = l.id;
    jl["topology"] = std::string(TopologyName(l.topology));
    if (l.topology != Topology::kParallel) {
      ordered_json ops = ordered_json::array();
      for (const auto& op : l.chain_ops) ops.push_back(OperatorToJson(op));
      jl["operators"] = ops;
    }
    if (l.topology != Topology::kChain) {
      ordered_json branches = ordered_json::array();
      for (const auto& b : l.branches) {
        ordered_json jb = ordered_json::array();
        for (const auto& op : b) jb.push_back(OperatorToJson(op));
        branches.push_back(jb);
      }
      jl["branches"] = branches;
    }
    jl["output_bytes"] = l.output_bytes;
    if (l.memory_mib) jl["memory_mib"] = *l.memory_mib;
    if (l.exec_time_ms) jl["exec_time_ms"] = *l.exec_time_ms;
    jl["parallel_fraction"] = l.parallel_fraction;
    if (l.size_exponent != 1.0) jl["size_exponent"] = l.size_exponent;
    layers.push_back(jl);
  }
  doc["layers"] = layers;

  std::vector<Edge> edges = g.edges();
  std::stable_sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
    return std::pair(rank[a.src], rank[a.dst]) < std::pair(rank[b.src], rank[b.dst]);
  });
  ordered_json jedges = ordered_json::array();
  for (const auto& e : edges) {
    ordered_json je;
    je["src"] = e.src;
    je["dst"] = e.dst;
    je["tensor_bytes"] = e.tensor_bytes;
    jedges.push_back(je);
  }
  doc["edges"] = jedges;
  return doc.dump(2) + "\n";
}

}  // namespace slicer
