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

#ifndef SLICER_MODEL_GRAPH_H_
#define SLICER_MODEL_GRAPH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace slicer {

inline constexpr double kDefaultParallelFraction = 0.9;

// One (dominant) operator inside a layer. Memory and time are optional
// until they are measured or predicted by the profiler.
struct OperatorNode {
  std::string id;
  std::string op_type;
  std::int64_t input_size = 1;
  std::int64_t param_count = 0;
  std::optional<double> memory_mib;
  std::optional<double> exec_time_ms;

  bool profiled() const { return memory_mib.has_value() && exec_time_ms.has_value(); }
};

enum class Topology { kChain, kParallel, kHybrid };

std::string_view TopologyName(Topology t);
Topology ParseTopology(std::string_view name);

struct LayerNode {
  std::string id;
  Topology topology = Topology::kChain;
  std::vector<OperatorNode> chain_ops;
  std::vector<std::vector<OperatorNode>> branches;
  std::uint64_t output_bytes = 0;
  // Fraction of exec_time that shards across sub-slices (Amdahl).
  double parallel_fraction = kDefaultParallelFraction;
  // Exponent applied when the simulator rescales exec time with input size.
  double size_exponent = 1.0;

  // Derived by profiler aggregation, or supplied verbatim by the document.
  std::optional<double> memory_mib;
  std::optional<double> exec_time_ms;

  // Chain ops followed by every branch op, in declaration order.
  std::vector<OperatorNode> AllOperators() const;
};

struct Edge {
  std::string src;
  std::string dst;
  std::uint64_t tensor_bytes = 0;
};

// Layer DAG with a single source and a single sink. Immutable once built;
// the constructor validates every structural invariant.
class ModelGraph {
 public:
  ModelGraph(std::string name, std::vector<LayerNode> layers, std::vector<Edge> edges);

  const std::string& name() const { return name_; }
  const std::vector<LayerNode>& layers() const { return layers_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const LayerNode& layer(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
  bool contains(std::string_view id) const;

  const std::string& source() const { return source_; }
  const std::string& sink() const { return sink_; }

  // Layers with memory and exec time set for every layer.
  bool fully_profiled() const;

 private:
  std::string name_;
  std::vector<LayerNode> layers_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string source_;
  std::string sink_;
};

// Kahn's algorithm with the lexicographically smallest ready id first.
std::vector<std::string> TopologicalOrder(const ModelGraph& g);

// Same tie-break rule over a plain adjacency description; throws on cycles.
std::vector<std::string> TopologicalOrder(const std::vector<std::string>& nodes,
                                          const std::vector<Edge>& edges);

ModelGraph ParseModel(std::string_view document);
std::string SerializeModel(const ModelGraph& g);

}  // namespace slicer

#endif  // SLICER_MODEL_GRAPH_H_
