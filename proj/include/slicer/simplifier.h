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

#ifndef SLICER_SIMPLIFIER_H_
#define SLICER_SIMPLIFIER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "slicer/model_graph.h"

namespace slicer {

inline constexpr double kDefaultSimilarityThreshold = 0.05;

// A run of original layers contracted into one node. The id is the id of the
// last member, which is the layer that absorbed the others.
struct Group {
  std::string id;
  std::vector<std::string> members;
  double memory_mib = 0.0;    // max over members
  double exec_time_ms = 0.0;  // sum over members
  std::uint64_t output_bytes = 0;  // sum of outgoing group edges
};

struct GroupEdge {
  std::size_t src = 0;  // index into groups()
  std::size_t dst = 0;
  std::uint64_t tensor_bytes = 0;
};

// Contracted layer graph. Groups are kept in a topological order of the
// contracted DAG (ties broken by earliest member in the original order), so
// concatenating member lists yields a valid topological order of the origin.
class SimplifiedGraph {
 public:
  // One group per layer. Every layer must carry memory and exec time.
  static SimplifiedGraph Identity(const ModelGraph& g);
  static SimplifiedGraph Identity(std::shared_ptr<const ModelGraph> g);

  SimplifiedGraph(std::shared_ptr<const ModelGraph> origin, std::vector<Group> groups,
                  std::vector<GroupEdge> edges);

  const std::vector<Group>& groups() const { return groups_; }
  const std::vector<GroupEdge>& edges() const { return edges_; }
  const ModelGraph& origin() const { return *origin_; }
  const std::shared_ptr<const ModelGraph>& origin_ptr() const { return origin_; }
  std::size_t size() const { return groups_.size(); }

  // Bytes on edges leaving groups [0, after] for groups (after, n).
  std::uint64_t CutBytes(std::size_t after) const;

 private:
  std::shared_ptr<const ModelGraph> origin_;
  std::vector<Group> groups_;
  std::vector<GroupEdge> edges_;
};

// One topological pass of node elimination. A group with at most one
// incoming and exactly one outgoing edge merges forward into its successor
// when |M_j - M_succ| / M_j <= theta.
std::pair<SimplifiedGraph, bool> NodeEliminate(const SimplifiedGraph& g,
                                               double theta = kDefaultSimilarityThreshold);

// Collapses every set of parallel edges into one edge carrying the byte sum.
std::pair<SimplifiedGraph, bool> EdgeEliminate(const SimplifiedGraph& g);

// Alternates node and edge elimination until neither changes the graph.
SimplifiedGraph Simplify(const ModelGraph& g, double theta = kDefaultSimilarityThreshold);
SimplifiedGraph Simplify(std::shared_ptr<const ModelGraph> g,
                         double theta = kDefaultSimilarityThreshold);

// The simplified graph as a ModelGraph with one layer per group.
ModelGraph InducedGraph(const SimplifiedGraph& g);

std::string SimplifiedGraphToJson(const SimplifiedGraph& g);
std::string GroupMembershipCsv(const SimplifiedGraph& g);

}  // namespace slicer

#endif  // SLICER_SIMPLIFIER_H_
