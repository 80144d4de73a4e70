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

#include "slicer/simplifier.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <unordered_map>

#include "json.hpp"
#include "slicer/errors.h"
#include "slicer/json_io.h"

namespace slicer {
namespace {

using ordered_json = nlohmann::ordered_json;

bool Similar(double m_j, double m_next, double theta) {
  if (m_j == 0.0) return m_next == 0.0;
  return std::abs(m_j - m_next) / m_j <= theta;
}

}  // namespace

SimplifiedGraph::SimplifiedGraph(std::shared_ptr<const ModelGraph> origin, std::vector<Group> groups,
                                 std::vector<GroupEdge> edges)
    : origin_(std::move(origin)) {
  const auto order = TopologicalOrder(*origin_);
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(order[i], i);

  const std::size_t n = groups.size();
  std::vector<std::size_t> key(n);
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<int> indeg(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (groups[i].members.empty()) throw ValidationError("group '" + groups[i].id + "' is empty");
    key[i] = order.size();
    for (const auto& m : groups[i].members) key[i] = std::min(key[i], rank.at(m));
  }
  for (const auto& e : edges) {
    if (e.src >= n || e.dst >= n) throw ValidationError("group edge out of range");
    out[e.src].push_back(e.dst);
    ++indeg[e.dst];
  }
  auto later = [&](std::size_t a, std::size_t b) { return key[a] > key[b]; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> new_index(n, n);
  std::size_t next = 0;
  while (!ready.empty()) {
    const std::size_t u = ready.top();
    ready.pop();
    new_index[u] = next++;
    for (std::size_t v : out[u]) {
      if (--indeg[v] == 0) ready.push(v);
    }
  }
  if (next != n) throw ValidationError("cycle in simplified graph");

  groups_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    groups_[new_index[i]] = std::move(groups[i]);
    groups_[new_index[i]].output_bytes = 0;
  }
  edges_.reserve(edges.size());
  for (const auto& e : edges) {
    edges_.push_back(GroupEdge{new_index[e.src], new_index[e.dst], e.tensor_bytes});
    groups_[new_index[e.src]].output_bytes += e.tensor_bytes;
  }
}

SimplifiedGraph SimplifiedGraph::Identity(const ModelGraph& g) {
  return Identity(std::make_shared<const ModelGraph>(g));
}

SimplifiedGraph SimplifiedGraph::Identity(std::shared_ptr<const ModelGraph> g) {
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> idx;
  for (const auto& l : g->layers()) {
    if (!l.memory_mib || !l.exec_time_ms) {
      throw ValidationError("layer '" + l.id + "' has no memory/time profile");
    }
    idx.emplace(l.id, groups.size());
    groups.push_back(Group{l.id, {l.id}, *l.memory_mib, *l.exec_time_ms, 0});
  }
  std::vector<GroupEdge> edges;
  for (const auto& e : g->edges()) edges.push_back(GroupEdge{idx.at(e.src), idx.at(e.dst), e.tensor_bytes});
  return SimplifiedGraph(std::move(g), std::move(groups), std::move(edges));
}

std::uint64_t SimplifiedGraph::CutBytes(std::size_t after) const {
  std::uint64_t bytes = 0;
  for (const auto& e : edges_) {
    if (e.src <= after && e.dst > after) bytes += e.tensor_bytes;
  }
  return bytes;
}

std::pair<SimplifiedGraph, bool> NodeEliminate(const SimplifiedGraph& g, double theta) {
  if (!(theta >= 0.0)) throw ValidationError("node_eliminate: theta must be >= 0");
  std::vector<Group> groups = g.groups();
  std::vector<GroupEdge> edges = g.edges();
  std::vector<bool> alive(groups.size(), true);
  bool changed = false;
  const auto order = TopologicalOrder(g.origin());
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(order[i], i);

  // Groups are already in topological order.
  for (std::size_t j = 0; j < groups.size(); ++j) {
    std::size_t in_count = 0, out_count = 0, in_edge = 0, out_edge = 0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (edges[k].dst == j) {
        ++in_count;
        in_edge = k;
      }
      if (edges[k].src == j) {
        ++out_count;
        out_edge = k;
      }
    }
    // The source (no input edge) may merge too; its successor becomes the source.
    if (in_count > 1 || out_count != 1) continue;
    const std::size_t succ = edges[out_edge].dst;
    if (!Similar(groups[j].memory_mib, groups[succ].memory_mib, theta)) continue;

    Group& s = groups[succ];
    std::vector<std::string> members = groups[j].members;
    members.insert(members.end(), s.members.begin(), s.members.end());
    std::sort(members.begin(), members.end(),
              [&](const std::string& a, const std::string& b) { return rank.at(a) < rank.at(b); });
    s.members = std::move(members);
    s.memory_mib = std::max(s.memory_mib, groups[j].memory_mib);
    s.exec_time_ms += groups[j].exec_time_ms;
    alive[j] = false;

    std::vector<GroupEdge> kept;
    kept.reserve(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (in_count == 1 && k == in_edge) {
        kept.push_back(GroupEdge{edges[in_edge].src, succ, edges[in_edge].tensor_bytes});
      } else if (k != out_edge) {
        kept.push_back(edges[k]);
      }
    }
    edges = std::move(kept);
    changed = true;
  }
  if (!changed) return {g, false};

  std::vector<std::size_t> remap(groups.size(), 0);
  std::vector<Group> live;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!alive[i]) continue;
    remap[i] = live.size();
    live.push_back(std::move(groups[i]));
  }
  for (auto& e : edges) {
    e.src = remap[e.src];
    e.dst = remap[e.dst];
  }
  return {SimplifiedGraph(g.origin_ptr(), std::move(live), std::move(edges)), true};
}

std::pair<SimplifiedGraph, bool> EdgeEliminate(const SimplifiedGraph& g) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> first;
  std::vector<GroupEdge> merged;
  bool changed = false;
  for (const auto& e : g.edges()) {
    auto [it, inserted] = first.emplace(std::pair(e.src, e.dst), merged.size());
    if (inserted) {
      merged.push_back(e);
    } else {
      merged[it->second].tensor_bytes += e.tensor_bytes;
      changed = true;
    }
  }
  if (!changed) return {g, false};
  return {SimplifiedGraph(g.origin_ptr(), g.groups(), std::move(merged)), true};
}

SimplifiedGraph Simplify(const ModelGraph& g, double theta) {
  return Simplify(std::make_shared<const ModelGraph>(g), theta);
}

SimplifiedGraph Simplify(std::shared_ptr<const ModelGraph> g, double theta) {
  SimplifiedGraph current = SimplifiedGraph::Identity(std::move(g));
  while (true) {
    auto [after_nodes, node_changed] = NodeEliminate(current, theta);
    auto [after_edges, edge_changed] = EdgeEliminate(after_nodes);
    if (!node_changed && !edge_changed) break;
    current = std::move(after_edges);
  }
  return current;
}

ModelGraph InducedGraph(const SimplifiedGraph& g) {
  std::vector<LayerNode> layers;
  for (const auto& grp : g.groups()) {
    LayerNode l;
    l.id = grp.id;
    l.output_bytes = grp.output_bytes;
    l.memory_mib = grp.memory_mib;
    l.exec_time_ms = grp.exec_time_ms;
    layers.push_back(std::move(l));
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    edges.push_back(Edge{g.groups()[e.src].id, g.groups()[e.dst].id, e.tensor_bytes});
  }
  return ModelGraph(g.origin().name(), std::move(layers), std::move(edges));
}

std::string SimplifiedGraphToJson(const SimplifiedGraph& g) {
  ordered_json doc;
  doc["name"] = g.origin().name();
  doc["original_layer_count"] = g.origin().layers().size();
  ordered_json groups = ordered_json::array();
  for (std::size_t i = 0; i < g.groups().size(); ++i) {
    const Group& grp = g.groups()[i];
    ordered_json j;
    j["index"] = i + 1;
    j["id"] = grp.id;
    j["members"] = grp.members;
    j["memory_mib"] = grp.memory_mib;
    j["exec_time_ms"] = grp.exec_time_ms;
    j["output_bytes"] = grp.output_bytes;
    groups.push_back(j);
  }
  doc["groups"] = groups;
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges()) {
    ordered_json j;
    j["src"] = g.groups()[e.src].id;
    j["dst"] = g.groups()[e.dst].id;
    j["tensor_bytes"] = e.tensor_bytes;
    edges.push_back(j);
  }
  doc["edges"] = edges;
  return doc.dump(2) + "\n";
}

std::string GroupMembershipCsv(const SimplifiedGraph& g) {
  std::string out = "layer_id,group_index,group_id\n";
  for (std::size_t i = 0; i < g.groups().size(); ++i) {
    for (const auto& m : g.groups()[i].members) {
      out += m + "," + std::to_string(i + 1) + "," + g.groups()[i].id + "\n";
    }
  }
  return out;
}

}  // namespace slicer
