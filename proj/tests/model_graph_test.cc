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

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <set>

#include "slicer/errors.h"
#include "slicer/json_io.h"
#include "test_util.h"

namespace slicer {
namespace {

using ::slicer::testing::FixturePath;

constexpr const char* kChain3 = R"({
  "name": "c3",
  "layers": [
    {"id": "A", "topology": "Chain", "operators": [{"id": "a", "op_type": "Conv2D", "input_size": 4}],
     "output_bytes": 100},
    {"id": "B", "topology": "Chain", "operators": [{"id": "b", "op_type": "MatMul", "input_size": 4}],
     "output_bytes": 50},
    {"id": "C", "topology": "Chain", "operators": [{"id": "c", "op_type": "MatMul", "input_size": 4}],
     "output_bytes": 10}
  ],
  "edges": [{"src": "A", "dst": "B", "tensor_bytes": 100}, {"src": "B", "dst": "C", "tensor_bytes": 50}]
})";

std::string ErrorOf(const std::string& doc) {
  try {
    ParseModel(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

LayerNode Plain(const std::string& id) {
  LayerNode l;
  l.id = id;
  l.memory_mib = 1.0;
  l.exec_time_ms = 1.0;
  return l;
}

TEST(ParseModelTest, ThreeLayerChain) {
  const ModelGraph g = ParseModel(kChain3);
  EXPECT_EQ(g.name(), "c3");
  EXPECT_EQ(g.layers().size(), 3u);
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_EQ(g.source(), "A");
  EXPECT_EQ(g.sink(), "C");
  EXPECT_FALSE(g.layer("A").memory_mib.has_value());
  EXPECT_DOUBLE_EQ(g.layer("A").parallel_fraction, 0.9);
}

TEST(ParseModelTest, DanglingEdge) {
  std::string doc = kChain3;
  doc.replace(doc.find(R"("dst": "C")"), 10, R"("dst": "Z")");
  EXPECT_NE(ErrorOf(doc).find("dangling edge"), std::string::npos);
}

TEST(ParseModelTest, Cycle) {
  EXPECT_THROW(ModelGraph("cyc", {Plain("A"), Plain("B"), Plain("C"), Plain("D")},
                          {{"A", "B", 0}, {"B", "C", 0}, {"C", "B", 0}, {"C", "D", 0}}),
               ValidationError);
}

TEST(ParseModelTest, MultipleSourcesOrSinks) {
  EXPECT_THROW(ModelGraph("two_src", {Plain("A"), Plain("B"), Plain("C")}, {{"A", "C", 0}, {"B", "C", 0}}),
               ValidationError);
  EXPECT_THROW(ModelGraph("two_sink", {Plain("A"), Plain("B"), Plain("C")}, {{"A", "B", 0}, {"A", "C", 0}}),
               ValidationError);
  EXPECT_THROW(ModelGraph("disconnected", {Plain("A"), Plain("B")}, {}), ValidationError);
}

TEST(ParseModelTest, Malformed) {
  EXPECT_THROW(ParseModel("{not json"), ValidationError);
  EXPECT_THROW(ParseModel(R"({"name": "x"})"), ValidationError);
  EXPECT_THROW(ParseModel(R"({"name": "x", "layers": []})"), ValidationError);
}

TEST(LayerInvariantsTest, TopologyShape) {
  LayerNode chain = Plain("A");
  chain.branches = {{testing::MakeOp("o", 1, 1)}};
  EXPECT_THROW(ModelGraph("m", {chain}, {}), ValidationError);

  LayerNode par = Plain("A");
  par.topology = Topology::kParallel;
  par.chain_ops = {testing::MakeOp("o", 1, 1)};
  EXPECT_THROW(ModelGraph("m", {par}, {}), ValidationError);

  LayerNode hyb = Plain("A");
  hyb.topology = Topology::kHybrid;
  hyb.branches = {{}};
  EXPECT_THROW(ModelGraph("m", {hyb}, {}), ValidationError);
}

TEST(LayerInvariantsTest, OperatorRanges) {
  LayerNode l = Plain("A");
  l.chain_ops = {testing::MakeOp("o", -1, 1)};
  EXPECT_THROW(ModelGraph("m", {l}, {}), ValidationError);
  l.chain_ops = {testing::MakeOp("o", 1, -1)};
  EXPECT_THROW(ModelGraph("m", {l}, {}), ValidationError);
  l.chain_ops = {testing::MakeOp("o", 1, 1)};
  l.chain_ops[0].input_size = 0;
  EXPECT_THROW(ModelGraph("m", {l}, {}), ValidationError);
  l.chain_ops[0].input_size = 1;
  l.parallel_fraction = 1.5;
  EXPECT_THROW(ModelGraph("m", {l}, {}), ValidationError);
}

TEST(LayerInvariantsTest, DuplicateIds) {
  EXPECT_THROW(ModelGraph("m", {Plain("A"), Plain("A")}, {{"A", "A", 0}}), ValidationError);
}

TEST(TopologicalOrderTest, Chain) {
  EXPECT_EQ(TopologicalOrder(ParseModel(kChain3)), (std::vector<std::string>{"A", "B", "C"}));
}

TEST(TopologicalOrderTest, DiamondTieBreak) {
  const ModelGraph g("d", {Plain("D"), Plain("C"), Plain("B"), Plain("A")},
                     {{"A", "C", 0}, {"A", "B", 0}, {"B", "D", 0}, {"C", "D", 0}});
  EXPECT_EQ(TopologicalOrder(g), (std::vector<std::string>{"A", "B", "C", "D"}));
}

// Reverse postorder DFS; an order is valid iff every edge goes forward.
std::vector<std::string> DfsOrder(const ModelGraph& g) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : g.edges()) adj[e.src].push_back(e.dst);
  std::set<std::string> done;
  std::vector<std::string> post;
  std::function<void(const std::string&)> visit = [&](const std::string& u) {
    if (!done.insert(u).second) return;
    for (const auto& v : adj[u]) visit(v);
    post.push_back(u);
  };
  visit(g.source());
  return {post.rbegin(), post.rend()};
}

bool RespectsEdges(const ModelGraph& g, const std::vector<std::string>& order) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  if (rank.size() != g.layers().size()) return false;
  for (const auto& e : g.edges()) {
    if (rank.at(e.src) >= rank.at(e.dst)) return false;
  }
  return true;
}

TEST(TopologicalOrderTest, FixtureAgainstDfsOrder) {
  const ModelGraph g = ParseModel(ReadFile(FixturePath("convnext_like.json")));
  ASSERT_EQ(g.layers().size(), 28u);
  const auto order = TopologicalOrder(g);
  const auto dfs = DfsOrder(g);
  ASSERT_TRUE(RespectsEdges(g, dfs));
  EXPECT_TRUE(RespectsEdges(g, order));
  // A chain admits exactly one topological order.
  EXPECT_EQ(order, dfs);
}

TEST(SerializeModelTest, FixtureRoundTrip) {
  const ModelGraph g = ParseModel(ReadFile(FixturePath("convnext_like.json")));
  const std::string once = SerializeModel(g);
  const std::string twice = SerializeModel(ParseModel(once));
  EXPECT_EQ(once, twice);
}

TEST(ModelGraphProperty, RandomGraphsOrderAndRoundTrip) {
  testing::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    testing::GraphOptions o;
    o.n = rng.Int(1, 25);
    o.extra_edge_prob = rng.Uniform(0.0, 0.5);
    const ModelGraph g = testing::RandomGraph(rng, o);
    const auto order = TopologicalOrder(g);
    ASSERT_TRUE(RespectsEdges(g, order)) << "trial " << trial;
    const std::string text = SerializeModel(g);
    ASSERT_EQ(SerializeModel(ParseModel(text)), text) << "trial " << trial;
  }
}

}  // namespace
}  // namespace slicer
