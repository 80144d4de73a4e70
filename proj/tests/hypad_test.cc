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

#include "slicer/hypad.h"

#include <gtest/gtest.h>

#include "slicer/baselines.h"
#include "slicer/errors.h"
#include "slicer/json_io.h"
#include "test_util.h"

namespace slicer {
namespace {

constexpr std::uint64_t kMiBBytes = 1048576;

LayerNode Layer(const std::string& id, double m, double t, std::uint64_t out, double f) {
  LayerNode l;
  l.id = id;
  l.memory_mib = m;
  l.exec_time_ms = t;
  l.output_bytes = out;
  l.parallel_fraction = f;
  return l;
}

ModelGraph Chain(const std::vector<std::pair<double, double>>& mt, std::uint64_t bytes, double f) {
  std::vector<LayerNode> layers;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < mt.size(); ++i) {
    layers.push_back(Layer("L" + std::to_string(i), mt[i].first, mt[i].second, bytes, f));
    if (i > 0) edges.push_back(Edge{"L" + std::to_string(i - 1), "L" + std::to_string(i), bytes});
  }
  return ModelGraph("chain", std::move(layers), std::move(edges));
}

ModelGraph Fixture() {
  const ModelGraph g = ParseModel(ReadFile(testing::FixturePath("convnext_like.json")));
  return ApplyServiceProfile(g, ComputeServiceProfile(g));
}

// --- cost tables ---------------------------------------------------------

TEST(CostTablesTest, SingleGroup) {
  const PlatformConfig cfg = DefaultPlatformConfig();
  const CostTables t = ComputeCostTables(SimplifiedGraph::Identity(Chain({{300.0, 12.0}}, 0, 0.9)), cfg);
  EXPECT_EQ(t.cost_com.size(), 0);
  EXPECT_EQ(t.eta(0, 0), 1);
  EXPECT_DOUBLE_EQ(t.cost_cal(0, 0), 384.0 * 12.0 * cfg.c_m());
  EXPECT_EQ(t.latency_budget_ms, 12.0);
}

TEST(CostTablesTest, ZeroByteBoundaryIsSetupOnly) {
  const PlatformConfig cfg = DefaultPlatformConfig();
  const CostTables t =
      ComputeCostTables(SimplifiedGraph::Identity(Chain({{300.0, 1.0}, {900.0, 1.0}}, 0, 0.9)), cfg);
  ASSERT_EQ(t.cost_com.size(), 1);
  EXPECT_DOUBLE_EQ(t.t_c(0), 0.05);
  EXPECT_DOUBLE_EQ(t.cost_com(0), cfg.network_usd_per_ms * 0.05);
}

// Five groups, default config, every entry recomputed by hand.
TEST(CostTablesTest, HandComputedFiveGroups) {
  const PlatformConfig cfg = DefaultPlatformConfig();
  const SimplifiedGraph g = SimplifiedGraph::Identity(
      Chain({{3600.0, 40.0}, {500.0, 10.0}, {7200.0, 80.0}, {2000.0, 20.0}, {300.0, 5.0}}, 8 * kMiBBytes, 0.9));
  ASSERT_EQ(g.size(), 5u);
  const CostTables t = ComputeCostTables(g, cfg);

  // Spot values: group 1 alone (M=3600, two vCPUs), group 3 alone (M=7200, four).
  EXPECT_EQ(t.eta(0, 0), 2);
  EXPECT_NEAR(t.duration_ms(0, 0), 40.0 * 0.55 + 0.5 + 0.002 * 8.0, 1e-12);
  EXPECT_NEAR(t.cost_cal(0, 0), 3712.0 * 22.516 * cfg.c_m(), 1e-18);
  EXPECT_EQ(t.eta(2, 2), 4);
  EXPECT_NEAR(t.duration_ms(2, 2), 80.0 * 0.325 + 0.5 + 0.002 * 3 * 8.0, 1e-12);
  EXPECT_NEAR(t.cost_cal(2, 2), 7296.0 * 26.548 * cfg.c_m(), 1e-18);
  EXPECT_NEAR(t.t_c(0), 0.05 + 8.0 / 8.0 / 100.0 + 2.0 * 8.0 / 1000.0, 1e-15);
  EXPECT_EQ(t.latency_budget_ms, 155.0);

  // Every span by direct formula.
  const double times[] = {40.0, 10.0, 80.0, 20.0, 5.0};
  const double mems[] = {3600.0, 500.0, 7200.0, 2000.0, 300.0};
  for (int i = 0; i < 5; ++i) {
    for (int j = i; j < 5; ++j) {
      double m = 0.0, serial = 0.0;
      for (int x = i; x <= j; ++x) {
        m = std::max(m, mems[x]);
        serial += times[x];
      }
      const int c = std::max(1, static_cast<int>(m / 1769.0));
      double best_d = serial;
      int best_e = 1;
      for (int e = 2; e <= c; ++e) {
        const double d = serial * (0.1 + 0.9 / e) + (j - i + 1) * (0.5 + 0.002 * (e - 1) * 8.0);
        if (d < best_d - 1e-9) {
          best_d = d;
          best_e = e;
        }
      }
      const double billed = std::max(128.0, std::ceil(m / 128.0) * 128.0);
      EXPECT_EQ(t.eta(i, j), best_e) << i << "," << j;
      EXPECT_NEAR(t.duration_ms(i, j), best_d, 1e-9) << i << "," << j;
      EXPECT_NEAR(t.cost_cal(i, j), billed * best_d * 1.667e-5 / 1024 / 1000, 1e-15) << i << "," << j;
    }
  }
}

TEST(CostTablesTest, Deterministic) {
  const SimplifiedGraph g = Simplify(Fixture());
  const PlatformConfig cfg = DefaultPlatformConfig();
  const CostTables a = ComputeCostTables(g, cfg), b = ComputeCostTables(g, cfg);
  EXPECT_EQ(a.cost_cal, b.cost_cal);
  EXPECT_EQ(a.cost_com, b.cost_com);
  EXPECT_EQ(a.eta, b.eta);
}

// --- dp ------------------------------------------------------------------

TEST(DpPartitionTest, FreeCommunicationUniformMemory) {
  PlatformConfig cfg = DefaultPlatformConfig();
  cfg.network_usd_per_ms = 0.0;
  const SimplifiedGraph g = SimplifiedGraph::Identity(
      Chain({{500.0, 3.0}, {500.0, 4.0}, {500.0, 5.0}, {500.0, 6.0}, {500.0, 7.0}}, kMiBBytes, 0.0));
  const CostTables t = ComputeCostTables(g, cfg);
  const DpSolution s = SolveDp(t);
  EXPECT_TRUE(s.split_points.empty());
  EXPECT_EQ(s.dp(0), 0.0);
  // Any cut pattern costs the same here.
  EXPECT_NEAR(s.objective, PlanCost(BuildPlan(g, {1, 3}, {1, 1, 1}), cfg), 1e-12 * s.objective);
  EXPECT_TRUE(DpPartition(t, g.size()).empty());
  EXPECT_THROW(DpPartition(t, 4), ValidationError);
}

TEST(DpPartitionTest, ExpensiveCommunication) {
  PlatformConfig cfg = DefaultPlatformConfig();
  cfg.network_usd_per_ms = 1e3;
  const SimplifiedGraph g =
      SimplifiedGraph::Identity(Chain({{5000.0, 30.0}, {100.0, 50.0}, {5000.0, 10.0}}, kMiBBytes, 0.0));
  EXPECT_TRUE(DpPartition(ComputeCostTables(g, cfg), g.size()).empty());
}

TEST(DpPartitionTest, CheapCommunicationSplitsHeavyHead) {
  PlatformConfig cfg = DefaultPlatformConfig();
  cfg.network_usd_per_ms = 0.0;
  const SimplifiedGraph g = SimplifiedGraph::Identity(Chain({{5000.0, 30.0}, {100.0, 50.0}}, kMiBBytes, 0.0));
  EXPECT_EQ(DpPartition(ComputeCostTables(g, cfg), g.size()), std::vector<std::size_t>{1});
}

// Exhaustive minimum over cut patterns with eta pinned to 1.
double SerialBruteForce(const SimplifiedGraph& g, const PlatformConfig& cfg) {
  const std::size_t n = g.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    std::vector<std::size_t> cuts;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      if (mask >> j & 1) cuts.push_back(j + 1);
    }
    best = std::min(best, testing::WalkPlan(BuildPlan(g, cuts, std::vector<int>(cuts.size() + 1, 1)), cfg).cost_usd);
  }
  return best;
}

TEST(DpPartitionProperty, SerialOptimalOnEightGroups) {
  testing::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    testing::GraphOptions o;
    o.n = 8;
    o.memory_levels = 8;
    o.jitter = 0.0;
    PlatformConfig cfg = testing::RandomPlatformConfig(rng);
    const SimplifiedGraph g = SimplifiedGraph::Identity(testing::RandomGraph(rng, o));
    const DpSolution s = SolveDp(ComputeCostTables(g, cfg, CostTableOptions{.serial_only = true}));
    const double oracle = SerialBruteForce(g, cfg);
    ASSERT_TRUE(testing::NearRel(s.objective, oracle, 1e-12)) << trial << ": " << s.objective << " vs " << oracle;
    const PartitionPlan bf = BruteForcePartition(g, cfg, {.serial_only = true, .enforce_latency_budget = false});
    ASSERT_EQ(s.objective, PlanCost(bf, cfg)) << trial;
  }
}

// --- parallelism search --------------------------------------------------

TEST(SearchParallelismTest, Examples) {
  PlatformConfig cfg = DefaultPlatformConfig();
  const double lambda = cfg.lambda_mib_per_vcpu;
  std::vector<PlanLayer> layers = {PlanLayer{"a", 100.0, 40.0, 0.9, 1.0, 0}};
  EXPECT_EQ(SearchParallelism(layers, lambda - 1.0, cfg), 1);

  layers[0].parallel_fraction = 0.0;
  EXPECT_EQ(SearchParallelism(layers, 4.0 * lambda, cfg), 1);

  cfg.aggregation = AggregationModel{0.0, 0.0};
  layers[0].parallel_fraction = 0.9;
  std::vector<double> latency;
  for (int eta = 1; eta <= 4; ++eta) latency.push_back(40.0 * (0.1 + 0.9 / eta));
  const int argmin = static_cast<int>(std::min_element(latency.begin(), latency.end()) - latency.begin()) + 1;
  EXPECT_EQ(argmin, 4);
  EXPECT_EQ(SearchParallelism(layers, 4.0 * lambda, cfg), argmin);

  // Exact ties go to the smaller eta.
  layers[0].parallel_fraction = 0.0;
  EXPECT_EQ(SearchParallelism(layers, 4.0 * lambda, cfg), 1);
}

TEST(SearchParallelismProperty, ArgminOverCandidates) {
  testing::Rng rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    const PlatformConfig cfg = testing::RandomPlatformConfig(rng);
    std::vector<PlanLayer> layers;
    for (int i = rng.Int(1, 6); i > 0; --i) {
      layers.push_back(PlanLayer{"x", 0.0, rng.Uniform(0, 50), rng.Uniform(0, 1), 1.0,
                                 static_cast<std::uint64_t>(rng.Uniform(0, 100) * kMiBBytes)});
    }
    const double memory = rng.Uniform(100, 12000);
    const int eta = SearchParallelism(layers, memory, cfg);
    ASSERT_GE(eta, 1);
    ASSERT_LE(eta, MaxParallelism(memory, cfg));
    auto latency = [&](int e) {
      double d = 0.0;
      for (const auto& l : layers) {
        d += ParallelTime(l.exec_time_ms, l.parallel_fraction, e) + AggregationTime(l.output_bytes, e, cfg);
      }
      return d;
    };
    for (int e = 1; e <= MaxParallelism(memory, cfg); ++e) {
      if (e < eta) ASSERT_GT(latency(e), latency(eta));
      if (e > eta) ASSERT_GE(latency(e), latency(eta));
    }
  }
}

// --- hypad ---------------------------------------------------------------

TEST(HypadTest, SingleLayer) {
  const ModelGraph g = ParseModel(ReadFile(testing::FixturePath("single_layer.json")));
  const ServiceProfile p = ParseServiceProfile(ReadFile(testing::FixturePath("single_layer.profile.json")));
  const PlatformConfig cfg = DefaultPlatformConfig();
  const PartitionPlan plan = Hypad(g, p, cfg);
  ASSERT_EQ(plan.slices.size(), 1u);
  EXPECT_TRUE(plan.split_points.empty());
  EXPECT_EQ(plan.slices[0].eta, SearchParallelism(plan.slices[0], cfg));
}

TEST(HypadTest, FixtureRegime) {
  const ModelGraph g = Fixture();
  const PlatformConfig cfg = DefaultPlatformConfig();
  const PartitionPlan plan = Hypad(g, ComputeServiceProfile(g), cfg);
  EXPECT_GE(plan.slices.size(), 3u);
  EXPECT_LE(plan.slices.size(), 5u);
  const PartitionPlan unsplit = UnsplitPlan(plan);
  EXPECT_LT(PlanCost(plan, cfg), PlanCost(unsplit, cfg));
  EXPECT_LE(MemoryConsumption(plan, cfg), 0.75 * MemoryConsumption(unsplit, cfg));
  EXPECT_TRUE(CheckConstraints(plan, cfg).ok());
  // Every original layer inherits its slice's eta.
  for (const auto& s : plan.slices) {
    for (const auto& l : s.layers) EXPECT_EQ(plan.PerLayerGamma().at(l.id), s.eta);
  }
}

TEST(HypadTest, Deterministic) {
  const ModelGraph g = Fixture();
  const PlatformConfig cfg = DefaultPlatformConfig();
  const ServiceProfile p = ComputeServiceProfile(g);
  EXPECT_EQ(PlanToJson(Hypad(g, p, cfg), cfg), PlanToJson(Hypad(g, p, cfg), cfg));
}

TEST(HypadTest, RejectsInvalidConfig) {
  const ModelGraph g = Fixture();
  PlatformConfig cfg = DefaultPlatformConfig();
  cfg.lambda_mib_per_vcpu = 0.0;
  EXPECT_THROW(Hypad(g, ComputeServiceProfile(g), cfg), ValidationError);
}

// Constraint satisfaction, cost non-regression and contiguity.
TEST(HypadProperty, PlansAreFeasibleAndNoWorseThanUnsplit) {
  testing::Rng rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    testing::GraphOptions o;
    o.n = rng.Int(1, 30);
    o.memory_hi = 14000.0;
    const PlatformConfig cfg = testing::RandomPlatformConfig(rng);
    const SimplifiedGraph g = Simplify(testing::RandomGraph(rng, o), cfg.theta);
    const PartitionPlan plan = HypadOnSimplified(g, cfg);
    const Feasibility f = CheckConstraints(plan, cfg);
    ASSERT_TRUE(f.ok()) << trial;
    for (const auto& s : plan.slices) {
      ASSERT_LE(s.eta, std::max(1.0, std::floor(s.memory_mib / cfg.lambda_mib_per_vcpu)));
    }
    const testing::WalkResult w = testing::WalkPlan(plan, cfg);
    ASSERT_LE(w.latency_ms, LatencyBudget(plan) * (1 + 1e-12)) << trial;
    ASSERT_LE(w.cost_usd, testing::WalkPlan(UnsplitPlan(g), cfg).cost_usd * (1 + 1e-12)) << trial;
    std::vector<std::size_t> concat;
    for (const auto& s : plan.slices) concat.insert(concat.end(), s.member_groups.begin(), s.member_groups.end());
    for (std::size_t i = 0; i < concat.size(); ++i) ASSERT_EQ(concat[i], i + 1);
    ASSERT_EQ(concat.size(), g.size());
  }
}

// Joint cut x eta optimum under both constraints.
TEST(HypadProperty, MatchesBruteForce) {
  testing::Rng rng(34);
  int constrained = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto [g, cfg] = testing::RandomPlanningInstance(rng, 10);
    const PartitionPlan plan = HypadOnSimplified(g, cfg);
    const PartitionPlan bf = BruteForcePartition(g, cfg);
    const double a = testing::WalkPlan(plan, cfg).cost_usd, b = testing::WalkPlan(bf, cfg).cost_usd;
    ASSERT_TRUE(testing::NearRel(a, b, 1e-12)) << trial << ": " << a << " vs " << b;
    const DpSolution free = SolveDp(ComputeCostTables(g, cfg));
    if (!CheckConstraints(BuildPlan(g, free.split_points, std::vector<int>(free.split_points.size() + 1, 1)), cfg)
             .latency_within_budget &&
        !plan.split_points.empty()) {
      ++constrained;
    }
  }
  // The budget-aware search has to carry part of the load.
  EXPECT_GT(constrained, 0);
}

// --- brute force ---------------------------------------------------------

TEST(BruteForceTest, Examples) {
  PlatformConfig cfg = DefaultPlatformConfig();
  const SimplifiedGraph one = SimplifiedGraph::Identity(Chain({{300.0, 5.0}}, 0, 0.5));
  EXPECT_EQ(BruteForcePartition(one, cfg).slices.size(), 1u);

  cfg.network_usd_per_ms = 0.0;
  cfg.channels[cfg.boundary_channel].setup_latency_ms = 0.0;
  const SimplifiedGraph two = SimplifiedGraph::Identity(Chain({{1000.0, 20.0}, {100.0, 20.0}}, 0, 0.5));
  const double unsplit = PlanCost(UnsplitPlan(two), cfg);
  const double split = PlanCost(BuildPlan(two, {1}, {1, 1}), cfg);
  ASSERT_LT(split, unsplit);
  EXPECT_EQ(BruteForcePartition(two, cfg).split_points, std::vector<std::size_t>{1});

  testing::GraphOptions o;
  o.n = 13;
  o.memory_levels = 13;
  o.jitter = 0.0;
  testing::Rng rng(1);
  EXPECT_THROW(BruteForcePartition(SimplifiedGraph::Identity(testing::RandomGraph(rng, o)), cfg), ValidationError);
}

// --- baselines -------------------------------------------------------------

TEST(UniformPlanTest, RemainderFromFront) {
  const SimplifiedGraph g = SimplifiedGraph::Identity(
      Chain({{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}}, 0, 0.5));
  const PartitionPlan u = UniformPlan(g, 2);
  ASSERT_EQ(u.slices.size(), 3u);
  EXPECT_EQ(u.slices[0].member_groups.size(), 3u);
  EXPECT_EQ(u.slices[1].member_groups.size(), 2u);
  EXPECT_EQ(u.slices[2].member_groups.size(), 2u);
  for (const auto& s : u.slices) EXPECT_EQ(s.eta, 1);
  EXPECT_EQ(PlanToJson(UniformPlan(g, 0), DefaultPlatformConfig()),
            PlanToJson(UnsplitPlan(g), DefaultPlatformConfig()));
  EXPECT_THROW(UniformPlan(g, 7), ValidationError);
}

TEST(BaselineCompareTest, FixtureOrderingAndCsv) {
  const ModelGraph g = Fixture();
  const PlatformConfig cfg = DefaultPlatformConfig();
  const BaselineReport r = BaselineCompare(g, ComputeServiceProfile(g), cfg, 2);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].strategy, "Unsplit");
  EXPECT_EQ(r.rows[1].strategy, "Uniform(2)");
  EXPECT_EQ(r.rows[2].strategy, "HyPAD");
  EXPECT_LT(r.rows[2].cost_usd, r.rows[0].cost_usd);
  if (r.rows[1].feasible) EXPECT_LE(r.rows[2].cost_usd, r.rows[1].cost_usd);
  const std::string csv = BaselineReportToCsv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "strategy,slices,cost_usd,latency_ms,memory_consumption_mib_ms,feasible");
}

TEST(BaselineCompareProperty, HypadDominatesFeasibleBaselines) {
  testing::Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    testing::GraphOptions o;
    o.n = rng.Int(2, 25);
    o.memory_hi = 14000.0;
    const PlatformConfig cfg = testing::RandomPlatformConfig(rng);
    const SimplifiedGraph g = Simplify(testing::RandomGraph(rng, o), cfg.theta);
    if (g.size() < 2) continue;
    const auto k = static_cast<std::size_t>(rng.Int(1, static_cast<int>(g.size()) - 1));
    const BaselineReport r = BaselineCompare(g, cfg, k);
    ASSERT_TRUE(r.rows[2].feasible);
    for (int i = 0; i < 2; ++i) {
      if (r.rows[i].feasible) ASSERT_LE(r.rows[2].cost_usd, r.rows[i].cost_usd * (1 + 1e-12)) << trial;
    }
  }
}

}  // namespace
}  // namespace slicer
