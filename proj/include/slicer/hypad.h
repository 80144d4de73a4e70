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

#ifndef SLICER_HYPAD_H_
#define SLICER_HYPAD_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "slicer/cost_latency.h"
#include "slicer/model_graph.h"
#include "slicer/plan.h"
#include "slicer/profiler.h"
#include "slicer/simplifier.h"

namespace slicer {

// Span tables over the simplified group order. Entry (i, j), 0-based and
// inclusive with i <= j, describes one slice made of groups i..j deployed at
// its latency-minimizing parallelism. Entries below the diagonal are unused.
struct CostTables {
  std::size_t n = 0;
  Eigen::MatrixXd cost_cal;     // dollars: billed(max M) * duration * c_m
  Eigen::MatrixXd duration_ms;  // sum of t_p + t_a over member layers
  Eigen::MatrixXi eta;
  // Cut after group j (0-based, j < n - 1).
  Eigen::VectorXd cost_com;  // dollars
  Eigen::VectorXd t_c;       // ms
  double latency_budget_ms = 0.0;
};

struct CostTableOptions {
  // Pins every span to eta = 1 (the purely vertical problem).
  bool serial_only = false;
};

CostTables ComputeCostTables(const SimplifiedGraph& g, const PlatformConfig& cfg,
                             CostTableOptions options = {});

struct DpSolution {
  Eigen::VectorXd dp;             // dp[j]: min cost to finish groups 1..j; dp[0] = 0
  std::vector<std::size_t> back;  // back[j]: first group (1-based) of the last slice
  std::vector<std::size_t> slice_count;
  std::vector<std::size_t> split_points;
  double objective = 0.0;
};

// Unconstrained min-cost contiguous partition. Ties prefer fewer slices,
// then the longer final slice.
DpSolution SolveDp(const CostTables& tables);
std::vector<std::size_t> DpPartition(const CostTables& tables, std::size_t n);

// Like SolveDp but only over partitions whose latency fits the budget. Keeps
// the Pareto set of (cost, latency, slices) per prefix.
DpSolution SolveDpWithLatencyBudget(const CostTables& tables);

// Evaluates every eta in 1..MaxParallelism and returns the latency argmin,
// ties to the smaller eta.
int SearchParallelism(std::span<const PlanLayer> layers, double slice_memory_mib,
                      const PlatformConfig& cfg);
int SearchParallelism(const Slice& slice, const PlatformConfig& cfg);

// Full pipeline on a simplified graph: tables, DP, per-slice eta, and the
// latency-constraint repair. Always returns a feasible plan.
PartitionPlan HypadOnSimplified(const SimplifiedGraph& g, const PlatformConfig& cfg);

// Applies the profile, simplifies with cfg.theta, and plans.
PartitionPlan Hypad(const ModelGraph& g, const ServiceProfile& profile, const PlatformConfig& cfg);

struct BruteForceOptions {
  std::size_t max_groups = 12;
  bool serial_only = false;
  bool enforce_latency_budget = true;
};

// Exhaustive search over every cut pattern and every eta vector. Ties go to
// fewer slices, then the lexicographically smallest eta vector.
PartitionPlan BruteForcePartition(const SimplifiedGraph& g, const PlatformConfig& cfg,
                                  BruteForceOptions options = {});

}  // namespace slicer

#endif  // SLICER_HYPAD_H_
