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

#ifndef SLICER_PLAN_H_
#define SLICER_PLAN_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "slicer/cost_latency.h"
#include "slicer/simplifier.h"

namespace slicer {

// The per-layer numbers a plan needs to be evaluated on its own.
struct PlanLayer {
  std::string id;
  double memory_mib = 0.0;
  double exec_time_ms = 0.0;
  double parallel_fraction = kDefaultParallelFraction;
  double size_exponent = 1.0;
  std::uint64_t output_bytes = 0;
};

struct Slice {
  std::size_t id = 1;
  std::vector<std::size_t> member_groups;  // 1-based group indices
  std::vector<PlanLayer> layers;           // original layers, topological order
  double memory_mib = 0.0;                 // max member memory
  int eta = 1;                             // every layer in the slice uses gamma = eta
  std::uint64_t boundary_out_bytes = 0;    // crossing to the next slice; 0 for the last
};

// Split points are 1-based group positions; a cut at S means groups 1..S
// and S+1.. land in different slices.
struct PartitionPlan {
  std::string model_name;
  std::vector<std::size_t> split_points;
  std::vector<Slice> slices;

  std::size_t group_count() const;
  std::map<std::string, int> PerLayerGamma() const;
};

// Slices for the given cuts, one eta per slice.
PartitionPlan BuildPlan(const SimplifiedGraph& g, const std::vector<std::size_t>& split_points,
                        const std::vector<int>& etas);

// Every group in one slice at eta.
PartitionPlan UnsplitPlan(const SimplifiedGraph& g, int eta = 1);

// Collapses an existing plan into one slice with eta = 1.
PartitionPlan UnsplitPlan(const PartitionPlan& plan);

// Structural checks: contiguous slices, split points consistent, eta >= 1.
void ValidatePlan(const PartitionPlan& plan);

struct SliceMetrics {
  double billed_memory_mib = 0.0;
  double duration_ms = 0.0;      // sum of t_p + t_a over member layers
  double compute_cost_usd = 0.0;
  double comm_time_ms = 0.0;     // boundary transfer after this slice
  double comm_cost_usd = 0.0;
};

struct PlanMetrics {
  double latency_ms = 0.0;
  double cost_usd = 0.0;
  double memory_consumption_mib_ms = 0.0;
  std::vector<SliceMetrics> slices;
};

// Evaluates the latency and cost model with exec times scaled by
// size_ratio^size_exponent and tensor bytes scaled by size_ratio.
PlanMetrics EvaluatePlan(const PartitionPlan& plan, const PlatformConfig& cfg,
                         double size_ratio = 1.0);

double TotalLatency(const PartitionPlan& plan, const PlatformConfig& cfg);
double PlanCost(const PartitionPlan& plan, const PlatformConfig& cfg);
double MemoryConsumption(const PartitionPlan& plan, const PlatformConfig& cfg);

// Sum of unpartitioned layer exec times: the latency budget.
double LatencyBudget(const PartitionPlan& plan);

// Relative slack used when comparing a latency against its budget.
inline constexpr double kLatencyTolerance = 1e-12;

struct Feasibility {
  bool eta_within_bound = true;
  bool latency_within_budget = true;
  double latency_ms = 0.0;
  double budget_ms = 0.0;
  bool ok() const { return eta_within_bound && latency_within_budget; }
};

Feasibility CheckConstraints(const PartitionPlan& plan, const PlatformConfig& cfg);

std::string PlanToJson(const PartitionPlan& plan, const PlatformConfig& cfg);
// One row per slice.
std::string PlanToCsv(const PartitionPlan& plan, const PlatformConfig& cfg);
PartitionPlan ParsePlan(std::string_view document);

}  // namespace slicer

#endif  // SLICER_PLAN_H_
