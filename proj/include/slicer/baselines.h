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

#ifndef SLICER_BASELINES_H_
#define SLICER_BASELINES_H_

#include <string>
#include <vector>

#include "slicer/cost_latency.h"
#include "slicer/model_graph.h"
#include "slicer/plan.h"
#include "slicer/profiler.h"
#include "slicer/simplifier.h"

namespace slicer {

// k cuts, k + 1 slices of near-equal group counts; the first (n mod (k+1))
// slices get one extra group. Every slice runs at eta = 1.
PartitionPlan UniformPlan(const SimplifiedGraph& g, std::size_t k);

struct BaselineRow {
  std::string strategy;  // "Unsplit", "Uniform(k)" or "HyPAD"
  PartitionPlan plan;
  double cost_usd = 0.0;
  double latency_ms = 0.0;
  double memory_consumption_mib_ms = 0.0;
  bool feasible = true;
};

struct BaselineReport {
  std::vector<BaselineRow> rows;  // Unsplit, Uniform(k), HyPAD
  std::size_t uniform_k = 0;
};

BaselineReport BaselineCompare(const SimplifiedGraph& g, const PlatformConfig& cfg,
                               std::size_t uniform_k);
BaselineReport BaselineCompare(const ModelGraph& g, const ServiceProfile& profile,
                               const PlatformConfig& cfg, std::size_t uniform_k);

std::string BaselineReportToCsv(const BaselineReport& report);

}  // namespace slicer

#endif  // SLICER_BASELINES_H_
