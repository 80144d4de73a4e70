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

#ifndef SLICER_SIMULATOR_H_
#define SLICER_SIMULATOR_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "slicer/cost_latency.h"
#include "slicer/plan.h"

namespace slicer {

struct Workload {
  double duration_hours = 1.0;
  double start_hour = 0.0;  // offset into the diurnal cycle
  double min_rps = 1.0;
  double max_rps = 1.0;
  double min_bytes = 1e6;
  double max_bytes = 1e6;
  // Input size at which the plan's per-layer numbers were profiled.
  double reference_input_bytes = 1e6;
  std::uint64_t seed = 0;

  void Validate() const;
};

Workload ParseWorkload(std::string_view document);
std::string WorkloadToJson(const Workload& w);

struct Request {
  double arrival_s = 0.0;  // seconds since the start of the window
  double input_bytes = 0.0;
};

// Diurnal rate at t seconds into the window: min at hour 0, max at hour 12.
double ArrivalRate(const Workload& w, double t_seconds);

// Non-homogeneous Poisson arrivals by thinning, log-uniform sizes.
std::vector<Request> GenerateWorkload(const Workload& w);

struct SliceReport {
  std::size_t id = 0;
  int eta = 1;
  double memory_mib = 0.0;
  double billed_memory_mib = 0.0;
  double utilization = 0.0;
  double mean_duration_ms = 0.0;
  double mean_comm_ms = 0.0;
  double total_cost_usd = 0.0;
};

struct SimReport {
  std::size_t request_count = 0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  double mean_latency_ms = 0.0;
  double mean_utilization = 0.0;
  double cost_per_request_usd = 0.0;
  double total_cost_usd = 0.0;
  double mean_memory_consumption_mib_ms = 0.0;
  std::vector<SliceReport> slices;
};

// Nearest-rank percentile of an ascending sample vector.
double NearestRank(const std::vector<double>& sorted, double percentile);

// Throws InfeasibleError when the plan violates its constraints.
SimReport Simulate(const PartitionPlan& plan, const PlatformConfig& cfg, const Workload& w);
SimReport Simulate(const PartitionPlan& plan, const PlatformConfig& cfg,
                   const std::vector<Request>& requests, double reference_input_bytes);

struct AblationSwitches {
  bool mpe_off = false;  // plan replaced by unsplit at eta = 1
  bool shm_off = false;  // every channel behaves like RemoteStore
  bool ae_off = false;   // compression ratio 1
};

struct AblationRow {
  std::string configuration;
  bool feasible = true;
  SimReport report;
  double delta_p95_ms = 0.0;
  double delta_cost_per_request_usd = 0.0;
  double delta_memory_consumption_mib_ms = 0.0;
};

// Row "full" first, then one row per enabled switch. Deltas are against
// "full". Ablated configurations are simulated even when infeasible.
std::vector<AblationRow> Ablate(const PartitionPlan& plan, const PlatformConfig& cfg,
                                const Workload& w, AblationSwitches switches);

std::string SimReportToJson(const SimReport& r);
std::string SimReportToCsv(const SimReport& r);
std::string AblationToJson(const std::vector<AblationRow>& rows);
std::string AblationToCsv(const std::vector<AblationRow>& rows);

}  // namespace slicer

#endif  // SLICER_SIMULATOR_H_
