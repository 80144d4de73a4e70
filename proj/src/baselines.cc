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

#include "slicer/baselines.h"

#include <sstream>

#include "slicer/errors.h"
#include "slicer/hypad.h"
#include "slicer/json_io.h"

namespace slicer {
namespace {

BaselineRow MakeRow(std::string name, PartitionPlan plan, const PlatformConfig& cfg) {
  BaselineRow row;
  row.strategy = std::move(name);
  const PlanMetrics m = EvaluatePlan(plan, cfg);
  row.cost_usd = m.cost_usd;
  row.latency_ms = m.latency_ms;
  row.memory_consumption_mib_ms = m.memory_consumption_mib_ms;
  row.feasible = CheckConstraints(plan, cfg).ok();
  row.plan = std::move(plan);
  return row;
}

}  // namespace

PartitionPlan UniformPlan(const SimplifiedGraph& g, std::size_t k) {
  const std::size_t n = g.size();
  if (k >= n) {
    throw ValidationError("uniform: k = " + std::to_string(k) + " needs more than " +
                          std::to_string(n) + " groups");
  }
  const std::size_t parts = k + 1;
  std::vector<std::size_t> splits;
  std::size_t pos = 0;
  for (std::size_t p = 0; p + 1 < parts; ++p) {
    pos += n / parts + (p < n % parts ? 1 : 0);
    splits.push_back(pos);
  }
  return BuildPlan(g, splits, std::vector<int>(parts, 1));
}

BaselineReport BaselineCompare(const SimplifiedGraph& g, const PlatformConfig& cfg,
                               std::size_t uniform_k) {
  BaselineReport report;
  report.uniform_k = uniform_k;
  report.rows.push_back(MakeRow("Unsplit", UnsplitPlan(g), cfg));
  report.rows.push_back(
      MakeRow("Uniform(" + std::to_string(uniform_k) + ")", UniformPlan(g, uniform_k), cfg));
  report.rows.push_back(MakeRow("HyPAD", HypadOnSimplified(g, cfg), cfg));
  return report;
}

BaselineReport BaselineCompare(const ModelGraph& g, const ServiceProfile& profile,
                               const PlatformConfig& cfg, std::size_t uniform_k) {
  cfg.Validate();
  const ModelGraph profiled = ApplyServiceProfile(g, profile);
  return BaselineCompare(Simplify(profiled, cfg.theta), cfg, uniform_k);
}

std::string BaselineReportToCsv(const BaselineReport& report) {
  std::ostringstream out;
  out << "strategy,slices,cost_usd,latency_ms,memory_consumption_mib_ms,feasible\n";
  for (const auto& r : report.rows) {
    out << r.strategy << ',' << r.plan.slices.size() << ',' << FormatDouble(r.cost_usd) << ','
        << FormatDouble(r.latency_ms) << ',' << FormatDouble(r.memory_consumption_mib_ms) << ','
        << (r.feasible ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace slicer
