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

#include "slicer/plan.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "slicer/errors.h"
#include "slicer/json_io.h"

namespace slicer {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

PlanLayer ToPlanLayer(const LayerNode& l) {
  PlanLayer p;
  p.id = l.id;
  p.memory_mib = l.memory_mib.value_or(0.0);
  p.exec_time_ms = l.exec_time_ms.value_or(0.0);
  p.parallel_fraction = l.parallel_fraction;
  p.size_exponent = l.size_exponent;
  p.output_bytes = l.output_bytes;
  return p;
}

}  // namespace

std::size_t PartitionPlan::group_count() const {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.member_groups.size();
  return n;
}

std::map<std::string, int> PartitionPlan::PerLayerGamma() const {
  std::map<std::string, int> gamma;
  for (const auto& s : slices) {
    for (const auto& l : s.layers) gamma[l.id] = s.eta;
  }
  return gamma;
}

PartitionPlan BuildPlan(const SimplifiedGraph& g, const std::vector<std::size_t>& split_points,
                        const std::vector<int>& etas) {
  const std::size_t n = g.size();
  if (etas.size() != split_points.size() + 1) {
    throw ValidationError("build_plan: need one eta per slice");
  }
  PartitionPlan plan;
  plan.model_name = g.origin().name();
  plan.split_points = split_points;
  std::size_t begin = 0;  // 0-based first group of the current slice
  for (std::size_t k = 0; k <= split_points.size(); ++k) {
    const std::size_t end = k < split_points.size() ? split_points[k] : n;  // exclusive
    if (end <= begin || end > n) throw ValidationError("build_plan: split points must increase within 1..n-1");
    if (k < split_points.size() && end >= n) throw ValidationError("build_plan: split point past last group");
    Slice s;
    s.id = k + 1;
    s.eta = etas[k];
    for (std::size_t gi = begin; gi < end; ++gi) {
      const Group& grp = g.groups()[gi];
      s.member_groups.push_back(gi + 1);
      s.memory_mib = std::max(s.memory_mib, grp.memory_mib);
      for (const auto& id : grp.members) s.layers.push_back(ToPlanLayer(g.origin().layer(id)));
    }
    s.boundary_out_bytes = end < n ? g.CutBytes(end - 1) : 0;
    plan.slices.push_back(std::move(s));
    begin = end;
  }
  ValidatePlan(plan);
  return plan;
}

PartitionPlan UnsplitPlan(const SimplifiedGraph& g, int eta) { return BuildPlan(g, {}, {eta}); }

PartitionPlan UnsplitPlan(const PartitionPlan& plan) {
  PartitionPlan out;
  out.model_name = plan.model_name;
  Slice s;
  for (const auto& src : plan.slices) {
    s.member_groups.insert(s.member_groups.end(), src.member_groups.begin(), src.member_groups.end());
    s.layers.insert(s.layers.end(), src.layers.begin(), src.layers.end());
    s.memory_mib = std::max(s.memory_mib, src.memory_mib);
  }
  out.slices.push_back(std::move(s));
  return out;
}

void ValidatePlan(const PartitionPlan& plan) {
  if (plan.slices.empty()) throw ValidationError("plan has no slices");
  if (plan.split_points.size() + 1 != plan.slices.size()) {
    throw ValidationError("plan: k split points must induce k+1 slices");
  }
  std::size_t next_group = 1;
  for (std::size_t k = 0; k < plan.slices.size(); ++k) {
    const Slice& s = plan.slices[k];
    if (s.member_groups.empty() || s.layers.empty()) {
      throw ValidationError("plan: slice " + std::to_string(k + 1) + " is empty");
    }
    for (std::size_t gi : s.member_groups) {
      if (gi != next_group++) throw ValidationError("plan: slices are not contiguous");
    }
    if (k + 1 < plan.slices.size() && plan.split_points[k] != s.member_groups.back()) {
      throw ValidationError("plan: split points disagree with slice membership");
    }
    if (s.eta < 1) throw ValidationError("plan: eta must be >= 1");
    if (s.memory_mib < 0) throw ValidationError("plan: negative slice memory");
    double max_mem = 0.0;
    for (const auto& l : s.layers) max_mem = std::max(max_mem, l.memory_mib);
    if (max_mem != s.memory_mib) {
      throw ValidationError("plan: slice memory must equal its largest member");
    }
  }
}

PlanMetrics EvaluatePlan(const PartitionPlan& plan, const PlatformConfig& cfg, double size_ratio) {
  PlanMetrics m;
  m.slices.reserve(plan.slices.size());
  const double c_m = cfg.c_m();
  for (std::size_t k = 0; k < plan.slices.size(); ++k) {
    const Slice& s = plan.slices[k];
    SliceMetrics sm;
    sm.billed_memory_mib = BilledMemory(s.memory_mib, cfg);
    for (const auto& l : s.layers) {
      const double scale = size_ratio == 1.0 ? 1.0 : std::pow(size_ratio, l.size_exponent);
      sm.duration_ms += ParallelTime(l.exec_time_ms * scale, l.parallel_fraction, s.eta) +
                        AggregationTime(static_cast<double>(l.output_bytes) * size_ratio / kBytesPerMiB,
                                        s.eta, cfg.aggregation);
    }
    sm.compute_cost_usd = sm.billed_memory_mib * sm.duration_ms * c_m;
    if (k + 1 < plan.slices.size()) {
      const double bytes = static_cast<double>(s.boundary_out_bytes) * size_ratio;
      sm.comm_time_ms = CommunicationTime(bytes, cfg.boundary(), cfg.compression);
      sm.comm_cost_usd = CommunicationCost(bytes, cfg);
    }
    m.latency_ms += sm.duration_ms + sm.comm_time_ms;
    m.cost_usd += sm.compute_cost_usd + sm.comm_cost_usd;
    m.memory_consumption_mib_ms += sm.billed_memory_mib * sm.duration_ms;
    m.slices.push_back(sm);
  }
  return m;
}

double TotalLatency(const PartitionPlan& plan, const PlatformConfig& cfg) {
  return EvaluatePlan(plan, cfg).latency_ms;
}

double PlanCost(const PartitionPlan& plan, const PlatformConfig& cfg) {
  return EvaluatePlan(plan, cfg).cost_usd;
}

double MemoryConsumption(const PartitionPlan& plan, const PlatformConfig& cfg) {
  return EvaluatePlan(plan, cfg).memory_consumption_mib_ms;
}

double LatencyBudget(const PartitionPlan& plan) {
  double total = 0.0;
  for (const auto& s : plan.slices) {
    for (const auto& l : s.layers) total += l.exec_time_ms;
  }
  return total;
}

Feasibility CheckConstraints(const PartitionPlan& plan, const PlatformConfig& cfg) {
  Feasibility f;
  for (const auto& s : plan.slices) {
    if (s.eta > MaxParallelism(s.memory_mib, cfg)) f.eta_within_bound = false;
  }
  f.latency_ms = TotalLatency(plan, cfg);
  f.budget_ms = LatencyBudget(plan);
  f.latency_within_budget = f.latency_ms <= f.budget_ms * (1.0 + kLatencyTolerance);
  return f;
}

std::string PlanToJson(const PartitionPlan& plan, const PlatformConfig& cfg) {
  const PlanMetrics m = EvaluatePlan(plan, cfg);
  const PartitionPlan unsplit = UnsplitPlan(plan);
  const PlanMetrics base = EvaluatePlan(unsplit, cfg);
  const Feasibility feas = CheckConstraints(plan, cfg);

  ordered_json doc;
  doc["model"] = plan.model_name;
  doc["split_points"] = plan.split_points;
  ordered_json slices = ordered_json::array();
  for (std::size_t k = 0; k < plan.slices.size(); ++k) {
    const Slice& s = plan.slices[k];
    ordered_json js;
    js["id"] = s.id;
    js["members"] = s.member_groups;
    js["memory_mib"] = s.memory_mib;
    js["eta"] = s.eta;
    js["billed_memory_mib"] = m.slices[k].billed_memory_mib;
    js["boundary_out_bytes"] = s.boundary_out_bytes;
    js["duration_ms"] = m.slices[k].duration_ms;
    js["cost_usd"] = m.slices[k].compute_cost_usd + m.slices[k].comm_cost_usd;
    ordered_json layers = ordered_json::array();
    for (const auto& l : s.layers) {
      ordered_json jl;
      jl["id"] = l.id;
      jl["memory_mib"] = l.memory_mib;
      jl["exec_time_ms"] = l.exec_time_ms;
      jl["parallel_fraction"] = l.parallel_fraction;
      jl["size_exponent"] = l.size_exponent;
      jl["output_bytes"] = l.output_bytes;
      jl["gamma"] = s.eta;
      layers.push_back(jl);
    }
    js["layers"] = layers;
    slices.push_back(js);
  }
  doc["slices"] = slices;
  doc["objective_cost_usd"] = m.cost_usd;
  doc["latency_ms"] = m.latency_ms;
  doc["memory_consumption_mib_ms"] = m.memory_consumption_mib_ms;
  doc["latency_budget_ms"] = feas.budget_ms;
  doc["feasible"] = feas.ok();
  doc["baseline"] = {{"cost_usd", base.cost_usd},
                     {"latency_ms", base.latency_ms},
                     {"memory_consumption_mib_ms", base.memory_consumption_mib_ms}};
  return doc.dump(2) + "\n";
}

std::string PlanToCsv(const PartitionPlan& plan, const PlatformConfig& cfg) {
  const PlanMetrics m = EvaluatePlan(plan, cfg);
  std::ostringstream out;
  out << "slice_id,members,layers,memory_mib,billed_memory_mib,eta,duration_ms,comm_time_ms,"
         "boundary_out_bytes,cost_usd\n";
  for (std::size_t k = 0; k < plan.slices.size(); ++k) {
    const Slice& s = plan.slices[k];
    const SliceMetrics& sm = m.slices[k];
    std::string members, layers;
    for (std::size_t gi : s.member_groups) members += (members.empty() ? "" : ";") + std::to_string(gi);
    for (const auto& l : s.layers) layers += (layers.empty() ? "" : ";") + l.id;
    out << s.id << ',' << members << ',' << layers << ',' << FormatDouble(s.memory_mib) << ','
        << FormatDouble(sm.billed_memory_mib) << ',' << s.eta << ',' << FormatDouble(sm.duration_ms)
        << ',' << FormatDouble(sm.comm_time_ms) << ',' << s.boundary_out_bytes << ','
        << FormatDouble(sm.compute_cost_usd + sm.comm_cost_usd) << '\n';
  }
  return out.str();
}

PartitionPlan ParsePlan(std::string_view document) {
  PartitionPlan plan;
  try {
    const json doc = json::parse(document);
    plan.model_name = doc.value("model", std::string());
    plan.split_points = doc.at("split_points").get<std::vector<std::size_t>>();
    std::size_t k = 0;
    for (const auto& js : doc.at("slices")) {
      Slice s;
      s.id = js.value("id", k + 1);
      s.member_groups = js.at("members").get<std::vector<std::size_t>>();
      s.memory_mib = js.at("memory_mib").get<double>();
      s.eta = js.at("eta").get<int>();
      s.boundary_out_bytes = js.value("boundary_out_bytes", std::uint64_t{0});
      for (const auto& jl : js.at("layers")) {
        PlanLayer l;
        l.id = jl.at("id").get<std::string>();
        l.memory_mib = jl.at("memory_mib").get<double>();
        l.exec_time_ms = jl.at("exec_time_ms").get<double>();
        l.parallel_fraction = jl.value("parallel_fraction", kDefaultParallelFraction);
        l.size_exponent = jl.value("size_exponent", 1.0);
        l.output_bytes = jl.value("output_bytes", std::uint64_t{0});
        if (l.memory_mib < 0 || l.exec_time_ms < 0 || l.parallel_fraction < 0 ||
            l.parallel_fraction > 1) {
          throw ValidationError("plan: invalid values for layer '" + l.id + "'");
        }
        s.layers.push_back(std::move(l));
      }
      plan.slices.push_back(std::move(s));
      ++k;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed plan document: ") + e.what());
  }
  ValidatePlan(plan);
  return plan;
}

}  // namespace slicer
