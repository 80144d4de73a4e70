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

#include "slicer/simulator.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "slicer/errors.h"
#include "slicer/json_io.h"

namespace slicer {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kSecondsPerDay = 24.0 * 3600.0;

// Top 53 bits; std::uniform_real_distribution is not portable across
// standard libraries.
double Uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

SimReport SimulateUnchecked(const PartitionPlan& plan, const PlatformConfig& cfg,
                            const std::vector<Request>& requests, double reference_input_bytes) {
  if (requests.empty()) throw ValidationError("simulate: workload produced no requests");
  if (!(reference_input_bytes > 0)) throw ValidationError("simulate: reference input size must be > 0");
  const std::size_t k = plan.slices.size();
  SimReport r;
  r.request_count = requests.size();
  r.slices.resize(k);
  std::vector<double> latencies;
  latencies.reserve(requests.size());
  double utilization_sum = 0.0;
  double latency_sum = 0.0;
  double mc_sum = 0.0;
  for (const Request& req : requests) {
    const PlanMetrics m = EvaluatePlan(plan, cfg, req.input_bytes / reference_input_bytes);
    latencies.push_back(m.latency_ms);
    latency_sum += m.latency_ms;
    r.total_cost_usd += m.cost_usd;
    mc_sum += m.memory_consumption_mib_ms;
    for (std::size_t s = 0; s < k; ++s) {
      const SliceMetrics& sm = m.slices[s];
      SliceReport& out = r.slices[s];
      out.mean_duration_ms += sm.duration_ms;
      out.mean_comm_ms += sm.comm_time_ms;
      out.total_cost_usd += sm.compute_cost_usd + sm.comm_cost_usd;
      utilization_sum += plan.slices[s].memory_mib / sm.billed_memory_mib;
    }
  }
  const double n = static_cast<double>(requests.size());
  for (std::size_t s = 0; s < k; ++s) {
    SliceReport& out = r.slices[s];
    out.id = plan.slices[s].id;
    out.eta = plan.slices[s].eta;
    out.memory_mib = plan.slices[s].memory_mib;
    out.billed_memory_mib = BilledMemory(out.memory_mib, cfg);
    out.utilization = out.memory_mib / out.billed_memory_mib;
    out.mean_duration_ms /= n;
    out.mean_comm_ms /= n;
  }
  std::sort(latencies.begin(), latencies.end());
  r.p50_ms = NearestRank(latencies, 50.0);
  r.p95_ms = NearestRank(latencies, 95.0);
  r.p99_ms = NearestRank(latencies, 99.0);
  r.mean_latency_ms = latency_sum / n;
  r.mean_utilization = utilization_sum / (n * static_cast<double>(k));
  r.cost_per_request_usd = r.total_cost_usd / n;
  r.mean_memory_consumption_mib_ms = mc_sum / n;
  return r;
}

ordered_json ReportJson(const SimReport& r) {
  ordered_json j;
  j["request_count"] = r.request_count;
  j["p50_ms"] = r.p50_ms;
  j["p95_ms"] = r.p95_ms;
  j["p99_ms"] = r.p99_ms;
  j["mean_latency_ms"] = r.mean_latency_ms;
  j["mean_utilization"] = r.mean_utilization;
  j["cost_per_request_usd"] = r.cost_per_request_usd;
  j["total_cost_usd"] = r.total_cost_usd;
  j["mean_memory_consumption_mib_ms"] = r.mean_memory_consumption_mib_ms;
  ordered_json slices = ordered_json::array();
  for (const auto& s : r.slices) {
    slices.push_back(ordered_json{{"id", s.id},
                                  {"eta", s.eta},
                                  {"memory_mib", s.memory_mib},
                                  {"billed_memory_mib", s.billed_memory_mib},
                                  {"utilization", s.utilization},
                                  {"mean_duration_ms", s.mean_duration_ms},
                                  {"mean_comm_ms", s.mean_comm_ms},
                                  {"total_cost_usd", s.total_cost_usd}});
  }
  j["slices"] = slices;
  return j;
}

constexpr const char* kReportCsvColumns =
    "request_count,p50_ms,p95_ms,p99_ms,mean_latency_ms,mean_utilization,cost_per_request_usd,"
    "total_cost_usd,mean_memory_consumption_mib_ms";

std::string ReportCsvFields(const SimReport& r) {
  std::ostringstream out;
  out << r.request_count << ',' << FormatDouble(r.p50_ms) << ',' << FormatDouble(r.p95_ms) << ','
      << FormatDouble(r.p99_ms) << ',' << FormatDouble(r.mean_latency_ms) << ','
      << FormatDouble(r.mean_utilization) << ',' << FormatDouble(r.cost_per_request_usd) << ','
      << FormatDouble(r.total_cost_usd) << ',' << FormatDouble(r.mean_memory_consumption_mib_ms);
  return out.str();
}

}  // namespace

void Workload::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("invalid workload: ") + what);
  };
  require(duration_hours > 0, "duration_hours must be > 0");
  require(start_hour >= 0, "start_hour must be >= 0");
  require(min_rps >= 0, "min_rps must be >= 0");
  require(min_rps <= max_rps, "min_rps must be <= max_rps");
  require(max_rps > 0, "max_rps must be > 0");
  require(min_bytes > 0, "min_bytes must be > 0");
  require(min_bytes <= max_bytes, "min_bytes must be <= max_bytes");
  require(reference_input_bytes > 0, "reference_input_bytes must be > 0");
}

Workload ParseWorkload(std::string_view document) {
  Workload w;
  try {
    const json j = json::parse(document);
    if (!j.is_object()) throw ValidationError("workload must be a JSON object");
    w.duration_hours = j.value("duration_hours", w.duration_hours);
    w.start_hour = j.value("start_hour", w.start_hour);
    w.min_rps = j.value("min_rps", w.min_rps);
    w.max_rps = j.value("max_rps", w.max_rps);
    w.min_bytes = j.value("min_bytes", w.min_bytes);
    w.max_bytes = j.value("max_bytes", w.max_bytes);
    w.reference_input_bytes = j.value("reference_input_bytes", w.reference_input_bytes);
    w.seed = j.value("seed", w.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed workload: ") + e.what());
  }
  w.Validate();
  return w;
}

std::string WorkloadToJson(const Workload& w) {
  ordered_json j;
  j["duration_hours"] = w.duration_hours;
  j["start_hour"] = w.start_hour;
  j["min_rps"] = w.min_rps;
  j["max_rps"] = w.max_rps;
  j["min_bytes"] = w.min_bytes;
  j["max_bytes"] = w.max_bytes;
  j["reference_input_bytes"] = w.reference_input_bytes;
  j["seed"] = w.seed;
  return j.dump(2) + "\n";
}

double ArrivalRate(const Workload& w, double t_seconds) {
  const double t = w.start_hour * 3600.0 + t_seconds;
  const double phase = 2.0 * std::numbers::pi * t / kSecondsPerDay - std::numbers::pi / 2.0;
  return w.min_rps + (w.max_rps - w.min_rps) * (1.0 + std::sin(phase)) / 2.0;
}

std::vector<Request> GenerateWorkload(const Workload& w) {
  w.Validate();
  std::mt19937_64 rng(w.seed);
  const double horizon = w.duration_hours * 3600.0;
  const double log_min = std::log(w.min_bytes), log_max = std::log(w.max_bytes);
  std::vector<Request> out;
  double t = 0.0;
  while (true) {
    t += -std::log1p(-Uniform01(rng)) / w.max_rps;
    if (t >= horizon) break;
    const double accept = Uniform01(rng);
    const double u = Uniform01(rng);
    if (accept * w.max_rps >= ArrivalRate(w, t)) continue;
    const double bytes = w.min_bytes == w.max_bytes
                             ? w.min_bytes
                             : std::clamp(std::exp(log_min + u * (log_max - log_min)), w.min_bytes,
                                          w.max_bytes);
    out.push_back(Request{t, bytes});
  }
  return out;
}

double NearestRank(const std::vector<double>& sorted, double percentile) {
  if (sorted.empty()) throw ValidationError("percentile of an empty sample");
  const double rank = std::ceil(percentile / 100.0 * static_cast<double>(sorted.size()));
  const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

SimReport Simulate(const PartitionPlan& plan, const PlatformConfig& cfg,
                   const std::vector<Request>& requests, double reference_input_bytes) {
  const Feasibility f = CheckConstraints(plan, cfg);
  if (!f.ok()) {
    throw InfeasibleError("simulate: plan is infeasible (latency " + FormatDouble(f.latency_ms) +
                          " ms, budget " + FormatDouble(f.budget_ms) + " ms)");
  }
  return SimulateUnchecked(plan, cfg, requests, reference_input_bytes);
}

SimReport Simulate(const PartitionPlan& plan, const PlatformConfig& cfg, const Workload& w) {
  return Simulate(plan, cfg, GenerateWorkload(w), w.reference_input_bytes);
}

std::vector<AblationRow> Ablate(const PartitionPlan& plan, const PlatformConfig& cfg,
                                const Workload& w, AblationSwitches switches) {
  const std::vector<Request> requests = GenerateWorkload(w);
  auto run = [&](std::string name, const PartitionPlan& p, const PlatformConfig& c) {
    AblationRow row;
    row.configuration = std::move(name);
    row.feasible = CheckConstraints(p, c).ok();
    row.report = SimulateUnchecked(p, c, requests, w.reference_input_bytes);
    return row;
  };
  std::vector<AblationRow> rows;
  rows.push_back(run("full", plan, cfg));
  if (switches.mpe_off) rows.push_back(run("mpe_off", UnsplitPlan(plan), cfg));
  if (switches.shm_off) {
    PlatformConfig c = cfg;
    const ChannelModel remote = cfg.channel(ChannelKind::kRemoteStore);
    for (auto& [kind, ch] : c.channels) ch = remote;
    rows.push_back(run("shm_off", plan, c));
  }
  if (switches.ae_off) {
    PlatformConfig c = cfg;
    c.compression.ratio = 1.0;
    rows.push_back(run("ae_off", plan, c));
  }
  const SimReport& base = rows.front().report;
  for (auto& row : rows) {
    row.delta_p95_ms = row.report.p95_ms - base.p95_ms;
    row.delta_cost_per_request_usd = row.report.cost_per_request_usd - base.cost_per_request_usd;
    row.delta_memory_consumption_mib_ms =
        row.report.mean_memory_consumption_mib_ms - base.mean_memory_consumption_mib_ms;
  }
  return rows;
}

std::string SimReportToJson(const SimReport& r) { return ReportJson(r).dump(2) + "\n"; }

std::string SimReportToCsv(const SimReport& r) {
  return std::string(kReportCsvColumns) + "\n" + ReportCsvFields(r) + "\n";
}

std::string AblationToJson(const std::vector<AblationRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json j;
    j["configuration"] = row.configuration;
    j["feasible"] = row.feasible;
    j["delta_p95_ms"] = row.delta_p95_ms;
    j["delta_cost_per_request_usd"] = row.delta_cost_per_request_usd;
    j["delta_memory_consumption_mib_ms"] = row.delta_memory_consumption_mib_ms;
    j["report"] = ReportJson(row.report);
    arr.push_back(j);
  }
  return ordered_json{{"ablation", arr}}.dump(2) + "\n";
}

std::string AblationToCsv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "configuration,feasible," << kReportCsvColumns
      << ",delta_p95_ms,delta_cost_per_request_usd,delta_memory_consumption_mib_ms\n";
  for (const auto& row : rows) {
    out << row.configuration << ',' << (row.feasible ? "true" : "false") << ','
        << ReportCsvFields(row.report) << ',' << FormatDouble(row.delta_p95_ms) << ','
        << FormatDouble(row.delta_cost_per_request_usd) << ','
        << FormatDouble(row.delta_memory_consumption_mib_ms) << '\n';
  }
  return out.str();
}

}  // namespace slicer
