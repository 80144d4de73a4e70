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

#include <algorithm>
#include <cmath>
#include <limits>

#include "slicer/errors.h"

namespace slicer {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-12;

// a is strictly better than b beyond floating-point noise.
bool Below(double a, double b) {
  if (b == kInf) return a < kInf;
  return a < b - kTieTolerance * std::max(std::abs(a), std::abs(b));
}

bool Tied(double a, double b) { return !Below(a, b) && !Below(b, a); }

double SpanDuration(std::span<const PlanLayer> layers, int eta, const PlatformConfig& cfg) {
  double d = 0.0;
  for (const auto& l : layers) {
    d += ParallelTime(l.exec_time_ms, l.parallel_fraction, eta) +
         AggregationTime(l.output_bytes, eta, cfg);
  }
  return d;
}

std::vector<PlanLayer> LayersOf(const SimplifiedGraph& g, std::size_t first, std::size_t last) {
  std::vector<PlanLayer> out;
  for (std::size_t gi = first; gi <= last; ++gi) {
    for (const auto& id : g.groups()[gi].members) {
      const LayerNode& l = g.origin().layer(id);
      out.push_back(PlanLayer{l.id, l.memory_mib.value_or(0.0), l.exec_time_ms.value_or(0.0),
                              l.parallel_fraction, l.size_exponent, l.output_bytes});
    }
  }
  return out;
}

std::vector<std::size_t> Backtrack(const std::vector<std::size_t>& back, std::size_t n) {
  std::vector<std::size_t> splits;
  for (std::size_t j = n; j > 0;) {
    const std::size_t i = back[j];
    if (i > 1) splits.push_back(i - 1);
    j = i - 1;
  }
  std::reverse(splits.begin(), splits.end());
  return splits;
}

}  // namespace

CostTables ComputeCostTables(const SimplifiedGraph& g, const PlatformConfig& cfg,
                             CostTableOptions options) {
  const std::size_t n = g.size();
  CostTables t;
  t.n = n;
  const auto N = static_cast<Eigen::Index>(n);
  t.cost_cal = Eigen::MatrixXd::Constant(N, N, kInf);
  t.duration_ms = Eigen::MatrixXd::Constant(N, N, kInf);
  t.eta = Eigen::MatrixXi::Zero(N, N);
  t.cost_com = Eigen::VectorXd::Zero(n > 0 ? N - 1 : 0);
  t.t_c = Eigen::VectorXd::Zero(n > 0 ? N - 1 : 0);

  std::vector<std::vector<PlanLayer>> group_layers(n);
  double max_memory = 0.0;
  for (std::size_t gi = 0; gi < n; ++gi) {
    group_layers[gi] = LayersOf(g, gi, gi);
    max_memory = std::max(max_memory, g.groups()[gi].memory_mib);
    for (const auto& l : group_layers[gi]) t.latency_budget_ms += l.exec_time_ms;
  }
  const int c_global = options.serial_only ? 1 : MaxParallelism(max_memory, cfg);
  const double c_m = cfg.c_m();

  for (std::size_t i = 0; i < n; ++i) {
    // duration[e - 1] accumulates layers of groups i..j at eta = e.
    std::vector<double> duration(static_cast<std::size_t>(c_global), 0.0);
    double memory = 0.0;
    for (std::size_t j = i; j < n; ++j) {
      memory = std::max(memory, g.groups()[j].memory_mib);
      for (const auto& l : group_layers[j]) {
        for (int e = 1; e <= c_global; ++e) {
          duration[static_cast<std::size_t>(e - 1)] +=
              ParallelTime(l.exec_time_ms, l.parallel_fraction, e) +
              AggregationTime(l.output_bytes, e, cfg);
        }
      }
      const int c = options.serial_only ? 1 : MaxParallelism(memory, cfg);
      int best = 1;
      for (int e = 2; e <= c; ++e) {
        if (duration[static_cast<std::size_t>(e - 1)] < duration[static_cast<std::size_t>(best - 1)]) {
          best = e;
        }
      }
      const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
      t.eta(I, J) = best;
      t.duration_ms(I, J) = duration[static_cast<std::size_t>(best - 1)];
      t.cost_cal(I, J) = BilledMemory(memory, cfg) * t.duration_ms(I, J) * c_m;
    }
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double bytes = static_cast<double>(g.CutBytes(j));
    t.t_c(static_cast<Eigen::Index>(j)) = CommunicationTime(bytes, cfg.boundary(), cfg.compression);
    t.cost_com(static_cast<Eigen::Index>(j)) = CommunicationCost(bytes, cfg);
  }
  return t;
}

DpSolution SolveDp(const CostTables& t) {
  const std::size_t n = t.n;
  DpSolution s;
  s.dp = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n + 1), kInf);
  s.dp(0) = 0.0;
  s.back.assign(n + 1, 0);
  s.slice_count.assign(n + 1, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    const double com = j < n ? t.cost_com(static_cast<Eigen::Index>(j - 1)) : 0.0;
    for (std::size_t i = 1; i <= j; ++i) {
      const double split_cost =
          t.cost_cal(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) + com;
      const double candidate = s.dp(static_cast<Eigen::Index>(i - 1)) + split_cost;
      const std::size_t count = s.slice_count[i - 1] + 1;
      const double current = s.dp(static_cast<Eigen::Index>(j));
      if (Below(candidate, current) || (Tied(candidate, current) && count < s.slice_count[j])) {
        s.dp(static_cast<Eigen::Index>(j)) = candidate;
        s.back[j] = i;
        s.slice_count[j] = count;
      }
    }
  }
  s.split_points = Backtrack(s.back, n);
  s.objective = s.dp(static_cast<Eigen::Index>(n));
  return s;
}

std::vector<std::size_t> DpPartition(const CostTables& tables, std::size_t n) {
  if (n != tables.n) throw ValidationError("dp_partition: tables do not cover n groups");
  return SolveDp(tables).split_points;
}

DpSolution SolveDpWithLatencyBudget(const CostTables& t) {
  struct Label {
    double cost;
    double latency;
    std::size_t slices;
    std::size_t from_pos;
    std::size_t from_label;
  };
  const std::size_t n = t.n;
  const double budget = t.latency_budget_ms * (1.0 + kLatencyTolerance);
  std::vector<std::vector<Label>> labels(n + 1);
  labels[0].push_back(Label{0.0, 0.0, 0, 0, 0});

  for (std::size_t j = 1; j <= n; ++j) {
    const bool last = j == n;
    const double com = last ? 0.0 : t.cost_com(static_cast<Eigen::Index>(j - 1));
    const double tc = last ? 0.0 : t.t_c(static_cast<Eigen::Index>(j - 1));
    std::vector<Label> cand;
    for (std::size_t i = 1; i <= j; ++i) {
      const auto I = static_cast<Eigen::Index>(i - 1), J = static_cast<Eigen::Index>(j - 1);
      for (std::size_t k = 0; k < labels[i - 1].size(); ++k) {
        const Label& prev = labels[i - 1][k];
        Label next{prev.cost + t.cost_cal(I, J) + com, prev.latency + t.duration_ms(I, J) + tc,
                   prev.slices + 1, i - 1, k};
        // Every term is non-negative, so an over-budget prefix never recovers.
        if (next.latency > budget) continue;
        cand.push_back(next);
      }
    }
    std::stable_sort(cand.begin(), cand.end(), [](const Label& a, const Label& b) {
      if (a.cost != b.cost) return a.cost < b.cost;
      if (a.latency != b.latency) return a.latency < b.latency;
      return a.slices < b.slices;
    });
    for (const Label& c : cand) {
      const bool dominated = std::any_of(labels[j].begin(), labels[j].end(), [&](const Label& k) {
        return k.latency <= c.latency && k.slices <= c.slices;
      });
      if (!dominated) labels[j].push_back(c);
    }
  }

  DpSolution s;
  s.dp = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n + 1), kInf);
  s.back.assign(n + 1, 0);
  s.slice_count.assign(n + 1, 0);
  if (labels[n].empty()) {
    s.objective = kInf;
    return s;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < labels[n].size(); ++k) {
    const Label& c = labels[n][k];
    const Label& b = labels[n][best];
    if (Below(c.cost, b.cost) || (Tied(c.cost, b.cost) && c.slices < b.slices)) best = k;
  }
  s.objective = labels[n][best].cost;
  std::size_t pos = n, idx = best;
  while (pos > 0) {
    const Label& l = labels[pos][idx];
    s.dp(static_cast<Eigen::Index>(pos)) = l.cost;
    s.back[pos] = l.from_pos + 1;
    s.slice_count[pos] = l.slices;
    pos = l.from_pos;
    idx = l.from_label;
  }
  s.dp(0) = 0.0;
  s.split_points = Backtrack(s.back, n);
  return s;
}

int SearchParallelism(std::span<const PlanLayer> layers, double slice_memory_mib,
                      const PlatformConfig& cfg) {
  const int c = MaxParallelism(slice_memory_mib, cfg);
  int best = 1;
  double best_latency = SpanDuration(layers, 1, cfg);
  for (int eta = 2; eta <= c; ++eta) {
    const double latency = SpanDuration(layers, eta, cfg);
    if (latency < best_latency) {
      best = eta;
      best_latency = latency;
    }
  }
  return best;
}

int SearchParallelism(const Slice& slice, const PlatformConfig& cfg) {
  return SearchParallelism(slice.layers, slice.memory_mib, cfg);
}

PartitionPlan HypadOnSimplified(const SimplifiedGraph& g, const PlatformConfig& cfg) {
  const CostTables tables = ComputeCostTables(g, cfg);
  const DpSolution vertical = SolveDp(tables);

  auto expand = [&](const std::vector<std::size_t>& splits) {
    PartitionPlan plan = BuildPlan(g, splits, std::vector<int>(splits.size() + 1, 1));
    for (auto& slice : plan.slices) slice.eta = SearchParallelism(slice, cfg);
    return plan;
  };

  PartitionPlan plan = expand(vertical.split_points);
  if (CheckConstraints(plan, cfg).ok()) return plan;

  const DpSolution constrained = SolveDpWithLatencyBudget(tables);
  if (constrained.objective < kInf) {
    plan = expand(constrained.split_points);
    if (CheckConstraints(plan, cfg).ok()) return plan;
  }
  return expand({});
}

PartitionPlan Hypad(const ModelGraph& g, const ServiceProfile& profile, const PlatformConfig& cfg) {
  cfg.Validate();
  const ModelGraph profiled = ApplyServiceProfile(g, profile);
  return HypadOnSimplified(Simplify(profiled, cfg.theta), cfg);
}

PartitionPlan BruteForcePartition(const SimplifiedGraph& g, const PlatformConfig& cfg,
                                  BruteForceOptions options) {
  const std::size_t n = g.size();
  if (n == 0) throw ValidationError("brute_force_partition: empty graph");
  if (n > options.max_groups) {
    throw ValidationError("brute_force_partition: " + std::to_string(n) + " groups exceeds limit " +
                          std::to_string(options.max_groups));
  }
  std::vector<std::vector<PlanLayer>> group_layers(n);
  double budget = 0.0;
  for (std::size_t gi = 0; gi < n; ++gi) {
    group_layers[gi] = LayersOf(g, gi, gi);
    for (const auto& l : group_layers[gi]) budget += l.exec_time_ms;
  }
  std::vector<double> cut_time(n, 0.0), cut_cost(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double bytes = static_cast<double>(g.CutBytes(j));
    cut_time[j] = CommunicationTime(bytes, cfg.boundary(), cfg.compression);
    cut_cost[j] = CommunicationCost(bytes, cfg);
  }
  const double c_m = cfg.c_m();

  double best_cost = kInf;
  std::vector<std::size_t> best_splits;
  std::vector<int> best_etas;

  const std::uint64_t patterns = std::uint64_t{1} << (n - 1);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    std::vector<std::size_t> splits;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      if (mask & (std::uint64_t{1} << j)) splits.push_back(j + 1);
    }
    const std::size_t k = splits.size() + 1;
    // Per slice and eta: compute cost and duration, evaluated from scratch.
    std::vector<std::vector<double>> cost(k), duration(k);
    std::vector<double> comm_time(k, 0.0), comm_cost(k, 0.0);
    std::size_t begin = 0;
    for (std::size_t s = 0; s < k; ++s) {
      const std::size_t end = s + 1 < k ? splits[s] : n;
      std::vector<PlanLayer> layers;
      double memory = 0.0;
      for (std::size_t gi = begin; gi < end; ++gi) {
        layers.insert(layers.end(), group_layers[gi].begin(), group_layers[gi].end());
        memory = std::max(memory, g.groups()[gi].memory_mib);
      }
      const int c = options.serial_only ? 1 : MaxParallelism(memory, cfg);
      const double billed = BilledMemory(memory, cfg);
      for (int eta = 1; eta <= c; ++eta) {
        const double d = SpanDuration(layers, eta, cfg);
        duration[s].push_back(d);
        cost[s].push_back(billed * d * c_m);
      }
      if (s + 1 < k) {
        comm_time[s] = cut_time[end - 1];
        comm_cost[s] = cut_cost[end - 1];
      }
      begin = end;
    }

    std::vector<int> etas(k, 1);
    while (true) {
      double total_cost = 0.0, latency = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        const auto e = static_cast<std::size_t>(etas[s] - 1);
        total_cost += cost[s][e] + comm_cost[s];
        latency += duration[s][e] + comm_time[s];
      }
      const bool feasible =
          !options.enforce_latency_budget || latency <= budget * (1.0 + kLatencyTolerance);
      if (feasible) {
        bool better = Below(total_cost, best_cost);
        if (!better && Tied(total_cost, best_cost)) {
          better = k < best_etas.size() || (k == best_etas.size() && etas < best_etas);
        }
        if (better) {
          best_cost = total_cost;
          best_splits = splits;
          best_etas = etas;
        }
      }
      std::size_t s = 0;
      while (s < k && etas[s] == static_cast<int>(cost[s].size())) etas[s++] = 1;
      if (s == k) break;
      ++etas[s];
    }
  }
  if (best_etas.empty()) throw InfeasibleError("brute_force_partition: no feasible plan");
  return BuildPlan(g, best_splits, best_etas);
}

}  // namespace slicer
