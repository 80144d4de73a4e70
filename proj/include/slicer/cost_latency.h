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

#ifndef SLICER_COST_LATENCY_H_
#define SLICER_COST_LATENCY_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slicer {

inline constexpr double kBytesPerMiB = 1024.0 * 1024.0;
inline constexpr double kLambdaPricePerGbSecond = 1.667e-5;

enum class ChannelKind { kSharedMemory, kRemoteStore, kDirect };

std::string_view ChannelKindName(ChannelKind kind);
ChannelKind ParseChannelKind(std::string_view name);

struct ChannelModel {
  double bandwidth_mib_per_ms = 1.0;
  double setup_latency_ms = 0.0;
};

// Boundary-tensor compression. Ratios above the ceiling buy nothing.
struct CompressionModel {
  double ratio = 1.0;
  double ceiling_ratio = 64.0;
  double codec_throughput_mib_per_ms = 1000.0;  // each of encode and decode
  // (ratio, loss fraction) breakpoints, ascending, non-decreasing loss.
  std::vector<std::pair<double, double>> accuracy_loss;

  double EffectiveRatio() const;
  // Piecewise-linear in ratio from (1, 0); held flat past the last point.
  double AccuracyLoss() const;
};

// t_a = a0 + a1 * (gamma - 1) * output MiB, and 0 when gamma = 1.
struct AggregationModel {
  double a0_ms = 0.5;
  double a1_ms_per_mib = 0.002;
};

enum class NetworkPricing { kPerMs, kPerGb };

struct PlatformConfig {
  // Memory-time price; c_m() converts it to dollars per MiB-ms.
  double price_per_gb_second = kLambdaPricePerGbSecond;
  // c_n: dollars per ms of boundary communication time.
  double network_usd_per_ms = kLambdaPricePerGbSecond / 1024.0 / 1000.0 * 128.0;
  NetworkPricing network_pricing = NetworkPricing::kPerMs;
  double network_usd_per_gb = 0.09;
  double lambda_mib_per_vcpu = 1769.0;
  double billing_granularity_mib = 128.0;
  double billing_minimum_mib = 128.0;
  ChannelKind boundary_channel = ChannelKind::kSharedMemory;
  std::map<ChannelKind, ChannelModel> channels;
  CompressionModel compression;
  AggregationModel aggregation;
  double theta = 0.05;

  double c_m() const { return price_per_gb_second / 1024.0 / 1000.0; }
  const ChannelModel& channel(ChannelKind kind) const;
  const ChannelModel& boundary() const { return channel(boundary_channel); }

  // Throws ValidationError on any violated invariant.
  void Validate() const;
};

PlatformConfig DefaultPlatformConfig();
PlatformConfig ParsePlatformConfig(std::string_view document);
std::string PlatformConfigToJson(const PlatformConfig& cfg);

// Allocated memory: max(minimum, ceil(M / granularity) * granularity).
double BilledMemory(double memory_mib, const PlatformConfig& cfg);

// Largest admissible parallelism: max(1, floor(M_g / lambda)).
int MaxParallelism(double slice_memory_mib, const PlatformConfig& cfg);

// Amdahl: t * ((1 - f) + f / gamma); exactly t when gamma = 1.
double ParallelTime(double exec_time_ms, double parallel_fraction, int gamma);

double AggregationTime(std::uint64_t output_bytes, int gamma, const PlatformConfig& cfg);
double AggregationTime(double output_mib, int gamma, const AggregationModel& model);

// setup + wire / bandwidth, plus encode and decode when compressing.
double CommunicationTime(double tensor_bytes, const ChannelModel& channel,
                         const CompressionModel& compression);

// Price of one boundary transfer under the configured network pricing.
double CommunicationCost(double tensor_bytes, const PlatformConfig& cfg);

}  // namespace slicer

#endif  // SLICER_COST_LATENCY_H_
