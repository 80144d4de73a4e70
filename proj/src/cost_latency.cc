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

#include "slicer/cost_latency.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "slicer/errors.h"

namespace slicer {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr ChannelKind kAllChannels[] = {ChannelKind::kSharedMemory, ChannelKind::kRemoteStore,
                                        ChannelKind::kDirect};

}  // namespace

std::string_view ChannelKindName(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kSharedMemory:
      return "SharedMemory";
    case ChannelKind::kRemoteStore:
      return "RemoteStore";
    case ChannelKind::kDirect:
      return "Direct";
  }
  return "SharedMemory";
}

ChannelKind ParseChannelKind(std::string_view name) {
  for (ChannelKind k : kAllChannels) {
    if (ChannelKindName(k) == name) return k;
  }
  throw ValidationError("unknown channel kind '" + std::string(name) + "'");
}

double CompressionModel::EffectiveRatio() const { return std::min(ratio, ceiling_ratio); }

double CompressionModel::AccuracyLoss() const {
  double prev_r = 1.0, prev_loss = 0.0;
  for (const auto& [r, loss] : accuracy_loss) {
    if (ratio <= r) {
      if (r == prev_r) return loss;
      return prev_loss + (loss - prev_loss) * (ratio - prev_r) / (r - prev_r);
    }
    prev_r = r;
    prev_loss = loss;
  }
  return prev_loss;
}

const ChannelModel& PlatformConfig::channel(ChannelKind kind) const {
  auto it = channels.find(kind);
  if (it == channels.end()) {
    throw ValidationError("no channel model for '" + std::string(ChannelKindName(kind)) + "'");
  }
  return it->second;
}

void PlatformConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("invalid platform config: ") + what);
  };
  require(price_per_gb_second >= 0, "price_per_gb_second must be >= 0");
  require(network_usd_per_ms >= 0, "network_usd_per_ms must be >= 0");
  require(network_usd_per_gb >= 0, "network_usd_per_gb must be >= 0");
  require(lambda_mib_per_vcpu > 0, "lambda_mib_per_vcpu must be > 0");
  require(billing_granularity_mib >= 1, "billing_granularity_mib must be >= 1");
  require(billing_minimum_mib >= 0, "billing_minimum_mib must be >= 0");
  // Keeps billed() idempotent.
  require(std::fmod(billing_minimum_mib, billing_granularity_mib) == 0.0,
          "billing_minimum_mib must be a multiple of billing_granularity_mib");
  require(theta >= 0, "theta must be >= 0");
  for (const auto& [kind, ch] : channels) {
    require(ch.bandwidth_mib_per_ms > 0, "channel bandwidth must be > 0");
    require(ch.setup_latency_ms >= 0, "channel setup latency must be >= 0");
  }
  require(channels.count(boundary_channel) > 0, "boundary channel has no model");
  require(compression.ratio >= 1, "compression ratio must be >= 1");
  require(compression.ceiling_ratio >= 1, "ceiling_ratio must be >= 1");
  require(compression.codec_throughput_mib_per_ms > 0, "codec throughput must be > 0");
  double prev_r = 0.0, prev_loss = 0.0;
  for (const auto& [r, loss] : compression.accuracy_loss) {
    require(r > prev_r, "accuracy loss breakpoints must be strictly ascending");
    require(loss >= prev_loss, "accuracy loss must be non-decreasing in ratio");
    prev_r = r;
    prev_loss = loss;
  }
  require(aggregation.a0_ms >= 0 && aggregation.a1_ms_per_mib >= 0,
          "aggregation coefficients must be >= 0");
}

PlatformConfig DefaultPlatformConfig() {
  PlatformConfig cfg;
  cfg.channels[ChannelKind::kSharedMemory] = ChannelModel{100.0, 0.05};
  cfg.channels[ChannelKind::kRemoteStore] = ChannelModel{1.0, 1.0};
  cfg.channels[ChannelKind::kDirect] = ChannelModel{10.0, 0.5};
  cfg.compression.ratio = 8.0;
  cfg.compression.ceiling_ratio = 64.0;
  cfg.compression.codec_throughput_mib_per_ms = 1000.0;
  // Illustrative; only the 256 point is anchored to a reported measurement.
  cfg.compression.accuracy_loss = {{8.0, 0.0001}, {64.0, 0.0002}, {256.0, 0.0004}};
  return cfg;
}

PlatformConfig ParsePlatformConfig(std::string_view document) {
  PlatformConfig cfg = DefaultPlatformConfig();
  try {
    const json j = json::parse(document);
    if (!j.is_object()) throw ValidationError("platform config must be a JSON object");
    cfg.price_per_gb_second = j.value("price_per_gb_second", cfg.price_per_gb_second);
    cfg.network_usd_per_ms = j.value("network_usd_per_ms", cfg.network_usd_per_ms);
    cfg.network_usd_per_gb = j.value("network_usd_per_gb", cfg.network_usd_per_gb);
    if (j.contains("network_pricing")) {
      const auto mode = j.at("network_pricing").get<std::string>();
      if (mode == "per_ms") {
        cfg.network_pricing = NetworkPricing::kPerMs;
      } else if (mode == "per_gb") {
        cfg.network_pricing = NetworkPricing::kPerGb;
      } else {
        throw ValidationError("unknown network_pricing '" + mode + "'");
      }
    }
    cfg.lambda_mib_per_vcpu = j.value("lambda_mib_per_vcpu", cfg.lambda_mib_per_vcpu);
    cfg.billing_granularity_mib = j.value("billing_granularity_mib", cfg.billing_granularity_mib);
    cfg.billing_minimum_mib = j.value("billing_minimum_mib", cfg.billing_minimum_mib);
    if (j.contains("boundary_channel")) {
      cfg.boundary_channel = ParseChannelKind(j.at("boundary_channel").get<std::string>());
    }
    if (j.contains("channels")) {
      for (const auto& [name, jc] : j.at("channels").items()) {
        ChannelModel& ch = cfg.channels[ParseChannelKind(name)];
        ch.bandwidth_mib_per_ms = jc.value("bandwidth_mib_per_ms", ch.bandwidth_mib_per_ms);
        ch.setup_latency_ms = jc.value("setup_latency_ms", ch.setup_latency_ms);
      }
    }
    if (j.contains("compression")) {
      const auto& jc = j.at("compression");
      auto& c = cfg.compression;
      c.ratio = jc.value("ratio", c.ratio);
      c.ceiling_ratio = jc.value("ceiling_ratio", c.ceiling_ratio);
      c.codec_throughput_mib_per_ms =
          jc.value("codec_throughput_mib_per_ms", c.codec_throughput_mib_per_ms);
      if (jc.contains("accuracy_loss")) {
        c.accuracy_loss = jc.at("accuracy_loss").get<std::vector<std::pair<double, double>>>();
      }
    }
    if (j.contains("aggregation")) {
      const auto& ja = j.at("aggregation");
      cfg.aggregation.a0_ms = ja.value("a0_ms", cfg.aggregation.a0_ms);
      cfg.aggregation.a1_ms_per_mib = ja.value("a1_ms_per_mib", cfg.aggregation.a1_ms_per_mib);
    }
    cfg.theta = j.value("theta", cfg.theta);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed platform config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string PlatformConfigToJson(const PlatformConfig& cfg) {
  ordered_json j;
  j["price_per_gb_second"] = cfg.price_per_gb_second;
  j["network_pricing"] = cfg.network_pricing == NetworkPricing::kPerMs ? "per_ms" : "per_gb";
  j["network_usd_per_ms"] = cfg.network_usd_per_ms;
  j["network_usd_per_gb"] = cfg.network_usd_per_gb;
  j["lambda_mib_per_vcpu"] = cfg.lambda_mib_per_vcpu;
  j["billing_granularity_mib"] = cfg.billing_granularity_mib;
  j["billing_minimum_mib"] = cfg.billing_minimum_mib;
  j["boundary_channel"] = std::string(ChannelKindName(cfg.boundary_channel));
  ordered_json channels;
  for (const auto& [kind, ch] : cfg.channels) {
    channels[std::string(ChannelKindName(kind))] = {
        {"bandwidth_mib_per_ms", ch.bandwidth_mib_per_ms}, {"setup_latency_ms", ch.setup_latency_ms}};
  }
  j["channels"] = channels;
  ordered_json comp;
  comp["ratio"] = cfg.compression.ratio;
  comp["ceiling_ratio"] = cfg.compression.ceiling_ratio;
  comp["codec_throughput_mib_per_ms"] = cfg.compression.codec_throughput_mib_per_ms;
  comp["accuracy_loss"] = cfg.compression.accuracy_loss;
  j["compression"] = comp;
  j["aggregation"] = {{"a0_ms", cfg.aggregation.a0_ms},
                      {"a1_ms_per_mib", cfg.aggregation.a1_ms_per_mib}};
  j["theta"] = cfg.theta;
  return j.dump(2) + "\n";
}

double BilledMemory(double memory_mib, const PlatformConfig& cfg) {
  const double g = cfg.billing_granularity_mib;
  return std::max(cfg.billing_minimum_mib, std::ceil(memory_mib / g) * g);
}

int MaxParallelism(double slice_memory_mib, const PlatformConfig& cfg) {
  const double bound = std::floor(slice_memory_mib / cfg.lambda_mib_per_vcpu);
  return bound < 1.0 ? 1 : static_cast<int>(bound);
}

double ParallelTime(double exec_time_ms, double parallel_fraction, int gamma) {
  if (gamma < 1) throw ValidationError("parallelism must be >= 1");
  if (gamma == 1) return exec_time_ms;
  return exec_time_ms * ((1.0 - parallel_fraction) + parallel_fraction / gamma);
}

double AggregationTime(double output_mib, int gamma, const AggregationModel& model) {
  if (gamma < 1) throw ValidationError("parallelism must be >= 1");
  if (gamma == 1) return 0.0;
  return model.a0_ms + model.a1_ms_per_mib * (gamma - 1) * output_mib;
}

double AggregationTime(std::uint64_t output_bytes, int gamma, const PlatformConfig& cfg) {
  return AggregationTime(static_cast<double>(output_bytes) / kBytesPerMiB, gamma, cfg.aggregation);
}

double CommunicationTime(double tensor_bytes, const ChannelModel& channel,
                         const CompressionModel& compression) {
  const double mib = tensor_bytes / kBytesPerMiB;
  const double wire_mib = mib / compression.EffectiveRatio();
  double t = channel.setup_latency_ms + wire_mib / channel.bandwidth_mib_per_ms;
  if (compression.ratio > 1.0) t += 2.0 * mib / compression.codec_throughput_mib_per_ms;
  return t;
}

double CommunicationCost(double tensor_bytes, const PlatformConfig& cfg) {
  if (cfg.network_pricing == NetworkPricing::kPerGb) {
    const double wire_gb = tensor_bytes / cfg.compression.EffectiveRatio() / (kBytesPerMiB * 1024.0);
    return cfg.network_usd_per_gb * wire_gb;
  }
  return cfg.network_usd_per_ms * CommunicationTime(tensor_bytes, cfg.boundary(), cfg.compression);
}

}  // namespace slicer
