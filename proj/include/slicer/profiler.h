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

#ifndef SLICER_PROFILER_H_
#define SLICER_PROFILER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "slicer/model_graph.h"

namespace slicer {

// One observed operator invocation: <model, s, p> -> <m, t>.
struct ProfileSample {
  std::string model_id;
  std::string op_type;
  std::int64_t input_size = 1;
  std::int64_t param_count = 0;
  double memory_mib = 0.0;
  double exec_time_ms = 0.0;
};

struct Footprint {
  double memory_mib = 0.0;
  double exec_time_ms = 0.0;
};

enum class PredictorKind { kTableLookup, kLinearLeastSquares };

std::string_view PredictorKindName(PredictorKind kind);
PredictorKind ParsePredictorKind(std::string_view name);

// Per-op_type regressor from (input_size, param_count) to (memory, time).
// Immutable after FitPredictor; predictions are clamped at zero.
class Predictor {
 public:
  PredictorKind kind() const { return kind_; }
  bool knows(std::string_view op_type) const;
  std::vector<std::string> op_types() const;

  Footprint Predict(std::string_view op_type, std::int64_t input_size,
                    std::int64_t param_count) const;

  // op_types whose samples were all identical in (s, p); those predict the
  // sample mean instead of a regression.
  const std::vector<std::string>& degenerate_op_types() const { return degenerate_; }

 private:
  friend Predictor FitPredictor(std::span<const ProfileSample>, PredictorKind);

  struct Table {
    // Sorted by (param_count, input_size).
    std::vector<ProfileSample> samples;
  };
  struct Linear {
    // memory and time coefficients over [s, p, 1].
    Eigen::Vector3d memory = Eigen::Vector3d::Zero();
    Eigen::Vector3d time = Eigen::Vector3d::Zero();
  };

  PredictorKind kind_ = PredictorKind::kTableLookup;
  std::map<std::string, Table, std::less<>> tables_;
  std::map<std::string, Linear, std::less<>> linear_;
  std::vector<std::string> degenerate_;
};

Predictor FitPredictor(std::span<const ProfileSample> samples, PredictorKind kind);

// sqrt(mean((ln(1+p) - ln(1+a))^2)).
double Rmsle(std::span<const double> predicted, std::span<const double> actual);

// Smallest prefix of the layer's operators, by descending memory (ties by id),
// covering at least `coverage` of the layer's total operator memory.
std::vector<OperatorNode> SelectDominant(const LayerNode& layer, double coverage = 0.8);

Footprint AggregateChain(std::span<const OperatorNode> ops);
Footprint AggregateParallel(const std::vector<std::vector<OperatorNode>>& branches);
Footprint AggregateHybrid(std::span<const OperatorNode> chain_ops,
                          const std::vector<std::vector<OperatorNode>>& branches);

// Topology-appropriate aggregation of one layer's operators.
Footprint AggregateLayer(const LayerNode& layer);

// The M and T vectors, indexed in topological order.
struct ServiceProfile {
  std::vector<std::string> layer_ids;
  Eigen::VectorXd memory_mib;
  Eigen::VectorXd exec_time_ms;

  Eigen::Index size() const { return memory_mib.size(); }
};

// Aggregates every layer. Layers whose operators are all profiled use the
// aggregate; otherwise verbatim layer values are accepted; otherwise throws.
ServiceProfile ComputeServiceProfile(const ModelGraph& g);

// Returns a copy of g with each layer's memory/exec time set from profile.
ModelGraph ApplyServiceProfile(const ModelGraph& g, const ServiceProfile& profile);

// Returns a copy of g with every operator's memory/time predicted.
ModelGraph PredictOperators(const ModelGraph& g, const Predictor& predictor);

std::vector<ProfileSample> ParseSamples(std::string_view document);
std::string ServiceProfileToCsv(const ServiceProfile& profile);
std::string ServiceProfileToJson(const ServiceProfile& profile);
ServiceProfile ParseServiceProfile(std::string_view document);

}  // namespace slicer

#endif  // SLICER_PROFILER_H_
