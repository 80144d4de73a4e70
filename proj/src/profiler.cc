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

#include "slicer/profiler.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <Eigen/Dense>

#include "json.hpp"
#include "slicer/errors.h"
#include "slicer/json_io.h"

namespace slicer {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const OperatorNode& RequireProfiled(const OperatorNode& op) {
  if (!op.profiled()) {
    throw ValidationError("operator '" + op.id + "' has no memory/time profile");
  }
  return op;
}

// Values at one param_count, linearly interpolated over input_size and held
// flat outside the sampled range.
double InterpolateOnSize(const std::vector<std::pair<double, double>>& pts, double s) {
  if (s <= pts.front().first) return pts.front().second;
  if (s >= pts.back().first) return pts.back().second;
  auto hi = std::lower_bound(pts.begin(), pts.end(), s,
                             [](const auto& p, double x) { return p.first < x; });
  if (hi->first == s) return hi->second;
  auto lo = hi - 1;
  const double w = (s - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

}  // namespace

std::string_view PredictorKindName(PredictorKind kind) {
  return kind == PredictorKind::kTableLookup ? "table" : "linear";
}

PredictorKind ParsePredictorKind(std::string_view name) {
  if (name == "table" || name == "TableLookup") return PredictorKind::kTableLookup;
  if (name == "linear" || name == "LinearLeastSquares") return PredictorKind::kLinearLeastSquares;
  throw ValidationError("unknown predictor kind '" + std::string(name) + "'");
}

bool Predictor::knows(std::string_view op_type) const {
  return kind_ == PredictorKind::kTableLookup ? tables_.count(op_type) > 0
                                              : linear_.count(op_type) > 0;
}

std::vector<std::string> Predictor::op_types() const {
  std::vector<std::string> out;
  if (kind_ == PredictorKind::kTableLookup) {
    for (const auto& [k, v] : tables_) out.push_back(k);
  } else {
    for (const auto& [k, v] : linear_) out.push_back(k);
  }
  return out;
}

Footprint Predictor::Predict(std::string_view op_type, std::int64_t input_size,
                             std::int64_t param_count) const {
  Footprint f;
  if (kind_ == PredictorKind::kLinearLeastSquares) {
    auto it = linear_.find(op_type);
    if (it == linear_.end()) {
      throw ValidationError("no samples for op_type '" + std::string(op_type) + "'");
    }
    const Eigen::Vector3d x(static_cast<double>(input_size), static_cast<double>(param_count), 1.0);
    f.memory_mib = it->second.memory.dot(x);
    f.exec_time_ms = it->second.time.dot(x);
  } else {
    auto it = tables_.find(op_type);
    if (it == tables_.end()) {
      throw ValidationError("no samples for op_type '" + std::string(op_type) + "'");
    }
    const auto& samples = it->second.samples;
    // Nearest param_count; ties go to the smaller one.
    std::int64_t best_p = samples.front().param_count;
    for (const auto& s : samples) {
      if (std::llabs(s.param_count - param_count) < std::llabs(best_p - param_count)) {
        best_p = s.param_count;
      }
    }
    std::vector<std::pair<double, double>> mem, time;
    std::vector<int> counts;
    for (const auto& s : samples) {
      if (s.param_count != best_p) continue;
      const double x = static_cast<double>(s.input_size);
      if (!mem.empty() && mem.back().first == x) {
        mem.back().second += s.memory_mib;
        time.back().second += s.exec_time_ms;
        ++counts.back();
      } else {
        mem.emplace_back(x, s.memory_mib);
        time.emplace_back(x, s.exec_time_ms);
        counts.push_back(1);
      }
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      mem[i].second /= counts[i];
      time[i].second /= counts[i];
    }
    const double s = static_cast<double>(input_size);
    f.memory_mib = InterpolateOnSize(mem, s);
    f.exec_time_ms = InterpolateOnSize(time, s);
  }
  f.memory_mib = std::max(0.0, f.memory_mib);
  f.exec_time_ms = std::max(0.0, f.exec_time_ms);
  return f;
}

Predictor FitPredictor(std::span<const ProfileSample> samples, PredictorKind kind) {
  if (samples.empty()) throw ValidationError("insufficient samples: corpus is empty");
  std::map<std::string, std::vector<ProfileSample>, std::less<>> by_type;
  for (const auto& s : samples) {
    if (s.input_size < 1 || s.param_count < 0 || s.memory_mib < 0 || s.exec_time_ms < 0) {
      throw ValidationError("invalid profile sample for op_type '" + s.op_type + "'");
    }
    by_type[s.op_type].push_back(s);
  }

  Predictor pred;
  pred.kind_ = kind;
  for (auto& [op_type, group] : by_type) {
    if (kind == PredictorKind::kTableLookup) {
      std::stable_sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
        return std::pair(a.param_count, a.input_size) < std::pair(b.param_count, b.input_size);
      });
      pred.tables_[op_type].samples = group;
      continue;
    }

    const auto n = static_cast<Eigen::Index>(group.size());
    if (n < 3) {
      throw ValidationError("insufficient samples for op_type '" + op_type +
                            "': linear least squares needs at least 3");
    }
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd ym(n), yt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& s = group[static_cast<std::size_t>(i)];
      x(i, 0) = static_cast<double>(s.input_size);
      x(i, 1) = static_cast<double>(s.param_count);
      x(i, 2) = 1.0;
      ym(i) = s.memory_mib;
      yt(i) = s.exec_time_ms;
    }
    // Features with no spread get a zero coefficient.
    std::vector<Eigen::Index> cols;
    for (Eigen::Index c = 0; c < 2; ++c) {
      if (x.col(c).maxCoeff() != x.col(c).minCoeff()) cols.push_back(c);
    }
    Predictor::Linear fit;
    if (cols.empty()) {
      fit.memory(2) = ym.mean();
      fit.time(2) = yt.mean();
      pred.degenerate_.push_back(op_type);
    } else {
      cols.push_back(2);
      Eigen::MatrixXd design(n, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) {
        design.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
      const Eigen::VectorXd bm = cod.solve(ym);
      const Eigen::VectorXd bt = cod.solve(yt);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        fit.memory(cols[k]) = bm(static_cast<Eigen::Index>(k));
        fit.time(cols[k]) = bt(static_cast<Eigen::Index>(k));
      }
    }
    pred.linear_[op_type] = fit;
  }
  return pred;
}

double Rmsle(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw ValidationError("rmsle: length mismatch");
  if (predicted.empty()) throw ValidationError("rmsle: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || actual[i] < 0) throw ValidationError("rmsle: negative input");
    const double d = std::log1p(predicted[i]) - std::log1p(actual[i]);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

std::vector<OperatorNode> SelectDominant(const LayerNode& layer, double coverage) {
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    throw ValidationError("select_dominant: coverage must be in (0, 1]");
  }
  std::vector<OperatorNode> ops = layer.AllOperators();
  if (ops.empty()) throw ValidationError("layer '" + layer.id + "' has no operators");
  for (const auto& op : ops) {
    if (!op.memory_mib) throw ValidationError("operator '" + op.id + "' has no memory profile");
  }
  std::stable_sort(ops.begin(), ops.end(), [](const OperatorNode& a, const OperatorNode& b) {
    if (*a.memory_mib != *b.memory_mib) return *a.memory_mib > *b.memory_mib;
    return a.id < b.id;
  });
  double total = 0.0;
  for (const auto& op : ops) total += *op.memory_mib;
  const double target = coverage * total - 1e-12 * total;
  double covered = 0.0;
  std::size_t take = 0;
  while (take < ops.size()) {
    covered += *ops[take].memory_mib;
    ++take;
    if (covered >= target) break;
  }
  ops.resize(take);
  return ops;
}

Footprint AggregateChain(std::span<const OperatorNode> ops) {
  if (ops.empty()) throw ValidationError("aggregate_chain: no operators");
  Footprint f;
  for (const auto& op : ops) {
    RequireProfiled(op);
    f.memory_mib = std::max(f.memory_mib, *op.memory_mib);
    f.exec_time_ms += *op.exec_time_ms;
  }
  return f;
}

Footprint AggregateParallel(const std::vector<std::vector<OperatorNode>>& branches) {
  if (branches.empty()) throw ValidationError("aggregate_parallel: no branches");
  std::size_t depth = 0;
  for (const auto& b : branches) {
    if (b.empty()) throw ValidationError("aggregate_parallel: empty branch");
    for (const auto& op : b) RequireProfiled(op);
    depth = std::max(depth, b.size());
  }
  // Short branches are padded with zero-cost operators.
  Footprint f;
  for (std::size_t j = 0; j < depth; ++j) {
    double mem = 0.0, time = 0.0;
    for (const auto& b : branches) {
      if (j >= b.size()) continue;
      mem += *b[j].memory_mib;
      time = std::max(time, *b[j].exec_time_ms);
    }
    f.memory_mib = std::max(f.memory_mib, mem);
    f.exec_time_ms += time;
  }
  return f;
}

Footprint AggregateHybrid(std::span<const OperatorNode> chain_ops,
                          const std::vector<std::vector<OperatorNode>>& branches) {
  if (chain_ops.empty() && branches.empty()) {
    throw ValidationError("aggregate_hybrid: both chain and branches are empty");
  }
  const Footprint c = chain_ops.empty() ? Footprint{} : AggregateChain(chain_ops);
  const Footprint b = branches.empty() ? Footprint{} : AggregateParallel(branches);
  return Footprint{std::max(c.memory_mib, b.memory_mib), c.exec_time_ms + b.exec_time_ms};
}

Footprint AggregateLayer(const LayerNode& layer) {
  switch (layer.topology) {
    case Topology::kChain:
      return AggregateChain(layer.chain_ops);
    case Topology::kParallel:
      return AggregateParallel(layer.branches);
    case Topology::kHybrid:
      return AggregateHybrid(layer.chain_ops, layer.branches);
  }
  return {};
}

ServiceProfile ComputeServiceProfile(const ModelGraph& g) {
  const auto order = TopologicalOrder(g);
  ServiceProfile p;
  p.layer_ids = order;
  p.memory_mib.resize(static_cast<Eigen::Index>(order.size()));
  p.exec_time_ms.resize(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const LayerNode& l = g.layer(order[i]);
    const auto ops = l.AllOperators();
    const bool ops_profiled =
        !ops.empty() && std::all_of(ops.begin(), ops.end(), [](const auto& o) { return o.profiled(); });
    Footprint f;
    if (ops_profiled) {
      f = AggregateLayer(l);
    } else if (l.memory_mib && l.exec_time_ms) {
      f = Footprint{*l.memory_mib, *l.exec_time_ms};
    } else {
      throw ValidationError("layer '" + l.id + "' has no profiled operators");
    }
    p.memory_mib(static_cast<Eigen::Index>(i)) = f.memory_mib;
    p.exec_time_ms(static_cast<Eigen::Index>(i)) = f.exec_time_ms;
  }
  return p;
}

ModelGraph ApplyServiceProfile(const ModelGraph& g, const ServiceProfile& profile) {
  if (profile.layer_ids.size() != g.layers().size() ||
      profile.memory_mib.size() != profile.exec_time_ms.size() ||
      static_cast<std::size_t>(profile.memory_mib.size()) != profile.layer_ids.size()) {
    throw ValidationError("service profile does not cover every layer of '" + g.name() + "'");
  }
  std::vector<LayerNode> layers = g.layers();
  std::vector<bool> seen(layers.size(), false);
  for (std::size_t i = 0; i < profile.layer_ids.size(); ++i) {
    if (!g.contains(profile.layer_ids[i])) {
      throw ValidationError("service profile names unknown layer '" + profile.layer_ids[i] + "'");
    }
    const std::size_t idx = g.index_of(profile.layer_ids[i]);
    const auto k = static_cast<Eigen::Index>(i);
    if (profile.memory_mib(k) < 0 || profile.exec_time_ms(k) < 0) {
      throw ValidationError("service profile has negative values for '" + profile.layer_ids[i] + "'");
    }
    layers[idx].memory_mib = profile.memory_mib(k);
    layers[idx].exec_time_ms = profile.exec_time_ms(k);
    seen[idx] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ValidationError("service profile does not cover every layer of '" + g.name() + "'");
  }
  return ModelGraph(g.name(), std::move(layers), g.edges());
}

ModelGraph PredictOperators(const ModelGraph& g, const Predictor& predictor) {
  std::vector<LayerNode> layers = g.layers();
  auto fill = [&](OperatorNode& op) {
    if (!predictor.knows(op.op_type)) {
      throw ValidationError("no samples for op_type '" + op.op_type + "'");
    }
    const Footprint f = predictor.Predict(op.op_type, op.input_size, op.param_count);
    op.memory_mib = f.memory_mib;
    op.exec_time_ms = f.exec_time_ms;
  };
  for (auto& l : layers) {
    for (auto& op : l.chain_ops) fill(op);
    for (auto& b : l.branches) {
      for (auto& op : b) fill(op);
    }
  }
  return ModelGraph(g.name(), std::move(layers), g.edges());
}

std::vector<ProfileSample> ParseSamples(std::string_view document) {
  try {
    const json doc = json::parse(document);
    if (!doc.is_array()) throw ValidationError("sample corpus must be a JSON array");
    std::vector<ProfileSample> out;
    for (const auto& j : doc) {
      ProfileSample s;
      s.model_id = j.value("model_id", std::string());
      s.op_type = j.at("op_type").get<std::string>();
      s.input_size = j.at("input_size").get<std::int64_t>();
      s.param_count = j.value("param_count", std::int64_t{0});
      s.memory_mib = j.at("memory_mib").get<double>();
      s.exec_time_ms = j.at("exec_time_ms").get<double>();
      if (s.input_size < 1 || s.param_count < 0 || s.memory_mib < 0 || s.exec_time_ms < 0) {
        throw ValidationError("invalid profile sample for op_type '" + s.op_type + "'");
      }
      out.push_back(std::move(s));
    }
    return out;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed sample corpus: ") + e.what());
  }
}

std::string ServiceProfileToCsv(const ServiceProfile& profile) {
  std::string out = "layer_id,memory_mib,exec_time_ms\n";
  for (std::size_t i = 0; i < profile.layer_ids.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out += profile.layer_ids[i] + "," + FormatDouble(profile.memory_mib(k)) + "," +
           FormatDouble(profile.exec_time_ms(k)) + "\n";
  }
  return out;
}

std::string ServiceProfileToJson(const ServiceProfile& profile) {
  ordered_json j;
  j["layer_ids"] = profile.layer_ids;
  j["memory_mib"] = std::vector<double>(profile.memory_mib.begin(), profile.memory_mib.end());
  j["exec_time_ms"] = std::vector<double>(profile.exec_time_ms.begin(), profile.exec_time_ms.end());
  return j.dump(2) + "\n";
}

ServiceProfile ParseServiceProfile(std::string_view document) {
  try {
    const json j = json::parse(document);
    ServiceProfile p;
    p.layer_ids = j.at("layer_ids").get<std::vector<std::string>>();
    const auto m = j.at("memory_mib").get<std::vector<double>>();
    const auto t = j.at("exec_time_ms").get<std::vector<double>>();
    if (m.size() != p.layer_ids.size() || t.size() != p.layer_ids.size()) {
      throw ValidationError("service profile vectors have mismatched lengths");
    }
    p.memory_mib = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    p.exec_time_ms = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed service profile: ") + e.what());
  }
}

}  // namespace slicer
