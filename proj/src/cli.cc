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

#include "slicer/cli.h"

#include <cmath>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slicer/baselines.h"
#include "slicer/errors.h"
#include "slicer/hypad.h"
#include "slicer/json_io.h"
#include "slicer/model_graph.h"
#include "slicer/plan.h"
#include "slicer/profiler.h"
#include "slicer/simplifier.h"
#include "slicer/simulator.h"

namespace slicer {
namespace {

using ordered_json = nlohmann::ordered_json;

struct GlobalOptions {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  bool verbose = false;
};

class Context {
 public:
  Context(const GlobalOptions& opts, std::ostream& out, std::ostream& err)
      : opts_(opts), out_(out), err_(err) {}

  const GlobalOptions& opts() const { return opts_; }
  std::ostream& err() { return err_; }

  void Log(const std::string& line) {
    if (opts_.verbose) err_ << line << '\n';
  }

  PlatformConfig LoadConfig() {
    std::string path = opts_.config;
    if (path.empty()) {
      if (const char* env = std::getenv("SLICER_CONFIG")) path = env;
    }
    if (path.empty()) {
      Log("config: built-in defaults");
      return DefaultPlatformConfig();
    }
    Log("config: " + path);
    return ParsePlatformConfig(ReadFile(path));
  }

  // JSON goes to --out (or the output stream); CSV, when given, lands next to
  // it with a .csv extension.
  void Emit(const std::string& json, const std::string& csv) {
    if (opts_.out.empty()) {
      out_ << json;
      return;
    }
    WriteFile(opts_.out, json);
    Log("wrote " + opts_.out);
    if (!csv.empty()) {
      const std::string path = Sibling(".csv");
      WriteFile(path, csv);
      Log("wrote " + path);
    }
  }

  // --out with its extension replaced by `suffix`.
  std::string Sibling(const std::string& suffix) const {
    const std::string& out = opts_.out;
    const auto slash = out.find_last_of('/');
    const auto dot = out.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + suffix;
    return out.substr(0, dot) + suffix;
  }

 private:
  const GlobalOptions& opts_;
  std::ostream& out_;
  std::ostream& err_;
};

ModelGraph LoadModel(const std::string& path) { return ParseModel(ReadFile(path)); }
ServiceProfile LoadProfile(const std::string& path) { return ParseServiceProfile(ReadFile(path)); }

Workload LoadWorkload(Context& ctx, const std::string& path) {
  Workload w = ParseWorkload(ReadFile(path));
  if (ctx.opts().seed_given) w.seed = ctx.opts().seed;
  return w;
}

// --- profile -------------------------------------------------------------

struct ProfileArgs {
  std::string samples;
  std::string model;
  std::string predictor = "linear";
  double holdout = 0.25;
};

struct HoldoutScore {
  std::string predictor;
  std::size_t train = 0;
  std::size_t test = 0;  // scored samples; op_types unseen in training are skipped
  bool ok = false;
  std::string error;
  double memory_rmsle = 0.0;
  double time_rmsle = 0.0;
};

std::vector<HoldoutScore> ScoreHoldout(const std::vector<ProfileSample>& samples, double fraction,
                                       std::uint64_t seed) {
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(u * static_cast<double>(i))]);
  }
  const auto n_test = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(idx.size())));
  std::vector<ProfileSample> train, test;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_test ? test : train).push_back(samples[idx[i]]);
  }

  std::vector<HoldoutScore> scores;
  for (PredictorKind kind : {PredictorKind::kTableLookup, PredictorKind::kLinearLeastSquares}) {
    HoldoutScore s;
    s.predictor = std::string(PredictorKindName(kind));
    s.train = train.size();
    try {
      const Predictor p = FitPredictor(train, kind);
      std::vector<double> pm, am, pt, at;
      for (const auto& t : test) {
        if (!p.knows(t.op_type)) continue;
        const Footprint f = p.Predict(t.op_type, t.input_size, t.param_count);
        pm.push_back(f.memory_mib);
        pt.push_back(f.exec_time_ms);
        am.push_back(t.memory_mib);
        at.push_back(t.exec_time_ms);
      }
      s.test = pm.size();
      if (pm.empty()) throw ValidationError("no held-out sample has a trained op_type");
      s.memory_rmsle = Rmsle(pm, am);
      s.time_rmsle = Rmsle(pt, at);
      s.ok = true;
    } catch (const ValidationError& e) {
      s.error = e.what();
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

std::string HoldoutCsv(const std::vector<HoldoutScore>& scores) {
  std::ostringstream out;
  out << "predictor,train_samples,test_samples,memory_rmsle,time_rmsle,error\n";
  for (const auto& s : scores) {
    out << s.predictor << ',' << s.train << ',' << s.test << ','
        << (s.ok ? FormatDouble(s.memory_rmsle) : "") << ',' << (s.ok ? FormatDouble(s.time_rmsle) : "")
        << ',' << s.error << '\n';
  }
  return out.str();
}

void CmdProfile(Context& ctx, const ProfileArgs& a) {
  const std::vector<ProfileSample> samples = ParseSamples(ReadFile(a.samples));
  const ModelGraph model = LoadModel(a.model);
  const PredictorKind kind = ParsePredictorKind(a.predictor);
  if (!(a.holdout >= 0.0 && a.holdout < 1.0)) throw ValidationError("--holdout must be in [0, 1)");

  const Predictor predictor = FitPredictor(samples, kind);
  for (const auto& op : predictor.degenerate_op_types()) {
    ctx.err() << "warning: op_type '" << op << "' has identical (s, p) samples; predicting the mean\n";
  }
  const ServiceProfile profile = ComputeServiceProfile(PredictOperators(model, predictor));
  ctx.Log("profiled " + std::to_string(profile.layer_ids.size()) + " layers with " + a.predictor);
  ctx.Emit(ServiceProfileToJson(profile), ServiceProfileToCsv(profile));

  if (a.holdout > 0.0) {
    const std::string report = HoldoutCsv(ScoreHoldout(samples, a.holdout, ctx.opts().seed));
    if (ctx.opts().out.empty()) {
      ctx.err() << report;
    } else {
      WriteFile(ctx.Sibling(".rmsle.csv"), report);
      ctx.Log("wrote " + ctx.Sibling(".rmsle.csv"));
    }
  }
}

// --- simplify / plan -------------------------------------------------------

struct ModelArgs {
  std::string model;
  std::string profile;
};

void CmdSimplify(Context& ctx, const ModelArgs& a, double theta_override) {
  const ModelGraph model = LoadModel(a.model);
  const ServiceProfile profile = LoadProfile(a.profile);
  PlatformConfig cfg = ctx.LoadConfig();
  if (theta_override >= 0.0) cfg.theta = theta_override;
  cfg.Validate();
  const SimplifiedGraph sg = Simplify(ApplyServiceProfile(model, profile), cfg.theta);
  ctx.Log(std::to_string(model.layers().size()) + " layers -> " + std::to_string(sg.size()) + " groups");
  ctx.Emit(SimplifiedGraphToJson(sg), GroupMembershipCsv(sg));
}

void CmdPlan(Context& ctx, const ModelArgs& a) {
  const ModelGraph model = LoadModel(a.model);
  const ServiceProfile profile = LoadProfile(a.profile);
  const PlatformConfig cfg = ctx.LoadConfig();
  const PartitionPlan plan = Hypad(model, profile, cfg);
  ctx.Log("plan: " + std::to_string(plan.slices.size()) + " slices over " +
          std::to_string(plan.group_count()) + " groups");
  ctx.Emit(PlanToJson(plan, cfg), PlanToCsv(plan, cfg));
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string plan;
  std::string workload;
  AblationSwitches switches;
};

void CmdSimulate(Context& ctx, const SimulateArgs& a) {
  const PartitionPlan plan = ParsePlan(ReadFile(a.plan));
  const Workload w = LoadWorkload(ctx, a.workload);
  const PlatformConfig cfg = ctx.LoadConfig();
  const auto& s = a.switches;
  if (!(s.mpe_off || s.shm_off || s.ae_off)) {
    const SimReport r = Simulate(plan, cfg, w);
    ctx.Log("simulated " + std::to_string(r.request_count) + " requests");
    ctx.Emit(SimReportToJson(r), SimReportToCsv(r));
    return;
  }
  if (!CheckConstraints(plan, cfg).ok()) throw InfeasibleError("simulate: plan is infeasible");
  const auto rows = Ablate(plan, cfg, w, s);
  ctx.Emit(AblationToJson(rows), AblationToCsv(rows));
}

// --- report ----------------------------------------------------------------

struct ReportArgs {
  std::string model;
  std::string profile;
  std::string workload;
  std::size_t uniform_k = 2;
};

void CmdReport(Context& ctx, const ReportArgs& a) {
  const ModelGraph model = LoadModel(a.model);
  const ServiceProfile profile = LoadProfile(a.profile);
  const Workload w = LoadWorkload(ctx, a.workload);
  const PlatformConfig cfg = ctx.LoadConfig();

  const BaselineReport baselines = BaselineCompare(model, profile, cfg, a.uniform_k);
  const BaselineRow& hypad = baselines.rows.back();
  const auto ablation =
      Ablate(hypad.plan, cfg, w, AblationSwitches{.mpe_off = true, .shm_off = true, .ae_off = true});

  ordered_json doc;
  doc["model"] = model.name();
  doc["seed"] = w.seed;
  doc["uniform_k"] = a.uniform_k;
  ordered_json strategies = ordered_json::array();
  std::ostringstream csv;
  csv << "section,name,slices,feasible,cost_usd,latency_ms,memory_consumption_mib_ms,p95_ms,"
         "delta_p95_ms\n";
  std::string cheapest;
  double cheapest_cost = 0.0;
  for (const auto& row : baselines.rows) {
    ordered_json j;
    j["strategy"] = row.strategy;
    j["slices"] = row.plan.slices.size();
    j["split_points"] = row.plan.split_points;
    j["feasible"] = row.feasible;
    j["cost_usd"] = row.cost_usd;
    j["latency_ms"] = row.latency_ms;
    j["memory_consumption_mib_ms"] = row.memory_consumption_mib_ms;
    std::string p95;
    if (row.feasible) {
      const SimReport r = Simulate(row.plan, cfg, w);
      j["p50_ms"] = r.p50_ms;
      j["p95_ms"] = r.p95_ms;
      j["p99_ms"] = r.p99_ms;
      j["cost_per_request_usd"] = r.cost_per_request_usd;
      p95 = FormatDouble(r.p95_ms);
      if (cheapest.empty() || row.cost_usd < cheapest_cost) {
        cheapest = row.strategy;
        cheapest_cost = row.cost_usd;
      }
    } else {
      j["p95_ms"] = nullptr;
    }
    strategies.push_back(j);
    csv << "strategy," << row.strategy << ',' << row.plan.slices.size() << ','
        << (row.feasible ? "true" : "false") << ',' << FormatDouble(row.cost_usd) << ','
        << FormatDouble(row.latency_ms) << ',' << FormatDouble(row.memory_consumption_mib_ms) << ','
        << p95 << ",\n";
  }
  doc["strategies"] = strategies;
  doc["min_cost_strategy"] = cheapest;
  doc["ablation"] = ordered_json::parse(AblationToJson(ablation))["ablation"];
  for (const auto& row : ablation) {
    const SimReport& r = row.report;
    csv << "ablation," << row.configuration << ',' << r.slices.size() << ','
        << (row.feasible ? "true" : "false") << ',' << FormatDouble(r.cost_per_request_usd) << ','
        << FormatDouble(r.mean_latency_ms) << ',' << FormatDouble(r.mean_memory_consumption_mib_ms)
        << ',' << FormatDouble(r.p95_ms) << ',' << FormatDouble(row.delta_p95_ms) << '\n';
  }
  doc["plan"] = ordered_json::parse(PlanToJson(hypad.plan, cfg));
  ctx.Log("report: cheapest feasible strategy is " + cheapest);
  ctx.Emit(doc.dump(2) + "\n", csv.str());
}

// --- validate --------------------------------------------------------------

struct ValidateArgs {
  std::string model;
  std::string profile;
  std::string plan;
  std::string workload;
  std::string samples;
};

void CmdValidate(Context& ctx, const ValidateArgs& a, std::ostream& out) {
  const PlatformConfig cfg = ctx.LoadConfig();
  out << "config: ok\n";
  std::optional<ModelGraph> model;
  if (!a.model.empty()) {
    model = LoadModel(a.model);
    out << "model: ok (" << model->layers().size() << " layers, " << model->edges().size()
        << " edges)\n";
  }
  if (!a.profile.empty()) {
    const ServiceProfile profile = LoadProfile(a.profile);
    if (model) ApplyServiceProfile(*model, profile);
    out << "profile: ok (" << profile.layer_ids.size() << " layers)\n";
  }
  if (!a.plan.empty()) {
    const PartitionPlan plan = ParsePlan(ReadFile(a.plan));
    const Feasibility f = CheckConstraints(plan, cfg);
    out << "plan: ok (" << plan.slices.size() << " slices, " << (f.ok() ? "feasible" : "infeasible")
        << ")\n";
  }
  if (!a.workload.empty()) {
    LoadWorkload(ctx, a.workload);
    out << "workload: ok\n";
  }
  if (!a.samples.empty()) {
    out << "samples: ok (" << ParseSamples(ReadFile(a.samples)).size() << " samples)\n";
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cost-aware partitioning of inference services into serverless slices"};
  app.name("slicer");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions opts;
  app.add_option("--config", opts.config, "Platform config JSON (falls back to $SLICER_CONFIG)");
  app.add_option("--seed", opts.seed, "Seed for every random draw");
  app.add_option("--out", opts.out, "Output JSON path; CSV is written next to it");
  app.add_flag("--verbose", opts.verbose, "Log progress to stderr");

  ProfileArgs profile_args;
  auto* profile = app.add_subcommand("profile", "Fit a predictor and emit the service profile");
  profile->add_option("--samples", profile_args.samples, "Profiling sample corpus JSON")->required();
  profile->add_option("--model", profile_args.model, "Model graph JSON")->required();
  profile->add_option("--predictor", profile_args.predictor, "Predictor kind")
      ->check(CLI::IsMember({"linear", "table"}))
      ->capture_default_str();
  profile->add_option("--holdout", profile_args.holdout, "Held-out fraction for the RMSLE report")
      ->capture_default_str();

  ModelArgs simplify_args;
  double theta = -1.0;
  auto* simplify = app.add_subcommand("simplify", "Merge similar layers into groups");
  simplify->add_option("--model", simplify_args.model, "Model graph JSON")->required();
  simplify->add_option("--profile", simplify_args.profile, "Service profile JSON")->required();
  simplify->add_option("--theta", theta, "Similarity threshold (default: config theta)");

  ModelArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Compute the min-cost partition plan");
  plan->add_option("--model", plan_args.model, "Model graph JSON")->required();
  plan->add_option("--profile", plan_args.profile, "Service profile JSON")->required();

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Replay a workload against a plan");
  simulate->add_option("--plan", sim_args.plan, "Plan JSON")->required();
  simulate->add_option("--workload", sim_args.workload, "Workload JSON")->required();
  simulate->add_flag("--mpe-off", sim_args.switches.mpe_off, "Ablation: unsplit plan at eta 1");
  simulate->add_flag("--shm-off", sim_args.switches.shm_off, "Ablation: RemoteStore channels");
  simulate->add_flag("--ae-off", sim_args.switches.ae_off, "Ablation: no compression");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Compare Unsplit, Uniform(k) and HyPAD plus ablations");
  report->add_option("--model", report_args.model, "Model graph JSON")->required();
  report->add_option("--profile", report_args.profile, "Service profile JSON")->required();
  report->add_option("--workload", report_args.workload, "Workload JSON")->required();
  report->add_option("--uniform-k", report_args.uniform_k, "Cuts for the Uniform baseline")
      ->capture_default_str();

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Parse and check input documents");
  validate->add_option("--model", validate_args.model, "Model graph JSON");
  validate->add_option("--profile", validate_args.profile, "Service profile JSON");
  validate->add_option("--plan", validate_args.plan, "Plan JSON");
  validate->add_option("--workload", validate_args.workload, "Workload JSON");
  validate->add_option("--samples", validate_args.samples, "Profiling sample corpus JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  opts.seed_given = app.count("--seed") > 0;

  Context ctx(opts, out, err);
  try {
    if (*profile) CmdProfile(ctx, profile_args);
    if (*simplify) CmdSimplify(ctx, simplify_args, theta);
    if (*plan) CmdPlan(ctx, plan_args);
    if (*simulate) CmdSimulate(ctx, sim_args);
    if (*report) CmdReport(ctx, report_args);
    if (*validate) CmdValidate(ctx, validate_args, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace slicer
