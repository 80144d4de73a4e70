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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "slicer/json_io.h"
#include "test_util.h"

namespace slicer {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::FixturePath;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "slicer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("slicer_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  // Profiles the fixture and returns the profile path.
  std::string Profile() {
    const CliRun r = Cli({"--out", Path("profile.json"), "profile", "--samples", FixturePath("convnext_like.samples.json"),
                       "--model", FixturePath("convnext_like.json")});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return Path("profile.json");
  }

  fs::path dir_;
};

TEST_F(CliTest, ProfileWritesJsonCsvAndRmsleReport) {
  for (const char* kind : {"linear", "table"}) {
    const std::string out = Path(std::string("p_") + kind + ".json");
    const CliRun r = Cli({"--out", out, "profile", "--samples", FixturePath("convnext_like.samples.json"), "--model",
                       FixturePath("convnext_like.json"), "--predictor", kind, "--holdout", "0.25"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(out));
    EXPECT_TRUE(fs::exists(Path(std::string("p_") + kind + ".csv")));
    const std::string rmsle = ReadFile(Path(std::string("p_") + kind + ".rmsle.csv"));
    EXPECT_NE(rmsle.find("linear"), std::string::npos);
    EXPECT_NE(rmsle.find("table"), std::string::npos);
  }
}

TEST_F(CliTest, ProfileMissingOpTypeIsValidationError) {
  json samples = json::parse(ReadFile(FixturePath("convnext_like.samples.json")));
  json kept = json::array();
  for (const auto& s : samples) {
    if (s.at("op_type") != "gelu") kept.push_back(s);
  }
  WriteFile(Path("partial.json"), kept.dump());
  const CliRun r = Cli({"profile", "--samples", Path("partial.json"), "--model", FixturePath("convnext_like.json")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("gelu"), std::string::npos) << r.err;
}

TEST_F(CliTest, PlanSimulateAndSimplify) {
  const std::string profile = Profile();
  CliRun r = Cli({"--out", Path("groups.json"), "simplify", "--model", FixturePath("convnext_like.json"), "--profile",
               profile});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(Path("groups.csv")));

  r = Cli({"--out", Path("plan.json"), "plan", "--model", FixturePath("convnext_like.json"), "--profile", profile});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json plan = json::parse(ReadFile(Path("plan.json")));
  EXPECT_GE(plan.at("slices").size(), 3u);
  EXPECT_LE(plan.at("slices").size(), 5u);
  EXPECT_TRUE(fs::exists(Path("plan.csv")));

  r = Cli({"--out", Path("sim.json"), "simulate", "--plan", Path("plan.json"), "--workload",
           FixturePath("workload.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json sim = json::parse(ReadFile(Path("sim.json")));
  EXPECT_LE(sim.at("p50_ms").get<double>(), sim.at("p95_ms").get<double>());

  r = Cli({"--out", Path("abl.json"), "simulate", "--plan", Path("plan.json"), "--workload",
           FixturePath("workload.json"), "--shm-off", "--ae-off"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(json::parse(ReadFile(Path("abl.json"))).at("ablation").size(), 3u);

  r = Cli({"validate", "--model", FixturePath("convnext_like.json"), "--profile", profile, "--plan", Path("plan.json"),
           "--workload", FixturePath("workload.json")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("plan: ok"), std::string::npos);
}

TEST_F(CliTest, SingleLayerPlanHasNoSplits) {
  const CliRun r = Cli({"--out", Path("plan.json"), "plan", "--model", FixturePath("single_layer.json"), "--profile",
                     FixturePath("single_layer.profile.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json plan = json::parse(ReadFile(Path("plan.json")));
  EXPECT_TRUE(plan.at("split_points").empty());
  EXPECT_EQ(plan.at("slices").size(), 1u);
}

TEST_F(CliTest, ExitCodes) {
  CliRun r = Cli({"simulate", "--plan", Path("missing.json"), "--workload", FixturePath("workload.json")});
  EXPECT_EQ(r.code, kExitIo);

  r = Cli({"plan", "--model", FixturePath("convnext_like.json")});
  EXPECT_EQ(r.code, kExitValidation);
  r = Cli({"frobnicate"});
  EXPECT_EQ(r.code, kExitValidation);

  WriteFile(Path("broken.json"), "{\"name\": ");
  r = Cli({"validate", "--model", Path("broken.json")});
  EXPECT_EQ(r.code, kExitValidation);

  r = Cli({"--config", Path("nope.json"), "validate"});
  EXPECT_EQ(r.code, kExitIo);

  // A plan whose eta exceeds the vCPU bound is refused by the simulator.
  ASSERT_EQ(Cli({"--out", Path("plan.json"), "plan", "--model", FixturePath("convnext_like.json"), "--profile",
                 Profile()})
                .code,
            kExitOk);
  json plan = json::parse(ReadFile(Path("plan.json")));
  plan["slices"][0]["eta"] = 64;
  WriteFile(Path("bad_plan.json"), plan.dump());
  r = Cli({"simulate", "--plan", Path("bad_plan.json"), "--workload", FixturePath("workload.json")});
  EXPECT_EQ(r.code, kExitInfeasible) << r.err;
}

TEST_F(CliTest, ConfigFromEnvironment) {
  WriteFile(Path("cfg.json"), R"({"lambda_mib_per_vcpu": 0})");
  ::setenv("SLICER_CONFIG", Path("cfg.json").c_str(), 1);
  const CliRun r = Cli({"validate"});
  ::unsetenv("SLICER_CONFIG");
  EXPECT_EQ(r.code, kExitValidation);
}

TEST_F(CliTest, ReportIsDeterministicAndHypadIsCheapest) {
  const std::string profile = Profile();
  auto report = [&](const std::string& name) {
    const CliRun r = Cli({"--seed", "7", "--out", Path(name + ".json"), "report", "--model",
                       FixturePath("convnext_like.json"), "--profile", profile, "--workload",
                       FixturePath("workload.json")});
    EXPECT_EQ(r.code, kExitOk) << r.err;
  };
  report("a");
  report("b");
  EXPECT_EQ(ReadFile(Path("a.json")), ReadFile(Path("b.json")));
  EXPECT_EQ(ReadFile(Path("a.csv")), ReadFile(Path("b.csv")));

  const json doc = json::parse(ReadFile(Path("a.json")));
  EXPECT_EQ(doc.at("min_cost_strategy"), "HyPAD");
  double hypad = 0.0, lowest = std::numeric_limits<double>::infinity();
  for (const auto& row : doc.at("strategies")) {
    const double c = row.at("cost_usd").get<double>();
    if (row.at("strategy") == "HyPAD") hypad = c;
    if (row.at("feasible").get<bool>()) lowest = std::min(lowest, c);
  }
  EXPECT_EQ(hypad, lowest);
}

TEST_F(CliTest, HelpListsEveryFlag) {
  CliRun r = Cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* flag : {"--config", "--seed", "--out", "--verbose", "profile", "simplify", "plan", "simulate",
                           "report", "validate"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  const std::vector<std::pair<std::string, std::vector<std::string>>> subs = {
      {"profile", {"--samples", "--model", "--predictor", "--holdout"}},
      {"simplify", {"--model", "--profile", "--theta"}},
      {"plan", {"--model", "--profile"}},
      {"simulate", {"--plan", "--workload", "--mpe-off", "--shm-off", "--ae-off"}},
      {"report", {"--model", "--profile", "--workload", "--uniform-k"}},
      {"validate", {"--model", "--profile", "--plan", "--workload", "--samples"}},
  };
  for (const auto& [sub, flags] : subs) {
    r = Cli({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    for (const auto& f : flags) EXPECT_NE(r.out.find(f), std::string::npos) << sub << " " << f;
  }
}

}  // namespace
}  // namespace slicer
