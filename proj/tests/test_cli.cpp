// Copyright 2026 The BLISS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"

namespace bliss::cli {
namespace {

struct CliRun {
  int code = -1;
  std::string output;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("bliss_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = std::string(BLISS_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }
  void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, GenerateWritesDeterministicDatasetAndSidecar) {
  CliRun r = run("generate --regime binary-mil --bags 50 --seed 7 --out " + path("a"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "a" / "dataset.json"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "ground_truth.json"));
  // Statistics rows sum to the total.
  std::istringstream table(r.output);
  std::string line;
  int sum = 0, total = -1;
  while (std::getline(table, line)) {
    std::istringstream row(line);
    std::string first;
    int count = 0;
    row >> first >> count;
    if (first == "total") total = count;
    else if (!first.empty() && std::isdigit(static_cast<unsigned char>(first[0]))) sum += count;
  }
  EXPECT_EQ(total, 50);
  EXPECT_EQ(sum, 50);
  ASSERT_EQ(run("generate --regime binary-mil --bags 50 --seed 7 --out " + path("b")).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "dataset.json"), slurp(dir_ / "b" / "dataset.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "ground_truth.json"), slurp(dir_ / "b" / "ground_truth.json"));
  // The dataset file itself carries no ground truth.
  EXPECT_FALSE(load_dataset(dir_ / "a" / "dataset.json").has_ground_truth());
}

TEST_F(CliTest, GenerateSupportsEveryRegimeAndCsv) {
  for (const char* regime : {"multiclass-mil", "llp"}) {
    CliRun r = run(std::string("generate --regime ") + regime + " --bags 20 --out " + path(regime));
    ASSERT_EQ(r.code, 0) << r.output;
  }
  ASSERT_EQ(run("generate --format csv --bags 10 --out " + path("csv")).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "csv" / "dataset.csv"));
}

TEST_F(CliTest, BadFlagValueExitsTwoNamingTheFlag) {
  CliRun r = run("generate --bags 1 --out " + path("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("--bags"), std::string::npos) << r.output;
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("infer --threads 0").code, 2);
}

TEST_F(CliTest, MissingDatasetExitsTwoWithoutOutputs) {
  CliRun r = run("infer --dataset " + path("absent.json") + " --out " + path("out"));
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, UnknownConfigKeyIsRejected) {
  write(dir_ / "c.json", R"({"inference": {"rounds": 10, "roundz": 3}})");
  CliRun r = run("infer --config " + path("c.json") + " --out " + path("out"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("roundz"), std::string::npos) << r.output;
}

TEST_F(CliTest, InferEvaluateAndEchoedConfigReproduce) {
  ASSERT_EQ(run("generate --bags 15 --seed 3 --out " + path("g")).code, 0);
  write(dir_ / "c.json", R"({"inference": {"rounds": 30, "folds": 3}, "seed": 11})");
  CliRun r = run("infer --config " + path("c.json") + " --dataset " + path("g/dataset.json") + " --out " + path("i"));
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"result.json", "model.json", "config.json", "reward_trace.csv", "pull_logs/pass1_fold0.ndjson"})
    EXPECT_TRUE(fs::exists(dir_ / "i" / f)) << f;
  // Re-running from the echoed config reproduces the result byte for byte.
  ASSERT_EQ(run("infer --config " + path("i/config.json") + " --out " + path("j")).code, 0);
  EXPECT_EQ(slurp(dir_ / "i" / "result.json"), slurp(dir_ / "j" / "result.json"));

  r = run("evaluate --dataset " + path("g/dataset.json") + " --ground-truth " + path("g/ground_truth.json") +
          " --result " + path("i/result.json") + " --model " + path("i/model.json") + " --pull-log " +
          path("i/pull_logs/pass1_fold0.ndjson") + " --out " + path("e"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json m = read_json_file(dir_ / "e" / "metrics.json");
  for (const char* key : {"inferred_labels", "classifier_labels", "bag_accuracy", "reward_trace"})
    EXPECT_TRUE(m.contains(key)) << key;
  const auto& inferred = m.at("inferred_labels");
  std::int64_t trace = 0;
  const auto confusion = inferred.at("confusion").get<std::vector<std::vector<std::int64_t>>>();
  for (std::size_t c = 0; c < confusion.size(); ++c) trace += confusion[c][c];
  EXPECT_DOUBLE_EQ(inferred.at("accuracy").get<double>(),
                   static_cast<double>(trace) / inferred.at("total").get<double>());
  EXPECT_EQ(m.at("reward_trace").size(), 30u);
}

TEST_F(CliTest, EvaluatingGroundTruthAgainstItselfScoresOne) {
  ASSERT_EQ(run("generate --regime multiclass-mil --bags 20 --out " + path("g")).code, 0);
  const json gt = read_json_file(dir_ / "g" / "ground_truth.json");
  write(dir_ / "result.json", json{{"labels", gt}}.dump());
  CliRun r = run("evaluate --dataset " + path("g/dataset.json") + " --ground-truth " + path("g/ground_truth.json") +
              " --result " + path("result.json") + " --out " + path("e"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json m = read_json_file(dir_ / "e" / "metrics.json");
  EXPECT_EQ(m.at("inferred_labels").at("accuracy"), 1.0);
  for (const auto& [cls, acc] : m.at("inferred_labels").at("per_class_accuracy").items()) EXPECT_EQ(acc, 1.0) << cls;
  EXPECT_EQ(m.at("label_set_bag_accuracy"), 1.0);
}

TEST_F(CliTest, EvaluateWithMissingInputsExitsTwo) {
  EXPECT_EQ(run("evaluate --result " + path("nope.json") + " --out " + path("e")).code, 2);
}

TEST_F(CliTest, SecondPassKeepsFirstPassFixedLabels) {
  ASSERT_EQ(run("generate --bags 18 --seed 4 --out " + path("g")).code, 0);
  const std::string common = " --dataset " + path("g/dataset.json") + " --rounds 30 --folds 3 --seed 2";
  ASSERT_EQ(run("infer --passes 1 --out " + path("p1") + common).code, 0);
  ASSERT_EQ(run("infer --passes 2 --out " + path("p2") + common).code, 0);
  const auto one = pipeline_result_from_json(read_json_file(dir_ / "p1" / "result.json"));
  const auto two = pipeline_result_from_json(read_json_file(dir_ / "p2" / "result.json"));
  ASSERT_EQ(two.fixed_per_pass.size(), 2u);
  EXPECT_FALSE(two.fixed_per_pass[1].empty());
  for (InstanceId id : two.fixed_per_pass[1]) {
    EXPECT_EQ(two.labels.at(id), one.labels.at(id));
    EXPECT_TRUE(is_fixed(two.confidence.at(id)));
  }
}

TEST_F(CliTest, CustomRegimeMatchesEnumerationOracle) {
  // Six instances, two labels each, unique optimum with gap 0.3 per instance.
  json table = json::object();
  std::vector<std::vector<int>> labels;
  std::map<std::pair<std::size_t, int>, double> reward;
  for (int i = 0; i < 6; ++i) {
    const int good = i % 2;
    table[std::to_string(i)] = {{"0", good == 0 ? 0.7 : 0.4}, {"1", good == 1 ? 0.7 : 0.4}};
    labels.push_back({0, 1});
    reward[{i, 0}] = good == 0 ? 0.7 : 0.4;
    reward[{i, 1}] = good == 1 ? 0.7 : 0.4;
  }
  write(dir_ / "table.json", table.dump());
  const auto best = oracle::enumerate(labels, [&](std::size_t i, int l) { return reward.at({i, l}); });
  CliRun r = run("infer --regime custom --reward-table " + path("table.json") + " --rounds 300 --batch-size 1 --out " +
              path("o"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto result = pipeline_result_from_json(read_json_file(dir_ / "o" / "result.json"));
  for (int i = 0; i < 6; ++i) EXPECT_EQ(result.labels.at(i), best.best[i]);
}

TEST_F(CliTest, InferenceFailureExitsThreeWithContext) {
  ASSERT_EQ(run("generate --bags 10 --out " + path("g")).code, 0);
  write(dir_ / "c.json", R"({"classifier": {"learning_rate": 1e308}, "inference": {"folds": 2, "rounds": 5}})");
  // Features of this size overflow the first update.
  Dataset d = load_dataset(dir_ / "g" / "dataset.json");
  std::vector<Instance> xs = d.instances();
  for (auto& x : xs) x.features[0] *= 1e300;
  save_dataset(Dataset(xs, d.bags(), d.num_classes(), d.regime()), dir_ / "big.json");
  CliRun r = run("infer --config " + path("c.json") + " --dataset " + path("big.json") + " --out " + path("o"));
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_NE(r.output.find("fold"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("round"), std::string::npos) << r.output;
}

TEST_F(CliTest, BenchReportsMeanStdAndTimings) {
  CliRun r = run("bench --repetitions 1 --bags 12 --rounds 20 --out " + path("b1"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json one = read_json_file(dir_ / "b1" / "summary.json");
  for (const auto& [name, v] : one.at("metrics").items()) EXPECT_EQ(v.at("std"), 0.0) << name;
  for (const char* phase : {"generate", "infer", "evaluate"}) EXPECT_TRUE(one.at("timings_seconds").contains(phase));

  ASSERT_EQ(run("bench --repetitions 3 --bags 12 --rounds 20 --out " + path("b3")).code, 0);
  const json three = read_json_file(dir_ / "b3" / "summary.json");
  double sum = 0.0;
  for (int rep = 0; rep < 3; ++rep)
    sum += read_json_file(dir_ / "b3" / ("run_" + std::to_string(rep)) / "metrics.json").at("inferred_labels").at("accuracy").get<double>();
  EXPECT_NEAR(three.at("metrics").at("inferred_accuracy").at("mean").get<double>(), sum / 3.0, 1e-12);
}

TEST(RunConfig, JsonRoundTripAndValidation) {
  RunConfig c;
  c.inference.rounds = 77;
  c.inference.regime = Regime::kLlp;
  c.inference.reward.distgap_enabled = true;
  c.inference.classifier.kind = ClassifierKind::kCooperativeSoftmax;
  c.generate.format = FileFormat::kCsv;
  c.repetitions = 4;
  const json j = run_config_to_json(c);
  EXPECT_EQ(run_config_to_json(run_config_from_json(j)), j);
  EXPECT_THROW(run_config_from_json(json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(run_config_from_json(json{{"reward", {{"k", "five"}}}}), ConfigError);
  EXPECT_THROW(run_config_from_json(json{{"classifier", {{"kind", "forest"}}}}), ConfigError);
  RunConfig bad;
  bad.inference.folds = 1;
  EXPECT_THROW(validate(bad), ConfigError);
}

}  // namespace
}  // namespace bliss::cli
