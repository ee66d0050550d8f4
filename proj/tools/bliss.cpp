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

// bliss: generate weakly labeled datasets, infer instance labels, evaluate
// and benchmark.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

using namespace bliss;
using namespace bliss::cli;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> regime;
  std::optional<int> bags;
  std::optional<std::string> format;
  std::optional<int> passes;
  std::optional<std::int64_t> rounds;
  std::optional<int> folds;
  std::optional<int> batch_size;
  std::optional<std::string> dataset, result, ground_truth, model, pull_log, reward_table;
  std::optional<int> repetitions;
};

RunConfig build_config(const Overrides& o, const std::string& command) {
  RunConfig c;
  if (!o.config.empty()) {
    if (!std::filesystem::is_regular_file(o.config)) throw ConfigError("--config: file not found: " + o.config);
    c = run_config_from_json(read_json_file(o.config));
  }
  if (o.seed) c.inference.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.threads) c.inference.threads = *o.threads;
  if (o.regime) {
    if (command == "generate" || command == "bench") c.generate.regime = regime_from_string(*o.regime);
    else c.inference.regime = regime_from_string(*o.regime);
  }
  if (o.bags) c.generate.bags = *o.bags;
  if (o.format) c.generate.format = format_from_string(*o.format);
  if (o.passes) c.inference.bootstrap_passes = *o.passes;
  if (o.rounds) c.inference.rounds = *o.rounds;
  if (o.folds) c.inference.folds = *o.folds;
  if (o.batch_size) c.inference.batch_size = *o.batch_size;
  if (o.dataset) c.dataset = *o.dataset;
  if (o.result) c.result = *o.result;
  if (o.ground_truth) c.ground_truth = *o.ground_truth;
  if (o.model) c.model = *o.model;
  if (o.pull_log) c.pull_log = *o.pull_log;
  if (o.reward_table) c.reward_table = *o.reward_table;
  if (o.repetitions) c.repetitions = *o.repetitions;
  validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bliss: bandit label inference for weakly supervised learning"};
  app.require_subcommand(1);
  Overrides o;
  const auto regimes = CLI::IsMember({"binary-mil", "multiclass-mil", "llp", "custom"});

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset and its ground truth");
  common(generate);
  generate->add_option("--regime", o.regime, "weak supervision regime")->check(regimes);
  generate->add_option("--bags", o.bags, "number of bags")->check(CLI::Range(2, 100000000));
  generate->add_option("--format", o.format, "dataset file format")->check(CLI::IsMember({"json", "csv"}));

  auto* infer = app.add_subcommand("infer", "infer instance labels");
  common(infer);
  infer->add_option("--dataset", o.dataset, "dataset file");
  infer->add_option("--regime", o.regime, "weak supervision regime")->check(regimes);
  infer->add_option("--reward-table", o.reward_table, "reward table for the custom regime");
  infer->add_option("--passes", o.passes, "bootstrap passes")->check(CLI::PositiveNumber);
  infer->add_option("--rounds", o.rounds, "super-arm pulls per fold")->check(CLI::PositiveNumber);
  infer->add_option("--folds", o.folds, "number of folds")->check(CLI::Range(2, 1000000));
  infer->add_option("--batch-size", o.batch_size, "super arms per batch")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "score a result against ground truth");
  common(evaluate);
  evaluate->add_option("--dataset", o.dataset, "dataset file");
  evaluate->add_option("--result", o.result, "result.json from infer");
  evaluate->add_option("--ground-truth", o.ground_truth, "ground-truth sidecar");
  evaluate->add_option("--model", o.model, "model.json from infer");
  evaluate->add_option("--pull-log", o.pull_log, "pull log to summarize");

  auto* bench = app.add_subcommand("bench", "repeat generate, infer, evaluate with derived seeds");
  common(bench);
  bench->add_option("--regime", o.regime, "weak supervision regime")->check(regimes);
  bench->add_option("--bags", o.bags, "number of bags")->check(CLI::Range(2, 100000000));
  bench->add_option("--repetitions", o.repetitions, "number of repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--passes", o.passes, "bootstrap passes")->check(CLI::PositiveNumber);
  bench->add_option("--rounds", o.rounds, "super-arm pulls per fold")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig config = build_config(o, command);
    if (command == "generate") cmd_generate(config, std::cout);
    else if (command == "infer") cmd_infer(config, std::cout);
    else if (command == "evaluate") cmd_evaluate(config, std::cout);
    else cmd_bench(config, std::cout);
  } catch (const Error& e) {
    // Bad configuration, missing or malformed inputs: usage errors.
    const bool usage = dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IoError*>(&e) ||
                       dynamic_cast<const bliss::ParseError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
                       dynamic_cast<const ValidationError*>(&e);
    std::cerr << "bliss " << command << ": " << e.what() << "\n";
    return usage ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "bliss " << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
