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

// Command implementations for the bliss executable. Kept in a header so the
// config parser can be unit tested without spawning processes.

#ifndef BLISS_TOOLS_CLI_HPP_
#define BLISS_TOOLS_CLI_HPP_

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bliss/bandit.hpp"
#include "bliss/classifiers.hpp"
#include "bliss/data.hpp"
#include "bliss/error.hpp"
#include "bliss/eval.hpp"
#include "bliss/generators.hpp"
#include "bliss/io.hpp"
#include "bliss/orchestrator.hpp"
#include "bliss/random.hpp"
#include "bliss/rewards.hpp"

namespace bliss::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct GenerateOptions {
  Regime regime = Regime::kBinaryMil;
  int bags = 50;
  int min_bag_size = 3;
  int max_bag_size = 10;
  int feature_dim = 2;
  double separation = 6.0;
  // binary-mil and llp
  double positive_fraction = 0.5;
  double witness_rate = 0.5;
  // multiclass-mil
  int positive_classes = 5;
  int negative_modes = 5;
  int per_class = 200;
  FileFormat format = FileFormat::kJson;

  bool operator==(const GenerateOptions&) const = default;
};

struct RunConfig {
  InferenceConfig inference;
  GenerateOptions generate;
  std::string dataset;       // infer, evaluate
  std::string result;        // evaluate
  std::string ground_truth;  // evaluate
  std::string model;         // evaluate, optional
  std::string pull_log;      // evaluate, optional
  std::string reward_table;  // infer with the custom regime
  std::string out = "bliss_out";
  int repetitions = 1;  // bench

  RunConfig() { inference.record_pull_log = true; }
};

// ---------------------------------------------------------------------------
// JSON <-> RunConfig. Every section rejects keys it does not know.

namespace config_detail {

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& into, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T, typename Parse>
void read_enum(const json& j, const char* key, T& into, const std::string& where, Parse parse) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  try {
    into = parse(j.at(key).get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline Weighting weighting_from_string(std::string_view s) {
  if (s == "uniform") return Weighting::kUniform;
  if (s == "confidence") return Weighting::kConfidence;
  throw ConfigError("unknown weighting '" + std::string(s) + "'");
}

inline std::string_view to_string(Weighting w) { return w == Weighting::kUniform ? "uniform" : "confidence"; }

inline DistGapSpace space_from_string(std::string_view s) {
  if (s == "output") return DistGapSpace::kOutput;
  if (s == "features") return DistGapSpace::kFeatures;
  throw ConfigError("unknown distgap space '" + std::string(s) + "'");
}

inline std::string_view to_string(DistGapSpace s) { return s == DistGapSpace::kOutput ? "output" : "features"; }

inline std::string_view to_string(FileFormat f) { return f == FileFormat::kCsv ? "csv" : "json"; }

}  // namespace config_detail

inline RunConfig run_config_from_json(const json& j) {
  using namespace config_detail;
  RunConfig c;
  check_keys(j,
             {"seed", "threads", "out", "regime", "dataset", "result", "ground_truth", "model", "pull_log",
              "reward_table", "inference", "classifier", "reward", "random_features", "generate", "bench"},
             "config");
  auto& inf = c.inference;
  read(j, "seed", inf.seed, "config");
  read(j, "threads", inf.threads, "config");
  read(j, "out", c.out, "config");
  read(j, "dataset", c.dataset, "config");
  read(j, "result", c.result, "config");
  read(j, "ground_truth", c.ground_truth, "config");
  read(j, "model", c.model, "config");
  read(j, "pull_log", c.pull_log, "config");
  read(j, "reward_table", c.reward_table, "config");
  if (j.contains("regime") && !j.at("regime").is_null()) {
    Regime r{};
    read_enum(j, "regime", r, "config", regime_from_string);
    inf.regime = r;
  }
  if (j.contains("inference")) {
    const json& s = j.at("inference");
    check_keys(s,
               {"rounds", "batch_size", "folds", "bootstrap_passes", "bootstrap_fraction", "final_weighting",
                "record_pull_log"},
               "inference");
    read(s, "rounds", inf.rounds, "inference");
    read(s, "batch_size", inf.batch_size, "inference");
    read(s, "folds", inf.folds, "inference");
    read(s, "bootstrap_passes", inf.bootstrap_passes, "inference");
    read(s, "bootstrap_fraction", inf.bootstrap_fraction, "inference");
    read_enum(s, "final_weighting", inf.final_weighting, "inference", weighting_from_string);
    read(s, "record_pull_log", inf.record_pull_log, "inference");
  }
  if (j.contains("classifier")) {
    const json& s = j.at("classifier");
    check_keys(s, {"kind", "learning_rate", "epochs", "l2", "batch_size"}, "classifier");
    read_enum(s, "kind", inf.classifier.kind, "classifier", classifier_kind_from_string);
    read(s, "learning_rate", inf.classifier.learning_rate, "classifier");
    read(s, "epochs", inf.classifier.epochs, "classifier");
    read(s, "l2", inf.classifier.l2, "classifier");
    read(s, "batch_size", inf.classifier.batch_size, "classifier");
  }
  if (j.contains("reward")) {
    const json& s = j.at("reward");
    check_keys(s, {"k", "alpha", "gamma", "tau", "distgap", "distgap_space", "num_negative_labels"}, "reward");
    read(s, "k", inf.reward.k, "reward");
    read(s, "alpha", inf.reward.alpha, "reward");
    read(s, "gamma", inf.reward.gamma, "reward");
    read(s, "tau", inf.reward.tau, "reward");
    read(s, "distgap", inf.reward.distgap_enabled, "reward");
    read_enum(s, "distgap_space", inf.reward.distgap_space, "reward", space_from_string);
    read(s, "num_negative_labels", inf.reward.num_negative_labels, "reward");
  }
  if (j.contains("random_features")) {
    const json& s = j.at("random_features");
    check_keys(s, {"width", "bandwidth"}, "random_features");
    read(s, "width", inf.random_features.width, "random_features");
    read(s, "bandwidth", inf.random_features.bandwidth, "random_features");
  }
  if (j.contains("generate")) {
    const json& s = j.at("generate");
    auto& g = c.generate;
    check_keys(s,
               {"regime", "bags", "min_bag_size", "max_bag_size", "feature_dim", "separation", "positive_fraction",
                "witness_rate", "positive_classes", "negative_modes", "per_class", "format"},
               "generate");
    read_enum(s, "regime", g.regime, "generate", regime_from_string);
    read(s, "bags", g.bags, "generate");
    read(s, "min_bag_size", g.min_bag_size, "generate");
    read(s, "max_bag_size", g.max_bag_size, "generate");
    read(s, "feature_dim", g.feature_dim, "generate");
    read(s, "separation", g.separation, "generate");
    read(s, "positive_fraction", g.positive_fraction, "generate");
    read(s, "witness_rate", g.witness_rate, "generate");
    read(s, "positive_classes", g.positive_classes, "generate");
    read(s, "negative_modes", g.negative_modes, "generate");
    read(s, "per_class", g.per_class, "generate");
    read_enum(s, "format", g.format, "generate", format_from_string);
  }
  if (j.contains("bench")) {
    const json& s = j.at("bench");
    check_keys(s, {"repetitions"}, "bench");
    read(s, "repetitions", c.repetitions, "bench");
  }
  return c;
}

inline json run_config_to_json(const RunConfig& c) {
  using namespace config_detail;
  const auto& inf = c.inference;
  const auto& g = c.generate;
  return {
      {"seed", inf.seed},
      {"threads", inf.threads},
      {"out", c.out},
      {"regime", inf.regime ? json(std::string(bliss::to_string(*inf.regime))) : json(nullptr)},
      {"dataset", c.dataset},
      {"result", c.result},
      {"ground_truth", c.ground_truth},
      {"model", c.model},
      {"pull_log", c.pull_log},
      {"reward_table", c.reward_table},
      {"inference",
       {{"rounds", inf.rounds},
        {"batch_size", inf.batch_size},
        {"folds", inf.folds},
        {"bootstrap_passes", inf.bootstrap_passes},
        {"bootstrap_fraction", inf.bootstrap_fraction},
        {"final_weighting", std::string(to_string(inf.final_weighting))},
        {"record_pull_log", inf.record_pull_log}}},
      {"classifier",
       {{"kind", std::string(bliss::to_string(inf.classifier.kind))},
        {"learning_rate", inf.classifier.learning_rate},
        {"epochs", inf.classifier.epochs},
        {"l2", inf.classifier.l2},
        {"batch_size", inf.classifier.batch_size}}},
      {"reward",
       {{"k", inf.reward.k},
        {"alpha", inf.reward.alpha},
        {"gamma", inf.reward.gamma},
        {"tau", inf.reward.tau},
        {"distgap", inf.reward.distgap_enabled},
        {"distgap_space", std::string(to_string(inf.reward.distgap_space))},
        {"num_negative_labels", inf.reward.num_negative_labels}}},
      {"random_features", {{"width", inf.random_features.width}, {"bandwidth", inf.random_features.bandwidth}}},
      {"generate",
       {{"regime", std::string(bliss::to_string(g.regime))},
        {"bags", g.bags},
        {"min_bag_size", g.min_bag_size},
        {"max_bag_size", g.max_bag_size},
        {"feature_dim", g.feature_dim},
        {"separation", g.separation},
        {"positive_fraction", g.positive_fraction},
        {"witness_rate", g.witness_rate},
        {"positive_classes", g.positive_classes},
        {"negative_modes", g.negative_modes},
        {"per_class", g.per_class},
        {"format", std::string(to_string(g.format))}}},
      {"bench", {{"repetitions", c.repetitions}}},
  };
}

inline void validate(const RunConfig& c) {
  try {
    validate(c.inference);
    ClassifierSpec spec = c.inference.classifier;
    validate_spec(spec);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (c.out.empty()) throw ConfigError("out must be a nonempty path");
  if (c.repetitions < 1) throw ConfigError("bench.repetitions must be >= 1");
}

// ---------------------------------------------------------------------------
// Shared helpers.

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(1) + "\n"; }

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " not found: " + path);
}

inline void echo_config(const RunConfig& c) { write_text(fs::path(c.out) / "config.json", dump(run_config_to_json(c))); }

inline std::string dataset_file_name(FileFormat f) { return f == FileFormat::kCsv ? "dataset.csv" : "dataset.json"; }

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// generate

inline Dataset generate_dataset(const GenerateOptions& g, std::uint64_t seed) {
  switch (g.regime) {
    case Regime::kBinaryMil:
      return generate_binary_mil(g.bags, g.min_bag_size, g.max_bag_size, g.positive_fraction, g.feature_dim,
                                 g.separation, seed, g.witness_rate);
    case Regime::kLlp:
      return to_label_proportions(generate_binary_mil(g.bags, g.min_bag_size, g.max_bag_size, g.positive_fraction,
                                                      g.feature_dim, g.separation, seed, g.witness_rate));
    case Regime::kMulticlassMil: {
      const LabeledPool pool = generate_interleaved_blobs(g.positive_classes, g.negative_modes, g.per_class,
                                                          g.feature_dim, g.separation, derive_seed(seed, 1));
      std::set<Label> positives;
      for (Label l = 1; l <= g.positive_classes; ++l) positives.insert(l);
      return generate_multiclass_mil(pool, g.bags, g.min_bag_size, g.max_bag_size, positives, derive_seed(seed, 2));
    }
    case Regime::kCustom:
      break;
  }
  throw ConfigError("generate does not support the custom regime");
}

inline void print_statistics(const Dataset& d, std::ostream& os) {
  const auto hist = label_set_size_histogram(d);
  os << "label-set size  bags\n";
  int total = 0;
  for (std::size_t n = 0; n < hist.size(); ++n) {
    os << std::setw(14) << n << "  " << hist[n] << "\n";
    total += hist[n];
  }
  os << std::setw(14) << "total" << "  " << total << "\n";
  os << "instances: " << d.instances().size() << ", classes: " << d.num_classes() << "\n";
}

inline void cmd_generate(const RunConfig& c, std::ostream& os) {
  Dataset d = [&] {
    try {
      return generate_dataset(c.generate, c.inference.seed);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("generate: ") + e.what());
    }
  }();
  fs::create_directories(c.out);
  save_dataset(strip_ground_truth(d).data(), fs::path(c.out) / dataset_file_name(c.generate.format), c.generate.format);
  write_text(fs::path(c.out) / "ground_truth.json", dump(ground_truth_to_json(ground_truth_of(d))));
  echo_config(c);
  print_statistics(d, os);
}

// ---------------------------------------------------------------------------
// infer

// {"<instance id>": {"<label>": reward, ...}, ...}
inline std::map<InstanceId, std::map<Label, double>> reward_table_from_json(const json& j) {
  std::map<InstanceId, std::map<Label, double>> table;
  try {
    for (const auto& [id, row] : j.items())
      for (const auto& [label, r] : row.items()) table[std::stoll(id)][std::stoi(label)] = r.get<double>();
  } catch (const std::exception& e) {
    throw ParseError(std::string("reward table: ") + e.what());
  }
  return table;
}

inline json model_file_json(const TrainedModel& model, const InferenceConfig& inf) {
  json feature_map = nullptr;
  if (inf.random_features.width > 0)
    feature_map = {{"width", inf.random_features.width},
                   {"bandwidth", inf.random_features.bandwidth},
                   {"seed", derive_seed(inf.seed, 0xfea7)}};
  return {{"classifier", model_to_json(model)}, {"feature_map", feature_map}};
}

// Applies the model file's feature map (if any) to a dataset.
inline Dataset apply_model_feature_map(const json& model_file, const Dataset& d) {
  const json& fm = model_file.at("feature_map");
  if (fm.is_null()) return d;
  return apply_random_feature_map(d, fm.at("width").get<int>(), fm.at("bandwidth").get<double>(),
                                  fm.at("seed").get<std::uint64_t>());
}

inline void write_traces(const PipelineResult& r, const fs::path& dir, bool logs) {
  std::ostringstream csv;
  csv << "pass,fold,pull,mean_reward\n";
  for (const auto& d : r.diagnostics)
    for (std::size_t i = 0; i < d.reward_trace.size(); ++i)
      csv << d.pass << ',' << d.fold << ',' << i + 1 << ',' << d.reward_trace[i] << '\n';
  write_text(dir / "reward_trace.csv", csv.str());
  if (!logs) return;
  fs::create_directories(dir / "pull_logs");
  for (const auto& d : r.diagnostics)
    write_text(dir / "pull_logs" / ("pass" + std::to_string(d.pass) + "_fold" + std::to_string(d.fold) + ".ndjson"),
               to_ndjson(d.pull_log));
}

struct InferOutcome {
  PipelineResult result;
  double seconds = 0.0;
};

// The custom regime reads its rewards from a table and needs no dataset.
inline bool uses_reward_table(const RunConfig& c) { return c.inference.regime == Regime::kCustom; }

inline InferOutcome run_infer(const RunConfig& c, const std::optional<Dataset>& loaded) {
  const Regime regime = uses_reward_table(c) ? Regime::kCustom : c.inference.regime.value_or(loaded->regime());
  const fs::path out(c.out);
  const auto start = Clock::now();
  InferOutcome o;
  if (regime == Regime::kCustom) {
    require_file(c.reward_table, "reward table");
    const TableEnvironment env(reward_table_from_json(read_json_file(c.reward_table)));
    Rng rng(c.inference.seed);
    PullLog log;
    RunTrace trace;
    const auto r = run_inference(env.label_sets(), env,
                                 BanditConfig{c.inference.rounds, c.inference.batch_size, c.inference.threads}, rng,
                                 &log, &trace);
    o.result.labels = r.assignment;
    o.result.confidence = r.confidence;
    FoldDiagnostics d;
    d.num_instances = r.assignment.size();
    d.pulls = r.pull_history_length;
    d.reward_trace = trace.mean_reward;
    d.pull_log = std::move(log);
    o.result.diagnostics.push_back(std::move(d));
    o.seconds = seconds_since(start);
    write_text(out / "result.json", dump(to_json(o.result)));
  } else {
    InferenceConfig inf = c.inference;
    inf.regime = regime;
    o.result = bootstrap_infer(strip_ground_truth(*loaded), inf);
    o.seconds = seconds_since(start);
    write_text(out / "result.json", dump(to_json(o.result)));
    write_text(out / "model.json", dump(model_file_json(o.result.model, inf)));
  }
  write_traces(o.result, out, c.inference.record_pull_log);
  return o;
}

inline InferOutcome cmd_infer(const RunConfig& c, std::ostream& os) {
  std::optional<Dataset> loaded;
  if (uses_reward_table(c)) {
    require_file(c.reward_table, "reward table");
  } else {
    require_file(c.dataset, "dataset");
    loaded = load_dataset(c.dataset);
  }
  fs::create_directories(c.out);
  echo_config(c);
  InferOutcome o = run_infer(c, loaded);
  std::size_t fixed = 0;
  for (const auto& [id, conf] : o.result.confidence) fixed += is_fixed(conf) ? 1 : 0;
  os << "inferred labels for " << o.result.labels.size() << " instances (" << fixed << " fixed) in "
     << std::fixed << std::setprecision(2) << o.seconds << " s\n";
  return o;
}

// ---------------------------------------------------------------------------
// evaluate

inline MetricsReport evaluate_files(const RunConfig& c) {
  require_file(c.result, "result");
  require_file(c.ground_truth, "ground truth");
  require_file(c.dataset, "dataset");
  const PipelineResult result = pipeline_result_from_json(read_json_file(c.result));
  const Dataset d = with_ground_truth(load_dataset(c.dataset), ground_truth_from_json(read_json_file(c.ground_truth)));
  MetricsReport report;
  report.inferred = label_accuracy(result.labels, d);
  if (d.regime() == Regime::kMulticlassMil) report.label_set_bag_accuracy = label_set_bag_accuracy(result.labels, d);
  if (!c.model.empty()) {
    require_file(c.model, "model");
    const json model_file = read_json_file(c.model);
    const TrainedModel model = model_from_json(model_file.at("classifier"));
    const Dataset mapped = apply_model_feature_map(model_file, d);
    const LabelAssignment predicted = model_labels(model, mapped);
    report.classifier = label_accuracy(predicted, mapped);
    if (d.regime() == Regime::kBinaryMil) report.bag_accuracy = bag_accuracy_from_labels(predicted, mapped);
  }
  if (!c.pull_log.empty()) {
    require_file(c.pull_log, "pull log");
    std::ifstream in(c.pull_log, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    report.reward_trace = reward_trace_summary(pull_log_from_ndjson(text.str()));
  }
  return report;
}

inline void print_report(const MetricsReport& r, std::ostream& os) {
  os << std::fixed << std::setprecision(4);
  auto print_labels = [&](const char* name, const LabelMetrics& m) {
    os << name << " accuracy: " << m.accuracy << " over " << m.total << " instances\n";
    for (const auto& [cls, acc] : m.per_class_accuracy)
      os << "  class " << cls << ": " << acc << " (" << m.support.at(cls) << ")\n";
  };
  if (r.inferred) print_labels("inferred label", *r.inferred);
  if (r.classifier) print_labels("classifier", *r.classifier);
  if (r.bag_accuracy) os << "bag accuracy: " << *r.bag_accuracy << "\n";
  if (r.label_set_bag_accuracy) os << "label-set bag accuracy: " << *r.label_set_bag_accuracy << "\n";
  if (!r.reward_trace.empty())
    os << "final running-best mean reward: " << r.reward_trace.back().running_best_mean << "\n";
}

inline MetricsReport cmd_evaluate(const RunConfig& c, std::ostream& os) {
  const MetricsReport report = evaluate_files(c);
  fs::create_directories(c.out);
  write_text(fs::path(c.out) / "metrics.json", dump(to_json(report)));
  print_report(report, os);
  return report;
}

// ---------------------------------------------------------------------------
// bench

// Scalar metrics of one run, keyed by name.
inline std::map<std::string, double> scalar_metrics(const MetricsReport& r) {
  std::map<std::string, double> m;
  if (r.inferred) {
    m["inferred_accuracy"] = r.inferred->accuracy;
    if (r.inferred->per_class_accuracy.count(0)) m["inferred_negative_accuracy"] = r.inferred->per_class_accuracy.at(0);
  }
  if (r.classifier) m["classifier_accuracy"] = r.classifier->accuracy;
  if (r.bag_accuracy) m["bag_accuracy"] = *r.bag_accuracy;
  if (r.label_set_bag_accuracy) m["label_set_bag_accuracy"] = *r.label_set_bag_accuracy;
  return m;
}

// Mean and population standard deviation.
inline json mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {{"mean", mean}, {"std", std::sqrt(var)}, {"values", v}};
}

inline json cmd_bench(const RunConfig& c, std::ostream& os) {
  fs::create_directories(c.out);
  echo_config(c);
  std::map<std::string, std::vector<double>> metrics, timings;
  std::vector<std::uint64_t> seeds;
  for (int rep = 0; rep < c.repetitions; ++rep) {
    const std::uint64_t seed = derive_seed(c.inference.seed, 0xbe9c, static_cast<std::uint64_t>(rep));
    seeds.push_back(seed);
    RunConfig run = c;
    run.inference.seed = seed;
    run.out = (fs::path(c.out) / ("run_" + std::to_string(rep))).string();
    run.dataset = (fs::path(run.out) / dataset_file_name(c.generate.format)).string();
    run.result = (fs::path(run.out) / "result.json").string();
    run.ground_truth = (fs::path(run.out) / "ground_truth.json").string();
    run.model = (fs::path(run.out) / "model.json").string();
    run.pull_log.clear();
    run.inference.regime = c.generate.regime;
    try {
      std::ostringstream quiet;
      auto t0 = Clock::now();
      cmd_generate(run, quiet);
      timings["generate"].push_back(seconds_since(t0));
      t0 = Clock::now();
      cmd_infer(run, quiet);
      timings["infer"].push_back(seconds_since(t0));
      t0 = Clock::now();
      const MetricsReport report = cmd_evaluate(run, quiet);
      timings["evaluate"].push_back(seconds_since(t0));
      for (const auto& [name, v] : scalar_metrics(report)) metrics[name].push_back(v);
    } catch (const Error& e) {
      throw InferenceError("repetition " + std::to_string(rep) + " (seed " + std::to_string(seed) + "): " + e.what());
    }
  }
  json summary = {{"repetitions", c.repetitions}, {"seeds", seeds}};
  json m = json::object(), t = json::object();
  for (const auto& [name, v] : metrics) m[name] = mean_std(v);
  for (const auto& [name, v] : timings) t[name] = mean_std(v);
  summary["metrics"] = m;
  summary["timings_seconds"] = t;
  write_text(fs::path(c.out) / "summary.json", dump(summary));
  os << std::fixed << std::setprecision(4);
  for (const auto& [name, v] : m.items())
    os << name << ": " << v["mean"].get<double>() << " +- " << v["std"].get<double>() << "\n";
  for (const auto& [name, v] : t.items())
    os << "time " << name << ": " << v["mean"].get<double>() << " s\n";
  return summary;
}

}  // namespace bliss::cli

#endif  // BLISS_TOOLS_CLI_HPP_
