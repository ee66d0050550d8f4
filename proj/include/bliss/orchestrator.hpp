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

// End-to-end label inference over a whole dataset: admissible labels from
// weak labels, K-fold bandit runs, bootstrapping on confident labels, and the
// final classifier.

#ifndef BLISS_ORCHESTRATOR_HPP_
#define BLISS_ORCHESTRATOR_HPP_

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bliss/bandit.hpp"
#include "bliss/classifiers.hpp"
#include "bliss/data.hpp"
#include "bliss/error.hpp"
#include "bliss/random.hpp"
#include "bliss/rewards.hpp"

namespace bliss {

enum class Weighting { kUniform, kConfidence };

struct RandomFeatureConfig {
  int width = 0;  // 0 disables the map
  double bandwidth = 1.0;
};

struct InferenceConfig {
  std::int64_t rounds = 500;  // N
  int batch_size = 4;         // P
  int folds = 5;              // K
  int bootstrap_passes = 1;
  double bootstrap_fraction = 0.5;  // rho, applied per inferred class
  ClassifierSpec classifier;        // num_classes and grouping are derived
  RewardParams reward;
  std::optional<Regime> regime;  // defaults to the dataset's regime
  std::uint64_t seed = 0;
  RandomFeatureConfig random_features;
  Weighting final_weighting = Weighting::kUniform;
  int threads = 1;
  bool record_pull_log = false;
};

inline void validate(const InferenceConfig& c) {
  if (c.rounds < 1) throw ParameterError("rounds must be >= 1");
  if (c.batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (c.folds < 2) throw ParameterError("folds must be >= 2");
  if (c.bootstrap_passes < 1) throw ParameterError("bootstrap_passes must be >= 1");
  if (!(c.bootstrap_fraction > 0.0 && c.bootstrap_fraction < 1.0))
    throw ParameterError("bootstrap_fraction must be in (0,1)");
  if (c.threads < 1) throw ParameterError("threads must be >= 1");
  if (c.random_features.width < 0) throw ParameterError("random feature width must be >= 0");
  if (c.random_features.width > 0 && !(c.random_features.bandwidth > 0.0))
    throw ParameterError("random feature bandwidth must be positive");
  validate(c.reward);
}

// Negative label ids: 0, then num_classes .. num_classes + m - 2.
inline std::vector<Label> negative_labels(int num_classes, int num_negative_labels) {
  std::vector<Label> out{kNegativeLabel};
  for (int j = 1; j < num_negative_labels; ++j) out.push_back(num_classes + j - 1);
  return out;
}

// Classifier spec for a dataset with num_classes semantic classes and m
// negative modes. The cooperative softmax groups all negative modes together.
inline ClassifierSpec classifier_for(const ClassifierSpec& base, int num_classes, int num_negative_labels) {
  ClassifierSpec spec = base;
  spec.num_classes = num_classes + num_negative_labels - 1;
  spec.grouping.clear();
  if (spec.kind == ClassifierKind::kCooperativeSoftmax) {
    spec.grouping.push_back(negative_labels(num_classes, num_negative_labels));
    for (Label l = 1; l < num_classes; ++l) spec.grouping.push_back({l});
  }
  return spec;
}

// Admissible labels per instance.
//   binary MIL:      negative bag -> negatives; positive bag -> negatives + {1}
//   multi-class MIL: negatives + the bag's label set
//   LLP:             proportion 0 -> negatives, 1 -> {1}, otherwise both
//   custom:          every label
inline LabelSets derive_label_sets(const Dataset& dataset, Regime regime, int num_negative_labels) {
  if (num_negative_labels < 1) throw ParameterError("num_negative_labels must be >= 1");
  const auto negatives = negative_labels(dataset.num_classes(), num_negative_labels);
  LabelSets out;
  for (const auto& bag : dataset.bags()) {
    std::vector<Label> labels;
    const std::string where = "bag " + std::to_string(bag.id);
    switch (regime) {
      case Regime::kBinaryMil: {
        const auto* b = std::get_if<BinaryBagLabel>(&bag.weak_label);
        if (!b) throw ConfigError(where + ": binary-mil regime needs binary bag labels");
        labels = negatives;
        if (b->positive) labels.push_back(1);
        break;
      }
      case Regime::kMulticlassMil: {
        const auto* s = std::get_if<LabelSet>(&bag.weak_label);
        if (!s) throw ConfigError(where + ": multiclass-mil regime needs label-set bag labels");
        labels = negatives;
        labels.insert(labels.end(), s->labels.begin(), s->labels.end());
        break;
      }
      case Regime::kLlp: {
        const auto* p = std::get_if<Proportion>(&bag.weak_label);
        if (!p) throw ConfigError(where + ": llp regime needs label-proportion bags");
        if (p->value < 1.0) labels = negatives;
        if (p->value > 0.0) labels.push_back(1);
        break;
      }
      case Regime::kCustom:
        labels = negatives;
        for (Label l = 1; l < dataset.num_classes(); ++l) labels.push_back(l);
        break;
    }
    std::sort(labels.begin(), labels.end());
    for (InstanceId id : bag.instance_ids) out.emplace(id, labels);
  }
  return out;
}

struct FoldDiagnostics {
  int pass = 1;
  int fold = 0;
  std::size_t num_instances = 0;
  std::size_t num_heldout = 0;
  std::int64_t pulls = 0;
  std::vector<double> reward_trace;
  PullLog pull_log;  // only when InferenceConfig::record_pull_log
};

struct PipelineResult {
  LabelAssignment labels;
  std::map<InstanceId, double> confidence;  // kFixedConfidence for forced labels
  TrainedModel model;
  std::vector<FoldDiagnostics> diagnostics;
  std::vector<std::set<InstanceId>> fixed_per_pass;  // bootstrap-fixed set at the start of each pass
};

inline nlohmann::json to_json(const PipelineResult& r) {
  nlohmann::json labels = nlohmann::json::object(), confidence = nlohmann::json::object();
  for (const auto& [id, l] : r.labels) labels[std::to_string(id)] = l;
  for (const auto& [id, c] : r.confidence)
    confidence[std::to_string(id)] = is_fixed(c) ? nlohmann::json("fixed") : nlohmann::json(c);
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& d : r.diagnostics) {
    folds.push_back({{"pass", d.pass},
                     {"fold", d.fold},
                     {"instances", d.num_instances},
                     {"heldout_instances", d.num_heldout},
                     {"pulls", d.pulls},
                     {"reward_trace", d.reward_trace}});
  }
  nlohmann::json fixed = nlohmann::json::array();
  for (const auto& s : r.fixed_per_pass) fixed.push_back(s);
  return {{"labels", labels}, {"confidence", confidence}, {"diagnostics", {{"folds", folds}, {"fixed_per_pass", fixed}}}};
}

// Reads the labels and confidences back (diagnostics are informational).
inline PipelineResult pipeline_result_from_json(const nlohmann::json& j) {
  PipelineResult r;
  try {
    for (const auto& [key, v] : j.at("labels").items()) r.labels[std::stoll(key)] = v.get<Label>();
    if (j.contains("confidence"))
      for (const auto& [key, v] : j.at("confidence").items())
        r.confidence[std::stoll(key)] = v.is_string() ? kFixedConfidence : v.get<double>();
    if (j.contains("diagnostics") && j.at("diagnostics").contains("fixed_per_pass"))
      for (const auto& s : j.at("diagnostics").at("fixed_per_pass"))
        r.fixed_per_pass.push_back(s.get<std::set<InstanceId>>());
  } catch (const std::exception& e) {
    throw ParseError(std::string("result: ") + e.what());
  }
  return r;
}

// Cosine random features z(x) = sqrt(2/W) cos(w.x + b), w ~ N(0, I/bw^2),
// b ~ U[0, 2pi); z(x).z(y) approximates exp(-|x-y|^2 / (2 bw^2)).
inline Dataset apply_random_feature_map(const Dataset& dataset, int width, double bandwidth, std::uint64_t seed) {
  if (width < 1) throw ParameterError("random feature width must be >= 1");
  if (!(bandwidth > 0.0)) throw ParameterError("random feature bandwidth must be positive");
  const std::size_t dim = dataset.feature_dim();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / bandwidth);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<std::vector<double>> omega(width, std::vector<double>(dim));
  std::vector<double> offset(width);
  for (int j = 0; j < width; ++j) {
    for (auto& v : omega[j]) v = normal(rng);
    offset[j] = phase(rng);
  }
  const double scale = std::sqrt(2.0 / width);
  std::vector<Instance> instances = dataset.instances();
  for (auto& x : instances) {
    std::vector<double> z(width);
    for (int j = 0; j < width; ++j) {
      double a = offset[j];
      for (std::size_t d = 0; d < dim; ++d) a += omega[j][d] * x.features[d];
      z[j] = scale * std::cos(a);
    }
    x.features = std::move(z);
  }
  return Dataset(std::move(instances), dataset.bags(), dataset.num_classes(), dataset.regime());
}

// Applies the configured feature map, or returns the dataset unchanged when
// the map is disabled.
inline Dataset maybe_apply_feature_map(const Dataset& dataset, const InferenceConfig& config) {
  if (config.random_features.width == 0) return dataset;
  return apply_random_feature_map(dataset, config.random_features.width, config.random_features.bandwidth,
                                  derive_seed(config.seed, 0xfea7));
}

// Per-instance weights for the final fit: 1 (uniform), or c(x) / max c with
// forced labels at weight 1.
inline std::map<InstanceId, double> final_training_weights(const PipelineResult& result, Weighting weighting) {
  std::map<InstanceId, double> w;
  double max_c = 0.0;
  for (const auto& [id, c] : result.confidence)
    if (!is_fixed(c)) max_c = std::max(max_c, c);
  for (const auto& [id, label] : result.labels) {
    (void)label;
    if (weighting == Weighting::kUniform) {
      w[id] = 1.0;
      continue;
    }
    auto it = result.confidence.find(id);
    const double c = it == result.confidence.end() ? 0.0 : it->second;
    w[id] = is_fixed(c) ? 1.0 : (max_c > 0.0 ? std::max(0.0, c) / max_c : 0.0);
  }
  return w;
}

// Fits `spec` on every instance with its inferred label.
inline TrainedModel train_final(const WeakDataset& data, const PipelineResult& result, const ClassifierSpec& spec,
                                Weighting weighting) {
  const Dataset& d = data.data();
  std::vector<InstanceId> ids;
  std::vector<Label> y;
  for (const auto& x : d.instances()) {
    auto it = result.labels.find(x.id);
    if (it == result.labels.end()) throw CompletenessError("no inferred label for instance " + std::to_string(x.id));
    ids.push_back(x.id);
    y.push_back(it->second);
  }
  const auto weights_by_id = final_training_weights(result, weighting);
  std::vector<double> w;
  for (InstanceId id : ids) w.push_back(weights_by_id.at(id));
  return fit(spec, feature_matrix(d, ids), y, weighting == Weighting::kUniform ? std::span<const double>{} : std::span<const double>(w));
}

namespace orchestrator_detail {

// Bag ids per fold: seeded shuffle, then round-robin.
inline std::vector<std::vector<BagId>> make_folds(const Dataset& d, int folds, std::uint64_t seed) {
  if (folds < 2) throw ParameterError("folds must be >= 2");
  if (static_cast<std::size_t>(folds) > d.bags().size())
    throw ParameterError("folds (" + std::to_string(folds) + ") exceed the number of bags (" +
                         std::to_string(d.bags().size()) + ")");
  std::vector<BagId> ids;
  for (const auto& b : d.bags()) ids.push_back(b.id);
  Rng rng(derive_seed(seed, 0xf01d));
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<std::vector<BagId>> out(folds);
  for (std::size_t i = 0; i < ids.size(); ++i) out[i % folds].push_back(ids[i]);
  return out;
}

struct FoldOutcome {
  InferenceResult result;
  FoldDiagnostics diagnostics;
};

// One pass over all folds with `fixed` instances held at their labels.
inline PipelineResult run_pass(const std::shared_ptr<const WeakDataset>& data, const InferenceConfig& config,
                               const LabelSets& label_sets, const LabelAssignment& fixed, int pass,
                               const CustomReward& custom) {
  const Dataset& d = data->data();
  const Regime regime = config.regime.value_or(d.regime());
  const ClassifierSpec spec = classifier_for(config.classifier, d.num_classes(), config.reward.num_negative_labels);
  const auto folds = make_folds(d, config.folds, config.seed);
  std::map<BagId, std::size_t> bag_pos;
  for (std::size_t b = 0; b < d.bags().size(); ++b) bag_pos.emplace(d.bags()[b].id, b);

  auto run_fold = [&](int f, int batch_threads) -> FoldOutcome {
    std::vector<InstanceId> train_ids;
    LabelSets fold_sets;
    for (BagId b : folds[f])
      for (InstanceId id : d.bags()[bag_pos.at(b)].instance_ids)
        if (!fixed.count(id)) {
          train_ids.push_back(id);
          fold_sets.emplace(id, label_sets.at(id));
        }
    FoldOutcome out;
    out.diagnostics.pass = pass;
    out.diagnostics.fold = f;
    out.diagnostics.num_instances = train_ids.size();
    if (train_ids.empty()) return out;
    std::vector<BagId> heldout;
    for (int g = 0; g < config.folds; ++g)
      if (g != f) heldout.insert(heldout.end(), folds[g].begin(), folds[g].end());
    std::sort(heldout.begin(), heldout.end());
    try {
      RewardEnvironment env(data, train_ids, heldout, spec, config.reward, regime, fixed, custom,
                            derive_seed(config.seed, 0xca1, static_cast<std::uint64_t>(f)));
      out.diagnostics.num_heldout = env.heldout_size();
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(pass), static_cast<std::uint64_t>(f)));
      RunTrace trace;
      BanditConfig bc{config.rounds, config.batch_size, batch_threads};
      out.result = run_inference(fold_sets, env, bc, rng, config.record_pull_log ? &out.diagnostics.pull_log : nullptr,
                                 &trace);
      out.diagnostics.reward_trace = std::move(trace.mean_reward);
      out.diagnostics.pulls = out.result.pull_history_length;
    } catch (const Error& e) {
      throw InferenceError("pass " + std::to_string(pass) + ", fold " + std::to_string(f) + ": " + e.what());
    }
    return out;
  };

  std::vector<FoldOutcome> outcomes(config.folds);
  if (config.threads > 1) {
    // Folds run concurrently; each bandit evaluates its batch serially.
    std::vector<std::future<FoldOutcome>> pending;
    for (int f = 0; f < config.folds; ++f) {
      pending.push_back(std::async(std::launch::async, run_fold, f, 1));
      if (static_cast<int>(pending.size()) == config.threads || f + 1 == config.folds) {
        const int first = f + 1 - static_cast<int>(pending.size());
        for (std::size_t i = 0; i < pending.size(); ++i) outcomes[first + i] = pending[i].get();
        pending.clear();
      }
    }
  } else {
    for (int f = 0; f < config.folds; ++f) outcomes[f] = run_fold(f, 1);
  }

  PipelineResult merged;
  for (auto& o : outcomes) {
    for (const auto& [id, l] : o.result.assignment) merged.labels[id] = l;
    for (const auto& [id, c] : o.result.confidence) merged.confidence[id] = c;
    merged.diagnostics.push_back(std::move(o.diagnostics));
  }
  for (const auto& [id, l] : fixed) {
    merged.labels[id] = l;
    merged.confidence[id] = kFixedConfidence;
  }
  return merged;
}

// Top-rho fraction (per inferred class) of the not-yet-fixed instances with
// a real confidence score.
inline LabelAssignment most_confident(const PipelineResult& r, const LabelAssignment& fixed, double fraction) {
  std::map<Label, std::vector<std::pair<double, InstanceId>>> by_class;
  for (const auto& [id, label] : r.labels) {
    if (fixed.count(id)) continue;
    const double c = r.confidence.at(id);
    if (is_fixed(c)) continue;
    by_class[label].emplace_back(c, id);
  }
  LabelAssignment out;
  for (auto& [label, entries] : by_class) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(entries.size())));
    for (std::size_t i = 0; i < take; ++i) out.emplace(entries[i].second, label);
  }
  return out;
}

}  // namespace orchestrator_detail

// Repeated K-fold inference. Pass 1 is plain K-fold inference; each later
// pass fixes the most confident labels of the previous pass, adds them to the
// classifier's training data in every fold, and re-infers the rest.
inline PipelineResult bootstrap_infer(const WeakDataset& input, const InferenceConfig& config,
                                      const CustomReward& custom = {}) {
  validate(config);
  auto data = std::make_shared<const WeakDataset>(strip_ground_truth(maybe_apply_feature_map(input.data(), config)));
  const Dataset& d = data->data();
  const Regime regime = config.regime.value_or(d.regime());
  const LabelSets label_sets = derive_label_sets(d, regime, config.reward.num_negative_labels);

  LabelAssignment fixed;
  PipelineResult result;
  std::vector<std::set<InstanceId>> fixed_per_pass;
  std::vector<FoldDiagnostics> diagnostics;
  for (int pass = 1; pass <= config.bootstrap_passes; ++pass) {
    std::set<InstanceId> fixed_ids;
    for (const auto& [id, l] : fixed) fixed_ids.insert(id);
    fixed_per_pass.push_back(std::move(fixed_ids));
    result = orchestrator_detail::run_pass(data, config, label_sets, fixed, pass, custom);
    for (auto& diag : result.diagnostics) diagnostics.push_back(std::move(diag));
    if (pass < config.bootstrap_passes) {
      for (const auto& [id, l] : orchestrator_detail::most_confident(result, fixed, config.bootstrap_fraction))
        fixed.emplace(id, l);
    }
  }
  result.diagnostics = std::move(diagnostics);
  result.fixed_per_pass = std::move(fixed_per_pass);
  const ClassifierSpec spec = classifier_for(config.classifier, d.num_classes(), config.reward.num_negative_labels);
  ClassifierSpec final_spec = spec;
  final_spec.seed = derive_seed(config.seed, 0xf1a1);
  result.model = train_final(*data, result, final_spec, config.final_weighting);
  return result;
}

// Single-pass K-fold inference: each fold in turn is the training set S and
// the remaining folds are the weakly labeled held-out set.
inline PipelineResult kfold_infer(const WeakDataset& data, const InferenceConfig& config,
                                  const CustomReward& custom = {}) {
  InferenceConfig single = config;
  single.bootstrap_passes = 1;
  return bootstrap_infer(data, single, custom);
}

// Binary MIL bags built from a multi-class inference result. Every original
// bag yields one positive bag per positive inferred label (its instances with
// that label, tagged with the label); a bag with no positive inferred label
// becomes one negative bag. Negatively inferred instances of bags that have a
// positive inferred label are dropped.
struct SplitResult {
  Dataset dataset;                       // all positive and negative bags
  std::map<BagId, Label> source_label;   // positive bag -> inferred label
  GroundTruth original_ground_truth;

  // Binary problem for one positive label: its positive bags plus every
  // negative bag.
  Dataset for_class(Label label) const {
    std::vector<Bag> bags;
    std::vector<Instance> instances;
    for (const auto& bag : dataset.bags()) {
      auto it = source_label.find(bag.id);
      const bool keep = it == source_label.end() ? true : it->second == label;
      if (!keep) continue;
      bags.push_back(bag);
      for (InstanceId id : bag.instance_ids) {
        Instance x = dataset.instance(id);
        auto gt = original_ground_truth.find(id);
        x.ground_truth = gt == original_ground_truth.end() ? std::nullopt
                                                           : std::optional<Label>(gt->second == label ? 1 : 0);
        instances.push_back(std::move(x));
      }
    }
    return Dataset(std::move(instances), std::move(bags), 2, Regime::kBinaryMil);
  }
};

inline SplitResult split_bags_by_inferred_label(const Dataset& dataset, const PipelineResult& result) {
  const int m = dataset.num_classes();
  std::vector<Bag> bags;
  std::vector<Instance> instances;
  std::map<BagId, Label> source;
  BagId next = 0;
  bool any_positive = false;
  auto take = [&](InstanceId id, bool positive_bag, Label source_label) {
    Instance x = dataset.instance(id);
    if (x.ground_truth) {
      const Label gt = semantic_label(*x.ground_truth, m);
      x.ground_truth = positive_bag ? (gt == source_label ? 1 : 0) : (gt > 0 ? 1 : 0);
    }
    instances.push_back(std::move(x));
  };
  for (const auto& bag : dataset.bags()) {
    std::map<Label, std::vector<InstanceId>> by_label;
    for (InstanceId id : bag.instance_ids) {
      auto it = result.labels.find(id);
      if (it == result.labels.end()) throw CompletenessError("no inferred label for instance " + std::to_string(id));
      const Label l = semantic_label(it->second, m);
      if (l != kNegativeLabel) by_label[l].push_back(id);
    }
    if (by_label.empty()) {
      bags.push_back(Bag{next++, bag.instance_ids, BinaryBagLabel{false}});
      for (InstanceId id : bag.instance_ids) take(id, false, kNegativeLabel);
      continue;
    }
    any_positive = true;
    for (const auto& [label, ids] : by_label) {
      source.emplace(next, label);
      bags.push_back(Bag{next++, ids, BinaryBagLabel{true}});
      for (InstanceId id : ids) take(id, true, label);
    }
  }
  if (!any_positive) throw ValidationError("no instance has a positive inferred label; nothing to split");
  return SplitResult{Dataset(std::move(instances), std::move(bags), 2, Regime::kBinaryMil), std::move(source),
                     ground_truth_of(dataset)};
}

}  // namespace bliss

#endif  // BLISS_ORCHESTRATOR_HPP_
