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

// Metrics against ground truth, which is only available outside inference.

#ifndef BLISS_EVAL_HPP_
#define BLISS_EVAL_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bliss/bandit.hpp"
#include "bliss/classifiers.hpp"
#include "bliss/data.hpp"
#include "bliss/error.hpp"

namespace bliss {

// Labels predicted by `model` for every instance of `dataset`.
inline LabelAssignment model_labels(const TrainedModel& model, const Dataset& dataset) {
  std::vector<InstanceId> ids;
  for (const auto& x : dataset.instances()) ids.push_back(x.id);
  const auto preds = predict(model, feature_matrix(dataset, ids));
  LabelAssignment out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], preds[i].label);
  return out;
}

// Fraction of binary bags whose label equals "some instance is predicted
// positive".
inline double bag_accuracy_from_labels(const LabelAssignment& labels, const Dataset& dataset) {
  if (dataset.regime() != Regime::kBinaryMil)
    throw RegimeError("bag accuracy needs a binary-mil dataset, got " + std::string(to_string(dataset.regime())));
  const int m = dataset.num_classes();
  std::size_t correct = 0;
  for (const auto& bag : dataset.bags()) {
    const auto* b = std::get_if<BinaryBagLabel>(&bag.weak_label);
    if (!b) throw RegimeError("bag " + std::to_string(bag.id) + " has no binary label");
    bool any = false;
    for (InstanceId id : bag.instance_ids) {
      auto it = labels.find(id);
      if (it == labels.end()) throw CompletenessError("no label for instance " + std::to_string(id));
      any = any || is_positive(it->second, m);
    }
    correct += any == b->positive;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.bags().size());
}

inline double bag_accuracy(const TrainedModel& model, const Dataset& dataset) {
  if (dataset.regime() != Regime::kBinaryMil)
    throw RegimeError("bag accuracy needs a binary-mil dataset, got " + std::string(to_string(dataset.regime())));
  return bag_accuracy_from_labels(model_labels(model, dataset), dataset);
}

// Multi-class MIL: a bag is correct when the set of positive predicted
// labels equals its label set.
inline double label_set_bag_accuracy(const LabelAssignment& labels, const Dataset& dataset) {
  if (dataset.regime() != Regime::kMulticlassMil)
    throw RegimeError("label-set bag accuracy needs a multiclass-mil dataset");
  const int m = dataset.num_classes();
  std::size_t correct = 0;
  for (const auto& bag : dataset.bags()) {
    std::set<Label> predicted;
    for (InstanceId id : bag.instance_ids) {
      auto it = labels.find(id);
      if (it == labels.end()) throw CompletenessError("no label for instance " + std::to_string(id));
      const Label l = semantic_label(it->second, m);
      if (l != kNegativeLabel) predicted.insert(l);
    }
    correct += predicted == positive_label_set(bag.weak_label);
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.bags().size());
}

// Instance-level agreement with ground truth. Extra negative modes count as
// the negative class. confusion[truth][predicted].
struct LabelMetrics {
  double accuracy = 0.0;
  std::map<Label, double> per_class_accuracy;  // recall of each true class present
  std::map<Label, std::int64_t> support;
  std::vector<std::vector<std::int64_t>> confusion;
  std::int64_t total = 0;
};

inline LabelMetrics label_accuracy(const LabelAssignment& predicted, const Dataset& dataset) {
  if (!dataset.has_ground_truth()) throw ValidationError("dataset has no ground truth");
  const int m = dataset.num_classes();
  LabelMetrics out;
  out.confusion.assign(m, std::vector<std::int64_t>(m, 0));
  std::int64_t correct = 0;
  for (const auto& [id, label] : predicted) {
    if (!dataset.contains(id)) throw ValidationError("unknown instance " + std::to_string(id));
    const Label truth = semantic_label(*dataset.instance(id).ground_truth, m);
    const Label guess = semantic_label(label, m);
    if (guess < 0 || guess >= m) throw ValidationError("label " + std::to_string(label) + " out of range");
    ++out.confusion[truth][guess];
    ++out.support[truth];
    correct += truth == guess;
    ++out.total;
  }
  if (out.total == 0) throw ParameterError("no labels to evaluate");
  out.accuracy = static_cast<double>(correct) / static_cast<double>(out.total);
  for (const auto& [cls, n] : out.support)
    out.per_class_accuracy[cls] = static_cast<double>(out.confusion[cls][cls]) / static_cast<double>(n);
  return out;
}

// Per post-initialization round: the mean reward of its pulls and the mean,
// over instances, of the best empirical arm mean after the round.
struct TracePoint {
  std::int64_t round = 0;
  double mean_reward = 0.0;
  double running_best_mean = 0.0;
};

inline std::vector<TracePoint> reward_trace_summary(const PullLog& log) {
  if (log.empty()) throw ParameterError("pull log is empty");
  struct Arm {
    std::int64_t pulls = 0;
    double sum = 0.0;
  };
  std::map<InstanceId, std::map<Label, Arm>> arms;
  std::map<InstanceId, double> best;
  double best_sum = 0.0;
  auto refresh = [&](InstanceId id) {
    double b = 0.0;
    bool any = false;
    for (const auto& [l, a] : arms[id]) {
      if (a.pulls == 0) continue;
      const double mean = a.sum / static_cast<double>(a.pulls);
      b = any ? std::max(b, mean) : mean;
      any = true;
    }
    auto [it, inserted] = best.try_emplace(id, 0.0);
    best_sum += b - (inserted ? 0.0 : it->second);
    it->second = b;
  };
  std::vector<TracePoint> out;
  std::size_t i = 0;
  while (i < log.size()) {
    const std::int64_t round = log[i].round;
    double sum = 0.0;
    std::size_t n = 0;
    std::set<InstanceId> touched;
    for (; i < log.size() && log[i].round == round; ++i, ++n) {
      auto& a = arms[log[i].instance_id][log[i].label];
      ++a.pulls;
      a.sum += log[i].reward;
      sum += log[i].reward;
      touched.insert(log[i].instance_id);
    }
    for (InstanceId id : touched) refresh(id);
    if (round == 0) continue;
    out.push_back({round, sum / static_cast<double>(n), best_sum / static_cast<double>(best.size())});
  }
  return out;
}

// Everything the CLI reports for one run.
struct MetricsReport {
  std::optional<double> bag_accuracy;            // binary MIL, final classifier
  std::optional<double> label_set_bag_accuracy;  // multi-class MIL, inferred labels
  std::optional<LabelMetrics> inferred;          // inferred labels vs ground truth
  std::optional<LabelMetrics> classifier;        // final classifier vs ground truth
  std::vector<TracePoint> reward_trace;
};

inline nlohmann::json to_json(const LabelMetrics& m) {
  nlohmann::json per_class = nlohmann::json::object(), support = nlohmann::json::object();
  for (const auto& [c, v] : m.per_class_accuracy) per_class[std::to_string(c)] = v;
  for (const auto& [c, v] : m.support) support[std::to_string(c)] = v;
  return {{"accuracy", m.accuracy},
          {"per_class_accuracy", per_class},
          {"support", support},
          {"confusion", m.confusion},
          {"total", m.total}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.bag_accuracy) j["bag_accuracy"] = *r.bag_accuracy;
  if (r.label_set_bag_accuracy) j["label_set_bag_accuracy"] = *r.label_set_bag_accuracy;
  if (r.inferred) j["inferred_labels"] = to_json(*r.inferred);
  if (r.classifier) j["classifier_labels"] = to_json(*r.classifier);
  if (!r.reward_trace.empty()) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& p : r.reward_trace)
      t.push_back({{"round", p.round}, {"mean_reward", p.mean_reward}, {"running_best_mean", p.running_best_mean}});
    j["reward_trace"] = t;
  }
  return j;
}

}  // namespace bliss

#endif  // BLISS_EVAL_HPP_
