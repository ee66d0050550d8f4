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

// Dataset model: instances grouped into weakly labeled bags.

#ifndef BLISS_DATA_HPP_
#define BLISS_DATA_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "bliss/error.hpp"

namespace bliss {

using InstanceId = std::int64_t;
using BagId = std::int64_t;
using Label = int;

// Class id 0 is the negative/background class in every regime.
inline constexpr Label kNegativeLabel = 0;

// Row-major dense matrix of features. One row per instance.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw ValidationError("matrix row has wrong dimension");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Instance {
  InstanceId id = 0;
  std::vector<double> features;
  std::optional<Label> ground_truth;  // evaluation only, stripped before inference

  bool operator==(const Instance&) const = default;
};

// Weak label variants.
struct BinaryBagLabel {
  bool positive = false;
  bool operator==(const BinaryBagLabel&) const = default;
};

// Set of positive class ids; empty means a negative bag.
struct LabelSet {
  std::set<Label> labels;
  bool operator==(const LabelSet&) const = default;
};

// Fraction of positive instances in the bag.
struct Proportion {
  double value = 0.0;
  bool operator==(const Proportion&) const = default;
};

using WeakLabel = std::variant<BinaryBagLabel, LabelSet, Proportion>;

struct Bag {
  BagId id = 0;
  std::vector<InstanceId> instance_ids;
  WeakLabel weak_label;

  bool operator==(const Bag&) const = default;
};

enum class Regime { kBinaryMil, kMulticlassMil, kLlp, kCustom };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kBinaryMil: return "binary-mil";
    case Regime::kMulticlassMil: return "multiclass-mil";
    case Regime::kLlp: return "llp";
    case Regime::kCustom: return "custom";
  }
  return "custom";
}

inline Regime regime_from_string(std::string_view s) {
  if (s == "binary-mil") return Regime::kBinaryMil;
  if (s == "multiclass-mil") return Regime::kMulticlassMil;
  if (s == "llp") return Regime::kLlp;
  if (s == "custom") return Regime::kCustom;
  throw ParameterError("unknown regime '" + std::string(s) + "'");
}

// Positive labels implied by a MIL weak label. Binary bags map to {1} / {}.
inline std::set<Label> positive_label_set(const WeakLabel& w) {
  if (const auto* b = std::get_if<BinaryBagLabel>(&w)) {
    return b->positive ? std::set<Label>{1} : std::set<Label>{};
  }
  if (const auto* s = std::get_if<LabelSet>(&w)) return s->labels;
  throw RegimeError("label proportion has no positive label set");
}

// Extra negative modes use ids >= num_classes; they all collapse to 0.
inline Label semantic_label(Label label, int num_classes) {
  return label >= num_classes ? kNegativeLabel : label;
}

inline bool is_positive(Label label, int num_classes) {
  return semantic_label(label, num_classes) > kNegativeLabel;
}

// Immutable, validated dataset. Instances and bags are kept sorted by id so
// that two datasets with the same content compare equal regardless of the
// order they were read in.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<Instance> instances, std::vector<Bag> bags, int num_classes, Regime regime)
      : instances_(std::move(instances)), bags_(std::move(bags)), num_classes_(num_classes), regime_(regime) {
    std::sort(instances_.begin(), instances_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::sort(bags_.begin(), bags_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    validate_and_index();
  }

  const std::vector<Instance>& instances() const { return instances_; }
  const std::vector<Bag>& bags() const { return bags_; }
  int num_classes() const { return num_classes_; }
  Regime regime() const { return regime_; }
  std::size_t feature_dim() const { return instances_.empty() ? 0 : instances_.front().features.size(); }

  const Instance& instance(InstanceId id) const { return instances_[instance_position(id)]; }
  std::size_t instance_position(InstanceId id) const {
    auto it = instance_pos_.find(id);
    if (it == instance_pos_.end()) throw ValidationError("unknown instance id " + std::to_string(id));
    return it->second;
  }
  bool contains(InstanceId id) const { return instance_pos_.count(id) != 0; }

  // B(x): the bag containing an instance.
  const Bag& bag_of(InstanceId id) const { return bags_[bag_of_.at(id)]; }
  std::size_t bag_position_of(InstanceId id) const { return bag_of_.at(id); }

  bool has_ground_truth() const {
    return !instances_.empty() &&
           std::all_of(instances_.begin(), instances_.end(), [](const auto& x) { return x.ground_truth.has_value(); });
  }

  bool operator==(const Dataset& o) const {
    return num_classes_ == o.num_classes_ && regime_ == o.regime_ && instances_ == o.instances_ && bags_ == o.bags_;
  }

 private:
  void validate_and_index() {
    if (num_classes_ < 2) throw ValidationError("num_classes must be >= 2");
    if (instances_.empty()) throw ValidationError("dataset has no instances");
    if (bags_.empty()) throw ValidationError("dataset has no bags");
    const std::size_t dim = instances_.front().features.size();
    if (dim == 0) throw ValidationError("feature dimension must be >= 1");
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      const auto& x = instances_[i];
      if (x.id < 0) throw ValidationError("negative instance id " + std::to_string(x.id));
      if (x.features.size() != dim)
        throw ValidationError("instance " + std::to_string(x.id) + " has feature dimension " +
                              std::to_string(x.features.size()) + ", expected " + std::to_string(dim));
      for (double v : x.features)
        if (!std::isfinite(v)) throw ValidationError("instance " + std::to_string(x.id) + " has a non-finite feature");
      if (!instance_pos_.emplace(x.id, i).second)
        throw ValidationError("duplicate instance id " + std::to_string(x.id));
    }
    std::set<BagId> bag_ids;
    for (std::size_t b = 0; b < bags_.size(); ++b) {
      const auto& bag = bags_[b];
      const std::string bag_name = "bag " + std::to_string(bag.id);
      if (bag.id < 0) throw ValidationError("negative bag id " + std::to_string(bag.id));
      if (!bag_ids.insert(bag.id).second) throw ValidationError("duplicate " + bag_name);
      if (bag.instance_ids.empty()) throw ValidationError(bag_name + " has no instances");
      validate_weak_label(bag);
      for (InstanceId id : bag.instance_ids) {
        if (!instance_pos_.count(id))
          throw ValidationError(bag_name + " references unknown instance " + std::to_string(id));
        auto [it, inserted] = bag_of_.emplace(id, b);
        if (!inserted)
          throw ValidationError("instance " + std::to_string(id) + " belongs to both bag " +
                                std::to_string(bags_[it->second].id) + " and " + bag_name);
      }
    }
    if (bag_of_.size() != instances_.size()) {
      for (const auto& x : instances_)
        if (!bag_of_.count(x.id)) throw ValidationError("instance " + std::to_string(x.id) + " is in no bag");
    }
    for (const auto& x : instances_) {
      if (x.ground_truth && (*x.ground_truth < 0 || *x.ground_truth >= num_classes_))
        throw ValidationError("instance " + std::to_string(x.id) + " has ground truth outside [0, num_classes)");
    }
  }

  void validate_weak_label(const Bag& bag) const {
    const std::string bag_name = "bag " + std::to_string(bag.id);
    if (const auto* s = std::get_if<LabelSet>(&bag.weak_label)) {
      for (Label l : s->labels) {
        if (l == kNegativeLabel) throw ValidationError(bag_name + " label set contains reserved class 0");
        if (l < 0 || l >= num_classes_) throw ValidationError(bag_name + " label " + std::to_string(l) + " >= num_classes");
      }
    } else if (const auto* p = std::get_if<Proportion>(&bag.weak_label)) {
      if (!(p->value >= 0.0 && p->value <= 1.0)) throw ValidationError(bag_name + " proportion outside [0,1]");
    }
  }

  std::vector<Instance> instances_;
  std::vector<Bag> bags_;
  int num_classes_ = 2;
  Regime regime_ = Regime::kBinaryMil;
  std::unordered_map<InstanceId, std::size_t> instance_pos_;
  std::unordered_map<InstanceId, std::size_t> bag_of_;
};

// A dataset with ground truth removed. Inference entry points only accept
// this type, so evaluation labels cannot reach them.
class WeakDataset {
 public:
  const Dataset& data() const { return data_; }

 private:
  explicit WeakDataset(Dataset d) : data_(std::move(d)) {}
  friend WeakDataset strip_ground_truth(const Dataset& dataset);

  Dataset data_;
};

inline WeakDataset strip_ground_truth(const Dataset& dataset) {
  std::vector<Instance> instances = dataset.instances();
  for (auto& x : instances) x.ground_truth.reset();
  return WeakDataset(Dataset(std::move(instances), dataset.bags(), dataset.num_classes(), dataset.regime()));
}

// Ground-truth side channel: instance id -> class id.
using GroundTruth = std::map<InstanceId, Label>;

inline GroundTruth ground_truth_of(const Dataset& dataset) {
  GroundTruth gt;
  for (const auto& x : dataset.instances())
    if (x.ground_truth) gt.emplace(x.id, *x.ground_truth);
  return gt;
}

inline Dataset with_ground_truth(const Dataset& dataset, const GroundTruth& gt) {
  std::vector<Instance> instances = dataset.instances();
  for (auto& x : instances) {
    auto it = gt.find(x.id);
    if (it != gt.end()) x.ground_truth = it->second;
  }
  return Dataset(std::move(instances), dataset.bags(), dataset.num_classes(), dataset.regime());
}

// Feature rows for the given instance ids, in order.
inline Matrix feature_matrix(const Dataset& dataset, std::span<const InstanceId> ids) {
  Matrix m(ids.size(), dataset.feature_dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& f = dataset.instance(ids[i]).features;
    std::copy(f.begin(), f.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace bliss

#endif  // BLISS_DATA_HPP_
