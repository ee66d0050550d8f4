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

// Weak supervision expressed as per-instance rewards in [0,1].
//
// A reward environment trains the classifier on a candidate labelling of the
// training fold, predicts the fold and the weakly labeled held-out bags, and
// scores each training instance by how well the classifier's behaviour around
// it (its k nearest held-out neighbours in output space) respects the weak
// labels.

#ifndef BLISS_REWARDS_HPP_
#define BLISS_REWARDS_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "bliss/bandit.hpp"
#include "bliss/classifiers.hpp"
#include "bliss/data.hpp"
#include "bliss/error.hpp"
#include "bliss/random.hpp"

namespace bliss {

// Space in which DistGap measures distances.
enum class DistGapSpace { kOutput, kFeatures };

struct RewardParams {
  int k = 5;
  double alpha = 1.0;        // minimum mean recall before precision counts
  double gamma = 1.0 / 7.0;  // recall weight; precision gets 1 - gamma
  double tau = 0.0;          // DistGap scale; <= 0 means calibrate
  bool distgap_enabled = false;
  DistGapSpace distgap_space = DistGapSpace::kOutput;
  int num_negative_labels = 1;
};

inline void validate(const RewardParams& p) {
  if (p.k < 1) throw ParameterError("k must be >= 1");
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw ParameterError("alpha must be in [0,1]");
  if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw ParameterError("gamma must be in (0,1)");
  if (std::isnan(p.tau)) throw ParameterError("tau must be a number");
  if (p.num_negative_labels < 1) throw ParameterError("num_negative_labels must be >= 1");
}

// ---------------------------------------------------------------------------
// Bag-level recall and instance-level precision. `predicted` is aligned with
// bag.instance_ids. Labels >= num_classes are extra negative modes.

inline double rec_binary(const Bag& bag, std::span<const Label> predicted, int num_classes = 2) {
  if (positive_label_set(bag.weak_label).empty()) return 1.0;
  for (Label f : predicted)
    if (is_positive(f, num_classes)) return 1.0;
  return 0.0;
}

inline double prec_binary(Label predicted, const WeakLabel& bag_label, int num_classes = 2) {
  if (!is_positive(predicted, num_classes)) return 1.0;
  return positive_label_set(bag_label).empty() ? 0.0 : 1.0;
}

inline double rec_multiclass(const Bag& bag, std::span<const Label> predicted, int num_classes) {
  const auto labels = positive_label_set(bag.weak_label);
  if (labels.empty()) return 1.0;
  std::set<Label> realized;
  for (Label f : predicted) realized.insert(semantic_label(f, num_classes));
  std::size_t hit = 0;
  for (Label l : labels) hit += realized.count(l);
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

inline double prec_multiclass(Label predicted, const WeakLabel& bag_label, int num_classes) {
  const Label f = semantic_label(predicted, num_classes);
  if (f == kNegativeLabel) return 1.0;
  return positive_label_set(bag_label).count(f) ? 1.0 : 0.0;
}

// 1 - |predicted positive fraction - labeled proportion|.
inline double proportion_agreement(const Bag& bag, std::span<const Label> predicted, int num_classes = 2) {
  const auto* p = std::get_if<Proportion>(&bag.weak_label);
  if (!p) throw RegimeError("bag " + std::to_string(bag.id) + " has no label proportion");
  double positives = 0.0;
  for (Label f : predicted) positives += is_positive(f, num_classes) ? 1.0 : 0.0;
  return 1.0 - std::abs(positives / static_cast<double>(predicted.size()) - p->value);
}

// DistGap squashing: clamp(raw / tau, -1, 1) / 2 + 1/2.
inline double eta(double raw, double tau) {
  if (!(tau > 0.0)) throw ParameterError("DistGap scale tau must be positive");
  return std::clamp(raw / tau, -1.0, 1.0) / 2.0 + 0.5;
}

// ---------------------------------------------------------------------------
// Context: predictions of one trained classifier on the training fold and on
// the held-out bags.

// Positional bookkeeping shared by every context of one environment.
struct RewardLayout {
  std::shared_ptr<const Dataset> dataset;
  std::vector<InstanceId> train_ids;
  std::vector<std::size_t> heldout_bags;                 // positions in dataset->bags()
  std::vector<InstanceId> heldout_ids;                   // grouped by held-out bag
  std::vector<std::size_t> heldout_bag_of;               // held-out position -> local bag
  std::vector<std::vector<std::size_t>> bag_members;     // local bag -> held-out positions
  std::unordered_map<InstanceId, std::size_t> train_pos;
  std::unordered_map<InstanceId, std::size_t> heldout_pos;

  static std::shared_ptr<const RewardLayout> make(std::shared_ptr<const Dataset> dataset,
                                                  std::vector<InstanceId> train_ids,
                                                  const std::vector<BagId>& heldout_bag_ids) {
    auto layout = std::make_shared<RewardLayout>();
    layout->dataset = std::move(dataset);
    layout->train_ids = std::move(train_ids);
    const auto& bags = layout->dataset->bags();
    std::unordered_map<BagId, std::size_t> bag_pos;
    for (std::size_t b = 0; b < bags.size(); ++b) bag_pos.emplace(bags[b].id, b);
    for (std::size_t i = 0; i < layout->train_ids.size(); ++i) {
      if (!layout->dataset->contains(layout->train_ids[i]))
        throw ValidationError("unknown training instance " + std::to_string(layout->train_ids[i]));
      if (!layout->train_pos.emplace(layout->train_ids[i], i).second)
        throw ValidationError("training instance " + std::to_string(layout->train_ids[i]) + " listed twice");
    }
    for (BagId id : heldout_bag_ids) {
      auto it = bag_pos.find(id);
      if (it == bag_pos.end()) throw ValidationError("unknown held-out bag " + std::to_string(id));
      const std::size_t local = layout->heldout_bags.size();
      layout->heldout_bags.push_back(it->second);
      layout->bag_members.emplace_back();
      for (InstanceId x : bags[it->second].instance_ids) {
        if (layout->train_pos.count(x))
          throw ValidationError("instance " + std::to_string(x) + " is both training and held-out");
        layout->bag_members[local].push_back(layout->heldout_ids.size());
        layout->heldout_pos.emplace(x, layout->heldout_ids.size());
        layout->heldout_ids.push_back(x);
        layout->heldout_bag_of.push_back(local);
      }
    }
    return layout;
  }

  const Bag& heldout_bag(std::size_t local) const { return dataset->bags()[heldout_bags[local]]; }
};

class RewardContext {
 public:
  RewardContext(std::shared_ptr<const RewardLayout> layout, std::vector<Prediction> train_predictions,
                std::vector<Prediction> heldout_predictions)
      : layout_(std::move(layout)),
        train_(std::move(train_predictions)),
        heldout_(std::move(heldout_predictions)) {
    if (train_.size() != layout_->train_ids.size()) throw ValidationError("missing training-fold predictions");
    if (heldout_.size() != layout_->heldout_ids.size()) throw ValidationError("missing held-out predictions");
    if (heldout_.empty()) throw ParameterError("held-out set is empty");
    const int m = num_classes();
    const std::size_t nb = layout_->heldout_bags.size();
    std::vector<Label> predicted;
    for (std::size_t b = 0; b < nb; ++b) {
      const Bag& bag = layout_->heldout_bag(b);
      predicted.clear();
      for (std::size_t pos : layout_->bag_members[b]) predicted.push_back(heldout_[pos].label);
      if (std::holds_alternative<Proportion>(bag.weak_label)) {
        has_proportions_ = true;
        bag_proportion_.push_back(proportion_agreement(bag, predicted, m));
        bag_rec_binary_.push_back(0.0);
        bag_rec_multi_.push_back(0.0);
      } else {
        has_mil_labels_ = true;
        bag_proportion_.push_back(0.0);
        bag_rec_binary_.push_back(rec_binary(bag, predicted, m));
        bag_rec_multi_.push_back(rec_multiclass(bag, predicted, m));
      }
    }
    prec_binary_.resize(heldout_.size(), 1.0);
    prec_multi_.resize(heldout_.size(), 1.0);
    if (has_mil_labels_) {
      for (std::size_t i = 0; i < heldout_.size(); ++i) {
        const Bag& bag = layout_->heldout_bag(layout_->heldout_bag_of[i]);
        if (std::holds_alternative<Proportion>(bag.weak_label)) continue;
        prec_binary_[i] = prec_binary(heldout_[i].label, bag.weak_label, m);
        prec_multi_[i] = prec_multiclass(heldout_[i].label, bag.weak_label, m);
      }
    }
  }

  const RewardLayout& layout() const { return *layout_; }
  const Dataset& dataset() const { return *layout_->dataset; }
  int num_classes() const { return layout_->dataset->num_classes(); }

  const Prediction& train_prediction(InstanceId x) const {
    auto it = layout_->train_pos.find(x);
    if (it == layout_->train_pos.end()) throw ValidationError("instance " + std::to_string(x) + " is not in the training fold");
    return train_[it->second];
  }
  const Prediction& heldout_prediction(InstanceId x) const { return heldout_.at(layout_->heldout_pos.at(x)); }
  std::span<const Prediction> heldout_predictions() const { return heldout_; }
  std::span<const Prediction> train_predictions() const { return train_; }

  // B(x) for training or held-out instances.
  const Bag& bag_of(InstanceId x) const { return layout_->dataset->bag_of(x); }

  double bag_rec_binary(std::size_t heldout_pos) const { return bag_rec_binary_[layout_->heldout_bag_of[heldout_pos]]; }
  double bag_rec_multiclass(std::size_t heldout_pos) const { return bag_rec_multi_[layout_->heldout_bag_of[heldout_pos]]; }
  double bag_proportion_agreement(std::size_t heldout_pos) const {
    if (!has_proportions_) throw RegimeError("held-out bags carry no label proportions");
    return bag_proportion_[layout_->heldout_bag_of[heldout_pos]];
  }
  double prec_binary_at(std::size_t heldout_pos) const { return prec_binary_[heldout_pos]; }
  double prec_multiclass_at(std::size_t heldout_pos) const { return prec_multi_[heldout_pos]; }
  bool has_mil_labels() const { return has_mil_labels_; }

  // N(x): held-out positions of the k nearest neighbours of training
  // instance x in classifier-output space.
  std::vector<std::size_t> neighbours(InstanceId x, int k, KnnMode mode) const {
    const Prediction& q = train_prediction(x);
    if (mode == KnnMode::kPredictedClassDim) {
      const std::size_t axis = static_cast<std::size_t>(q.label);
      if (axes_.size() <= axis) axes_.resize(axis + 1);
      if (!axes_[axis]) axes_[axis] = std::make_unique<AxisIndex>(heldout_, axis);
      std::vector<std::size_t> out;
      std::vector<std::pair<double, std::size_t>> scratch;
      axes_[axis]->nearest(q.embedding[axis], k, out, scratch);
      return out;
    }
    return knn_in_output_space(q, heldout_, k, mode);
  }

 private:
  std::shared_ptr<const RewardLayout> layout_;
  std::vector<Prediction> train_;
  std::vector<Prediction> heldout_;
  std::vector<double> bag_rec_binary_, bag_rec_multi_, bag_proportion_;
  std::vector<double> prec_binary_, prec_multi_;
  bool has_mil_labels_ = false;
  bool has_proportions_ = false;
  // Built on first use; a context is owned by one evaluation at a time.
  mutable std::vector<std::unique_ptr<AxisIndex>> axes_;
};

inline RewardContext make_reward_context(std::shared_ptr<const Dataset> dataset, std::vector<InstanceId> train_ids,
                                         std::vector<Prediction> train_predictions,
                                         const std::vector<BagId>& heldout_bag_ids,
                                         std::vector<Prediction> heldout_predictions) {
  return RewardContext(RewardLayout::make(std::move(dataset), std::move(train_ids), heldout_bag_ids),
                       std::move(train_predictions), std::move(heldout_predictions));
}

// ---------------------------------------------------------------------------
// Regime rewards.

namespace reward_detail {

inline bool gate(InstanceId x, Label assigned, const RewardContext& ctx) {
  return ctx.train_prediction(x).label == assigned;
}

// gamma * meanRec + (1 - gamma) * 1[meanRec >= alpha] * meanPrec, capped at 1.
inline double mix(double mean_rec, double mean_prec, const RewardParams& p) {
  const double precision_term = mean_rec >= p.alpha ? mean_prec : 0.0;
  return std::min(1.0, p.gamma * mean_rec + (1.0 - p.gamma) * precision_term);
}

inline double unaugmented_binary(InstanceId x, const RewardContext& ctx, const RewardParams& p) {
  const auto nn = ctx.neighbours(x, p.k, KnnMode::kFull);
  double rec = 0.0, prec = 0.0;
  for (std::size_t i : nn) {
    rec += ctx.bag_rec_binary(i);
    prec += ctx.prec_binary_at(i);
  }
  const double n = static_cast<double>(nn.size());
  return mix(rec / n, prec / n, p);
}

inline double unaugmented_multiclass(InstanceId x, const RewardContext& ctx, const RewardParams& p) {
  const auto nn = ctx.neighbours(x, p.k, KnnMode::kPredictedClassDim);
  double rec = 0.0, prec = 0.0;
  for (std::size_t i : nn) {
    rec += ctx.bag_rec_multiclass(i);
    prec += ctx.prec_multiclass_at(i);
  }
  const double n = static_cast<double>(nn.size());
  return mix(rec / n, prec / n, p);
}

}  // namespace reward_detail

// R_x = 1[pi(x) = f(x)] * (gamma * meanRec + (1-gamma) * 1[meanRec >= alpha] * meanPrec)
// with the means taken over the k nearest held-out predictions (Euclidean,
// full output vector).
inline double binary_mil_reward(InstanceId x, Label assigned, const RewardContext& ctx, const RewardParams& p) {
  if (!reward_detail::gate(x, assigned, ctx)) return 0.0;
  return reward_detail::unaugmented_binary(x, ctx, p);
}

// Same structure with label-set recall/precision and neighbours taken along
// the output coordinate of x's predicted class.
inline double multiclass_mil_reward(InstanceId x, Label assigned, const RewardContext& ctx, const RewardParams& p) {
  if (!reward_detail::gate(x, assigned, ctx)) return 0.0;
  return reward_detail::unaugmented_multiclass(x, ctx, p);
}

// Mean distance from x to its k nearest neighbours inside each bag of the
// complement family minus the same quantity over bags sharing x's bag label.
inline double distgap_raw(InstanceId x, const Bag& bag, const RewardContext& ctx, const RewardParams& p) {
  const auto& layout = ctx.layout();
  const auto label = positive_label_set(bag.weak_label);
  const bool in_output = p.distgap_space == DistGapSpace::kOutput;
  const Prediction& q = ctx.train_prediction(x);
  const auto& xf = ctx.dataset().instance(x).features;

  double same_sum = 0.0, other_sum = 0.0;
  std::size_t same_n = 0, other_n = 0, same_bags = 0, other_bags = 0;
  std::vector<double> d;
  for (std::size_t b = 0; b < layout.heldout_bags.size(); ++b) {
    const Bag& hb = layout.heldout_bag(b);
    if (std::holds_alternative<Proportion>(hb.weak_label)) throw RegimeError("DistGap needs MIL bag labels");
    d.clear();
    for (std::size_t pos : layout.bag_members[b]) {
      if (in_output) {
        d.push_back(output_distance(q, ctx.heldout_predictions()[pos], KnnMode::kFull));
      } else {
        const auto& yf = ctx.dataset().instance(layout.heldout_ids[pos]).features;
        double s = 0.0;
        for (std::size_t j = 0; j < xf.size(); ++j) s += (xf[j] - yf[j]) * (xf[j] - yf[j]);
        d.push_back(std::sqrt(s));
      }
    }
    const std::size_t kk = std::min<std::size_t>(p.k, d.size());
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    const double sum = std::accumulate(d.begin(), d.begin() + kk, 0.0);
    if (positive_label_set(hb.weak_label) == label) {
      same_sum += sum;
      same_n += kk;
      ++same_bags;
    } else {
      other_sum += sum;
      other_n += kk;
      ++other_bags;
    }
  }
  if (same_bags == 0 || other_bags == 0)
    throw ParameterError("DistGap needs at least one same-label and one other-label held-out bag");
  return other_sum / static_cast<double>(other_n) - same_sum / static_cast<double>(same_n);
}

inline double distgap(InstanceId x, const Bag& bag, const RewardContext& ctx, const RewardParams& p) {
  return eta(distgap_raw(x, bag, ctx, p), p.tau);
}

// Scales the unaugmented reward by DistGap for positive assignments and by
// 1 - DistGap for any negative mode. The agreement gate is unchanged.
inline double distgap_augmented_reward(InstanceId x, Label assigned, const RewardContext& ctx, const RewardParams& p,
                                       Regime regime) {
  if (!reward_detail::gate(x, assigned, ctx)) return 0.0;
  const double base = regime == Regime::kMulticlassMil ? reward_detail::unaugmented_multiclass(x, ctx, p)
                                                       : reward_detail::unaugmented_binary(x, ctx, p);
  const double gap = distgap(x, ctx.bag_of(x), ctx, p);
  return (is_positive(assigned, ctx.num_classes()) ? gap : 1.0 - gap) * base;
}

// Label proportions: 1[pi(x)=f(x)] * mean over N(x) of
// 1 - |predicted positive fraction of B(x') - L_{B(x')}|.
inline double llp_example_reward(InstanceId x, Label assigned, const RewardContext& ctx, const RewardParams& p) {
  if (!std::holds_alternative<Proportion>(ctx.bag_of(x).weak_label))
    throw RegimeError("LLP reward needs label-proportion bags");
  if (!reward_detail::gate(x, assigned, ctx)) return 0.0;
  const auto nn = ctx.neighbours(x, p.k, KnnMode::kFull);
  double sum = 0.0;
  for (std::size_t i : nn) sum += ctx.bag_proportion_agreement(i);
  return std::clamp(sum / static_cast<double>(nn.size()), 0.0, 1.0);
}

// User-defined regime: any bounded function of the context.
using CustomReward = std::function<double(InstanceId, Label, const RewardContext&, const RewardParams&)>;

inline double regime_reward(Regime regime, InstanceId x, Label assigned, const RewardContext& ctx,
                            const RewardParams& p, const CustomReward& custom = {}) {
  if (p.distgap_enabled && (regime == Regime::kBinaryMil || regime == Regime::kMulticlassMil))
    return distgap_augmented_reward(x, assigned, ctx, p, regime);
  switch (regime) {
    case Regime::kBinaryMil: return binary_mil_reward(x, assigned, ctx, p);
    case Regime::kMulticlassMil: return multiclass_mil_reward(x, assigned, ctx, p);
    case Regime::kLlp: return llp_example_reward(x, assigned, ctx, p);
    case Regime::kCustom:
      if (!custom) throw ConfigError("custom regime requires a reward function");
      return custom(x, assigned, ctx, p);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Environment: labelling -> rewards, through a freshly trained classifier.

class RewardEnvironment {
 public:
  // `extra_training` holds instances with fixed labels that join the
  // classifier's training data (bootstrapping); they receive no rewards.
  RewardEnvironment(std::shared_ptr<const WeakDataset> data, std::vector<InstanceId> train_ids,
                    const std::vector<BagId>& heldout_bag_ids, ClassifierSpec spec, RewardParams params, Regime regime,
                    LabelAssignment extra_training = {}, CustomReward custom = {}, std::uint64_t calibration_seed = 0)
      : data_(std::move(data)),
        spec_(std::move(spec)),
        params_(params),
        regime_(regime),
        extra_(std::move(extra_training)),
        custom_(std::move(custom)) {
    validate(params_);
    validate_spec(spec_);
    if (regime_ == Regime::kCustom && !custom_) throw ConfigError("custom regime requires a reward function");
    std::shared_ptr<const Dataset> dataset(data_, &data_->data());
    layout_ = RewardLayout::make(dataset, std::move(train_ids), heldout_bag_ids);
    if (layout_->heldout_ids.empty()) throw ParameterError("held-out set is empty");
    if (static_cast<std::size_t>(params_.k) > layout_->heldout_ids.size()) {
      std::clog << "bliss: warning: k=" << params_.k << " exceeds the held-out size " << layout_->heldout_ids.size()
                << "; using all held-out instances\n";
    }
    std::vector<InstanceId> rows = layout_->train_ids;
    for (const auto& [id, label] : extra_) {
      if (layout_->train_pos.count(id)) throw ValidationError("fixed instance " + std::to_string(id) + " is also in the fold");
      rows.push_back(id);
      extra_labels_.push_back(label);
    }
    train_x_ = feature_matrix(*dataset, rows);
    fold_x_ = feature_matrix(*dataset, layout_->train_ids);
    heldout_x_ = feature_matrix(*dataset, layout_->heldout_ids);
    if (params_.distgap_enabled) {
      check_distgap_families();
      if (!(params_.tau > 0.0)) params_.tau = calibrate_tau(calibration_seed);
    }
  }

  const RewardParams& params() const { return params_; }
  Regime regime() const { return regime_; }
  const std::vector<InstanceId>& train_ids() const { return layout_->train_ids; }
  std::size_t heldout_size() const { return layout_->heldout_ids.size(); }

  // Trains on the labelling (classifier seed = `seed`) and predicts.
  RewardContext context(const LabelAssignment& assignment, std::uint64_t seed) const {
    std::vector<Label> y;
    y.reserve(train_x_.rows());
    if (assignment.size() != layout_->train_ids.size())
      throw CompletenessError("assignment covers " + std::to_string(assignment.size()) + " of " +
                              std::to_string(layout_->train_ids.size()) + " training instances");
    for (InstanceId id : layout_->train_ids) {
      auto it = assignment.find(id);
      if (it == assignment.end()) throw CompletenessError("assignment misses instance " + std::to_string(id));
      y.push_back(it->second);
    }
    y.insert(y.end(), extra_labels_.begin(), extra_labels_.end());
    ClassifierSpec spec = spec_;
    spec.seed = seed;
    const TrainedModel model = fit(spec, train_x_, y);
    return RewardContext(layout_, predict(model, fold_x_), predict(model, heldout_x_));
  }

  Rewards operator()(const LabelAssignment& assignment, std::uint64_t seed) const {
    const RewardContext ctx = context(assignment, seed);
    Rewards out;
    for (const auto& [id, label] : assignment) {
      const double r = regime_reward(regime_, id, label, ctx, params_, custom_);
      if (!(r >= 0.0 && r <= 1.0))
        throw RewardRangeError("reward " + std::to_string(r) + " for instance " + std::to_string(id) + " outside [0,1]");
      out.emplace_hint(out.end(), id, r);
    }
    return out;
  }

 private:
  void check_distgap_families() const {
    std::set<std::set<Label>> heldout_labels;
    for (std::size_t b = 0; b < layout_->heldout_bags.size(); ++b)
      heldout_labels.insert(positive_label_set(layout_->heldout_bag(b).weak_label));
    for (InstanceId id : layout_->train_ids) {
      const auto label = positive_label_set(data_->data().bag_of(id).weak_label);
      if (!heldout_labels.count(label) || heldout_labels.size() < 2)
        throw ParameterError("DistGap: held-out bags lack a same-label or other-label family for instance " +
                             std::to_string(id));
    }
  }

  // tau = median |raw DistGap| over up to 100 training instances, measured
  // with a classifier fit to the naive labelling (each instance takes the
  // largest positive label of its bag, 0 in negative bags).
  double calibrate_tau(std::uint64_t seed) const {
    LabelAssignment naive;
    for (InstanceId id : layout_->train_ids) {
      const auto labels = positive_label_set(data_->data().bag_of(id).weak_label);
      naive.emplace(id, labels.empty() ? kNegativeLabel : *labels.rbegin());
    }
    const RewardContext ctx = context(naive, derive_seed(seed, 0x7a0));
    std::vector<InstanceId> sample = layout_->train_ids;
    Rng rng(derive_seed(seed, 0x7a1));
    std::shuffle(sample.begin(), sample.end(), rng);
    if (sample.size() > 100) sample.resize(100);
    std::vector<double> mags;
    for (InstanceId id : sample) mags.push_back(std::abs(distgap_raw(id, ctx.bag_of(id), ctx, params_)));
    if (mags.empty()) return 1.0;
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    const double median = mags[mags.size() / 2];
    return median > 0.0 ? median : 1.0;
  }

  std::shared_ptr<const WeakDataset> data_;
  ClassifierSpec spec_;
  RewardParams params_;
  Regime regime_;
  LabelAssignment extra_;
  std::vector<Label> extra_labels_;
  CustomReward custom_;
  std::shared_ptr<const RewardLayout> layout_;
  Matrix train_x_, fold_x_, heldout_x_;
};

inline Rewards evaluate_environment(const RewardEnvironment& env, const LabelAssignment& assignment, Rng& rng) {
  return env(assignment, rng());
}

// Deterministic environment from a fixed (instance, label) -> reward table.
// Used for stubs and the command-line "custom" regime.
class TableEnvironment {
 public:
  explicit TableEnvironment(std::map<InstanceId, std::map<Label, double>> table) : table_(std::move(table)) {
    for (const auto& [id, row] : table_) {
      if (row.empty()) throw ParameterError("reward table row for instance " + std::to_string(id) + " is empty");
      for (const auto& [label, r] : row)
        if (!(r >= 0.0 && r <= 1.0)) throw RewardRangeError("reward table entry outside [0,1]");
    }
  }

  LabelSets label_sets() const {
    LabelSets out;
    for (const auto& [id, row] : table_)
      for (const auto& [label, r] : row) out[id].push_back(label);
    return out;
  }

  Rewards operator()(const LabelAssignment& assignment, std::uint64_t) const {
    Rewards out;
    for (const auto& [id, label] : assignment) out.emplace(id, table_.at(id).at(label));
    return out;
  }

 private:
  std::map<InstanceId, std::map<Label, double>> table_;
};

}  // namespace bliss

#endif  // BLISS_REWARDS_HPP_
