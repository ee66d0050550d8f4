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

// Synthetic datasets with known instance labels.

#ifndef BLISS_GENERATORS_HPP_
#define BLISS_GENERATORS_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "bliss/data.hpp"
#include "bliss/error.hpp"
#include "bliss/random.hpp"

namespace bliss {

// Labeled instances not yet grouped into bags.
struct LabeledPool {
  std::vector<std::vector<double>> features;
  std::vector<Label> classes;
  std::vector<std::vector<double>> class_means;  // generator means, by class id

  std::size_t size() const { return features.size(); }
};

// Two unit-variance Gaussians whose means are +-separation/2 on the first
// axis. Positive bags hold at least one positive instance (the rest are
// positive with probability witness_rate); negative bags hold none.
inline Dataset generate_binary_mil(int num_bags, int min_bag_size, int max_bag_size, double positive_fraction,
                                   int feature_dim, double class_separation, std::uint64_t seed,
                                   double witness_rate = 0.5) {
  if (num_bags < 2) throw ParameterError("num_bags must be >= 2");
  if (min_bag_size < 1 || max_bag_size < min_bag_size) throw ParameterError("invalid bag size range");
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) throw ParameterError("positive_fraction must be in (0,1)");
  if (feature_dim < 1) throw ParameterError("feature_dim must be >= 1");
  if (!(witness_rate >= 0.0 && witness_rate <= 1.0)) throw ParameterError("witness_rate must be in [0,1]");
  const int num_positive = static_cast<int>(std::lround(positive_fraction * num_bags));
  if (num_positive == 0 || num_positive == num_bags)
    throw ParameterError("positive_fraction yields " + std::to_string(num_positive) + " positive bags out of " +
                         std::to_string(num_bags));

  Rng rng(seed);
  std::vector<bool> bag_positive(num_bags, false);
  std::fill(bag_positive.begin(), bag_positive.begin() + num_positive, true);
  std::shuffle(bag_positive.begin(), bag_positive.end(), rng);

  std::uniform_int_distribution<int> size_dist(min_bag_size, max_bag_size);
  std::bernoulli_distribution witness(witness_rate);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Instance> instances;
  std::vector<Bag> bags;
  InstanceId next_id = 0;
  for (int b = 0; b < num_bags; ++b) {
    const int size = size_dist(rng);
    std::vector<Label> labels(size, kNegativeLabel);
    if (bag_positive[b]) {
      for (auto& l : labels) l = witness(rng) ? 1 : 0;
      std::uniform_int_distribution<int> pick(0, size - 1);
      labels[pick(rng)] = 1;
    }
    Bag bag{b, {}, BinaryBagLabel{bag_positive[b]}};
    for (Label l : labels) {
      Instance x{next_id++, std::vector<double>(feature_dim), l};
      for (auto& v : x.features) v = noise(rng);
      x.features[0] += (l == 1 ? 0.5 : -0.5) * class_separation;
      bag.instance_ids.push_back(x.id);
      instances.push_back(std::move(x));
    }
    bags.push_back(std::move(bag));
  }
  return Dataset(std::move(instances), std::move(bags), 2, Regime::kBinaryMil);
}

// Unit-variance Gaussian blobs, one per class 0..num_classes-1. Means sit on
// a circle in the first two axes (a line when feature_dim is 1) with
// neighbouring means exactly `separation` apart, so every pair is at least
// that far apart.
inline LabeledPool generate_gaussian_blobs(int num_classes, int per_class, int feature_dim, double separation,
                                           std::uint64_t seed) {
  if (num_classes < 2) throw ParameterError("num_classes must be >= 2");
  if (per_class < 1) throw ParameterError("per_class must be >= 1");
  if (feature_dim < 1) throw ParameterError("feature_dim must be >= 1");
  if (separation < 0.0) throw ParameterError("separation must be >= 0");

  LabeledPool pool;
  pool.class_means.assign(num_classes, std::vector<double>(feature_dim, 0.0));
  if (feature_dim == 1) {
    for (int c = 0; c < num_classes; ++c) pool.class_means[c][0] = separation * c;
  } else {
    const double radius = separation / (2.0 * std::sin(std::numbers::pi / num_classes));
    for (int c = 0; c < num_classes; ++c) {
      const double angle = 2.0 * std::numbers::pi * c / num_classes;
      pool.class_means[c][0] = radius * std::cos(angle);
      pool.class_means[c][1] = radius * std::sin(angle);
    }
  }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      std::vector<double> x(feature_dim);
      for (int j = 0; j < feature_dim; ++j) x[j] = pool.class_means[c][j] + noise(rng);
      pool.features.push_back(std::move(x));
      pool.classes.push_back(c);
    }
  }
  return pool;
}

// Blobs for multi-class MIL with several negative modes: positive classes
// 1..num_positive and negative modes num_positive+1..num_positive+num_negative
// (class 0 is unused). Circle positions alternate negative, positive while
// both kinds remain.
inline LabeledPool generate_interleaved_blobs(int num_positive, int num_negative, int per_class, int feature_dim,
                                              double separation, std::uint64_t seed) {
  if (num_positive < 1 || num_negative < 1) throw ParameterError("need at least one positive and one negative mode");
  LabeledPool pool = generate_gaussian_blobs(num_positive + num_negative, per_class, feature_dim, separation, seed);
  std::vector<Label> class_at(num_positive + num_negative);
  int next_pos = 1, next_neg = num_positive + 1;
  for (std::size_t p = 0; p < class_at.size(); ++p) {
    const bool negative = next_pos > num_positive || (p % 2 == 0 && next_neg <= num_positive + num_negative);
    class_at[p] = negative ? next_neg++ : next_pos++;
  }
  for (auto& c : pool.classes) c = class_at[c];
  std::vector<std::vector<double>> means(num_positive + num_negative + 1, std::vector<double>(feature_dim, 0.0));
  for (std::size_t p = 0; p < class_at.size(); ++p) means[class_at[p]] = pool.class_means[p];
  pool.class_means = std::move(means);
  return pool;
}

// Bags of pool instances sampled without replacement inside a bag and with
// replacement across bags. A bag's label set is the set of positive classes
// present in it; other classes become the negative class 0.
inline Dataset generate_multiclass_mil(const LabeledPool& base, int num_bags, int min_bag_size, int max_bag_size,
                                       const std::set<Label>& positive_classes, std::uint64_t seed) {
  if (base.size() == 0) throw ParameterError("base pool is empty");
  if (positive_classes.empty()) throw ParameterError("positive_classes must be nonempty");
  if (positive_classes.count(kNegativeLabel) || *positive_classes.begin() < 0)
    throw ParameterError("positive classes must be > 0; class 0 is the negative class");
  if (num_bags < 1) throw ParameterError("num_bags must be >= 1");
  if (min_bag_size < 1 || max_bag_size < min_bag_size) throw ParameterError("invalid bag size range");
  if (static_cast<std::size_t>(max_bag_size) > base.size()) throw ParameterError("bag size exceeds base pool size");

  const int num_classes = *positive_classes.rbegin() + 1;
  Rng rng(seed);
  std::uniform_int_distribution<int> size_dist(min_bag_size, max_bag_size);
  std::vector<std::size_t> order(base.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Instance> instances;
  std::vector<Bag> bags;
  InstanceId next_id = 0;
  for (int b = 0; b < num_bags; ++b) {
    const int size = size_dist(rng);
    // Partial Fisher-Yates: the first `size` entries are a uniform sample.
    for (int i = 0; i < size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    Bag bag{b, {}, LabelSet{}};
    auto& label_set = std::get<LabelSet>(bag.weak_label).labels;
    for (int i = 0; i < size; ++i) {
      const std::size_t src = order[i];
      const Label cls = base.classes[src];
      const Label gt = positive_classes.count(cls) ? cls : kNegativeLabel;
      if (gt != kNegativeLabel) label_set.insert(gt);
      Instance x{next_id++, base.features[src], gt};
      bag.instance_ids.push_back(x.id);
      instances.push_back(std::move(x));
    }
    bags.push_back(std::move(bag));
  }
  return Dataset(std::move(instances), std::move(bags), num_classes, Regime::kMulticlassMil);
}

// Replaces binary bag labels by the ground-truth positive fraction (LLP).
inline Dataset to_label_proportions(const Dataset& dataset) {
  if (!dataset.has_ground_truth()) throw ParameterError("label proportions need ground truth");
  std::vector<Bag> bags = dataset.bags();
  for (auto& bag : bags) {
    int positives = 0;
    for (InstanceId id : bag.instance_ids)
      positives += is_positive(*dataset.instance(id).ground_truth, dataset.num_classes()) ? 1 : 0;
    bag.weak_label = Proportion{static_cast<double>(positives) / static_cast<double>(bag.instance_ids.size())};
  }
  return Dataset(dataset.instances(), std::move(bags), 2, Regime::kLlp);
}

// Bag count by label-set size (index = size).
inline std::vector<int> label_set_size_histogram(const Dataset& dataset) {
  std::vector<int> hist;
  for (const auto& bag : dataset.bags()) {
    std::size_t n = 0;
    if (const auto* b = std::get_if<BinaryBagLabel>(&bag.weak_label)) n = b->positive ? 1 : 0;
    else if (const auto* s = std::get_if<LabelSet>(&bag.weak_label)) n = s->labels.size();
    else n = std::get<Proportion>(bag.weak_label).value > 0.0 ? 1 : 0;
    if (hist.size() <= n) hist.resize(n + 1, 0);
    ++hist[n];
  }
  return hist;
}

}  // namespace bliss

#endif  // BLISS_GENERATORS_HPP_
