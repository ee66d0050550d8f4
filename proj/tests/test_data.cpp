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

#include <algorithm>
#include <set>

#include "bliss/data.hpp"
#include "bliss/generators.hpp"
#include "bliss/random.hpp"

namespace bliss {
namespace {

Dataset tiny(std::vector<Bag> bags, int num_classes = 2, Regime regime = Regime::kBinaryMil) {
  std::vector<Instance> xs;
  for (InstanceId id = 0; id < 4; ++id) xs.push_back({id, {static_cast<double>(id), 1.0}, std::nullopt});
  return Dataset(std::move(xs), std::move(bags), num_classes, regime);
}

TEST(Dataset, InstanceInTwoBagsNamesBothBags) {
  try {
    tiny({{7, {0, 1}, BinaryBagLabel{true}}, {9, {1, 2, 3}, BinaryBagLabel{false}}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bag 7"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bag 9"), std::string::npos) << msg;
  }
}

TEST(Dataset, RejectsMalformedInput) {
  EXPECT_THROW(tiny({{0, {0, 1}, BinaryBagLabel{true}}}), ValidationError);  // instances 2, 3 unbagged
  EXPECT_THROW(tiny({{0, {0, 1, 2, 3, 4}, BinaryBagLabel{true}}}), ValidationError);
  EXPECT_THROW(tiny({{0, {}, BinaryBagLabel{true}}, {1, {0, 1, 2, 3}, BinaryBagLabel{true}}}), ValidationError);
  EXPECT_THROW(tiny({{0, {0, 1, 2, 3}, LabelSet{{0}}}}, 3, Regime::kMulticlassMil), ValidationError);
  EXPECT_THROW(tiny({{0, {0, 1, 2, 3}, LabelSet{{3}}}}, 3, Regime::kMulticlassMil), ValidationError);
  EXPECT_THROW(tiny({{0, {0, 1, 2, 3}, Proportion{1.5}}}, 2, Regime::kLlp), ValidationError);
  EXPECT_THROW(tiny({{0, {0, 1, 2, 3}, BinaryBagLabel{true}}}, 1), ValidationError);
  std::vector<Instance> bad{{0, {std::nan("")}, std::nullopt}};
  EXPECT_THROW(Dataset(bad, {{0, {0}, BinaryBagLabel{true}}}, 2, Regime::kBinaryMil), ValidationError);
  std::vector<Instance> gt{{0, {1.0}, 2}};
  EXPECT_THROW(Dataset(gt, {{0, {0}, BinaryBagLabel{true}}}, 2, Regime::kBinaryMil), ValidationError);
}

TEST(Dataset, CanonicalOrderIgnoresInputOrder) {
  const Dataset a = tiny({{1, {2, 3}, BinaryBagLabel{false}}, {0, {0, 1}, BinaryBagLabel{true}}});
  const Dataset b = tiny({{0, {0, 1}, BinaryBagLabel{true}}, {1, {2, 3}, BinaryBagLabel{false}}});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.bag_of(3).id, 1);
  EXPECT_EQ(a.bag_of(0).id, 0);
}

TEST(Dataset, StripRemovesEveryGroundTruthLabel) {
  const Dataset d = generate_binary_mil(10, 2, 5, 0.5, 3, 4.0, 11);
  ASSERT_TRUE(d.has_ground_truth());
  const WeakDataset w = strip_ground_truth(d);
  for (const auto& x : w.data().instances()) EXPECT_FALSE(x.ground_truth.has_value());
  EXPECT_EQ(with_ground_truth(w.data(), ground_truth_of(d)), d);
}

TEST(Labels, ExtraNegativeModesAreNegative) {
  EXPECT_EQ(semantic_label(0, 3), 0);
  EXPECT_EQ(semantic_label(2, 3), 2);
  EXPECT_EQ(semantic_label(3, 3), 0);
  EXPECT_EQ(semantic_label(5, 3), 0);
  EXPECT_TRUE(is_positive(1, 3));
  EXPECT_FALSE(is_positive(4, 3));
}

TEST(Generators, BinaryMilRespectsBagSemantics) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = generate_binary_mil(40, 3, 10, 0.5, 4, 6.0, seed);
    int positive_bags = 0;
    for (const auto& bag : d.bags()) {
      ASSERT_GE(bag.instance_ids.size(), 3u);
      ASSERT_LE(bag.instance_ids.size(), 10u);
      bool any = false;
      for (InstanceId id : bag.instance_ids) any = any || d.instance(id).ground_truth == 1;
      const bool positive = std::get<BinaryBagLabel>(bag.weak_label).positive;
      EXPECT_EQ(any, positive);
      positive_bags += positive;
    }
    EXPECT_EQ(positive_bags, 20);
  }
}

TEST(Generators, DeterministicForSeed) {
  EXPECT_EQ(generate_binary_mil(20, 2, 6, 0.3, 2, 3.0, 5), generate_binary_mil(20, 2, 6, 0.3, 2, 3.0, 5));
  EXPECT_FALSE(generate_binary_mil(20, 2, 6, 0.3, 2, 3.0, 5) == generate_binary_mil(20, 2, 6, 0.3, 2, 3.0, 6));
}

TEST(Generators, BinaryMilRejectsDegenerateFraction) {
  EXPECT_THROW(generate_binary_mil(10, 2, 4, 0.01, 2, 1.0, 0), ParameterError);
  EXPECT_THROW(generate_binary_mil(10, 2, 4, 0.99, 2, 1.0, 0), ParameterError);
  EXPECT_THROW(generate_binary_mil(10, 5, 4, 0.5, 2, 1.0, 0), ParameterError);
}

TEST(Generators, MulticlassLabelSetsMatchGroundTruth) {
  const LabeledPool pool = generate_interleaved_blobs(3, 2, 30, 2, 5.0, 1);
  const Dataset d = generate_multiclass_mil(pool, 60, 2, 8, {1, 2, 3}, 2);
  EXPECT_EQ(d.num_classes(), 4);
  for (const auto& bag : d.bags()) {
    std::set<Label> present;
    std::set<std::vector<double>> features;
    for (InstanceId id : bag.instance_ids) {
      const Label gt = *d.instance(id).ground_truth;
      if (gt != 0) present.insert(gt);
      features.insert(d.instance(id).features);
    }
    EXPECT_EQ(present, std::get<LabelSet>(bag.weak_label).labels);
    EXPECT_EQ(features.size(), bag.instance_ids.size()) << "pool rows repeat inside bag " << bag.id;
  }
  const auto hist = label_set_size_histogram(d);
  int total = 0;
  for (int n : hist) total += n;
  EXPECT_EQ(total, 60);
}

TEST(Generators, MulticlassRejectsBadInput) {
  const LabeledPool pool = generate_gaussian_blobs(3, 2, 2, 1.0, 0);
  EXPECT_THROW(generate_multiclass_mil(pool, 4, 2, 3, {0, 1}, 0), ParameterError);
  EXPECT_THROW(generate_multiclass_mil(pool, 4, 2, 7, {1}, 0), ParameterError);
  EXPECT_THROW(generate_multiclass_mil(LabeledPool{}, 4, 1, 1, {1}, 0), ParameterError);
}

TEST(Generators, BlobNeighboursAreSeparationApart) {
  const LabeledPool pool = generate_gaussian_blobs(6, 1, 2, 3.0, 0);
  for (int c = 0; c < 6; ++c) {
    const auto& a = pool.class_means[c];
    const auto& b = pool.class_means[(c + 1) % 6];
    EXPECT_NEAR(std::hypot(a[0] - b[0], a[1] - b[1]), 3.0, 1e-12);
  }
}

TEST(Generators, InterleavedBlobsAlternateAroundCircle) {
  const LabeledPool pool = generate_interleaved_blobs(5, 5, 1, 2, 4.0, 0);
  // Pool rows are emitted in circle order, one per position.
  for (std::size_t p = 0; p < pool.classes.size(); ++p) {
    const bool negative = pool.classes[p] > 5;
    EXPECT_EQ(negative, p % 2 == 0) << "position " << p;
  }
}

TEST(Generators, LabelProportionsAreGroundTruthFractions) {
  const Dataset d = to_label_proportions(generate_binary_mil(12, 2, 6, 0.5, 2, 3.0, 4));
  for (const auto& bag : d.bags()) {
    double pos = 0;
    for (InstanceId id : bag.instance_ids) pos += *d.instance(id).ground_truth;
    EXPECT_DOUBLE_EQ(std::get<Proportion>(bag.weak_label).value, pos / bag.instance_ids.size());
  }
}

TEST(Random, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(42, a, b));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
}

}  // namespace
}  // namespace bliss
