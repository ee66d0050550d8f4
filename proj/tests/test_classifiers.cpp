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

#include <random>

#include "bliss/classifiers.hpp"
#include "bliss/generators.hpp"
#include "oracles.hpp"

namespace bliss {
namespace {

ClassifierSpec make_spec(ClassifierKind kind, int classes, std::vector<std::vector<Label>> grouping = {}) {
  ClassifierSpec spec;
  spec.kind = kind;
  spec.num_classes = classes;
  spec.grouping = std::move(grouping);
  return spec;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (auto& v : m.row(i)) v = n(rng);
  return m;
}

std::vector<Label> random_labels(Rng& rng, std::size_t n, int classes) {
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<Label> y(n);
  for (auto& l : y) l = u(rng);
  return y;
}

TrainedModel random_model(Rng& rng, const ClassifierSpec& spec, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  TrainedModel m = initial_model(spec, dim);
  for (auto& row : m.weights)
    for (auto& v : row) v = n(rng);
  return m;
}

std::vector<double> flatten(const WeightRows& w) {
  std::vector<double> out;
  for (const auto& r : w) out.insert(out.end(), r.begin(), r.end());
  return out;
}

WeightRows unflatten(const std::vector<double>& v, const WeightRows& shape) {
  WeightRows w = shape;
  std::size_t k = 0;
  for (auto& r : w)
    for (auto& x : r) x = v[k++];
  return w;
}

// Relative error with a floor so tiny components do not dominate.
double rel_error(double a, double b) { return std::abs(a - b) / std::max(1e-3, std::max(std::abs(a), std::abs(b))); }

TEST(CooperativeSoftmax, SingletonGroupsReduceToSoftmax) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    ClassifierSpec soft = make_spec(ClassifierKind::kSoftmax, 5);
    ClassifierSpec coop = make_spec(ClassifierKind::kCooperativeSoftmax, 5, {{0}, {1}, {2}, {3}, {4}});
    soft.l2 = coop.l2 = 0.01;
    const Matrix x = random_matrix(rng, 30, 3);
    const auto y = random_labels(rng, 30, 5);
    TrainedModel a = random_model(rng, soft, 3, 2.0);
    TrainedModel b{coop, a.weights};
    EXPECT_NEAR(objective::value(a, x, y), objective::value(b, x, y), 1e-9);
    const auto pa = predict(a, x), pb = predict(b, x);
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(pa[i].embedding[c], pb[i].embedding[c], 1e-12);
  }
}

TEST(CooperativeSoftmax, GroupMembersDoNotCompete) {
  ClassifierSpec spec = make_spec(ClassifierKind::kCooperativeSoftmax, 3, {{0, 2}, {1}});
  TrainedModel m{spec, {{0.0, 1.0}, {0.0, 0.5}, {0.0, 0.2}}};  // scores 1.0, 0.5, 0.2 (bias only)
  const std::vector<double> x{0.0};
  const double s0 = predict_one(m, x).embedding[0];
  EXPECT_NEAR(s0, std::exp(1.0) / (std::exp(1.0) + std::exp(0.5)), 1e-12);
  m.weights[2][1] = 0.9;  // raise a same-group rival below the leader
  EXPECT_NEAR(predict_one(m, x).embedding[0], s0, 1e-12);
  // For class 1 the other group contributes only its maximum.
  EXPECT_NEAR(predict_one(m, x).embedding[1], std::exp(0.5) / (std::exp(0.5) + std::exp(1.0)), 1e-12);
}

void expect_gradient_matches_finite_differences(const ClassifierSpec& spec, std::uint64_t seed, double tol) {
  Rng rng(seed);
  int checked = 0;
  for (int trial = 0; checked < 100 && trial < 1000; ++trial) {
    const Matrix x = random_matrix(rng, 6, 3);
    const auto y = random_labels(rng, 6, spec.num_classes);
    TrainedModel m = random_model(rng, spec, 3);
    // Skip points near a kink: group-max ties (cooperative softmax) or hinge
    // margins near zero (SVM).
    bool near_kink = false;
    const auto groups = class_groups(spec);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      std::vector<double> z;
      for (const auto& row : m.weights) z.push_back(objective::dot_row(row, x.row(i)));
      for (std::size_t a = 0; a < z.size(); ++a)
        for (std::size_t b = a + 1; b < z.size(); ++b)
          if (spec.kind == ClassifierKind::kCooperativeSoftmax && groups[a] == groups[b] &&
              std::abs(z[a] - z[b]) < 1e-3)
            near_kink = true;
      if (spec.kind == ClassifierKind::kLinearSvm)
        for (double v : z)
          if (std::abs(std::abs(v) - 1.0) < 1e-3) near_kink = true;
    }
    if (near_kink) continue;
    const auto g = flatten(objective::gradient(m, x, y));
    const auto fd = oracle::finite_difference(
        [&](const std::vector<double>& w) { return objective::value(TrainedModel{spec, unflatten(w, m.weights)}, x, y); },
        flatten(m.weights), 1e-6);
    for (std::size_t k = 0; k < g.size(); ++k) ASSERT_LT(rel_error(g[k], fd[k]), tol) << "component " << k;
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(CooperativeSoftmax, SubgradientMatchesFiniteDifferences) {
  ClassifierSpec spec = make_spec(ClassifierKind::kCooperativeSoftmax, 6, {{0, 4, 5}, {1}, {2, 3}});
  spec.l2 = 0.05;
  expect_gradient_matches_finite_differences(spec, 2, 1e-4);
}

TEST(Softmax, GradientMatchesFiniteDifferences) {
  ClassifierSpec spec = make_spec(ClassifierKind::kSoftmax, 4);
  spec.l2 = 0.05;
  expect_gradient_matches_finite_differences(spec, 3, 1e-4);
}

TEST(LinearSvm, GradientMatchesFiniteDifferencesAwayFromHinge) {
  for (int classes : {2, 3}) {
    ClassifierSpec spec = make_spec(ClassifierKind::kLinearSvm, classes);
    spec.l2 = 0.05;
    expect_gradient_matches_finite_differences(spec, 4 + classes, 1e-4);
  }
}

TEST(LinearSvm, TwoClassEmbeddingIsSymmetric) {
  ClassifierSpec spec = make_spec(ClassifierKind::kLinearSvm, 2);
  const TrainedModel m{spec, {{2.0, -1.0, 0.5}}};
  const std::vector<double> x{1.0, 3.0};
  const Prediction p = predict_one(m, x);
  EXPECT_DOUBLE_EQ(p.embedding[1], -0.5);
  EXPECT_DOUBLE_EQ(p.embedding[0], 0.5);
  EXPECT_EQ(p.label, 0);
}

class FitTest : public ::testing::TestWithParam<ClassifierKind> {};

TEST_P(FitTest, SeparatesBlobs) {
  const LabeledPool pool = generate_gaussian_blobs(3, 60, 2, 8.0, 5);
  Matrix x(0, 2);
  for (const auto& f : pool.features) x.append_row(f);
  ClassifierSpec spec = make_spec(GetParam(), 3);
  if (GetParam() == ClassifierKind::kCooperativeSoftmax) spec.grouping = {{0}, {1}, {2}};
  spec.epochs = 30;
  const TrainedModel m = fit(spec, x, pool.classes);
  std::vector<int> predicted;
  for (const auto& p : predict(m, x)) predicted.push_back(p.label);
  EXPECT_GT(oracle::accuracy(pool.classes, predicted), 0.95);
  // Same seed, same weights.
  EXPECT_EQ(fit(spec, x, pool.classes).weights, m.weights);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, FitTest,
                         ::testing::Values(ClassifierKind::kLinearSvm, ClassifierKind::kSoftmax,
                                           ClassifierKind::kCooperativeSoftmax));

TEST(Fit, CooperativeSoftmaxLearnsMultimodalNegativeGroup) {
  // Negative mass split into two modes on either side of the positive class.
  Rng rng(6);
  std::normal_distribution<double> n(0.0, 0.5);
  Matrix x(0, 1);
  std::vector<Label> y;
  for (int i = 0; i < 100; ++i) {
    x.append_row(std::vector<double>{-4.0 + n(rng)});
    y.push_back(0);
    x.append_row(std::vector<double>{4.0 + n(rng)});
    y.push_back(2);
    x.append_row(std::vector<double>{n(rng)});
    y.push_back(1);
  }
  ClassifierSpec spec = make_spec(ClassifierKind::kCooperativeSoftmax, 3, {{0, 2}, {1}});
  spec.epochs = 40;
  const TrainedModel m = fit(spec, x, y);
  int right = 0;
  const auto preds = predict(m, x);
  for (std::size_t i = 0; i < preds.size(); ++i) right += (preds[i].label == 1) == (y[i] == 1);
  EXPECT_GT(right, 280);
}

TEST(Fit, ZeroWeightsLeaveInitialModel) {
  Rng rng(7);
  const Matrix x = random_matrix(rng, 20, 2);
  const auto y = random_labels(rng, 20, 2);
  ClassifierSpec spec = make_spec(ClassifierKind::kSoftmax, 2);
  const std::vector<double> w(20, 0.0);
  EXPECT_EQ(fit(spec, x, y, w).weights, initial_model(spec, 2).weights);
}

TEST(Fit, ZeroWeightSamplesDoNotEnterTheObjective) {
  Rng rng(8);
  const Matrix x = random_matrix(rng, 10, 2);
  auto y = random_labels(rng, 10, 3);
  ClassifierSpec spec = make_spec(ClassifierKind::kSoftmax, 3);
  spec.l2 = 0.0;
  const TrainedModel m = random_model(rng, spec, 2);
  std::vector<double> w(10, 1.0);
  w[3] = 0.0;
  const double before = objective::value(m, x, y, w);
  y[3] = (y[3] + 1) % 3;
  EXPECT_EQ(objective::value(m, x, y, w), before);
}

TEST(Fit, RejectsBadInput) {
  Rng rng(9);
  const Matrix x = random_matrix(rng, 5, 2);
  ClassifierSpec spec = make_spec(ClassifierKind::kSoftmax, 2);
  EXPECT_THROW(fit(spec, x, std::vector<Label>{0, 1, 2, 0, 1}), ValidationError);
  EXPECT_THROW(fit(spec, x, std::vector<Label>{0, 1}), ValidationError);
  EXPECT_THROW(fit(spec, x, std::vector<Label>{0, 1, 1, 0, 1}, std::vector<double>{1, 1, -1, 1, 1}), ValidationError);
  ClassifierSpec bad_group = make_spec(ClassifierKind::kCooperativeSoftmax, 3, {{0, 1}});
  EXPECT_THROW(validate_spec(bad_group), ValidationError);
  bad_group.grouping = {{0, 1}, {1, 2}};
  EXPECT_THROW(validate_spec(bad_group), ValidationError);
  const TrainedModel m = fit(spec, x, std::vector<Label>{0, 1, 1, 0, 1});
  EXPECT_THROW(predict(m, random_matrix(rng, 2, 3)), ValidationError);
}

TEST(Fit, DivergenceIsReported) {
  Rng rng(10);
  const Matrix x = random_matrix(rng, 50, 2, 1e150);
  ClassifierSpec spec = make_spec(ClassifierKind::kLinearSvm, 3);
  spec.learning_rate = 1e200;
  EXPECT_THROW(fit(spec, x, random_labels(rng, 50, 3)), ValidationError);
}

TEST(ModelJson, RoundTripPreservesPredictions) {
  Rng rng(11);
  for (auto kind : {ClassifierKind::kLinearSvm, ClassifierKind::kSoftmax, ClassifierKind::kCooperativeSoftmax}) {
    ClassifierSpec spec = make_spec(kind, 3);
    if (kind == ClassifierKind::kCooperativeSoftmax) spec.grouping = {{0, 2}, {1}};
    const TrainedModel m = random_model(rng, spec, 4);
    const TrainedModel back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    const Matrix x = random_matrix(rng, 10, 4);
    EXPECT_EQ(predict(back, x), predict(m, x));
  }
  EXPECT_THROW(model_from_json(nlohmann::json{{"kind", "svm"}}), ParseError);
}

std::vector<Prediction> random_predictions(Rng& rng, std::size_t n, std::size_t dim, bool quantize) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> lab(0, static_cast<int>(dim) - 1);
  std::vector<Prediction> out(n);
  for (auto& p : out) {
    p.embedding.resize(dim);
    for (auto& v : p.embedding) v = quantize ? std::round(u(rng) * 8.0) / 8.0 : u(rng);
    p.label = lab(rng);
  }
  return out;
}

TEST(Knn, FullModeMatchesBruteForce) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pool = random_predictions(rng, 40, 3, trial % 2 == 0);
    const auto q = random_predictions(rng, 1, 3, false)[0];
    std::vector<std::vector<double>> raw;
    for (const auto& p : pool) raw.push_back(p.embedding);
    for (int k : {1, 5, 40, 60}) EXPECT_EQ(knn_in_output_space(q, pool, k, KnnMode::kFull), oracle::knn(q.embedding, raw, k));
  }
}

TEST(Knn, AxisIndexMatchesBruteForceIncludingTies) {
  Rng rng(13);
  std::vector<std::size_t> out;
  std::vector<std::pair<double, std::size_t>> scratch;
  for (int trial = 0; trial < 300; ++trial) {
    const auto pool = random_predictions(rng, 30, 3, trial % 3 != 0);
    const auto q = random_predictions(rng, 1, 3, trial % 2 == 0)[0];
    const AxisIndex index(pool, static_cast<std::size_t>(q.label));
    for (int k : {1, 3, 7, 30, 45}) {
      index.nearest(q.embedding[q.label], k, out, scratch);
      EXPECT_EQ(out, knn_in_output_space(q, pool, k, KnnMode::kPredictedClassDim)) << "trial " << trial << " k " << k;
    }
  }
}

TEST(Knn, RejectsEmptyPoolAndBadK) {
  const Prediction q{0, {0.0, 1.0}};
  EXPECT_THROW(knn_in_output_space(q, {}, 1, KnnMode::kFull), ParameterError);
  const std::vector<Prediction> pool{q};
  EXPECT_THROW(knn_in_output_space(q, pool, 0, KnnMode::kFull), ParameterError);
}

}  // namespace
}  // namespace bliss
