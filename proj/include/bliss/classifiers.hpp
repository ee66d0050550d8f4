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

// Strongly supervised linear classifiers used as black boxes by the label
// inference loop, plus nearest-neighbour search in their output space.

#ifndef BLISS_CLASSIFIERS_HPP_
#define BLISS_CLASSIFIERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bliss/data.hpp"
#include "bliss/error.hpp"
#include "bliss/random.hpp"

namespace bliss {

enum class ClassifierKind { kLinearSvm, kSoftmax, kCooperativeSoftmax };

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::kLinearSvm: return "linear-svm";
    case ClassifierKind::kSoftmax: return "softmax";
    case ClassifierKind::kCooperativeSoftmax: return "cooperative-softmax";
  }
  return "linear-svm";
}

inline ClassifierKind classifier_kind_from_string(std::string_view s) {
  if (s == "linear-svm") return ClassifierKind::kLinearSvm;
  if (s == "softmax") return ClassifierKind::kSoftmax;
  if (s == "cooperative-softmax") return ClassifierKind::kCooperativeSoftmax;
  throw ParameterError("unknown classifier kind '" + std::string(s) + "'");
}

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kLinearSvm;
  int num_classes = 2;
  // Cooperative softmax only: disjoint, exhaustive groups of class ids whose
  // members do not compete. Empty means every class is its own group.
  std::vector<std::vector<Label>> grouping;
  double learning_rate = 0.1;
  int epochs = 10;
  double l2 = 1e-4;
  int batch_size = 8;
  std::uint64_t seed = 0;
};

// Group index of every class; validates that `grouping` partitions 0..M-1.
inline std::vector<int> class_groups(const ClassifierSpec& spec) {
  std::vector<int> group(spec.num_classes, -1);
  if (spec.grouping.empty()) {
    std::iota(group.begin(), group.end(), 0);
    return group;
  }
  for (std::size_t g = 0; g < spec.grouping.size(); ++g) {
    if (spec.grouping[g].empty()) throw ValidationError("grouping contains an empty group");
    for (Label c : spec.grouping[g]) {
      if (c < 0 || c >= spec.num_classes) throw ValidationError("grouping references class " + std::to_string(c));
      if (group[c] != -1) throw ValidationError("class " + std::to_string(c) + " appears in two groups");
      group[c] = static_cast<int>(g);
    }
  }
  for (int c = 0; c < spec.num_classes; ++c)
    if (group[c] == -1) throw ValidationError("grouping does not cover class " + std::to_string(c));
  return group;
}

inline void validate_spec(const ClassifierSpec& spec) {
  if (spec.num_classes < 2) throw ValidationError("classifier needs num_classes >= 2");
  if (!(spec.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (spec.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(spec.l2 >= 0.0)) throw ValidationError("l2 must be >= 0");
  if (spec.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (spec.kind == ClassifierKind::kCooperativeSoftmax) (void)class_groups(spec);
}

// One weight row per class (per binary task for a 2-class SVM); the last
// entry of each row is the bias.
using WeightRows = std::vector<std::vector<double>>;

struct TrainedModel {
  ClassifierSpec spec;
  WeightRows weights;

  std::size_t feature_dim() const { return weights.empty() ? 0 : weights.front().size() - 1; }
};

struct Prediction {
  Label label = 0;
  // Decision values (SVM) or class probabilities (softmax variants). For a
  // 2-class SVM with decision value d this is [-d, +d].
  std::vector<double> embedding;

  bool operator==(const Prediction&) const = default;
};

inline std::size_t num_weight_rows(const ClassifierSpec& spec) {
  return spec.kind == ClassifierKind::kLinearSvm && spec.num_classes == 2 ? 1 : spec.num_classes;
}

namespace objective {

inline double dot_row(const std::vector<double>& w, std::span<const double> x) {
  double z = w.back();
  for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
  return z;
}

// Cached group structure for the cooperative softmax.
struct Groups {
  std::vector<int> of_class;
  int count = 0;

  explicit Groups(const ClassifierSpec& spec) : of_class(class_groups(spec)) {
    count = of_class.empty() ? 0 : *std::max_element(of_class.begin(), of_class.end()) + 1;
  }
};

// Loss of one sample and d(loss)/d(score) for each weight row.
inline double sample_loss(const ClassifierSpec& spec, const Groups* groups, std::span<const double> z, Label y,
                          std::span<double> dz) {
  std::fill(dz.begin(), dz.end(), 0.0);
  switch (spec.kind) {
    case ClassifierKind::kLinearSvm: {
      double loss = 0.0;
      for (std::size_t t = 0; t < z.size(); ++t) {
        const Label positive = z.size() == 1 ? 1 : static_cast<Label>(t);
        const double target = y == positive ? 1.0 : -1.0;
        const double margin = 1.0 - target * z[t];
        if (margin > 0.0) {
          loss += margin;
          dz[t] = -target;
        }
      }
      return loss;
    }
    case ClassifierKind::kSoftmax: {
      const double zmax = *std::max_element(z.begin(), z.end());
      double den = 0.0;
      for (double v : z) den += std::exp(v - zmax);
      for (std::size_t c = 0; c < z.size(); ++c) dz[c] = std::exp(z[c] - zmax) / den;
      dz[y] -= 1.0;
      return -(z[y] - zmax) + std::log(den);
    }
    case ClassifierKind::kCooperativeSoftmax: {
      // sigma_y = e^{z_y} / (e^{z_y} + sum over other groups of max_j e^{z_j}).
      const int gy = groups->of_class[y];
      std::vector<int> arg(groups->count, -1);
      for (std::size_t c = 0; c < z.size(); ++c) {
        int& a = arg[groups->of_class[c]];
        if (a == -1 || z[c] > z[a]) a = static_cast<int>(c);
      }
      double shift = z[y];
      for (int g = 0; g < groups->count; ++g)
        if (g != gy) shift = std::max(shift, z[arg[g]]);
      const double ey = std::exp(z[y] - shift);
      double den = ey;
      for (int g = 0; g < groups->count; ++g)
        if (g != gy) den += std::exp(z[arg[g]] - shift);
      dz[y] = ey / den - 1.0;
      for (int g = 0; g < groups->count; ++g)
        if (g != gy) dz[arg[g]] += std::exp(z[arg[g]] - shift) / den;
      return -(z[y] - shift) + std::log(den);
    }
  }
  return 0.0;
}

inline void check_inputs(const ClassifierSpec& spec, const Matrix& x, std::span<const Label> y,
                         std::span<const double> sample_weights) {
  if (y.size() != x.rows()) throw ValidationError("label count does not match instance count");
  if (!sample_weights.empty() && sample_weights.size() != x.rows())
    throw ValidationError("sample weight count does not match instance count");
  for (Label l : y)
    if (l < 0 || l >= spec.num_classes)
      throw ValidationError("label " + std::to_string(l) + " outside [0, " + std::to_string(spec.num_classes) + ")");
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (double v : x.row(i))
      if (!std::isfinite(v)) throw ValidationError("non-finite feature in row " + std::to_string(i));
  for (double w : sample_weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("sample weights must be finite and >= 0");
}

// (1/n) sum_i w_i loss_i + (l2/2) |W|^2 (biases unregularized). For the
// softmax variants loss_i = -log sigma_{y_i}.
inline double value(const TrainedModel& model, const Matrix& x, std::span<const Label> y,
                    std::span<const double> sample_weights = {}) {
  const auto& spec = model.spec;
  std::optional<Groups> groups;
  if (spec.kind == ClassifierKind::kCooperativeSoftmax) groups.emplace(spec);
  const std::size_t rows = model.weights.size();
  std::vector<double> z(rows), dz(rows);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[i];
    if (w == 0.0) continue;
    for (std::size_t r = 0; r < rows; ++r) z[r] = dot_row(model.weights[r], x.row(i));
    total += w * sample_loss(spec, groups ? &*groups : nullptr, z, y[i], dz);
  }
  double reg = 0.0;
  for (const auto& row : model.weights)
    for (std::size_t j = 0; j + 1 < row.size(); ++j) reg += row[j] * row[j];
  return (x.rows() ? total / static_cast<double>(x.rows()) : 0.0) + 0.5 * spec.l2 * reg;
}

// Gradient of value() with respect to every weight (same layout as weights).
inline WeightRows gradient(const TrainedModel& model, const Matrix& x, std::span<const Label> y,
                           std::span<const double> sample_weights = {}) {
  const auto& spec = model.spec;
  std::optional<Groups> groups;
  if (spec.kind == ClassifierKind::kCooperativeSoftmax) groups.emplace(spec);
  const std::size_t rows = model.weights.size();
  const std::size_t dim = model.feature_dim();
  WeightRows grad(rows, std::vector<double>(dim + 1, 0.0));
  std::vector<double> z(rows), dz(rows);
  const double inv_n = x.rows() ? 1.0 / static_cast<double>(x.rows()) : 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[i];
    if (w == 0.0) continue;
    auto xi = x.row(i);
    for (std::size_t r = 0; r < rows; ++r) z[r] = dot_row(model.weights[r], xi);
    sample_loss(spec, groups ? &*groups : nullptr, z, y[i], dz);
    for (std::size_t r = 0; r < rows; ++r) {
      if (dz[r] == 0.0) continue;
      const double g = w * dz[r] * inv_n;
      for (std::size_t j = 0; j < dim; ++j) grad[r][j] += g * xi[j];
      grad[r][dim] += g;
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < dim; ++j) grad[r][j] += spec.l2 * model.weights[r][j];
  return grad;
}

}  // namespace objective

// Weights at initialization: zeros, or N(0, 0.01^2) for the cooperative
// softmax (identical negative-group rows would otherwise never separate).
inline TrainedModel initial_model(const ClassifierSpec& spec, std::size_t feature_dim) {
  TrainedModel model{spec, WeightRows(num_weight_rows(spec), std::vector<double>(feature_dim + 1, 0.0))};
  if (spec.kind == ClassifierKind::kCooperativeSoftmax) {
    Rng rng(derive_seed(spec.seed, 0x1a17));
    std::normal_distribution<double> init(0.0, 0.01);
    for (auto& row : model.weights)
      for (auto& v : row) v = init(rng);
  }
  return model;
}

// Mini-batch stochastic (sub)gradient descent on objective::value with step
// size lr / (1 + lr * l2 * step). Deterministic given spec.seed.
inline TrainedModel fit(const ClassifierSpec& spec, const Matrix& x, std::span<const Label> y,
                        std::span<const double> sample_weights = {}) {
  validate_spec(spec);
  if (x.cols() == 0) throw ValidationError("features must have dimension >= 1");
  objective::check_inputs(spec, x, y, sample_weights);
  TrainedModel model = initial_model(spec, x.cols());
  if (x.rows() == 0) return model;

  std::optional<objective::Groups> groups;
  if (spec.kind == ClassifierKind::kCooperativeSoftmax) groups.emplace(spec);
  const std::size_t rows = model.weights.size();
  const std::size_t dim = x.cols();
  Rng rng(spec.seed);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  WeightRows grad(rows, std::vector<double>(dim + 1, 0.0));
  std::vector<double> z(rows), dz(rows);
  std::int64_t step = 0;

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(spec.batch_size));
      for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const double w = sample_weights.empty() ? 1.0 : sample_weights[i];
        if (w == 0.0) continue;
        auto xi = x.row(i);
        for (std::size_t r = 0; r < rows; ++r) z[r] = objective::dot_row(model.weights[r], xi);
        objective::sample_loss(spec, groups ? &*groups : nullptr, z, y[i], dz);
        for (std::size_t r = 0; r < rows; ++r) {
          if (dz[r] == 0.0) continue;
          const double g = w * dz[r] * inv_b;
          for (std::size_t j = 0; j < dim; ++j) grad[r][j] += g * xi[j];
          grad[r][dim] += g;
        }
      }
      const double eta = spec.learning_rate / (1.0 + spec.learning_rate * spec.l2 * static_cast<double>(step));
      for (std::size_t r = 0; r < rows; ++r) {
        auto& wr = model.weights[r];
        for (std::size_t j = 0; j < dim; ++j) wr[j] -= eta * (grad[r][j] + spec.l2 * wr[j]);
        wr[dim] -= eta * grad[r][dim];
      }
      ++step;
    }
  }
  for (const auto& row : model.weights)
    for (double v : row)
      if (!std::isfinite(v)) throw ValidationError("training diverged (non-finite weights); lower the learning rate");
  return model;
}

inline Prediction predict_one(const TrainedModel& model, std::span<const double> x,
                              const std::vector<int>* groups_of_class = nullptr) {
  const auto& spec = model.spec;
  const std::size_t rows = model.weights.size();
  std::vector<double> z(rows);
  for (std::size_t r = 0; r < rows; ++r) z[r] = objective::dot_row(model.weights[r], x);
  Prediction p;
  switch (spec.kind) {
    case ClassifierKind::kLinearSvm:
      p.embedding = rows == 1 ? std::vector<double>{-z[0], z[0]} : z;
      break;
    case ClassifierKind::kSoftmax: {
      const double zmax = *std::max_element(z.begin(), z.end());
      double den = 0.0;
      p.embedding.resize(rows);
      for (std::size_t c = 0; c < rows; ++c) den += (p.embedding[c] = std::exp(z[c] - zmax));
      for (auto& v : p.embedding) v /= den;
      break;
    }
    case ClassifierKind::kCooperativeSoftmax: {
      std::vector<int> local;
      if (!groups_of_class) {
        local = class_groups(spec);
        groups_of_class = &local;
      }
      const auto& of = *groups_of_class;
      const int count = *std::max_element(of.begin(), of.end()) + 1;
      std::vector<double> gmax(count, -std::numeric_limits<double>::infinity());
      for (std::size_t c = 0; c < rows; ++c) gmax[of[c]] = std::max(gmax[of[c]], z[c]);
      p.embedding.resize(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        double shift = z[i];
        for (int g = 0; g < count; ++g)
          if (g != of[i]) shift = std::max(shift, gmax[g]);
        const double ei = std::exp(z[i] - shift);
        double den = ei;
        for (int g = 0; g < count; ++g)
          if (g != of[i]) den += std::exp(gmax[g] - shift);
        p.embedding[i] = ei / den;
      }
      break;
    }
  }
  p.label = static_cast<Label>(std::max_element(p.embedding.begin(), p.embedding.end()) - p.embedding.begin());
  return p;
}

inline std::vector<Prediction> predict(const TrainedModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.feature_dim())
    throw ValidationError("feature dimension " + std::to_string(x.cols()) + " does not match model dimension " +
                          std::to_string(model.feature_dim()));
  std::vector<int> groups;
  if (model.spec.kind == ClassifierKind::kCooperativeSoftmax) groups = class_groups(model.spec);
  std::vector<Prediction> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict_one(model, x.row(i), groups.empty() ? nullptr : &groups));
  return out;
}

inline nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(model.spec.kind));
  j["num_classes"] = model.spec.num_classes;
  j["grouping"] = model.spec.grouping;
  j["weights"] = model.weights;
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  TrainedModel model;
  try {
    model.spec.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
    model.spec.num_classes = j.at("num_classes").get<int>();
    model.spec.grouping = j.at("grouping").get<std::vector<std::vector<Label>>>();
    model.weights = j.at("weights").get<WeightRows>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  } catch (const ParameterError& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  if (model.weights.size() != num_weight_rows(model.spec)) throw ValidationError("model has the wrong number of weight rows");
  for (const auto& row : model.weights) {
    if (row.size() != model.weights.front().size() || row.size() < 2) throw ValidationError("ragged model weights");
    for (double v : row)
      if (!std::isfinite(v)) throw ValidationError("model weights must be finite");
  }
  if (model.spec.kind == ClassifierKind::kCooperativeSoftmax) (void)class_groups(model.spec);
  return model;
}

// ---------------------------------------------------------------------------
// Nearest neighbours in classifier-output space.

enum class KnnMode {
  kFull,               // Euclidean distance between whole embeddings
  kPredictedClassDim,  // |difference| along the query's predicted-class coordinate
};

inline double output_distance(const Prediction& query, const Prediction& other, KnnMode mode) {
  if (mode == KnnMode::kPredictedClassDim) return std::abs(query.embedding[query.label] - other.embedding[query.label]);
  double s = 0.0;
  for (std::size_t j = 0; j < query.embedding.size(); ++j) {
    const double d = query.embedding[j] - other.embedding[j];
    s += d * d;
  }
  return std::sqrt(s);
}

// Indices of the k nearest pool members, nearest first; distance ties go to
// the lower index and k is clamped to the pool size.
inline std::vector<std::size_t> knn_in_output_space(const Prediction& query, std::span<const Prediction> pool, int k,
                                                    KnnMode mode) {
  if (pool.empty()) throw ParameterError("kNN pool is empty");
  if (k < 1) throw ParameterError("k must be >= 1");
  std::vector<std::pair<double, std::size_t>> d(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) d[i] = {output_distance(query, pool[i], mode), i};
  const std::size_t kk = std::min<std::size_t>(k, pool.size());
  std::partial_sort(d.begin(), d.begin() + kk, d.end());
  std::vector<std::size_t> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = d[i].second;
  return out;
}

// Sorted view of one output coordinate of a prediction pool. Answers
// 1-D k-nearest queries with the same result and ordering as the brute-force
// search above, in O(log n + k).
class AxisIndex {
 public:
  AxisIndex() = default;
  AxisIndex(std::span<const Prediction> pool, std::size_t axis) {
    sorted_.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) sorted_.emplace_back(pool[i].embedding[axis], i);
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const { return sorted_.size(); }

  // `scratch` is caller-owned so one index can serve concurrent queries.
  void nearest(double value, int k, std::vector<std::size_t>& out,
               std::vector<std::pair<double, std::size_t>>& scratch) const {
    out.clear();
    if (sorted_.empty() || k < 1) return;
    const std::size_t kk = std::min<std::size_t>(k, sorted_.size());
    auto mid = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(value, std::size_t{0}));
    std::ptrdiff_t lo = (mid - sorted_.begin()) - 1;
    std::ptrdiff_t hi = mid - sorted_.begin();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(sorted_.size());
    auto& cand = scratch;
    cand.clear();
    // Merge outward; once k are taken keep going while ties with the k-th
    // distance remain so the index tie-break can be applied.
    double kth = std::numeric_limits<double>::infinity();
    while (lo >= 0 || hi < n) {
      const double dl = lo >= 0 ? std::abs(value - sorted_[lo].first) : std::numeric_limits<double>::infinity();
      const double dh = hi < n ? std::abs(value - sorted_[hi].first) : std::numeric_limits<double>::infinity();
      const bool take_low = dl <= dh;
      const double dist = take_low ? dl : dh;
      if (cand.size() >= kk && dist > kth) break;
      cand.emplace_back(dist, take_low ? sorted_[lo].second : sorted_[hi].second);
      take_low ? --lo : ++hi;
      if (cand.size() == kk) kth = dist;
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t i = 0; i < kk; ++i) out.push_back(cand[i].second);
  }

 private:
  std::vector<std::pair<double, std::size_t>> sorted_;
};

}  // namespace bliss

#endif  // BLISS_CLASSIFIERS_HPP_
