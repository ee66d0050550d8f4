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

// Combinatorial UCB label inference.
//
// Every instance x owns one simple arm per admissible label l. A super arm is
// a complete labelling (one simple arm per instance). Pulling it trains the
// black-box classifier on that labelling and yields one reward in [0,1] per
// instance, credited to the pulled simple arm.

#ifndef BLISS_BANDIT_HPP_
#define BLISS_BANDIT_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bliss/data.hpp"
#include "bliss/error.hpp"
#include "bliss/random.hpp"

namespace bliss {

using LabelAssignment = std::map<InstanceId, Label>;
using Rewards = std::map<InstanceId, double>;
using LabelSets = std::map<InstanceId, std::vector<Label>>;

struct ArmKey {
  InstanceId instance_id = 0;
  Label label = 0;
  auto operator<=>(const ArmKey&) const = default;
};

struct ArmState {
  std::int64_t pulls = 0;
  double cumulative_reward = 0.0;

  double mean() const { return cumulative_reward / static_cast<double>(pulls); }
};

// Confidence of an instance whose label set is a singleton.
inline constexpr double kFixedConfidence = std::numeric_limits<double>::infinity();
inline bool is_fixed(double confidence) { return std::isinf(confidence) && confidence > 0; }

struct InferenceResult {
  LabelAssignment assignment;                 // pi*
  std::map<InstanceId, double> confidence;    // c(x), kFixedConfidence for singletons
  std::map<ArmKey, double> empirical_means;   // s/T per simple arm
  std::int64_t pull_history_length = 0;       // super-arm pulls, initialization included
};

// Order-independent hash of a labelling, for logs and error context.
inline std::uint64_t assignment_hash(const LabelAssignment& a) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [id, label] : a) {
    feed(static_cast<std::uint64_t>(id));
    feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(label)));
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = kDigits[h & 0xf];
  return s;
}

// Upper confidence bound s/T + sqrt(3 ln t / (2 T)).
inline double ucb_score(double cumulative_reward, double pulls, double round) {
  return cumulative_reward / pulls + std::sqrt(3.0 * std::log(round) / (2.0 * pulls));
}

// T and s for every simple arm, plus the round counter t.
//
// t counts post-initialization super-arm pulls (each member of a parallel
// batch counts). Selection for the next pull uses t + 1, so the first pull
// after initialization sees t = 1 and a zero bonus.
class BanditState {
 public:
  explicit BanditState(const LabelSets& label_sets) {
    offsets_.reserve(label_sets.size() + 1);
    offsets_.push_back(0);
    for (const auto& [id, labels] : label_sets) {
      if (labels.empty()) throw ParameterError("instance " + std::to_string(id) + " has an empty label set");
      std::vector<Label> sorted = labels;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ParameterError("instance " + std::to_string(id) + " has duplicate labels");
      position_.emplace(id, ids_.size());
      ids_.push_back(id);
      labels_.insert(labels_.end(), sorted.begin(), sorted.end());
      offsets_.push_back(labels_.size());
    }
    arms_.assign(labels_.size(), ArmState{});
  }

  std::size_t num_instances() const { return ids_.size(); }
  std::size_t num_arms() const { return arms_.size(); }
  const std::vector<InstanceId>& instance_ids() const { return ids_; }

  std::size_t position(InstanceId id) const {
    auto it = position_.find(id);
    if (it == position_.end()) throw CompletenessError("instance " + std::to_string(id) + " is not in the bandit");
    return it->second;
  }

  // Admissible labels of the instance at `pos`, ascending.
  std::span<const Label> labels(std::size_t pos) const {
    return {labels_.data() + offsets_[pos], offsets_[pos + 1] - offsets_[pos]};
  }
  std::span<const ArmState> arms(std::size_t pos) const {
    return {arms_.data() + offsets_[pos], offsets_[pos + 1] - offsets_[pos]};
  }
  std::size_t arm_offset(std::size_t pos) const { return offsets_[pos]; }
  bool has_choice(std::size_t pos) const { return offsets_[pos + 1] - offsets_[pos] > 1; }

  // Flat arm index of (instance, label); throws if the label is not admissible.
  std::size_t arm_index(InstanceId id, Label label) const {
    const std::size_t pos = position(id);
    auto ls = labels(pos);
    auto it = std::lower_bound(ls.begin(), ls.end(), label);
    if (it == ls.end() || *it != label)
      throw ValidationError("label " + std::to_string(label) + " is not admissible for instance " + std::to_string(id));
    return offsets_[pos] + static_cast<std::size_t>(it - ls.begin());
  }

  const ArmState& arm(const ArmKey& key) const { return arms_[arm_index(key.instance_id, key.label)]; }

  std::map<ArmKey, ArmState> arm_map() const {
    std::map<ArmKey, ArmState> out;
    for (std::size_t p = 0; p < ids_.size(); ++p)
      for (std::size_t j = offsets_[p]; j < offsets_[p + 1]; ++j) out.emplace(ArmKey{ids_[p], labels_[j]}, arms_[j]);
    return out;
  }

  std::int64_t round() const { return round_; }
  std::int64_t total_pulls() const { return total_pulls_; }

  bool initialized() const {
    return std::all_of(arms_.begin(), arms_.end(), [](const ArmState& a) { return a.pulls >= 1; });
  }

 private:
  friend void update(BanditState&, const LabelAssignment&, const Rewards&, bool);

  std::vector<InstanceId> ids_;
  std::unordered_map<InstanceId, std::size_t> position_;
  std::vector<std::size_t> offsets_;
  std::vector<Label> labels_;
  std::vector<ArmState> arms_;
  std::int64_t round_ = 0;
  std::int64_t total_pulls_ = 0;
};

inline BanditState new_bandit(const LabelSets& label_sets) { return BanditState(label_sets); }

// Labellings that together pull every not-yet-pulled arm at least once.
// Assignment j gives each instance its j-th untried label (in a random order
// per instance); instances with nothing left to try get a uniformly random
// admissible label. The sequence length is the largest number of untried arms
// of any instance.
inline std::vector<LabelAssignment> initialization_assignments(const BanditState& state, Rng& rng) {
  const std::size_t n = state.num_instances();
  std::vector<std::vector<Label>> untried(n);
  std::size_t length = 0;
  for (std::size_t p = 0; p < n; ++p) {
    auto ls = state.labels(p);
    auto arms = state.arms(p);
    for (std::size_t j = 0; j < ls.size(); ++j)
      if (arms[j].pulls == 0) untried[p].push_back(ls[j]);
    std::shuffle(untried[p].begin(), untried[p].end(), rng);
    length = std::max(length, untried[p].size());
  }
  std::vector<LabelAssignment> out(length);
  for (std::size_t j = 0; j < length; ++j) {
    for (std::size_t p = 0; p < n; ++p) {
      Label l;
      if (j < untried[p].size()) {
        l = untried[p][j];
      } else {
        auto ls = state.labels(p);
        std::uniform_int_distribution<std::size_t> pick(0, ls.size() - 1);
        l = ls[pick(rng)];
      }
      out[j].emplace(state.instance_ids()[p], l);
    }
  }
  return out;
}

namespace bandit_detail {

inline void require_initialized(const BanditState& state) {
  if (!state.initialized()) throw PreconditionError("initialization sweep incomplete: some arm has T = 0");
}

// Per-instance UCB argmax at round t. `extra` (may be empty) holds virtual
// pulls keyed by flat arm index. Ties go to the lowest label id.
inline LabelAssignment select_at(const BanditState& state, double t,
                                 const std::unordered_map<std::size_t, std::int64_t>& extra) {
  LabelAssignment out;
  for (std::size_t p = 0; p < state.num_instances(); ++p) {
    auto ls = state.labels(p);
    if (ls.size() == 1) {
      out.emplace_hint(out.end(), state.instance_ids()[p], ls[0]);
      continue;
    }
    auto arms = state.arms(p);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ls.size(); ++j) {
      double pulls = static_cast<double>(arms[j].pulls);
      double mean = arms[j].mean();
      if (!extra.empty()) {
        auto it = extra.find(state.arm_offset(p) + j);
        if (it != extra.end()) pulls += static_cast<double>(it->second);
      }
      const double score = mean + std::sqrt(3.0 * std::log(t) / (2.0 * pulls));
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    out.emplace_hint(out.end(), state.instance_ids()[p], ls[best]);
  }
  return out;
}

}  // namespace bandit_detail

// UCB of every simple arm for the next pull (t = round + 1).
inline std::map<ArmKey, double> ucb_scores(const BanditState& state) {
  bandit_detail::require_initialized(state);
  const double t = static_cast<double>(state.round() + 1);
  std::map<ArmKey, double> out;
  for (std::size_t p = 0; p < state.num_instances(); ++p) {
    auto ls = state.labels(p);
    auto arms = state.arms(p);
    for (std::size_t j = 0; j < ls.size(); ++j)
      out.emplace(ArmKey{state.instance_ids()[p], ls[j]},
                  ucb_score(arms[j].cumulative_reward, static_cast<double>(arms[j].pulls), t));
  }
  return out;
}

inline LabelAssignment select_super_arm(const BanditState& state) {
  bandit_detail::require_initialized(state);
  return bandit_detail::select_at(state, static_cast<double>(state.round() + 1), {});
}

// P super arms to pull in parallel. Member j is chosen as if members 1..j-1
// had already been pulled and had returned each arm's current empirical mean:
// those arms get a virtual pull (T grows, mean is unchanged, bonus shrinks)
// and t advances by one per member. Virtual pulls live in an overlay keyed by
// the touched arms; the state itself is never modified.
inline std::vector<LabelAssignment> select_super_arm_batch(const BanditState& state, int batch_size) {
  if (batch_size <= 0) throw ParameterError("batch size must be >= 1");
  bandit_detail::require_initialized(state);
  std::unordered_map<std::size_t, std::int64_t> virtual_pulls;
  virtual_pulls.reserve(static_cast<std::size_t>(batch_size) * state.num_instances());
  std::vector<LabelAssignment> out;
  out.reserve(batch_size);
  for (int j = 0; j < batch_size; ++j) {
    out.push_back(bandit_detail::select_at(state, static_cast<double>(state.round() + 1 + j), virtual_pulls));
    if (j + 1 == batch_size) break;
    for (const auto& [id, label] : out.back()) {
      const std::size_t pos = state.position(id);
      if (state.has_choice(pos)) ++virtual_pulls[state.arm_index(id, label)];
    }
  }
  return out;
}

// Credits rewards to the pulled arms. Validates everything before mutating.
inline void update(BanditState& state, const LabelAssignment& assignment, const Rewards& rewards, bool advance_round) {
  if (assignment.size() != state.num_instances())
    throw CompletenessError("assignment covers " + std::to_string(assignment.size()) + " instances, bandit has " +
                            std::to_string(state.num_instances()));
  std::vector<std::pair<std::size_t, double>> credits;
  credits.reserve(assignment.size());
  for (const auto& [id, label] : assignment) {
    auto it = rewards.find(id);
    if (it == rewards.end()) throw CompletenessError("no reward for instance " + std::to_string(id));
    const double r = it->second;
    if (!(r >= 0.0 && r <= 1.0))
      throw RewardRangeError("reward " + std::to_string(r) + " for instance " + std::to_string(id) + " is outside [0,1]");
    credits.emplace_back(state.arm_index(id, label), r);
  }
  for (const auto& [arm, r] : credits) {
    state.arms_[arm].pulls += 1;
    state.arms_[arm].cumulative_reward += r;
  }
  ++state.total_pulls_;
  if (advance_round) ++state.round_;
}

// pi*(x) = argmax_l s/T (lowest label on ties) and c(x) = best mean minus the
// runner-up mean.
inline InferenceResult best_assignment(const BanditState& state) {
  bandit_detail::require_initialized(state);
  InferenceResult result;
  result.pull_history_length = state.total_pulls();
  for (std::size_t p = 0; p < state.num_instances(); ++p) {
    const InstanceId id = state.instance_ids()[p];
    auto ls = state.labels(p);
    auto arms = state.arms(p);
    std::size_t best = 0;
    for (std::size_t j = 0; j < ls.size(); ++j) {
      result.empirical_means.emplace(ArmKey{id, ls[j]}, arms[j].mean());
      if (arms[j].mean() > arms[best].mean()) best = j;
    }
    result.assignment.emplace(id, ls[best]);
    if (ls.size() == 1) {
      result.confidence.emplace(id, kFixedConfidence);
      continue;
    }
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ls.size(); ++j)
      if (j != best) runner_up = std::max(runner_up, arms[j].mean());
    result.confidence.emplace(id, arms[best].mean() - runner_up);
  }
  return result;
}

// One credited simple-arm pull. round is 0 for initialization pulls and t for
// the t-th pull after initialization.
struct PullRecord {
  std::int64_t round = 0;
  std::uint64_t assignment_hash = 0;
  InstanceId instance_id = 0;
  Label label = 0;
  double reward = 0.0;
};

using PullLog = std::vector<PullRecord>;

inline std::string to_ndjson(const PullLog& log) {
  std::string out;
  for (const auto& r : log) {
    nlohmann::json j;
    j["round"] = r.round;
    j["assignment_hash"] = hash_hex(r.assignment_hash);
    j["instance_id"] = r.instance_id;
    j["label"] = r.label;
    j["reward"] = r.reward;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline PullLog pull_log_from_ndjson(const std::string& text) {
  PullLog log;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      PullRecord r;
      r.round = j.at("round").get<std::int64_t>();
      r.assignment_hash = std::stoull(j.at("assignment_hash").get<std::string>(), nullptr, 16);
      r.instance_id = j.at("instance_id").get<InstanceId>();
      r.label = j.at("label").get<Label>();
      r.reward = j.at("reward").get<double>();
      log.push_back(r);
    } catch (const std::exception& e) {
      throw ParseError("pull log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

struct BanditConfig {
  std::int64_t rounds = 500;  // N: post-initialization super-arm pulls
  int batch_size = 1;         // P
  int threads = 1;            // parallel environment evaluations per batch
};

// Per-pull diagnostics collected by run_inference.
struct RunTrace {
  std::vector<double> mean_reward;  // one entry per post-initialization pull
  std::int64_t initialization_pulls = 0;
};

// Any callable returning per-instance rewards for a labelling; the seed drives
// whatever randomness the environment has (e.g. classifier training).
template <typename Env>
concept RewardEnvironmentLike = requires(const Env& env, const LabelAssignment& a, std::uint64_t seed) {
  { env(a, seed) } -> std::convertible_to<Rewards>;
};

// Initialization sweep, then N pulls in batches of P (select, evaluate,
// update in batch order), then pi* and confidences.
template <RewardEnvironmentLike Env>
InferenceResult run_inference(const LabelSets& label_sets, const Env& env, const BanditConfig& config, Rng& rng,
                              PullLog* log = nullptr, RunTrace* trace = nullptr) {
  if (config.rounds < 1) throw ParameterError("rounds must be >= 1");
  if (config.batch_size < 1) throw ParameterError("batch size must be >= 1");
  BanditState state(label_sets);

  auto pull = [&](const std::vector<LabelAssignment>& batch, bool advance) {
    std::vector<std::uint64_t> seeds(batch.size());
    for (auto& s : seeds) s = rng();
    std::vector<Rewards> rewards(batch.size());
    auto evaluate = [&](std::size_t j) -> Rewards {
      const std::int64_t round = advance ? state.round() + 1 + static_cast<std::int64_t>(j) : 0;
      try {
        return env(batch[j], seeds[j]);
      } catch (const std::exception& e) {
        throw InferenceError("round " + std::to_string(round) + ", assignment " +
                             hash_hex(assignment_hash(batch[j])) + ": " + e.what());
      }
    };
    if (config.threads > 1 && batch.size() > 1) {
      std::vector<std::future<Rewards>> futures;
      for (std::size_t j = 0; j < batch.size(); ++j) futures.push_back(std::async(std::launch::async, evaluate, j));
      for (std::size_t j = 0; j < batch.size(); ++j) rewards[j] = futures[j].get();
    } else {
      for (std::size_t j = 0; j < batch.size(); ++j) rewards[j] = evaluate(j);
    }
    for (std::size_t j = 0; j < batch.size(); ++j) {
      try {
        update(state, batch[j], rewards[j], advance);
      } catch (const Error& e) {
        throw InferenceError("round " + std::to_string(advance ? state.round() + 1 : 0) + ", assignment " +
                             hash_hex(assignment_hash(batch[j])) + ": " + e.what());
      }
      if (log) {
        const std::uint64_t h = assignment_hash(batch[j]);
        for (const auto& [id, label] : batch[j])
          log->push_back({advance ? state.round() : 0, h, id, label, rewards[j].at(id)});
      }
      if (trace) {
        if (advance) {
          double sum = 0.0;
          for (const auto& [id, r] : rewards[j]) {
            (void)id;
            sum += r;
          }
          trace->mean_reward.push_back(rewards[j].empty() ? 0.0 : sum / static_cast<double>(rewards[j].size()));
        } else {
          ++trace->initialization_pulls;
        }
      }
    }
  };

  pull(initialization_assignments(state, rng), false);

  bool any_choice = false;
  for (std::size_t p = 0; p < state.num_instances(); ++p) any_choice = any_choice || state.has_choice(p);
  // Every labelling is forced; further pulls cannot change anything.
  if (!any_choice) return best_assignment(state);

  std::int64_t remaining = config.rounds;
  while (remaining > 0) {
    const int p = static_cast<int>(std::min<std::int64_t>(config.batch_size, remaining));
    pull(select_super_arm_batch(state, p), true);
    remaining -= p;
  }
  return best_assignment(state);
}

}  // namespace bliss

#endif  // BLISS_BANDIT_HPP_
