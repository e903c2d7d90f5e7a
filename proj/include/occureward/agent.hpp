#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "occureward/comfort.hpp"
#include "occureward/env.hpp"
#include "occureward/kpi.hpp"
#include "occureward/reward.hpp"

namespace occureward {

// Softmax temperature annealed linearly over the first part of training,
// then held at the end value.
struct ExplorationSchedule {
  double temp_start = 1.0;
  double temp_end = 0.02;
  double anneal_fraction = 0.6;

  double at(long step, long total_steps) const {
    const double cutoff = anneal_fraction * static_cast<double>(total_steps);
    if (cutoff <= 0.0 || static_cast<double>(step) >= cutoff) return temp_end;
    const double f = static_cast<double>(step) / cutoff;
    return temp_start + f * (temp_end - temp_start);
  }
};

// Discrete district action grid; one (cooling, battery) pair broadcast to
// every building.
struct ActionGrid {
  std::vector<double> cooling_levels = {0.0, 0.5, 1.0};
  std::vector<double> battery_levels = {-0.15, 0.0, 0.15};

  int size() const {
    return static_cast<int>(cooling_levels.size() * battery_levels.size());
  }
  double cooling(int idx) const {
    return cooling_levels[static_cast<size_t>(idx) / battery_levels.size()];
  }
  double battery(int idx) const {
    return battery_levels[static_cast<size_t>(idx) % battery_levels.size()];
  }
};

struct AgentConfig {
  long training_steps = 50000;
  double learning_rate = 3e-4;
  int batch_size = 256;
  int replay_capacity = 10000;
  double discount = 0.97;
  ExplorationSchedule exploration;
  ActionGrid action_grid;

  // State featurization: hour of day x mean-indoor-temperature bin x mean
  // state-of-charge bin.
  double temp_bin_min = 17.0;
  double temp_bin_width = 1.0;
  int temp_bins = 16;
  int soc_bins = 3;

  void validate() const;
  int state_count() const { return 24 * temp_bins * soc_bins; }
};

struct TrainParams {
  long training_steps = 0;
  double learning_rate = 0.0;
  int batch_size = 0;
  int replay_capacity = 0;
  double discount = 0.0;
  ExplorationSchedule exploration;
};

namespace detail {

struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {
    data_.reserve(static_cast<size_t>(capacity));
  }

  void push(const Transition& t) {
    if (data_.size() < static_cast<size_t>(capacity_)) {
      data_.push_back(t);
    } else {
      data_[cursor_] = t;
    }
    cursor_ = (cursor_ + 1) % static_cast<size_t>(capacity_);
  }

  const Transition& sample(std::mt19937_64& rng) const {
    const auto idx = static_cast<size_t>(uniform01(rng) * static_cast<double>(data_.size()));
    return data_[std::min(idx, data_.size() - 1)];
  }

  size_t size() const { return data_.size(); }

 private:
  int capacity_;
  size_t cursor_ = 0;
  std::vector<Transition> data_;
};

inline double soft_value(const Eigen::RowVectorXd& q, double temperature) {
  const double vmax = q.maxCoeff();
  if (temperature < 1e-3) return vmax;
  double acc = 0.0;
  for (Eigen::Index a = 0; a < q.size(); ++a) {
    acc += std::exp((q[a] - vmax) / temperature);
  }
  return vmax + temperature * std::log(acc);
}

inline int softmax_sample(const Eigen::RowVectorXd& q, double temperature,
                          std::mt19937_64& rng) {
  const auto n = q.size();
  if (temperature < 1e-6) {
    int best = 0;
    for (Eigen::Index a = 1; a < n; ++a) {
      if (q[a] > q[best]) best = static_cast<int>(a);
    }
    return best;
  }
  const double vmax = q.maxCoeff();
  Eigen::ArrayXd w(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    w[a] = std::exp((q[a] - vmax) / temperature);
  }
  const double u = uniform01(rng) * w.sum();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    acc += w[a];
    if (u <= acc) return static_cast<int>(a);
  }
  return static_cast<int>(n - 1);
}

}  // namespace detail

struct TrainStepResult {
  int next_state = 0;
  double reward = 0.0;
};

// Entropy-regularized tabular Q-learning with a uniform replay buffer.
// Behavior is a softmax over action values at the annealed temperature;
// bootstrap targets use the soft value at the fixed end temperature so the
// regularization stays constant while exploration cools. Rewards are
// centered by a running mean (differential Q-learning), which keeps the
// table near zero so untried actions carry no systematic optimism.
// TrainEnv provides state_count(), action_count(), reset() -> state and
// step(action) -> TrainStepResult; episode rollover is the env's business
// (the MDP is treated as continuing). Fully deterministic given the seed.
template <typename TrainEnv>
Eigen::MatrixXd train_q_table(TrainEnv& env, const TrainParams& params,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(env.state_count(), env.action_count());
  detail::ReplayBuffer replay(params.replay_capacity);
  const double target_tau = params.exploration.temp_end;
  constexpr double kCenterRate = 0.005;
  double reward_center = 0.0;
  bool center_primed = false;

  int state = env.reset();
  for (long step = 0; step < params.training_steps; ++step) {
    const double tau = params.exploration.at(step, params.training_steps);
    const int action = detail::softmax_sample(q.row(state), tau, rng);
    const TrainStepResult r = env.step(action);
    if (!center_primed) {
      reward_center = r.reward;
      center_primed = true;
    } else {
      reward_center += kCenterRate * (r.reward - reward_center);
    }
    replay.push({state, action, r.reward, r.next_state});

    for (int k = 0; k < params.batch_size; ++k) {
      const auto& t = replay.sample(rng);
      const double target = (t.reward - reward_center) +
                            params.discount * detail::soft_value(q.row(t.next_state), target_tau);
      q(t.state, t.action) += params.learning_rate * (target - q(t.state, t.action));
    }
    state = r.next_state;
  }
  return q;
}

// Reward signal for one environment step, with the proxies retained for the
// training progress log.
struct StepRewardDetail {
  double total = 0.0;
  StepKpiProxies proxies;
};

using StepRewardFn = std::function<StepRewardDetail(const StepOutcome&, int timestep)>;

// Weighted-sum reward against a per-seed RBC reference episode.
StepRewardFn make_step_reward_fn(const RewardWeights& weights, RbcReference reference,
                                 const ProfileSet& profiles);

enum class PolicyMode { Stochastic, Greedy };

// Trained controller over the discretized action grid. Greedy mode is
// deterministic; stochastic mode samples the softmax at a fixed temperature.
class Policy {
 public:
  Policy() = default;
  Policy(Eigen::MatrixXd q, AgentConfig cfg, PolicyMode mode = PolicyMode::Greedy,
         double temperature = 0.02, std::uint64_t sample_seed = 0);

  Action act(const DistrictState& state);
  int action_index(const DistrictState& state);
  PolicyMode mode() const { return mode_; }
  Policy with_mode(PolicyMode mode) const;
  const Eigen::MatrixXd& q_table() const { return q_; }
  const AgentConfig& config() const { return cfg_; }

  int state_index(const DistrictState& state) const;

  PolicyFn as_fn() const;

  std::string to_json() const;
  static Policy from_json(const std::string& text);

 private:
  Eigen::MatrixXd q_;
  AgentConfig cfg_;
  PolicyMode mode_ = PolicyMode::Greedy;
  double temperature_ = 0.02;
  std::mt19937_64 rng_{0};
};

// Trains against the reward signal for training_steps environment
// interactions (episodes glued back-to-back, each reset with the job seed).
// Deterministic given (config, seed). An optional stream receives one
// delimited progress line per completed episode.
Policy train(const MicrodistrictEnv& env, const StepRewardFn& reward,
             const AgentConfig& cfg, std::uint64_t seed,
             std::ostream* progress = nullptr);

struct EvaluationReport {
  std::uint64_t seed = 0;
  KpiVector raw_agent;
  KpiVector raw_rbc;
  NormalizedKpiVector normalized;
  double composite = 0.0;
  SatisfactionVector satisfactions;
  EquityReport equity;
  double mean_step_reward = 0.0;
  bool has_reward = false;
};

// One greedy episode, normalized against the RBC episode for the same seed.
EvaluationReport evaluate(const Policy& policy, const MicrodistrictEnv& env,
                          const ProfileSet& profiles, const RbcConfig& rbc_cfg,
                          std::uint64_t seed, const RewardWeights* weights = nullptr);

// Evaluation of an arbitrary policy function (e.g. the RBC itself).
EvaluationReport evaluate_policy_fn(const PolicyFn& policy, const MicrodistrictEnv& env,
                                    const ProfileSet& profiles, const RbcConfig& rbc_cfg,
                                    std::uint64_t seed,
                                    const RewardWeights* weights = nullptr);

}  // namespace occureward
