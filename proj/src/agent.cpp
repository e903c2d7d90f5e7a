#include "occureward/agent.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <ostream>
#include <utility>

namespace occureward {

using json = nlohmann::json;

void AgentConfig::validate() const {
  if (training_steps < 1) throw Error(ErrorCode::Config, "training_steps must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::Config, "learning_rate must be > 0");
  if (batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be >= 1");
  if (replay_capacity < 1) throw Error(ErrorCode::Config, "replay_capacity must be >= 1");
  if (!(discount > 0.0 && discount < 1.0)) {
    throw Error(ErrorCode::Config, "discount must lie in (0,1)");
  }
  if (action_grid.cooling_levels.empty() || action_grid.battery_levels.empty()) {
    throw Error(ErrorCode::Config, "action grid must be non-empty");
  }
  if (temp_bins < 1 || soc_bins < 1 || !(temp_bin_width > 0.0)) {
    throw Error(ErrorCode::Config, "featurization bins must be positive");
  }
}

namespace {

int state_index_for(const AgentConfig& cfg, const DistrictState& state) {
  const int hour = state.timestep % 24;
  const double mean_temp = state.indoor_temp.mean();
  int tbin = static_cast<int>(std::floor((mean_temp - cfg.temp_bin_min) / cfg.temp_bin_width));
  tbin = std::clamp(tbin, 0, cfg.temp_bins - 1);
  const double mean_soc = state.soc.mean();
  int sbin = static_cast<int>(std::floor(mean_soc * cfg.soc_bins));
  sbin = std::clamp(sbin, 0, cfg.soc_bins - 1);
  return (hour * cfg.temp_bins + tbin) * cfg.soc_bins + sbin;
}

Action grid_action(const ActionGrid& grid, int idx, int buildings) {
  return Action::uniform(buildings, grid.cooling(idx), grid.battery(idx));
}

// Adapts the district environment, reward signal and featurization to the
// discrete interface consumed by train_q_table. Episodes are glued: at the
// horizon the environment resets with the job seed.
class DistrictTrainEnv {
 public:
  DistrictTrainEnv(const MicrodistrictEnv& env, const StepRewardFn& reward,
                   const AgentConfig& cfg, std::uint64_t seed, std::ostream* progress)
      : env_(&env), reward_(&reward), cfg_(&cfg), seed_(seed), progress_(progress) {}

  int state_count() const { return cfg_->state_count(); }
  int action_count() const { return cfg_->action_grid.size(); }

  int reset() {
    state_ = env_->reset(seed_);
    episode_reward_ = 0.0;
    episode_proxies_ = StepKpiProxies{};
    episode_steps_ = 0;
    return state_index_for(*cfg_, state_);
  }

  TrainStepResult step(int action_idx) {
    const Action action = grid_action(cfg_->action_grid, action_idx, env_->buildings());
    auto [next, outcome] = env_->step(state_, action);
    const StepRewardDetail detail = (*reward_)(outcome, state_.timestep);
    if (!std::isfinite(detail.total)) {
      throw Error(ErrorCode::TrainingFault,
                  "non-finite reward at global step " + std::to_string(global_step_) +
                      " (episode timestep " + std::to_string(state_.timestep) + ")");
    }
    ++global_step_;
    ++episode_steps_;
    episode_reward_ += detail.total;
    episode_proxies_.cost += detail.proxies.cost;
    episode_proxies_.carbon += detail.proxies.carbon;
    episode_proxies_.solar += detail.proxies.solar;
    episode_proxies_.soc += detail.proxies.soc;

    state_ = std::move(next);
    if (state_.timestep >= env_->horizon()) {
      log_episode();
      state_ = env_->reset(seed_);
    }
    return {state_index_for(*cfg_, state_), detail.total};
  }

 private:
  void log_episode() {
    if (progress_ == nullptr || episode_steps_ == 0) return;
    const double n = static_cast<double>(episode_steps_);
    (*progress_) << global_step_ << ',' << episode_reward_ / n << ','
                 << episode_proxies_.cost / n << ',' << episode_proxies_.carbon / n << ','
                 << episode_proxies_.solar / n << ',' << episode_proxies_.soc / n << '\n';
  }

  const MicrodistrictEnv* env_;
  const StepRewardFn* reward_;
  const AgentConfig* cfg_;
  std::uint64_t seed_;
  std::ostream* progress_;
  DistrictState state_;
  long global_step_ = 0;
  long episode_steps_ = 0;
  double episode_reward_ = 0.0;
  StepKpiProxies episode_proxies_;
};

}  // namespace

StepRewardFn make_step_reward_fn(const RewardWeights& weights, RbcReference reference,
                                 const ProfileSet& profiles) {
  if (!weights.validated) {
    throw Error(ErrorCode::InvalidInput, "weights must pass validate_weights first");
  }
  return [weights, reference = std::move(reference), profiles](
             const StepOutcome& outcome, int timestep) -> StepRewardDetail {
    StepRewardDetail d;
    d.proxies = step_kpi_proxies(outcome, timestep, reference);
    const SatisfactionVector instant = instant_satisfaction(profiles, outcome.indoor_temp);
    d.total = step_reward(weights, d.proxies, instant).total;
    return d;
  };
}

Policy::Policy(Eigen::MatrixXd q, AgentConfig cfg, PolicyMode mode, double temperature,
               std::uint64_t sample_seed)
    : q_(std::move(q)), cfg_(std::move(cfg)), mode_(mode), temperature_(temperature),
      rng_(sample_seed) {
  if (q_.rows() != cfg_.state_count() || q_.cols() != cfg_.action_grid.size()) {
    throw Error(ErrorCode::InvalidInput, "policy table does not match the featurization");
  }
}

int Policy::state_index(const DistrictState& state) const {
  return state_index_for(cfg_, state);
}

int Policy::action_index(const DistrictState& state) {
  const int s = state_index(state);
  if (mode_ == PolicyMode::Greedy) {
    int best = 0;
    for (int a = 1; a < q_.cols(); ++a) {
      if (q_(s, a) > q_(s, best)) best = a;
    }
    return best;
  }
  return detail::softmax_sample(q_.row(s), temperature_, rng_);
}

Action Policy::act(const DistrictState& state) {
  return grid_action(cfg_.action_grid, action_index(state),
                     static_cast<int>(state.indoor_temp.size()));
}

Policy Policy::with_mode(PolicyMode mode) const {
  Policy p = *this;
  p.mode_ = mode;
  return p;
}

PolicyFn Policy::as_fn() const {
  // The copy keeps stochastic sampling confined to the closure instance.
  return [policy = *this](const DistrictState& s) mutable { return policy.act(s); };
}

std::string Policy::to_json() const {
  json j;
  j["format"] = "occureward-policy";
  j["version"] = 1;
  j["mode"] = mode_ == PolicyMode::Greedy ? "greedy" : "stochastic";
  j["temperature"] = temperature_;
  j["featurization"] = {{"temp_bin_min", cfg_.temp_bin_min},
                        {"temp_bin_width", cfg_.temp_bin_width},
                        {"temp_bins", cfg_.temp_bins},
                        {"soc_bins", cfg_.soc_bins}};
  j["action_grid"] = {{"cooling_levels", cfg_.action_grid.cooling_levels},
                      {"battery_levels", cfg_.action_grid.battery_levels}};
  j["states"] = q_.rows();
  j["actions"] = q_.cols();
  std::vector<double> flat(static_cast<size_t>(q_.size()));
  Eigen::Map<Eigen::MatrixXd>(flat.data(), q_.rows(), q_.cols()) = q_;
  j["q"] = flat;
  return j.dump();
}

Policy Policy::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad policy JSON: ") + e.what());
  }
  if (j.value("format", "") != "occureward-policy" || j.value("version", 0) != 1) {
    throw Error(ErrorCode::Format, "unsupported policy document");
  }
  AgentConfig cfg;
  try {
    cfg.temp_bin_min = j.at("featurization").at("temp_bin_min").get<double>();
    cfg.temp_bin_width = j.at("featurization").at("temp_bin_width").get<double>();
    cfg.temp_bins = j.at("featurization").at("temp_bins").get<int>();
    cfg.soc_bins = j.at("featurization").at("soc_bins").get<int>();
    cfg.action_grid.cooling_levels =
        j.at("action_grid").at("cooling_levels").get<std::vector<double>>();
    cfg.action_grid.battery_levels =
        j.at("action_grid").at("battery_levels").get<std::vector<double>>();
    const auto rows = j.at("states").get<Eigen::Index>();
    const auto cols = j.at("actions").get<Eigen::Index>();
    const auto flat = j.at("q").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
      throw Error(ErrorCode::Format, "policy table size mismatch");
    }
    Eigen::MatrixXd q = Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, cols);
    const PolicyMode mode =
        j.value("mode", "greedy") == std::string("greedy") ? PolicyMode::Greedy
                                                           : PolicyMode::Stochastic;
    return Policy(std::move(q), std::move(cfg), mode, j.value("temperature", 0.02));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad policy document: ") + e.what());
  }
}

Policy train(const MicrodistrictEnv& env, const StepRewardFn& reward,
             const AgentConfig& cfg, std::uint64_t seed, std::ostream* progress) {
  cfg.validate();
  if (!env.configured()) {
    throw Error(ErrorCode::Config, "train requires a configured environment");
  }
  if (progress != nullptr) {
    (*progress) << "timestep,mean_reward,mean_cost_proxy,mean_carbon_proxy,"
                   "mean_solar_proxy,mean_soc_proxy\n";
  }
  DistrictTrainEnv tenv(env, reward, cfg, seed, progress);
  TrainParams params{cfg.training_steps, cfg.learning_rate, cfg.batch_size,
                     cfg.replay_capacity, cfg.discount, cfg.exploration};
  Eigen::MatrixXd q = train_q_table(tenv, params, seed);
  return Policy(std::move(q), cfg, PolicyMode::Greedy);
}

EvaluationReport evaluate_policy_fn(const PolicyFn& policy, const MicrodistrictEnv& env,
                                    const ProfileSet& profiles, const RbcConfig& rbc_cfg,
                                    std::uint64_t seed, const RewardWeights* weights) {
  EvaluationReport report;
  report.seed = seed;

  const EpisodeTrace rbc_trace = run_rbc_episode(env, rbc_cfg, seed);
  const EpisodeTrace agent_trace = run_episode(env, policy, seed);

  report.raw_rbc = aggregate(rbc_trace);
  report.raw_agent = aggregate(agent_trace);
  report.normalized = normalize(report.raw_agent, report.raw_rbc);
  report.composite = composite_cost(report.normalized);
  report.satisfactions = district_episode_satisfaction(profiles, agent_trace.indoor_matrix());
  report.equity = cei(report.satisfactions);

  if (weights != nullptr) {
    const RbcReference reference = RbcReference::from_trace(rbc_trace);
    double acc = 0.0;
    for (size_t t = 0; t < agent_trace.outcomes.size(); ++t) {
      const auto& outcome = agent_trace.outcomes[t];
      const StepKpiProxies proxies =
          step_kpi_proxies(outcome, static_cast<int>(t), reference);
      const SatisfactionVector instant = instant_satisfaction(profiles, outcome.indoor_temp);
      acc += step_reward(*weights, proxies, instant).total;
    }
    report.mean_step_reward = acc / static_cast<double>(agent_trace.outcomes.size());
    report.has_reward = true;
  }
  return report;
}

EvaluationReport evaluate(const Policy& policy, const MicrodistrictEnv& env,
                          const ProfileSet& profiles, const RbcConfig& rbc_cfg,
                          std::uint64_t seed, const RewardWeights* weights) {
  if (policy.mode() != PolicyMode::Greedy) {
    throw Error(ErrorCode::InvalidInput, "evaluate requires a greedy-mode policy");
  }
  return evaluate_policy_fn(policy.as_fn(), env, profiles, rbc_cfg, seed, weights);
}

}  // namespace occureward
