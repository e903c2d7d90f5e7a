#include "occureward/kpi.hpp"

#include <algorithm>
#include <vector>

namespace occureward {

KpiVector aggregate(const EpisodeTrace& trace) {
  if (trace.outcomes.empty()) {
    throw Error(ErrorCode::InvalidInput, "aggregate requires a non-empty trace");
  }
  KpiVector k;
  for (const auto& o : trace.outcomes) {
    k.cost += o.cost;
    k.carbon += o.carbon;
    k.solar_shortfall += o.solar_spilled;
    k.soc_deviation += o.soc_deviation;
  }
  return k;
}

NormalizedKpiVector normalize(const KpiVector& agent, const KpiVector& baseline) {
  auto ratio = [](double a, double b, const char* name) {
    if (!(b > 0.0)) {
      throw Error(ErrorCode::DegenerateBaseline,
                  std::string("baseline component '") + name + "' is not positive");
    }
    return a / b;
  };
  NormalizedKpiVector nk;
  nk.cost = ratio(agent.cost, baseline.cost, "cost");
  nk.carbon = ratio(agent.carbon, baseline.carbon, "carbon");
  nk.solar_shortfall = ratio(agent.solar_shortfall, baseline.solar_shortfall, "solar_shortfall");
  nk.soc_deviation = ratio(agent.soc_deviation, baseline.soc_deviation, "soc_deviation");
  return nk;
}

double composite_cost(const NormalizedKpiVector& nk) {
  return (nk.cost + nk.solar_shortfall + nk.soc_deviation) / 3.0;
}

RbcController::RbcController(RbcConfig cfg, const MicrodistrictEnv& env)
    : cfg_(cfg), env_(&env) {
  if (!env.configured()) {
    throw Error(ErrorCode::Config, "RBC requires a configured environment");
  }
  const auto& price = env.traces().price;
  std::vector<double> sorted(price.data(), price.data() + price.size());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  price_median_ = n % 2 == 1 ? sorted[n / 2]
                             : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  cooling_on_ = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(env.buildings(), false);
}

void RbcController::reset() {
  cooling_on_.setConstant(false);
}

Action RbcController::act(const DistrictState& state) {
  const auto& cfg = env_->config();
  const auto& traces = env_->traces();
  const int t = std::min(state.timestep, cfg.horizon - 1);
  const double base = cfg.base_load[static_cast<size_t>(t % 24)];
  const double price = traces.price[t];

  Action a = Action::zero(cfg.buildings);
  for (int b = 0; b < cfg.buildings; ++b) {
    const double temp = state.indoor_temp[b];
    if (temp > cfg_.setpoint + cfg_.deadband) {
      cooling_on_[b] = true;
    } else if (temp < cfg_.setpoint - cfg_.deadband) {
      cooling_on_[b] = false;
    }
    a.cooling_power[b] = cooling_on_[b] ? 1.0 : 0.0;

    const double solar = traces.solar_gen(t, b);
    if (solar > base) {
      a.battery_rate[b] = cfg_.charge_rate;
    } else if (price > price_median_) {
      a.battery_rate[b] = -cfg_.discharge_rate;
    }
  }
  return a;
}

EpisodeTrace run_rbc_episode(const MicrodistrictEnv& env, const RbcConfig& cfg,
                             std::uint64_t seed) {
  RbcController rbc(cfg, env);
  return run_episode(env, [&rbc](const DistrictState& s) { return rbc.act(s); }, seed);
}

}  // namespace occureward
