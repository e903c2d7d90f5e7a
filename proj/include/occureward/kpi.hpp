#pragma once

#include <Eigen/Dense>
#include <string>

#include "occureward/env.hpp"

namespace occureward {

struct KpiVector {
  double cost = 0.0;
  double carbon = 0.0;
  double solar_shortfall = 0.0;
  double soc_deviation = 0.0;
};

// Componentwise agent/baseline ratios; lower is better, RBC against itself is
// exactly all ones.
struct NormalizedKpiVector {
  double cost = 0.0;
  double carbon = 0.0;
  double solar_shortfall = 0.0;
  double soc_deviation = 0.0;
};

KpiVector aggregate(const EpisodeTrace& trace);

NormalizedKpiVector normalize(const KpiVector& agent, const KpiVector& baseline);

// Unweighted mean of the cost, solar shortfall and SoC deviation components;
// carbon is tracked separately and excluded.
double composite_cost(const NormalizedKpiVector& nk);

struct RbcConfig {
  double setpoint = 25.5;       // degC
  double deadband = 0.5;        // degC
  double charge_rate = 0.08;    // battery fraction per step while solar exceeds load
  double discharge_rate = 0.12; // battery fraction per step while price is high
};

// Fixed-setpoint hysteresis thermostat plus a simple battery heuristic:
// charge while solar exceeds the base load, discharge while the price is
// above its episode median. Carries one hysteresis bit per building.
class RbcController {
 public:
  RbcController(RbcConfig cfg, const MicrodistrictEnv& env);

  Action act(const DistrictState& state);
  void reset();

  const RbcConfig& config() const { return cfg_; }
  double price_median() const { return price_median_; }

 private:
  RbcConfig cfg_;
  const MicrodistrictEnv* env_;
  double price_median_ = 0.0;
  Eigen::Array<bool, Eigen::Dynamic, 1> cooling_on_;
};

// One full RBC episode under the given seed (fresh hysteresis state).
EpisodeTrace run_rbc_episode(const MicrodistrictEnv& env, const RbcConfig& cfg,
                             std::uint64_t seed);

}  // namespace occureward
