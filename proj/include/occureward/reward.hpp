#pragma once

#include <Eigen/Dense>
#include <string>

#include "occureward/comfort.hpp"
#include "occureward/env.hpp"
#include "occureward/kpi.hpp"

namespace occureward {

enum class WeightProvenance { Scripted, RemoteEngineer, Manual };

std::string to_string(WeightProvenance p);
WeightProvenance provenance_from_string(const std::string& s);

// Absolute, unnormalized reward coefficients. Rounds 1 and 2 must carry a
// zero equity weight; violating that is a protocol error the refinement
// driver reports back to the engineer.
struct RewardWeights {
  double cost_w = 0.0;
  double carbon_w = 0.0;
  double solar_w = 0.0;
  double soc_w = 0.0;
  double equity_w = 0.0;
  int round = 1;
  WeightProvenance provenance = WeightProvenance::Manual;
  bool degenerate = false;  // all weights zero; accepted but flagged
  bool validated = false;
};

RewardWeights validate_weights(RewardWeights weights);

// Per-step KPI increments divided by the RBC increment at the same timestep.
struct StepKpiProxies {
  double cost = 0.0;
  double carbon = 0.0;
  double solar = 0.0;
  double soc = 0.0;
};

// Per-timestep RBC increments for one seed, with episode means used as the
// fallback denominator where a step increment is zero.
struct RbcReference {
  Eigen::ArrayXd cost;
  Eigen::ArrayXd carbon;
  Eigen::ArrayXd spill;
  Eigen::ArrayXd soc_dev;
  double cost_mean = 0.0;
  double carbon_mean = 0.0;
  double spill_mean = 0.0;
  double soc_dev_mean = 0.0;

  static RbcReference from_trace(const EpisodeTrace& trace);
  int horizon() const { return static_cast<int>(cost.size()); }
};

StepKpiProxies step_kpi_proxies(const StepOutcome& outcome, int timestep,
                                const RbcReference& reference);

struct StepReward {
  double total = 0.0;
  double cost_term = 0.0;
  double carbon_term = 0.0;
  double solar_term = 0.0;
  double soc_term = 0.0;
  double equity_term = 0.0;
  double instant_cei = 0.0;
};

// R = -(cost_w*c + carbon_w*k + solar_w*s + soc_w*d + equity_w*CEI_t), with
// CEI_t taken over the instantaneous satisfactions.
StepReward step_reward(const RewardWeights& weights, const StepKpiProxies& proxies,
                       const SatisfactionVector& instantaneous);

// Weight document I/O: exactly {"cost": w, "carbon": w, "solar": w,
// "soc": w, "equity": w}, the shape the engineer must emit.
std::string weights_to_json(const RewardWeights& w);
RewardWeights weights_from_json(const std::string& text, int round,
                                WeightProvenance provenance);

}  // namespace occureward
