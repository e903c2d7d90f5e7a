#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

#include "occureward/errors.hpp"

namespace occureward {

// Deterministic uniform double in [0,1) from the upper 53 bits of an
// mt19937_64 draw. Used everywhere randomness is needed so that results do
// not depend on the standard library's distribution implementations.
double uniform01(std::mt19937_64& rng);

struct EnvConfig {
  int buildings = 5;
  int horizon = 720;  // hourly steps, 30 days

  // First-order thermal model, per step:
  //   T' = T + ambient_coupling*(ambient - T) + internal_gain - cooling_gain*u
  double ambient_coupling = 0.12;
  double internal_gain = 0.1;   // degC per step
  // Per-building gain spread (linear ramp of +-spread around internal_gain)
  // so thermostats do not synchronize across the district.
  double internal_gain_spread = 0.3;
  double cooling_gain = 1.6;    // degC per step at full cooling

  double hvac_rated_kw = 2.0;   // kWh per step at full cooling
  double battery_kwh = 6.4;
  double eta_charge = 0.95;
  double eta_discharge = 0.95;
  double soc_target = 0.5;

  double init_temp_low = 24.0;
  double init_temp_high = 27.0;

  // Fixed diurnal base electrical load per building, kWh per step.
  std::array<double, 24> base_load = {
      0.35, 0.35, 0.35, 0.35, 0.35, 0.40,  // 0-5
      0.70, 0.75, 0.70, 0.55, 0.50, 0.50,  // 6-11
      0.50, 0.50, 0.50, 0.55, 0.80, 0.95,  // 12-17
      0.95, 0.90, 0.85, 0.75, 0.55, 0.45,  // 18-23
  };

  void validate() const;
};

struct TraceConfig {
  std::uint64_t seed = 7;
  double ambient_mean = 29.0;
  double ambient_amplitude = 5.0;
  double ambient_jitter = 0.3;      // uniform +-jitter, degC
  double ambient_peak_hour = 15.0;  // hottest hour of day
  double solar_peak = 3.0;          // kWh per step per building at clear noon
  double solar_day_min_factor = 0.75;  // cloudiest-day scale
  double solar_roof_min = 0.55;     // per-building roof scale spread
  double solar_roof_max = 1.45;
  double price_offpeak = 0.18;      // currency per kWh, hours 22-6
  double price_mid = 0.26;
  double price_peak = 0.42;         // hours 16-21
  double carbon_base = 0.20;        // kgCO2 per kWh
  double carbon_swing = 0.12;       // evening-peaking sinusoidal swing
};

struct ExogenousTraces {
  Eigen::ArrayXd ambient_temp;   // degC, length = horizon
  Eigen::ArrayXXd solar_gen;     // kWh, horizon x buildings
  Eigen::ArrayXd price;          // currency per kWh
  Eigen::ArrayXd carbon;         // kgCO2 per kWh
  int horizon = 0;
  int buildings = 0;

  void validate() const;
};

// Deterministic synthetic traces: diurnal ambient sinusoid with seeded
// jitter, clear-sky solar scaled per day and building, two-level time-of-use
// pricing and an evening-peaking carbon intensity.
ExogenousTraces synth_traces(const TraceConfig& cfg, int buildings, int horizon);

// Delimited text with header
// timestep, ambient_temp, solar_gen_b1..bN, price, carbon_intensity
ExogenousTraces load_traces_csv(std::istream& in);
void save_traces_csv(const ExogenousTraces& traces, std::ostream& out);

struct DistrictState {
  int timestep = 0;
  Eigen::ArrayXd indoor_temp;  // degC per building
  Eigen::ArrayXd soc;          // [0,1] per building
};

struct Action {
  Eigen::ArrayXd cooling_power;  // [0,1] per building
  Eigen::ArrayXd battery_rate;   // [-1,1] per building; fraction of rated energy

  static Action zero(int buildings);
  static Action uniform(int buildings, double cooling, double battery);
};

struct StepOutcome {
  Eigen::ArrayXd grid_import;  // kWh per building
  Eigen::ArrayXd indoor_temp;  // degC per building, after the step
  double cost = 0.0;           // currency
  double carbon = 0.0;         // kgCO2
  double solar_spilled = 0.0;  // kWh
  double soc_deviation = 0.0;  // sum of |soc' - target|
};

class MicrodistrictEnv {
 public:
  MicrodistrictEnv() = default;
  MicrodistrictEnv(EnvConfig cfg, ExogenousTraces traces);

  void configure(EnvConfig cfg, ExogenousTraces traces);
  bool configured() const { return configured_; }

  const EnvConfig& config() const { return cfg_; }
  const ExogenousTraces& traces() const { return traces_; }
  int horizon() const { return cfg_.horizon; }
  int buildings() const { return cfg_.buildings; }
  const Eigen::ArrayXd& building_gains() const { return gains_; }

  // Deterministic initial state: indoor temps uniform over the configured
  // window drawn from mt19937_64(seed); soc exactly 0.5.
  DistrictState reset(std::uint64_t seed) const;

  std::pair<DistrictState, StepOutcome> step(const DistrictState& state,
                                             const Action& action) const;

 private:
  EnvConfig cfg_;
  ExogenousTraces traces_;
  Eigen::ArrayXd gains_;  // degC per step, one per building
  bool configured_ = false;
};

using PolicyFn = std::function<Action(const DistrictState&)>;

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::vector<DistrictState> states;   // horizon + 1 entries
  std::vector<Action> actions;         // horizon entries
  std::vector<StepOutcome> outcomes;   // horizon entries

  // Post-step indoor temperatures, rows = timesteps, cols = buildings.
  Eigen::ArrayXXd indoor_matrix() const;
};

EpisodeTrace run_episode(const MicrodistrictEnv& env, const PolicyFn& policy,
                         std::uint64_t seed);

}  // namespace occureward
