#include "occureward/env.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace occureward {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void EnvConfig::validate() const {
  if (buildings < 1) throw Error(ErrorCode::Config, "buildings must be >= 1");
  if (horizon < 1) throw Error(ErrorCode::Config, "horizon must be >= 1");
  if (!(ambient_coupling > 0.0 && ambient_coupling < 1.0)) {
    throw Error(ErrorCode::Config, "ambient_coupling must lie in (0,1)");
  }
  if (cooling_gain <= 0.0 || hvac_rated_kw <= 0.0 || battery_kwh <= 0.0) {
    throw Error(ErrorCode::Config, "cooling_gain, hvac_rated_kw, battery_kwh must be > 0");
  }
  if (!(eta_charge > 0.0 && eta_charge <= 1.0 && eta_discharge > 0.0 && eta_discharge <= 1.0)) {
    throw Error(ErrorCode::Config, "charge/discharge efficiencies must lie in (0,1]");
  }
  if (!(soc_target >= 0.0 && soc_target <= 1.0)) {
    throw Error(ErrorCode::Config, "soc_target must lie in [0,1]");
  }
  if (!(init_temp_low < init_temp_high)) {
    throw Error(ErrorCode::Config, "init temperature window must be non-degenerate");
  }
}

void ExogenousTraces::validate() const {
  if (horizon < 1 || buildings < 1) {
    throw Error(ErrorCode::Config, "traces require horizon >= 1 and buildings >= 1");
  }
  if (ambient_temp.size() != horizon || price.size() != horizon || carbon.size() != horizon ||
      solar_gen.rows() != horizon || solar_gen.cols() != buildings) {
    throw Error(ErrorCode::Config, "trace lengths must all equal the horizon");
  }
  if ((price < 0.0).any() || (carbon < 0.0).any() || (solar_gen < 0.0).any()) {
    throw Error(ErrorCode::Config, "price, carbon and solar traces must be non-negative");
  }
  if (!ambient_temp.isFinite().all()) {
    throw Error(ErrorCode::Config, "ambient trace must be finite");
  }
}

ExogenousTraces synth_traces(const TraceConfig& cfg, int buildings, int horizon) {
  if (buildings < 1 || horizon < 1) {
    throw Error(ErrorCode::Config, "synth_traces requires buildings >= 1 and horizon >= 1");
  }
  std::mt19937_64 rng(cfg.seed);

  ExogenousTraces tr;
  tr.horizon = horizon;
  tr.buildings = buildings;
  tr.ambient_temp.resize(horizon);
  tr.solar_gen.resize(horizon, buildings);
  tr.price.resize(horizon);
  tr.carbon.resize(horizon);

  // Fixed per-building roof scale, then a per-day clear-sky factor. The
  // spread is deliberately wide so that on sunny steps some buildings import
  // while others spill.
  Eigen::ArrayXd roof(buildings);
  for (int b = 0; b < buildings; ++b) {
    roof[b] = cfg.solar_roof_min +
              (cfg.solar_roof_max - cfg.solar_roof_min) * uniform01(rng);
  }
  const int days = (horizon + 23) / 24;
  Eigen::ArrayXd sky(days);
  for (int d = 0; d < days; ++d) {
    sky[d] = cfg.solar_day_min_factor + (1.0 - cfg.solar_day_min_factor) * uniform01(rng);
  }

  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int t = 0; t < horizon; ++t) {
    const int hour = t % 24;
    const int day = t / 24;
    const double phase = two_pi * (hour - (cfg.ambient_peak_hour - 6.0)) / 24.0;
    const double jitter = (2.0 * uniform01(rng) - 1.0) * cfg.ambient_jitter;
    tr.ambient_temp[t] = cfg.ambient_mean + cfg.ambient_amplitude * std::sin(phase) + jitter;

    const double sun = hour > 6 && hour < 18
                           ? std::sin(std::numbers::pi * (hour - 6.0) / 12.0)
                           : 0.0;
    for (int b = 0; b < buildings; ++b) {
      tr.solar_gen(t, b) = cfg.solar_peak * sun * roof[b] * sky[day];
    }

    if (hour >= 22 || hour < 6) {
      tr.price[t] = cfg.price_offpeak;
    } else if (hour >= 16 && hour <= 21) {
      tr.price[t] = cfg.price_peak;
    } else {
      tr.price[t] = cfg.price_mid;
    }

    // Carbon intensity peaks in the evening as solar drops off the grid.
    tr.carbon[t] = cfg.carbon_base +
                   cfg.carbon_swing * 0.5 * (1.0 + std::sin(two_pi * (hour - 13.0) / 24.0));
  }
  tr.validate();
  return tr;
}

ExogenousTraces load_traces_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::Format, "trace stream is empty (header row required)");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      field.erase(0, field.find_first_not_of(" \t\r"));
      field.erase(field.find_last_not_of(" \t\r") + 1);
      header.push_back(field);
    }
  }
  int col_t = -1, col_ambient = -1, col_price = -1, col_carbon = -1;
  std::vector<int> col_solar;
  for (size_t i = 0; i < header.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (header[i] == "timestep") col_t = idx;
    else if (header[i] == "ambient_temp") col_ambient = idx;
    else if (header[i] == "price") col_price = idx;
    else if (header[i] == "carbon_intensity") col_carbon = idx;
    else if (header[i].rfind("solar_gen_b", 0) == 0) col_solar.push_back(idx);
  }
  if (col_t < 0 || col_ambient < 0 || col_price < 0 || col_carbon < 0 || col_solar.empty()) {
    throw Error(ErrorCode::Format,
                "trace header must contain timestep, ambient_temp, solar_gen_b1.., price, "
                "carbon_intensity");
  }

  std::vector<double> ambient, price, carbon;
  std::vector<std::vector<double>> solar(col_solar.size());
  size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> fields;
    while (std::getline(ss, field, ',')) {
      try {
        fields.push_back(std::stod(field));
      } catch (...) {
        throw Error(ErrorCode::Format, "unparseable trace value '" + field + "'");
      }
    }
    const size_t needed = static_cast<size_t>(std::max(
        {col_t, col_ambient, col_price, col_carbon, col_solar.back()})) + 1;
    if (fields.size() < needed) {
      throw Error(ErrorCode::Format, "trace row " + std::to_string(row) + " is too short");
    }
    ambient.push_back(fields[static_cast<size_t>(col_ambient)]);
    price.push_back(fields[static_cast<size_t>(col_price)]);
    carbon.push_back(fields[static_cast<size_t>(col_carbon)]);
    for (size_t b = 0; b < col_solar.size(); ++b) {
      solar[b].push_back(fields[static_cast<size_t>(col_solar[b])]);
    }
    ++row;
  }
  if (row == 0) {
    throw Error(ErrorCode::Format, "trace file contains no rows");
  }

  ExogenousTraces tr;
  tr.horizon = static_cast<int>(row);
  tr.buildings = static_cast<int>(col_solar.size());
  tr.ambient_temp = Eigen::Map<Eigen::ArrayXd>(ambient.data(), static_cast<Eigen::Index>(row));
  tr.price = Eigen::Map<Eigen::ArrayXd>(price.data(), static_cast<Eigen::Index>(row));
  tr.carbon = Eigen::Map<Eigen::ArrayXd>(carbon.data(), static_cast<Eigen::Index>(row));
  tr.solar_gen.resize(static_cast<Eigen::Index>(row), tr.buildings);
  for (int b = 0; b < tr.buildings; ++b) {
    tr.solar_gen.col(b) =
        Eigen::Map<Eigen::ArrayXd>(solar[static_cast<size_t>(b)].data(),
                                   static_cast<Eigen::Index>(row));
  }
  tr.validate();
  return tr;
}

void save_traces_csv(const ExogenousTraces& traces, std::ostream& out) {
  traces.validate();
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "timestep,ambient_temp";
  for (int b = 1; b <= traces.buildings; ++b) out << ",solar_gen_b" << b;
  out << ",price,carbon_intensity\n";
  for (int t = 0; t < traces.horizon; ++t) {
    out << t << ',' << traces.ambient_temp[t];
    for (int b = 0; b < traces.buildings; ++b) out << ',' << traces.solar_gen(t, b);
    out << ',' << traces.price[t] << ',' << traces.carbon[t] << '\n';
  }
}

Action Action::zero(int buildings) {
  return uniform(buildings, 0.0, 0.0);
}

Action Action::uniform(int buildings, double cooling, double battery) {
  Action a;
  a.cooling_power = Eigen::ArrayXd::Constant(buildings, cooling);
  a.battery_rate = Eigen::ArrayXd::Constant(buildings, battery);
  return a;
}

MicrodistrictEnv::MicrodistrictEnv(EnvConfig cfg, ExogenousTraces traces) {
  configure(std::move(cfg), std::move(traces));
}

void MicrodistrictEnv::configure(EnvConfig cfg, ExogenousTraces traces) {
  cfg.validate();
  traces.validate();
  if (traces.horizon != cfg.horizon || traces.buildings != cfg.buildings) {
    throw Error(ErrorCode::Config, "trace dimensions do not match the environment config");
  }
  cfg_ = std::move(cfg);
  traces_ = std::move(traces);
  gains_.resize(cfg_.buildings);
  for (int b = 0; b < cfg_.buildings; ++b) {
    const double ramp = cfg_.buildings > 1
                            ? 2.0 * b / static_cast<double>(cfg_.buildings - 1) - 1.0
                            : 0.0;
    gains_[b] = cfg_.internal_gain * (1.0 + cfg_.internal_gain_spread * ramp);
  }
  configured_ = true;
}

DistrictState MicrodistrictEnv::reset(std::uint64_t seed) const {
  if (!configured_) {
    throw Error(ErrorCode::Config, "environment has no traces configured");
  }
  std::mt19937_64 rng(seed);
  DistrictState s;
  s.timestep = 0;
  s.indoor_temp.resize(cfg_.buildings);
  for (int b = 0; b < cfg_.buildings; ++b) {
    s.indoor_temp[b] =
        cfg_.init_temp_low + (cfg_.init_temp_high - cfg_.init_temp_low) * uniform01(rng);
  }
  s.soc = Eigen::ArrayXd::Constant(cfg_.buildings, 0.5);
  return s;
}

std::pair<DistrictState, StepOutcome> MicrodistrictEnv::step(const DistrictState& state,
                                                             const Action& action) const {
  if (!configured_) {
    throw Error(ErrorCode::Config, "environment has no traces configured");
  }
  if (state.timestep >= cfg_.horizon) {
    throw Error(ErrorCode::EpisodeComplete,
                "step at timestep " + std::to_string(state.timestep) +
                    " is past the horizon " + std::to_string(cfg_.horizon));
  }
  const int n = cfg_.buildings;
  if (state.indoor_temp.size() != n || state.soc.size() != n ||
      action.cooling_power.size() != n || action.battery_rate.size() != n) {
    throw Error(ErrorCode::InvalidInput, "state/action dimension mismatch");
  }

  const int t = state.timestep;
  const double ambient = traces_.ambient_temp[t];
  const double base = cfg_.base_load[static_cast<size_t>(t % 24)];

  const Eigen::ArrayXd cooling = action.cooling_power.cwiseMax(0.0).cwiseMin(1.0);
  const Eigen::ArrayXd rate = action.battery_rate.cwiseMax(-1.0).cwiseMin(1.0);

  DistrictState next;
  next.timestep = t + 1;
  next.indoor_temp = state.indoor_temp +
                     cfg_.ambient_coupling * (ambient - state.indoor_temp) +
                     gains_ - cfg_.cooling_gain * cooling;

  // Battery: charge/discharge fractions limited by headroom and stored charge
  // so soc stays in [0,1] exactly.
  const Eigen::ArrayXd want_charge = rate.cwiseMax(0.0);
  const Eigen::ArrayXd want_discharge = (-rate).cwiseMax(0.0);
  const Eigen::ArrayXd charge =
      want_charge.cwiseMin((1.0 - state.soc) / cfg_.eta_charge);
  const Eigen::ArrayXd discharge =
      want_discharge.cwiseMin(state.soc * cfg_.eta_discharge);
  next.soc = (state.soc + cfg_.eta_charge * charge - discharge / cfg_.eta_discharge)
                 .cwiseMax(0.0)
                 .cwiseMin(1.0);

  const Eigen::ArrayXd hvac_energy = cooling * cfg_.hvac_rated_kw;
  const Eigen::ArrayXd charge_draw = charge * cfg_.battery_kwh;
  const Eigen::ArrayXd discharge_supply = discharge * cfg_.battery_kwh;
  const Eigen::ArrayXd solar = traces_.solar_gen.row(t).transpose();

  // Solar offsets simultaneous demand first; the battery covers the rest.
  const Eigen::ArrayXd demand = base + hvac_energy + charge_draw;
  const Eigen::ArrayXd solar_used = solar.cwiseMin(demand);
  const Eigen::ArrayXd spilled = solar - solar_used;
  const Eigen::ArrayXd residual = demand - solar_used;
  const Eigen::ArrayXd battery_used = discharge_supply.cwiseMin(residual);

  StepOutcome out;
  out.grid_import = (residual - battery_used).cwiseMax(0.0);
  out.indoor_temp = next.indoor_temp;
  const double total_import = out.grid_import.sum();
  out.cost = traces_.price[t] * total_import;
  out.carbon = traces_.carbon[t] * total_import;
  out.solar_spilled = spilled.sum();
  out.soc_deviation = (next.soc - cfg_.soc_target).abs().sum();
  return {std::move(next), std::move(out)};
}

Eigen::ArrayXXd EpisodeTrace::indoor_matrix() const {
  if (outcomes.empty()) {
    return Eigen::ArrayXXd();
  }
  const auto buildings = outcomes.front().indoor_temp.size();
  Eigen::ArrayXXd m(static_cast<Eigen::Index>(outcomes.size()), buildings);
  for (size_t t = 0; t < outcomes.size(); ++t) {
    m.row(static_cast<Eigen::Index>(t)) = outcomes[t].indoor_temp.transpose();
  }
  return m;
}

EpisodeTrace run_episode(const MicrodistrictEnv& env, const PolicyFn& policy,
                         std::uint64_t seed) {
  EpisodeTrace trace;
  trace.seed = seed;
  trace.states.reserve(static_cast<size_t>(env.horizon()) + 1);
  trace.actions.reserve(static_cast<size_t>(env.horizon()));
  trace.outcomes.reserve(static_cast<size_t>(env.horizon()));

  DistrictState state = env.reset(seed);
  trace.states.push_back(state);
  for (int t = 0; t < env.horizon(); ++t) {
    Action action = policy(state);
    if (!action.cooling_power.isFinite().all() || !action.battery_rate.isFinite().all()) {
      throw Error(ErrorCode::PolicyFault,
                  "policy produced a non-finite action at timestep " + std::to_string(t));
    }
    auto [next, outcome] = env.step(state, action);
    trace.actions.push_back(std::move(action));
    trace.outcomes.push_back(std::move(outcome));
    state = std::move(next);
    trace.states.push_back(state);
  }
  return trace;
}

}  // namespace occureward
