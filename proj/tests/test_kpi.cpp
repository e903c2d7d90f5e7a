#include <doctest.h>

#include "occureward/kpi.hpp"

using namespace occureward;

namespace {

MicrodistrictEnv default_env(int horizon = 720) {
  EnvConfig cfg;
  cfg.horizon = horizon;
  return MicrodistrictEnv(cfg, synth_traces(TraceConfig{}, cfg.buildings, horizon));
}

}  // namespace

TEST_CASE("aggregate sums the per-step increments") {
  EpisodeTrace trace;
  StepOutcome a;
  a.indoor_temp = Eigen::ArrayXd::Constant(1, 25.0);
  a.grid_import = Eigen::ArrayXd::Constant(1, 1.0);
  a.cost = 1.5;
  a.carbon = 0.4;
  a.solar_spilled = 0.2;
  a.soc_deviation = 0.1;
  StepOutcome b = a;
  b.cost = 2.5;
  trace.outcomes = {a, b};
  const KpiVector k = aggregate(trace);
  CHECK(k.cost == doctest::Approx(4.0));
  CHECK(k.carbon == doctest::Approx(0.8));
  CHECK(k.solar_shortfall == doctest::Approx(0.4));
  CHECK(k.soc_deviation == doctest::Approx(0.2));

  EpisodeTrace empty;
  CHECK_THROWS_AS(aggregate(empty), Error);

  EpisodeTrace zeros;
  StepOutcome z;
  z.indoor_temp = Eigen::ArrayXd::Zero(1);
  z.grid_import = Eigen::ArrayXd::Zero(1);
  zeros.outcomes = {z, z};
  const KpiVector zk = aggregate(zeros);
  CHECK(zk.cost == 0.0);
  CHECK(zk.soc_deviation == 0.0);
}

TEST_CASE("aggregate agrees with an independent single-pass summation") {
  const auto env = default_env(24);
  const auto trace = run_episode(
      env, [&](const DistrictState&) { return Action::zero(env.buildings()); }, 42);
  const KpiVector k = aggregate(trace);

  double cost = 0.0, carbon = 0.0, spill = 0.0, soc = 0.0;
  for (const auto& o : trace.outcomes) {
    cost += o.cost;
    carbon += o.carbon;
    spill += o.solar_spilled;
    soc += o.soc_deviation;
  }
  CHECK(k.cost == doctest::Approx(cost).epsilon(1e-12));
  CHECK(k.carbon == doctest::Approx(carbon).epsilon(1e-12));
  CHECK(k.solar_shortfall == doctest::Approx(spill).epsilon(1e-12));
  CHECK(k.soc_deviation == doctest::Approx(soc).epsilon(1e-12));
}

TEST_CASE("rbc thermostat switches with hysteresis") {
  const auto env = default_env(24);
  RbcController rbc(RbcConfig{}, env);
  DistrictState s = env.reset(42);

  s.indoor_temp.setConstant(27.0);
  Action hot = rbc.act(s);
  CHECK(hot.cooling_power[0] == 1.0);

  // Inside the deadband the previous output holds.
  s.indoor_temp.setConstant(25.5);
  Action holding = rbc.act(s);
  CHECK(holding.cooling_power[0] == 1.0);

  s.indoor_temp.setConstant(24.0);
  Action cold = rbc.act(s);
  CHECK(cold.cooling_power[0] == 0.0);

  // And stays off inside the band after switching off.
  s.indoor_temp.setConstant(25.5);
  Action still_off = rbc.act(s);
  CHECK(still_off.cooling_power[0] == 0.0);

  rbc.reset();
  Action fresh = rbc.act(s);
  CHECK(fresh.cooling_power[0] == 0.0);
}

TEST_CASE("rbc battery heuristic follows solar and price") {
  const auto env = default_env(48);
  RbcConfig cfg;
  RbcController rbc(cfg, env);
  DistrictState s = env.reset(42);
  s.indoor_temp.setConstant(25.0);

  // Midday: solar exceeds the base load -> charge.
  s.timestep = 12;
  Action noon = rbc.act(s);
  CHECK(noon.battery_rate[0] == doctest::Approx(cfg.charge_rate));

  // Evening peak price, no solar -> discharge.
  s.timestep = 19;
  Action evening = rbc.act(s);
  CHECK(evening.battery_rate[0] == doctest::Approx(-cfg.discharge_rate));

  // Cheap night hours -> idle.
  s.timestep = 2;
  Action night = rbc.act(s);
  CHECK(night.battery_rate[0] == 0.0);
}

TEST_CASE("rbc holds the district near the setpoint on default traces") {
  const auto env = default_env();
  const RbcConfig cfg;
  const auto trace = run_rbc_episode(env, cfg, 42);
  const auto temps = trace.indoor_matrix();
  const auto in_band =
      (temps >= cfg.setpoint - 1.0 && temps <= cfg.setpoint + 1.0).count();
  const double fraction =
      static_cast<double>(in_band) / static_cast<double>(temps.size());
  CHECK(fraction >= 0.9);
}

TEST_CASE("normalize is a componentwise ratio with degenerate baselines rejected") {
  const KpiVector x{10.0, 4.0, 2.0, 1.0};
  const NormalizedKpiVector self = normalize(x, x);
  CHECK(self.cost == 1.0);
  CHECK(self.carbon == 1.0);
  CHECK(self.solar_shortfall == 1.0);
  CHECK(self.soc_deviation == 1.0);

  KpiVector agent{12.18, 4.0, 2.0, 1.0};
  CHECK(normalize(agent, KpiVector{10.0, 4.0, 2.0, 1.0}).cost == doctest::Approx(1.218));

  KpiVector zero_cost{0.0, 4.0, 2.0, 1.0};
  CHECK(normalize(zero_cost, x).cost == 0.0);

  KpiVector degenerate{10.0, 4.0, 0.0, 1.0};
  try {
    normalize(x, degenerate);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBaseline);
    CHECK(std::string(e.what()).find("solar_shortfall") != std::string::npos);
  }
}

TEST_CASE("normalize is homogeneous under joint rescaling") {
  const KpiVector agent{3.0, 2.0, 1.0, 0.5};
  const KpiVector base{6.0, 8.0, 2.0, 2.5};
  const auto nk = normalize(agent, base);
  auto scale = [](const KpiVector& k, double c) {
    return KpiVector{k.cost * c, k.carbon * c, k.solar_shortfall * c, k.soc_deviation * c};
  };
  const auto scaled = normalize(scale(agent, 7.5), scale(base, 7.5));
  CHECK(scaled.cost == doctest::Approx(nk.cost).epsilon(1e-12));
  CHECK(scaled.carbon == doctest::Approx(nk.carbon).epsilon(1e-12));
  CHECK(scaled.solar_shortfall == doctest::Approx(nk.solar_shortfall).epsilon(1e-12));
  CHECK(scaled.soc_deviation == doctest::Approx(nk.soc_deviation).epsilon(1e-12));
}

TEST_CASE("composite cost is the mean of three components, carbon excluded") {
  NormalizedKpiVector ones{1.0, 1.0, 1.0, 1.0};
  CHECK(composite_cost(ones) == 1.0);

  NormalizedKpiVector same{1.2, 99.0, 1.2, 1.2};
  CHECK(composite_cost(same) == doctest::Approx(1.2));

  NormalizedKpiVector mixed{1.0, 99.0, 1.4, 1.2};
  CHECK(composite_cost(mixed) == doctest::Approx(1.2));
}
