#include <doctest.h>

#include <random>
#include <sstream>

#include "occureward/env.hpp"

using namespace occureward;

namespace {

// Small fully-specified environment for targeted dynamics checks.
MicrodistrictEnv make_env(EnvConfig cfg, double ambient, double solar, double price = 0.2,
                          double carbon = 0.3) {
  ExogenousTraces tr;
  tr.horizon = cfg.horizon;
  tr.buildings = cfg.buildings;
  tr.ambient_temp = Eigen::ArrayXd::Constant(cfg.horizon, ambient);
  tr.solar_gen = Eigen::ArrayXXd::Constant(cfg.horizon, cfg.buildings, solar);
  tr.price = Eigen::ArrayXd::Constant(cfg.horizon, price);
  tr.carbon = Eigen::ArrayXd::Constant(cfg.horizon, carbon);
  return MicrodistrictEnv(cfg, tr);
}

}  // namespace

TEST_CASE("reset is deterministic per seed with soc pinned to one half") {
  EnvConfig cfg;
  cfg.horizon = 24;
  MicrodistrictEnv env(cfg, synth_traces(TraceConfig{}, cfg.buildings, cfg.horizon));

  const auto a = env.reset(42);
  const auto b = env.reset(42);
  CHECK((a.indoor_temp == b.indoor_temp).all());
  CHECK((a.soc == 0.5).all());
  CHECK(a.timestep == 0);
  for (int i = 0; i < cfg.buildings; ++i) {
    CHECK(a.indoor_temp[i] >= cfg.init_temp_low);
    CHECK(a.indoor_temp[i] < cfg.init_temp_high);
  }

  const auto c = env.reset(0);
  CHECK((a.indoor_temp != c.indoor_temp).any());
}

TEST_CASE("unconfigured environment refuses to run") {
  MicrodistrictEnv env;
  CHECK_THROWS_AS(env.reset(42), Error);
}

TEST_CASE("thermal fixed point: ambient equal to indoor with no gains") {
  EnvConfig cfg;
  cfg.buildings = 1;
  cfg.horizon = 4;
  cfg.internal_gain = 0.0;
  MicrodistrictEnv env = make_env(cfg, 25.0, 0.0);
  DistrictState s = env.reset(1);
  s.indoor_temp[0] = 25.0;
  const auto [next, outcome] = env.step(s, Action::zero(1));
  CHECK(next.indoor_temp[0] == doctest::Approx(25.0).epsilon(1e-14));
  CHECK(next.soc[0] == 0.5);  // zero battery rate leaves soc alone
}

TEST_CASE("thermal update matches the documented hand evaluation") {
  EnvConfig cfg;
  cfg.buildings = 1;
  cfg.horizon = 4;
  cfg.ambient_coupling = 0.2;
  cfg.internal_gain = 0.5;
  cfg.cooling_gain = 4.0;
  MicrodistrictEnv env = make_env(cfg, 31.0, 0.0);
  DistrictState s = env.reset(1);
  s.indoor_temp[0] = 26.0;
  const auto [next, outcome] = env.step(s, Action::uniform(1, 0.5, 0.0));
  // 26 + 0.2*(31-26) + 0.5 - 4.0*0.5 = 25.5
  CHECK(next.indoor_temp[0] == doctest::Approx(25.5).epsilon(1e-14));
}

TEST_CASE("battery respects efficiency and the [0,1] soc bounds") {
  EnvConfig cfg;
  cfg.buildings = 1;
  cfg.horizon = 8;
  MicrodistrictEnv env = make_env(cfg, 25.0, 0.0);
  DistrictState s = env.reset(7);

  // Charge then discharge the same fraction: strictly less energy returns.
  auto [after_charge, o1] = env.step(s, Action::uniform(1, 0.0, 0.2));
  CHECK(after_charge.soc[0] == doctest::Approx(0.5 + 0.95 * 0.2).epsilon(1e-12));
  auto [after_discharge, o2] = env.step(after_charge, Action::uniform(1, 0.0, -0.2));
  CHECK(after_discharge.soc[0] < 0.5);

  // Saturation keeps soc inside [0,1] exactly.
  DistrictState x = env.reset(7);
  for (int i = 0; i < 4; ++i) {
    auto [nx, ox] = env.step(x, Action::uniform(1, 0.0, 1.0));
    x = nx;
    CHECK(x.soc[0] <= 1.0);
  }
  CHECK(x.soc[0] == 1.0);
  for (int i = 0; i < 3; ++i) {
    auto [nx, ox] = env.step(x, Action::uniform(1, 0.0, -1.0));
    x = nx;
    CHECK(x.soc[0] >= 0.0);
  }
  CHECK(x.soc[0] == 0.0);
}

TEST_CASE("energy accounting: imports and spill stay consistent") {
  EnvConfig cfg;
  cfg.buildings = 1;
  cfg.horizon = 4;
  cfg.internal_gain = 0.0;
  // Hour 0 base load is 0.35 kWh; solar 2.0 covers it and half of HVAC.
  MicrodistrictEnv env = make_env(cfg, 30.0, 2.0, 0.5, 0.25);
  DistrictState s = env.reset(3);

  SUBCASE("solar surplus spills when nothing consumes it") {
    const auto [next, o] = env.step(s, Action::zero(1));
    CHECK(o.grid_import[0] == 0.0);
    CHECK(o.solar_spilled == doctest::Approx(2.0 - 0.35).epsilon(1e-12));
    CHECK(o.cost == 0.0);
  }

  SUBCASE("full cooling absorbs the surplus and imports the rest") {
    const auto [next, o] = env.step(s, Action::uniform(1, 1.0, 0.0));
    // demand = 0.35 + 2.0 kWh HVAC; solar 2.0 all used.
    CHECK(o.solar_spilled == doctest::Approx(0.0));
    CHECK(o.grid_import[0] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(o.cost == doctest::Approx(0.5 * 0.35).epsilon(1e-12));
    CHECK(o.carbon == doctest::Approx(0.25 * 0.35).epsilon(1e-12));
  }

  SUBCASE("battery discharge offsets residual demand") {
    const auto [next, o] = env.step(s, Action::uniform(1, 1.0, -0.05));
    // Residual after solar = 0.35; discharge supplies 0.05*6.4 = 0.32.
    CHECK(o.grid_import[0] == doctest::Approx(0.35 - 0.32).epsilon(1e-12));
  }
}

TEST_CASE("soc deviation accumulates distance from the target") {
  EnvConfig cfg;
  cfg.buildings = 2;
  cfg.horizon = 4;
  MicrodistrictEnv env = make_env(cfg, 25.0, 0.0);
  DistrictState s = env.reset(5);
  const auto [next, o] = env.step(s, Action::uniform(2, 0.0, 0.1));
  CHECK(o.soc_deviation == doctest::Approx(2 * 0.95 * 0.1).epsilon(1e-12));
}

TEST_CASE("random-action sweep keeps the structural invariants") {
  EnvConfig cfg;
  cfg.horizon = 96;
  MicrodistrictEnv env(cfg, synth_traces(TraceConfig{}, cfg.buildings, cfg.horizon));
  std::mt19937_64 rng(11);
  DistrictState s = env.reset(11);
  for (int t = 0; t < cfg.horizon; ++t) {
    Action a = Action::zero(cfg.buildings);
    for (int b = 0; b < cfg.buildings; ++b) {
      a.cooling_power[b] = uniform01(rng) * 1.4 - 0.2;  // deliberately out of range
      a.battery_rate[b] = uniform01(rng) * 2.4 - 1.2;
    }
    auto [next, o] = env.step(s, a);
    CHECK((o.grid_import >= 0.0).all());
    CHECK(o.solar_spilled >= 0.0);
    CHECK(o.solar_spilled <= env.traces().solar_gen.row(t).sum() + 1e-12);
    CHECK((next.soc >= 0.0).all());
    CHECK((next.soc <= 1.0).all());
    CHECK(next.indoor_temp.isFinite().all());
    s = next;
  }
  CHECK_THROWS_AS(env.step(s, Action::zero(cfg.buildings)), Error);
}

TEST_CASE("run_episode produces a full deterministic trace") {
  EnvConfig cfg;
  cfg.horizon = 24;
  MicrodistrictEnv env(cfg, synth_traces(TraceConfig{}, cfg.buildings, cfg.horizon));

  const auto zero = [&](const DistrictState&) { return Action::zero(cfg.buildings); };
  const auto trace = run_episode(env, zero, 42);
  CHECK(trace.outcomes.size() == 24);
  CHECK(trace.states.size() == 25);
  for (const auto& st : trace.states) {
    CHECK((st.soc == 0.5).all());
  }

  const auto again = run_episode(env, zero, 42);
  for (size_t t = 0; t < trace.outcomes.size(); ++t) {
    CHECK((trace.outcomes[t].indoor_temp == again.outcomes[t].indoor_temp).all());
    CHECK(trace.outcomes[t].cost == again.outcomes[t].cost);
  }

  const auto full = [&](const DistrictState&) {
    return Action::uniform(cfg.buildings, 1.0, 0.0);
  };
  const auto cooled = run_episode(env, full, 42);
  CHECK(cooled.indoor_matrix().mean() < trace.indoor_matrix().mean());

  const auto broken = [&](const DistrictState&) {
    Action a = Action::zero(cfg.buildings);
    a.cooling_power[0] = std::nan("");
    return a;
  };
  CHECK_THROWS_AS(run_episode(env, broken, 42), Error);
}

TEST_CASE("trace CSV round-trips through the loader") {
  const auto traces = synth_traces(TraceConfig{}, 3, 48);
  std::ostringstream out;
  save_traces_csv(traces, out);
  std::istringstream in(out.str());
  const auto loaded = load_traces_csv(in);
  CHECK(loaded.horizon == 48);
  CHECK(loaded.buildings == 3);
  CHECK(loaded.ambient_temp.isApprox(traces.ambient_temp, 1e-12));
  CHECK(loaded.solar_gen.matrix().isApprox(traces.solar_gen.matrix(), 1e-12));
  CHECK(loaded.price.isApprox(traces.price, 1e-12));

  std::istringstream bad_header("timestep,price\n0,1\n");
  CHECK_THROWS_AS(load_traces_csv(bad_header), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(load_traces_csv(empty), Error);
}

TEST_CASE("trace validation rejects inconsistent inputs") {
  ExogenousTraces tr;
  tr.horizon = 4;
  tr.buildings = 1;
  tr.ambient_temp = Eigen::ArrayXd::Constant(3, 25.0);  // wrong length
  tr.solar_gen = Eigen::ArrayXXd::Zero(4, 1);
  tr.price = Eigen::ArrayXd::Constant(4, 0.2);
  tr.carbon = Eigen::ArrayXd::Constant(4, 0.3);
  CHECK_THROWS_AS(tr.validate(), Error);
  tr.ambient_temp = Eigen::ArrayXd::Constant(4, 25.0);
  CHECK_NOTHROW(tr.validate());
  tr.price[0] = -1.0;
  CHECK_THROWS_AS(tr.validate(), Error);
}

TEST_CASE("synthetic traces look like the documented summer defaults") {
  const TraceConfig tc;
  const auto tr = synth_traces(tc, 5, 720);
  CHECK(tr.ambient_temp.mean() == doctest::Approx(29.0).epsilon(0.02));
  CHECK(tr.ambient_temp.maxCoeff() > 32.0);
  CHECK(tr.ambient_temp.minCoeff() < 26.0);
  CHECK(tr.solar_gen.maxCoeff() <= tc.solar_peak * tc.solar_roof_max + 1e-9);
  // Night hours carry no solar.
  for (int d = 0; d < 30; ++d) {
    CHECK(tr.solar_gen.row(d * 24 + 2).sum() == 0.0);
  }
  CHECK((tr.price > 0.0).all());
  CHECK((tr.carbon > 0.0).all());
}
