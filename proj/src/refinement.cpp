#include "occureward/refinement.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <utility>

namespace occureward {

using json = nlohmann::json;

namespace {

std::string fmt_g(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

Stat stat_of(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  double acc = 0.0;
  for (double v : values) acc += v;
  s.mean = acc / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

constexpr const char* kFormatInstruction =
    "Respond with exactly one JSON object of the form "
    "{\"cost\": <number>, \"carbon\": <number>, \"solar\": <number>, "
    "\"soc\": <number>, \"equity\": <number>} with non-negative finite numbers "
    "and nothing else.";

std::string describe_kpis(const FeedbackSummary& fb) {
  std::ostringstream os;
  os << "Normalized KPIs from the previous round (agent/RBC, lower is better, "
        "mean +- std over seeds):\n";
  os << "  cost: " << fmt_g(fb.kpi_cost.mean) << " +- " << fmt_g(fb.kpi_cost.std) << "\n";
  os << "  carbon: " << fmt_g(fb.kpi_carbon.mean) << " +- " << fmt_g(fb.kpi_carbon.std) << "\n";
  os << "  solar_shortfall: " << fmt_g(fb.kpi_solar.mean) << " +- "
     << fmt_g(fb.kpi_solar.std) << "\n";
  os << "  soc_deviation: " << fmt_g(fb.kpi_soc.mean) << " +- " << fmt_g(fb.kpi_soc.std) << "\n";
  os << "  composite_cost: " << fmt_g(fb.composite.mean) << " +- "
     << fmt_g(fb.composite.std) << "\n";
  return os.str();
}

}  // namespace

void RoundConfig::validate() const {
  if (round < 1 || round > 3) {
    throw Error(ErrorCode::Config, "round must be 1, 2 or 3");
  }
  if (seeds.empty()) {
    throw Error(ErrorCode::Config, "at least one seed is required");
  }
  if (round == 1 && feedback.has_value()) {
    throw Error(ErrorCode::Config, "round 1 takes no feedback");
  }
  if (round > 1 && !feedback.has_value()) {
    throw Error(ErrorCode::Config, "round " + std::to_string(round) + " requires feedback");
  }
  if (round == 3 && !feedback->has_equity) {
    throw Error(ErrorCode::Config, "round 3 requires equity feedback (CEI + satisfactions)");
  }
}

const char* round_description(int round) {
  switch (round) {
    case 1: return "Energy Only";
    case 2: return "Naive Refinement";
    case 3: return "Equity-Aware";
    default: return "Unknown";
  }
}

std::string build_prompt(const RoundConfig& config, const ProfileSet& profiles) {
  config.validate();
  std::ostringstream os;
  os << "You are the reward engineer for a reinforcement-learning controller of a "
        "five-building grid-interactive residential district.\n"
        "The training reward is R = -(cost*cost_hat + carbon*carbon_hat + "
        "solar*solar_hat + soc*soc_hat + equity*CEI), where each *_hat is a KPI "
        "normalized against a rule-based controller baseline (lower is better): "
        "electricity cost, carbon emissions, spilled solar generation and battery "
        "state-of-charge deviation.\n";

  if (config.round == 1) {
    os << "Objectives: reduce electricity cost and carbon emissions while making "
          "sensible use of on-site solar and battery flexibility.\n";
    os << "No occupant info provided in this round.\n";
    os << "Constraint: \"equity\" must equal 0.0 in this round.\n";
  } else if (config.round == 2) {
    os << describe_kpis(*config.feedback);
    os << "Objectives: optimize cost and carbon against this feedback.\n";
    os << "No occupant info provided in this round.\n";
    os << "Constraint: \"equity\" must equal 0.0 in this round.\n";
  } else {
    const FeedbackSummary& fb = *config.feedback;
    os << describe_kpis(fb);
    os << "Equity feedback:\n";
    os << "  Comfort Equity Index (1 - Jain's fairness index over per-profile "
          "satisfaction; 0 = perfect equity): " << fmt_g(fb.cei_mean) << "\n";
    os << "  Per-profile mean satisfaction (0-1 scale):\n";
    for (size_t i = 0; i < fb.satisfaction_mean.ids.size(); ++i) {
      const auto& id = fb.satisfaction_mean.ids[i];
      os << "    " << id;
      for (const auto& p : profiles) {
        if (p.id == id) {
          os << " (age " << p.age_min << "-" << p.age_max << ", " << to_string(p.sex)
             << ", prefers " << fmt_g(p.t_min) << "-" << fmt_g(p.t_max)
             << " C, flex " << fmt_g(p.flex) << " C)";
          break;
        }
      }
      os << ": " << fmt_g(fb.satisfaction_mean.scores[static_cast<Eigen::Index>(i)]) << "\n";
    }
    os << "Objectives: raise satisfaction for every occupant profile, especially "
          "the worst-off group, while keeping energy KPIs competitive. Consider "
          "re-balancing solar and storage utilization to fund comfort.\n";
    os << "The \"equity\" weight may be positive in this round.\n";
  }

  os << kFormatInstruction;
  return os.str();
}

std::string build_repair_prompt(int round, const std::string& reason) {
  std::ostringstream os;
  os << "Your previous response was not usable: " << reason << "\n";
  if (round < 3) {
    os << "Remember: \"equity\" must equal 0.0 in this round.\n";
  }
  os << "All weights must be non-negative finite numbers.\n";
  os << kFormatInstruction;
  return os.str();
}

RewardWeights parse_weights(const std::string& response, int round,
                            WeightProvenance provenance) {
  const char* required[] = {"cost", "carbon", "solar", "soc", "equity"};
  size_t start = response.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    size_t end = std::string::npos;
    for (size_t i = start; i < response.size(); ++i) {
      if (response[i] == '{') ++depth;
      else if (response[i] == '}') {
        --depth;
        if (depth == 0) {
          end = i;
          break;
        }
      }
    }
    if (end == std::string::npos) break;
    const std::string candidate = response.substr(start, end - start + 1);
    json j = json::parse(candidate, nullptr, false);
    if (j.is_object()) {
      bool has_all = true;
      for (const char* key : required) {
        if (!j.contains(key) || !j[key].is_number()) {
          has_all = false;
          break;
        }
      }
      if (has_all) {
        return weights_from_json(candidate, round, provenance);
      }
    }
    start = response.find('{', start + 1);
  }
  throw Error(ErrorCode::Parse,
              "no weight object with keys cost/carbon/solar/soc/equity in response: " +
                  response);
}

const ProfileSet& ExperimentConfig::profile_set() const {
  return profiles.empty() ? builtin_profiles() : profiles;
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  // Desk-scale agent settings; the AgentConfig{} literals mirror the large
  // published setup and are too conservative for a tabular learner. The
  // replay buffer retains the whole run so early exploratory coverage is
  // never evicted.
  cfg.agent.learning_rate = 0.08;
  cfg.agent.training_steps = 50000;
  cfg.agent.discount = 0.9;
  cfg.agent.replay_capacity = 50000;
  cfg.agent.exploration = {0.5, 0.05, 0.8};
  return cfg;
}

ExperimentContext ExperimentContext::from_config(const ExperimentConfig& cfg) {
  ExperimentContext ctx;
  ctx.env.configure(cfg.env, synth_traces(cfg.traces, cfg.env.buildings, cfg.env.horizon));
  ctx.rbc = cfg.rbc;
  ctx.agent = cfg.agent;
  ctx.profiles = cfg.profile_set();
  ctx.parallel_seeds = cfg.parallel_seeds;
  ctx.max_weight_retries = cfg.max_weight_retries;
  return ctx;
}

namespace {

SeedReport run_seed_job(const ExperimentContext& ctx, const RewardWeights& weights,
                        std::uint64_t seed) {
  const EpisodeTrace rbc_trace = run_rbc_episode(ctx.env, ctx.rbc, seed);
  RbcReference reference = RbcReference::from_trace(rbc_trace);
  const StepRewardFn reward = make_step_reward_fn(weights, std::move(reference), ctx.profiles);
  const Policy policy = train(ctx.env, reward, ctx.agent, seed);
  SeedReport report;
  report.seed = seed;
  report.eval = evaluate(policy, ctx.env, ctx.profiles, ctx.rbc, seed, &weights);
  return report;
}

void fill_round_stats(RoundResult& result, const ProfileSet& profiles) {
  if (result.reports.empty()) return;
  std::vector<double> composites, ceis;
  Eigen::ArrayXd sat_acc = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(profiles.size()));
  for (const auto& r : result.reports) {
    composites.push_back(r.eval.composite);
    ceis.push_back(r.eval.equity.cei);
    sat_acc += r.eval.satisfactions.scores;
  }
  result.composite = stat_of(composites);
  result.cei_stat = stat_of(ceis);
  std::vector<std::string> ids;
  for (const auto& p : profiles) ids.push_back(p.id);
  result.satisfaction_mean =
      SatisfactionVector(std::move(ids), sat_acc / static_cast<double>(result.reports.size()));
  result.worst_profile = cei(result.satisfaction_mean).worst_profile;
}

}  // namespace

RoundResult run_round(const RoundConfig& config, RewardEngineer& engineer,
                      const ExperimentContext& ctx) {
  config.validate();
  RoundResult result;
  result.round = config.round;
  result.description = round_description(config.round);
  result.engineer_name = engineer.name();

  const WeightProvenance provenance = engineer.name() == "scripted"
                                          ? WeightProvenance::Scripted
                                          : WeightProvenance::RemoteEngineer;

  // One engineer call, with bounded repair retries on invalid responses.
  std::string prompt = build_prompt(config, ctx.profiles);
  int repairs = 0;
  for (;;) {
    const std::string response = engineer.propose(prompt);
    result.exchange.push_back({prompt, response});
    try {
      result.weights = parse_weights(response, config.round, provenance);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Parse && e.code() != ErrorCode::ProtocolViolation) {
        throw;
      }
      if (repairs >= ctx.max_weight_retries) {
        throw Error(e.code(), std::string(e.what()) + " (round aborted after " +
                                  std::to_string(repairs) + " repair retries)");
      }
      ++repairs;
      prompt = build_repair_prompt(config.round, e.what());
    }
  }
  result.engineer_calls = static_cast<int>(result.exchange.size());

  // Seed-parallel train/evaluate jobs, merged in seed order.
  std::vector<std::string> failures;
  if (ctx.parallel_seeds && config.seeds.size() > 1) {
    std::vector<std::future<SeedReport>> futures;
    futures.reserve(config.seeds.size());
    for (std::uint64_t seed : config.seeds) {
      futures.push_back(std::async(std::launch::async, run_seed_job, std::cref(ctx),
                                   std::cref(result.weights), seed));
    }
    for (size_t i = 0; i < futures.size(); ++i) {
      try {
        result.reports.push_back(futures[i].get());
      } catch (const std::exception& e) {
        failures.push_back("seed " + std::to_string(config.seeds[i]) + ": " + e.what());
      }
    }
  } else {
    for (std::uint64_t seed : config.seeds) {
      try {
        result.reports.push_back(run_seed_job(ctx, result.weights, seed));
      } catch (const std::exception& e) {
        failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
      }
    }
  }
  if (!failures.empty()) {
    result.failed = true;
    std::ostringstream os;
    for (size_t i = 0; i < failures.size(); ++i) {
      if (i > 0) os << "; ";
      os << failures[i];
    }
    result.error = os.str();
  }
  fill_round_stats(result, ctx.profiles);
  return result;
}

FeedbackSummary summarize_round(const RoundResult& round, bool include_equity) {
  if (round.reports.empty()) {
    throw Error(ErrorCode::InvalidInput, "cannot summarize a round without reports");
  }
  FeedbackSummary fb;
  std::vector<double> cost, carbon, solar, soc, composite;
  for (const auto& r : round.reports) {
    cost.push_back(r.eval.normalized.cost);
    carbon.push_back(r.eval.normalized.carbon);
    solar.push_back(r.eval.normalized.solar_shortfall);
    soc.push_back(r.eval.normalized.soc_deviation);
    composite.push_back(r.eval.composite);
  }
  fb.kpi_cost = stat_of(cost);
  fb.kpi_carbon = stat_of(carbon);
  fb.kpi_solar = stat_of(solar);
  fb.kpi_soc = stat_of(soc);
  fb.composite = stat_of(composite);
  if (include_equity) {
    fb.has_equity = true;
    fb.cei_mean = round.cei_stat.mean;
    fb.satisfaction_mean = round.satisfaction_mean;
  }
  return fb;
}

namespace {

json stat_to_json(const Stat& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

Stat stat_from_json(const json& j) {
  return Stat{j.at("mean").get<double>(), j.at("std").get<double>()};
}

json satisfactions_to_json(const SatisfactionVector& v) {
  json arr = json::array();
  for (size_t i = 0; i < v.ids.size(); ++i) {
    arr.push_back(json{{"id", v.ids[i]}, {"score", v.scores[static_cast<Eigen::Index>(i)]}});
  }
  return arr;
}

SatisfactionVector satisfactions_from_json(const json& arr) {
  std::vector<std::string> ids;
  Eigen::ArrayXd scores(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& item : arr) {
    ids.push_back(item.at("id").get<std::string>());
    scores[i++] = item.at("score").get<double>();
  }
  return SatisfactionVector(std::move(ids), std::move(scores));
}

json kpi_to_json(const KpiVector& k) {
  return json{{"cost", k.cost},
              {"carbon", k.carbon},
              {"solar_shortfall", k.solar_shortfall},
              {"soc_deviation", k.soc_deviation}};
}

KpiVector kpi_from_json(const json& j) {
  KpiVector k;
  k.cost = j.at("cost").get<double>();
  k.carbon = j.at("carbon").get<double>();
  k.solar_shortfall = j.at("solar_shortfall").get<double>();
  k.soc_deviation = j.at("soc_deviation").get<double>();
  return k;
}

json normalized_to_json(const NormalizedKpiVector& k) {
  return json{{"cost", k.cost},
              {"carbon", k.carbon},
              {"solar_shortfall", k.solar_shortfall},
              {"soc_deviation", k.soc_deviation}};
}

NormalizedKpiVector normalized_from_json(const json& j) {
  NormalizedKpiVector k;
  k.cost = j.at("cost").get<double>();
  k.carbon = j.at("carbon").get<double>();
  k.solar_shortfall = j.at("solar_shortfall").get<double>();
  k.soc_deviation = j.at("soc_deviation").get<double>();
  return k;
}

json weights_meta_to_json(const RewardWeights& w) {
  return json{{"cost", w.cost_w},
              {"carbon", w.carbon_w},
              {"solar", w.solar_w},
              {"soc", w.soc_w},
              {"equity", w.equity_w},
              {"round", w.round},
              {"provenance", to_string(w.provenance)},
              {"degenerate", w.degenerate}};
}

RewardWeights weights_meta_from_json(const json& j) {
  RewardWeights w;
  w.cost_w = j.at("cost").get<double>();
  w.carbon_w = j.at("carbon").get<double>();
  w.solar_w = j.at("solar").get<double>();
  w.soc_w = j.at("soc").get<double>();
  w.equity_w = j.at("equity").get<double>();
  w.round = j.at("round").get<int>();
  w.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  return validate_weights(w);
}

json seed_report_to_json(const SeedReport& r) {
  json j;
  j["seed"] = r.seed;
  j["raw_agent"] = kpi_to_json(r.eval.raw_agent);
  j["raw_rbc"] = kpi_to_json(r.eval.raw_rbc);
  j["normalized"] = normalized_to_json(r.eval.normalized);
  j["composite_cost"] = r.eval.composite;
  j["satisfactions"] = satisfactions_to_json(r.eval.satisfactions);
  j["cei"] = r.eval.equity.cei;
  j["jain"] = r.eval.equity.jain;
  j["worst_profile"] = r.eval.equity.worst_profile;
  if (r.eval.has_reward) {
    j["mean_step_reward"] = r.eval.mean_step_reward;
  }
  return j;
}

SeedReport seed_report_from_json(const json& j) {
  SeedReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.eval.seed = r.seed;
  r.eval.raw_agent = kpi_from_json(j.at("raw_agent"));
  r.eval.raw_rbc = kpi_from_json(j.at("raw_rbc"));
  r.eval.normalized = normalized_from_json(j.at("normalized"));
  r.eval.composite = j.at("composite_cost").get<double>();
  r.eval.satisfactions = satisfactions_from_json(j.at("satisfactions"));
  r.eval.equity = cei(r.eval.satisfactions);
  if (j.contains("mean_step_reward")) {
    r.eval.mean_step_reward = j.at("mean_step_reward").get<double>();
    r.eval.has_reward = true;
  }
  return r;
}

}  // namespace

std::string round_result_to_json(const RoundResult& r) {
  json j;
  j["round"] = r.round;
  j["description"] = r.description;
  j["weights"] = weights_meta_to_json(r.weights);
  json exchanges = json::array();
  for (const auto& e : r.exchange) {
    exchanges.push_back(json{{"prompt", e.prompt}, {"response", e.response}});
  }
  j["exchange"] = exchanges;
  j["engineer"] = r.engineer_name;
  j["engineer_calls"] = r.engineer_calls;
  j["stats"] = json{{"composite_cost", stat_to_json(r.composite)},
                    {"cei", stat_to_json(r.cei_stat)}};
  j["worst_profile"] = r.worst_profile;
  j["satisfaction_mean"] = satisfactions_to_json(r.satisfaction_mean);
  json reports = json::array();
  for (const auto& rep : r.reports) reports.push_back(seed_report_to_json(rep));
  j["reports"] = reports;
  j["failed"] = r.failed;
  if (r.failed) j["error"] = r.error;
  return j.dump(2) + "\n";
}

RoundResult round_result_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad round document: ") + e.what());
  }
  RoundResult r;
  try {
    r.round = j.at("round").get<int>();
    r.description = j.at("description").get<std::string>();
    r.weights = weights_meta_from_json(j.at("weights"));
    for (const auto& e : j.at("exchange")) {
      r.exchange.push_back({e.at("prompt").get<std::string>(),
                            e.at("response").get<std::string>()});
    }
    r.engineer_name = j.at("engineer").get<std::string>();
    r.engineer_calls = j.at("engineer_calls").get<int>();
    r.composite = stat_from_json(j.at("stats").at("composite_cost"));
    r.cei_stat = stat_from_json(j.at("stats").at("cei"));
    r.worst_profile = j.at("worst_profile").get<std::string>();
    r.satisfaction_mean = satisfactions_from_json(j.at("satisfaction_mean"));
    for (const auto& rep : j.at("reports")) {
      r.reports.push_back(seed_report_from_json(rep));
    }
    r.failed = j.value("failed", false);
    r.error = j.value("error", "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad round document: ") + e.what());
  }
  return r;
}

namespace {

json env_config_to_json(const EnvConfig& e) {
  return json{{"buildings", e.buildings},
              {"horizon", e.horizon},
              {"ambient_coupling", e.ambient_coupling},
              {"internal_gain", e.internal_gain},
              {"internal_gain_spread", e.internal_gain_spread},
              {"cooling_gain", e.cooling_gain},
              {"hvac_rated_kw", e.hvac_rated_kw},
              {"battery_kwh", e.battery_kwh},
              {"eta_charge", e.eta_charge},
              {"eta_discharge", e.eta_discharge},
              {"soc_target", e.soc_target},
              {"init_temp_low", e.init_temp_low},
              {"init_temp_high", e.init_temp_high},
              {"base_load", e.base_load}};
}

json trace_config_to_json(const TraceConfig& t) {
  return json{{"seed", t.seed},
              {"ambient_mean", t.ambient_mean},
              {"ambient_amplitude", t.ambient_amplitude},
              {"ambient_jitter", t.ambient_jitter},
              {"ambient_peak_hour", t.ambient_peak_hour},
              {"solar_peak", t.solar_peak},
              {"solar_day_min_factor", t.solar_day_min_factor},
              {"solar_roof_min", t.solar_roof_min},
              {"solar_roof_max", t.solar_roof_max},
              {"price_offpeak", t.price_offpeak},
              {"price_mid", t.price_mid},
              {"price_peak", t.price_peak},
              {"carbon_base", t.carbon_base},
              {"carbon_swing", t.carbon_swing}};
}

json rbc_config_to_json(const RbcConfig& r) {
  return json{{"setpoint", r.setpoint},
              {"deadband", r.deadband},
              {"charge_rate", r.charge_rate},
              {"discharge_rate", r.discharge_rate}};
}

json agent_config_to_json(const AgentConfig& a) {
  return json{{"training_steps", a.training_steps},
              {"learning_rate", a.learning_rate},
              {"batch_size", a.batch_size},
              {"replay_capacity", a.replay_capacity},
              {"discount", a.discount},
              {"exploration",
               json{{"temp_start", a.exploration.temp_start},
                    {"temp_end", a.exploration.temp_end},
                    {"anneal_fraction", a.exploration.anneal_fraction}}},
              {"action_grid",
               json{{"cooling_levels", a.action_grid.cooling_levels},
                    {"battery_levels", a.action_grid.battery_levels}}},
              {"temp_bin_min", a.temp_bin_min},
              {"temp_bin_width", a.temp_bin_width},
              {"temp_bins", a.temp_bins},
              {"soc_bins", a.soc_bins}};
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void env_config_from_json(const json& j, EnvConfig& e) {
  maybe(j, "buildings", e.buildings);
  maybe(j, "horizon", e.horizon);
  maybe(j, "ambient_coupling", e.ambient_coupling);
  maybe(j, "internal_gain", e.internal_gain);
  maybe(j, "internal_gain_spread", e.internal_gain_spread);
  maybe(j, "cooling_gain", e.cooling_gain);
  maybe(j, "hvac_rated_kw", e.hvac_rated_kw);
  maybe(j, "battery_kwh", e.battery_kwh);
  maybe(j, "eta_charge", e.eta_charge);
  maybe(j, "eta_discharge", e.eta_discharge);
  maybe(j, "soc_target", e.soc_target);
  maybe(j, "init_temp_low", e.init_temp_low);
  maybe(j, "init_temp_high", e.init_temp_high);
  maybe(j, "base_load", e.base_load);
}

void trace_config_from_json(const json& j, TraceConfig& t) {
  maybe(j, "seed", t.seed);
  maybe(j, "ambient_mean", t.ambient_mean);
  maybe(j, "ambient_amplitude", t.ambient_amplitude);
  maybe(j, "ambient_jitter", t.ambient_jitter);
  maybe(j, "ambient_peak_hour", t.ambient_peak_hour);
  maybe(j, "solar_peak", t.solar_peak);
  maybe(j, "solar_day_min_factor", t.solar_day_min_factor);
  maybe(j, "solar_roof_min", t.solar_roof_min);
  maybe(j, "solar_roof_max", t.solar_roof_max);
  maybe(j, "price_offpeak", t.price_offpeak);
  maybe(j, "price_mid", t.price_mid);
  maybe(j, "price_peak", t.price_peak);
  maybe(j, "carbon_base", t.carbon_base);
  maybe(j, "carbon_swing", t.carbon_swing);
}

void rbc_config_from_json(const json& j, RbcConfig& r) {
  maybe(j, "setpoint", r.setpoint);
  maybe(j, "deadband", r.deadband);
  maybe(j, "charge_rate", r.charge_rate);
  maybe(j, "discharge_rate", r.discharge_rate);
}

void agent_config_from_json(const json& j, AgentConfig& a) {
  maybe(j, "training_steps", a.training_steps);
  maybe(j, "learning_rate", a.learning_rate);
  maybe(j, "batch_size", a.batch_size);
  maybe(j, "replay_capacity", a.replay_capacity);
  maybe(j, "discount", a.discount);
  if (j.contains("exploration")) {
    const auto& e = j.at("exploration");
    maybe(e, "temp_start", a.exploration.temp_start);
    maybe(e, "temp_end", a.exploration.temp_end);
    maybe(e, "anneal_fraction", a.exploration.anneal_fraction);
  }
  if (j.contains("action_grid")) {
    const auto& g = j.at("action_grid");
    maybe(g, "cooling_levels", a.action_grid.cooling_levels);
    maybe(g, "battery_levels", a.action_grid.battery_levels);
  }
  maybe(j, "temp_bin_min", a.temp_bin_min);
  maybe(j, "temp_bin_width", a.temp_bin_width);
  maybe(j, "temp_bins", a.temp_bins);
  maybe(j, "soc_bins", a.soc_bins);
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment_id"] = cfg.experiment_id;
  j["seeds"] = cfg.seeds;
  j["env"] = env_config_to_json(cfg.env);
  j["traces"] = trace_config_to_json(cfg.traces);
  j["rbc"] = rbc_config_to_json(cfg.rbc);
  j["agent"] = agent_config_to_json(cfg.agent);
  j["engineer"] = json{{"base_url", cfg.engineer.base_url},
                       {"model", cfg.engineer.model},
                       {"api_key_env", cfg.engineer.api_key_env},
                       {"temperature", cfg.engineer.temperature},
                       {"timeout_seconds", cfg.engineer.timeout_seconds},
                       {"transport_retries", cfg.engineer.transport_retries}};
  j["parallel_seeds"] = cfg.parallel_seeds;
  j["max_weight_retries"] = cfg.max_weight_retries;
  if (!cfg.profiles.empty()) {
    json arr = json::array();
    for (const auto& p : cfg.profiles) {
      arr.push_back(json{{"id", p.id},
                         {"age_range", json::array({p.age_min, p.age_max})},
                         {"sex", to_string(p.sex)},
                         {"sample_size", p.sample_size},
                         {"t_min", p.t_min},
                         {"t_max", p.t_max},
                         {"flex", p.flex}});
    }
    j["profiles"] = arr;
  }
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad experiment config: ") + e.what());
  }
  ExperimentConfig cfg = default_experiment_config();
  try {
    maybe(j, "experiment_id", cfg.experiment_id);
    maybe(j, "seeds", cfg.seeds);
    if (j.contains("env")) env_config_from_json(j.at("env"), cfg.env);
    if (j.contains("traces")) trace_config_from_json(j.at("traces"), cfg.traces);
    if (j.contains("rbc")) rbc_config_from_json(j.at("rbc"), cfg.rbc);
    if (j.contains("agent")) agent_config_from_json(j.at("agent"), cfg.agent);
    if (j.contains("engineer")) {
      const auto& e = j.at("engineer");
      maybe(e, "base_url", cfg.engineer.base_url);
      maybe(e, "model", cfg.engineer.model);
      maybe(e, "api_key_env", cfg.engineer.api_key_env);
      maybe(e, "temperature", cfg.engineer.temperature);
      maybe(e, "timeout_seconds", cfg.engineer.timeout_seconds);
      maybe(e, "transport_retries", cfg.engineer.transport_retries);
    }
    maybe(j, "parallel_seeds", cfg.parallel_seeds);
    maybe(j, "max_weight_retries", cfg.max_weight_retries);
    if (j.contains("profiles")) {
      cfg.profiles = profiles_from_json(json{{"profiles", j.at("profiles")}}.dump());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad experiment config: ") + e.what());
  }
  if (cfg.seeds.empty()) {
    throw Error(ErrorCode::Config, "experiment requires at least one seed");
  }
  cfg.env.validate();
  cfg.agent.validate();
  return cfg;
}

namespace {

std::vector<SatisfactionChange> change_table(const std::vector<RoundResult>& rounds,
                                             const ProfileSet& profiles) {
  std::vector<SatisfactionChange> out;
  if (rounds.size() != 3) return out;
  for (size_t i = 0; i < profiles.size(); ++i) {
    SatisfactionChange c;
    c.id = profiles[i].id;
    const auto idx = static_cast<Eigen::Index>(i);
    c.r1 = rounds[0].satisfaction_mean.scores[idx];
    c.r2 = rounds[1].satisfaction_mean.scores[idx];
    c.r3 = rounds[2].satisfaction_mean.scores[idx];
    c.change = c.r3 - c.r1;
    if (c.r1 > 0.0) {
      c.relative_change = (c.r3 - c.r1) / c.r1;
    }
    out.push_back(std::move(c));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
  out << content;
}

}  // namespace

std::string experiment_result_to_json(const ExperimentResult& r,
                                      const ExperimentConfig& cfg) {
  json j;
  j["format"] = "occureward-experiment";
  j["version"] = 1;
  j["experiment_id"] = r.experiment_id;
  j["config"] = json::parse(experiment_config_to_json(cfg));
  json profiles = json::array();
  for (const auto& p : r.profiles) {
    profiles.push_back(json{{"id", p.id},
                            {"age_range", json::array({p.age_min, p.age_max})},
                            {"sex", to_string(p.sex)},
                            {"sample_size", p.sample_size},
                            {"t_min", p.t_min},
                            {"t_max", p.t_max},
                            {"flex", p.flex}});
  }
  j["profiles"] = profiles;
  json rounds = json::array();
  for (const auto& rr : r.rounds) {
    rounds.push_back(json{{"round", rr.round},
                          {"description", rr.description},
                          {"weights", weights_meta_to_json(rr.weights)},
                          {"composite_cost", stat_to_json(rr.composite)},
                          {"cei", stat_to_json(rr.cei_stat)},
                          {"worst_profile", rr.worst_profile},
                          {"satisfaction_mean", satisfactions_to_json(rr.satisfaction_mean)},
                          {"seeds", rr.reports.size()},
                          {"failed", rr.failed}});
  }
  j["rounds"] = rounds;
  json changes = json::array();
  for (const auto& c : r.satisfaction_change) {
    json item{{"id", c.id}, {"r1", c.r1}, {"r2", c.r2}, {"r3", c.r3}, {"change", c.change}};
    if (c.relative_change.has_value()) {
      item["relative_change"] = *c.relative_change;
    } else {
      item["relative_change"] = nullptr;
    }
    changes.push_back(std::move(item));
  }
  j["satisfaction_change"] = changes;
  j["total_jobs"] = r.total_jobs;
  return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, RewardEngineer& engineer,
                                const std::string& out_dir) {
  const ExperimentContext ctx = ExperimentContext::from_config(cfg);

  std::filesystem::path exp_dir;
  if (!out_dir.empty()) {
    exp_dir = std::filesystem::path(out_dir) / cfg.experiment_id;
    std::filesystem::create_directories(exp_dir);
  }

  ExperimentResult result;
  result.experiment_id = cfg.experiment_id;
  result.profiles = ctx.profiles;

  std::optional<FeedbackSummary> feedback;
  for (int round = 1; round <= 3; ++round) {
    RoundConfig rc;
    rc.round = round;
    rc.seeds = cfg.seeds;
    rc.feedback = feedback;
    RoundResult rr = run_round(rc, engineer, ctx);
    result.total_jobs += static_cast<int>(rr.reports.size());
    result.rounds.push_back(rr);
    if (!out_dir.empty()) {
      write_file(exp_dir / ("round" + std::to_string(round) + ".json"),
                 round_result_to_json(rr));
    }
    if (rr.failed) {
      throw Error(ErrorCode::TrainingFault,
                  "round " + std::to_string(round) + " failed: " + rr.error);
    }
    feedback = summarize_round(rr, /*include_equity=*/round == 2);
  }

  result.satisfaction_change = change_table(result.rounds, ctx.profiles);
  if (!out_dir.empty()) {
    write_file(exp_dir / "experiment.json", experiment_result_to_json(result, cfg));
  }
  return result;
}

ExperimentResult experiment_result_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad experiment document: ") + e.what());
  }
  if (j.value("format", "") != "occureward-experiment") {
    throw Error(ErrorCode::Format, "not an experiment document");
  }
  ExperimentResult r;
  try {
    r.experiment_id = j.at("experiment_id").get<std::string>();
    for (const auto& p : j.at("profiles")) {
      OccupantProfile prof;
      prof.id = p.at("id").get<std::string>();
      prof.age_min = p.at("age_range").at(0).get<int>();
      prof.age_max = p.at("age_range").at(1).get<int>();
      prof.sex = sex_from_string(p.at("sex").get<std::string>());
      prof.sample_size = p.at("sample_size").get<int>();
      prof.t_min = p.at("t_min").get<double>();
      prof.t_max = p.at("t_max").get<double>();
      prof.flex = p.at("flex").get<double>();
      r.profiles.push_back(std::move(prof));
    }
    for (const auto& rr : j.at("rounds")) {
      RoundResult round;
      round.round = rr.at("round").get<int>();
      round.description = rr.at("description").get<std::string>();
      round.weights = weights_meta_from_json(rr.at("weights"));
      round.composite = stat_from_json(rr.at("composite_cost"));
      round.cei_stat = stat_from_json(rr.at("cei"));
      round.worst_profile = rr.at("worst_profile").get<std::string>();
      round.satisfaction_mean = satisfactions_from_json(rr.at("satisfaction_mean"));
      round.failed = rr.value("failed", false);
      r.rounds.push_back(std::move(round));
    }
    for (const auto& c : j.at("satisfaction_change")) {
      SatisfactionChange ch;
      ch.id = c.at("id").get<std::string>();
      ch.r1 = c.at("r1").get<double>();
      ch.r2 = c.at("r2").get<double>();
      ch.r3 = c.at("r3").get<double>();
      ch.change = c.at("change").get<double>();
      if (!c.at("relative_change").is_null()) {
        ch.relative_change = c.at("relative_change").get<double>();
      }
      r.satisfaction_change.push_back(std::move(ch));
    }
    r.total_jobs = j.at("total_jobs").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad experiment document: ") + e.what());
  }
  return r;
}

}  // namespace occureward
