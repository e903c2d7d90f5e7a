#include "occureward/reward.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace occureward {

using json = nlohmann::json;

std::string to_string(WeightProvenance p) {
  switch (p) {
    case WeightProvenance::Scripted: return "scripted";
    case WeightProvenance::RemoteEngineer: return "remote-engineer";
    case WeightProvenance::Manual: return "manual";
  }
  return "manual";
}

WeightProvenance provenance_from_string(const std::string& s) {
  if (s == "scripted") return WeightProvenance::Scripted;
  if (s == "remote-engineer") return WeightProvenance::RemoteEngineer;
  if (s == "manual") return WeightProvenance::Manual;
  throw Error(ErrorCode::Format, "unknown provenance '" + s + "'");
}

RewardWeights validate_weights(RewardWeights weights) {
  const double values[] = {weights.cost_w, weights.carbon_w, weights.solar_w,
                           weights.soc_w, weights.equity_w};
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidInput, "weights must be finite and non-negative");
    }
  }
  if (weights.round < 1 || weights.round > 3) {
    throw Error(ErrorCode::InvalidInput, "round must be 1, 2 or 3");
  }
  if (weights.round < 3 && weights.equity_w != 0.0) {
    throw Error(ErrorCode::ProtocolViolation,
                "equity weight must equal 0.0 in round " + std::to_string(weights.round));
  }
  weights.degenerate = weights.cost_w == 0.0 && weights.carbon_w == 0.0 &&
                       weights.solar_w == 0.0 && weights.soc_w == 0.0 &&
                       weights.equity_w == 0.0;
  weights.validated = true;
  return weights;
}

RbcReference RbcReference::from_trace(const EpisodeTrace& trace) {
  if (trace.outcomes.empty()) {
    throw Error(ErrorCode::InvalidInput, "reference requires a non-empty trace");
  }
  const auto n = static_cast<Eigen::Index>(trace.outcomes.size());
  RbcReference ref;
  ref.cost.resize(n);
  ref.carbon.resize(n);
  ref.spill.resize(n);
  ref.soc_dev.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& o = trace.outcomes[static_cast<size_t>(t)];
    ref.cost[t] = o.cost;
    ref.carbon[t] = o.carbon;
    ref.spill[t] = o.solar_spilled;
    ref.soc_dev[t] = o.soc_deviation;
  }
  ref.cost_mean = ref.cost.mean();
  ref.carbon_mean = ref.carbon.mean();
  ref.spill_mean = ref.spill.mean();
  ref.soc_dev_mean = ref.soc_dev.mean();

  auto require_positive = [](double mean, const char* name) {
    if (!(mean > 0.0)) {
      throw Error(ErrorCode::DegenerateBaseline,
                  std::string("RBC reference component '") + name +
                      "' is zero across the whole episode");
    }
  };
  require_positive(ref.cost_mean, "cost");
  require_positive(ref.carbon_mean, "carbon");
  require_positive(ref.spill_mean, "solar_shortfall");
  require_positive(ref.soc_dev_mean, "soc_deviation");
  return ref;
}

StepKpiProxies step_kpi_proxies(const StepOutcome& outcome, int timestep,
                                const RbcReference& reference) {
  if (timestep < 0 || timestep >= reference.horizon()) {
    throw Error(ErrorCode::InvalidInput,
                "reference does not cover timestep " + std::to_string(timestep));
  }
  auto ratio = [](double agent, double ref, double fallback) {
    const double denom = ref > 0.0 ? ref : fallback;
    return agent / denom;
  };
  StepKpiProxies p;
  p.cost = ratio(outcome.cost, reference.cost[timestep], reference.cost_mean);
  p.carbon = ratio(outcome.carbon, reference.carbon[timestep], reference.carbon_mean);
  p.solar = ratio(outcome.solar_spilled, reference.spill[timestep], reference.spill_mean);
  p.soc = ratio(outcome.soc_deviation, reference.soc_dev[timestep], reference.soc_dev_mean);
  if (!std::isfinite(p.cost) || !std::isfinite(p.carbon) || !std::isfinite(p.solar) ||
      !std::isfinite(p.soc)) {
    throw Error(ErrorCode::InvalidInput, "non-finite KPI proxy");
  }
  return p;
}

StepReward step_reward(const RewardWeights& weights, const StepKpiProxies& proxies,
                       const SatisfactionVector& instantaneous) {
  if (!weights.validated) {
    throw Error(ErrorCode::InvalidInput, "weights must pass validate_weights first");
  }
  const double values[] = {proxies.cost, proxies.carbon, proxies.solar, proxies.soc};
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidInput, "KPI proxies must be finite and non-negative");
    }
  }
  StepReward r;
  r.cost_term = weights.cost_w * proxies.cost;
  r.carbon_term = weights.carbon_w * proxies.carbon;
  r.solar_term = weights.solar_w * proxies.solar;
  r.soc_term = weights.soc_w * proxies.soc;
  r.instant_cei = cei(instantaneous).cei;
  r.equity_term = weights.equity_w * r.instant_cei;
  r.total = -(r.cost_term + r.carbon_term + r.solar_term + r.soc_term + r.equity_term);
  return r;
}

std::string weights_to_json(const RewardWeights& w) {
  json j{{"cost", w.cost_w},
         {"carbon", w.carbon_w},
         {"solar", w.solar_w},
         {"soc", w.soc_w},
         {"equity", w.equity_w}};
  return j.dump();
}

RewardWeights weights_from_json(const std::string& text, int round,
                                WeightProvenance provenance) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad weight JSON: ") + e.what());
  }
  RewardWeights w;
  try {
    w.cost_w = j.at("cost").get<double>();
    w.carbon_w = j.at("carbon").get<double>();
    w.solar_w = j.at("solar").get<double>();
    w.soc_w = j.at("soc").get<double>();
    w.equity_w = j.at("equity").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse,
                std::string("weight object must carry cost/carbon/solar/soc/equity: ") +
                    e.what());
  }
  w.round = round;
  w.provenance = provenance;
  return validate_weights(w);
}

}  // namespace occureward
