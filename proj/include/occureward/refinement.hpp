#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "occureward/agent.hpp"
#include "occureward/comfort.hpp"
#include "occureward/engineer.hpp"
#include "occureward/env.hpp"
#include "occureward/kpi.hpp"
#include "occureward/reward.hpp"

namespace occureward {

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

// Round-to-round feedback: normalized KPI statistics always, equity data only
// from round 2 to round 3.
struct FeedbackSummary {
  Stat kpi_cost;
  Stat kpi_carbon;
  Stat kpi_solar;
  Stat kpi_soc;
  Stat composite;
  bool has_equity = false;
  double cei_mean = 0.0;
  SatisfactionVector satisfaction_mean;
};

struct RoundConfig {
  int round = 1;
  std::vector<std::uint64_t> seeds = {42, 0, 1, 123, 456};
  std::optional<FeedbackSummary> feedback;

  void validate() const;
};

const char* round_description(int round);

// Deterministic prompt construction. Round 1 carries energy objectives only;
// round 2 adds the prior KPI summary with the equity weight pinned to zero;
// round 3 adds CEI, per-profile satisfactions and profile descriptions. Every
// prompt ends with the exact weight-object format instruction.
std::string build_prompt(const RoundConfig& config, const ProfileSet& profiles);

// Repair instruction sent back to the engineer after an invalid response.
std::string build_repair_prompt(int round, const std::string& reason);

// Extracts the first well-formed JSON object carrying the five weight keys
// and validates it for the round.
RewardWeights parse_weights(const std::string& response, int round,
                            WeightProvenance provenance = WeightProvenance::RemoteEngineer);

struct Exchange {
  std::string prompt;
  std::string response;
};

struct SeedReport {
  std::uint64_t seed = 0;
  EvaluationReport eval;
};

struct RoundResult {
  int round = 0;
  std::string description;
  RewardWeights weights;
  std::vector<SeedReport> reports;  // ordered by the configured seed list
  Stat composite;
  Stat cei_stat;
  std::string worst_profile;
  SatisfactionVector satisfaction_mean;
  std::vector<Exchange> exchange;  // initial prompt plus any repair retries
  std::string engineer_name;
  int engineer_calls = 0;
  bool failed = false;
  std::string error;
};

struct ExperimentConfig {
  std::string experiment_id = "desk-default";
  std::vector<std::uint64_t> seeds = {42, 0, 1, 123, 456};
  EnvConfig env;
  TraceConfig traces;
  RbcConfig rbc;
  AgentConfig agent;
  ProfileSet profiles;  // empty means the built-in set
  HttpEngineerConfig engineer;
  bool parallel_seeds = true;
  int max_weight_retries = 2;

  const ProfileSet& profile_set() const;
};

// The tuned desk defaults used by the CLI and the acceptance run.
ExperimentConfig default_experiment_config();

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct SatisfactionChange {
  std::string id;
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double change = 0.0;                    // r3 - r1
  std::optional<double> relative_change;  // (r3 - r1) / r1 when r1 > 0
};

struct ExperimentResult {
  std::string experiment_id;
  std::vector<RoundResult> rounds;
  ProfileSet profiles;
  std::vector<SatisfactionChange> satisfaction_change;
  int total_jobs = 0;
};

// Prebuilt environment plus the per-experiment knobs each round needs.
struct ExperimentContext {
  MicrodistrictEnv env;
  RbcConfig rbc;
  AgentConfig agent;
  ProfileSet profiles;
  bool parallel_seeds = true;
  int max_weight_retries = 2;

  static ExperimentContext from_config(const ExperimentConfig& cfg);
};

// One protocol round: one engineer call (plus bounded repair retries), then a
// train+evaluate job per seed. Seed jobs run concurrently and are merged in
// seed order. A failed seed job marks the round failed but keeps the
// completed reports.
RoundResult run_round(const RoundConfig& config, RewardEngineer& engineer,
                      const ExperimentContext& ctx);

// Three rounds with feedback chaining; round r+1 sees only round r's summary.
// When out_dir is given, results/<experiment-id>/round<k>.json and
// experiment.json are written as rounds complete.
ExperimentResult run_experiment(const ExperimentConfig& cfg, RewardEngineer& engineer,
                                const std::string& out_dir = "");

FeedbackSummary summarize_round(const RoundResult& round, bool include_equity);

// Record serialization (deterministic, no timestamps).
std::string round_result_to_json(const RoundResult& r);
RoundResult round_result_from_json(const std::string& text);
std::string experiment_result_to_json(const ExperimentResult& r,
                                      const ExperimentConfig& cfg);
ExperimentResult experiment_result_from_json(const std::string& text);

}  // namespace occureward
