#include "occureward/cli.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "occureward/comfort.hpp"
#include "occureward/engineer.hpp"
#include "occureward/profiles.hpp"
#include "occureward/refinement.hpp"
#include "occureward/report.hpp"

namespace occureward::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  }
  out << content;
}

int report_error(const std::exception& e, std::ostream& err) {
  const auto* domain = dynamic_cast<const Error*>(&e);
  err << "occureward: error: " << e.what() << "\n";
  return domain != nullptr ? exit_code_for(domain->code()) : 1;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
      return 2;
    case ErrorCode::InvalidInput:
    case ErrorCode::Format:
    case ErrorCode::Io:
      return 3;
    case ErrorCode::InsufficientData:
    case ErrorCode::DegenerateRange:
    case ErrorCode::DegenerateBaseline:
      return 4;
    case ErrorCode::ProtocolViolation:
    case ErrorCode::Parse:
      return 5;
    case ErrorCode::Transport:
      return 6;
    default:
      return 1;
  }
}

int cmd_profiles_build(const ProfilesBuildOptions& opts, std::ostream& out,
                       std::ostream& err) {
  try {
    if (opts.out_path.empty()) {
      throw Error(ErrorCode::Config, "profiles build requires --out");
    }
    if (opts.use_builtin) {
      write_file(opts.out_path, profiles_to_json(builtin_profiles()));
      err << "wrote " << builtin_profiles().size() << " built-in profiles to "
          << opts.out_path << "\n";
      return 0;
    }
    if (opts.records_path.empty()) {
      throw Error(ErrorCode::Config, "profiles build requires --records or --builtin");
    }
    std::ifstream records(opts.records_path);
    if (!records) {
      throw Error(ErrorCode::Io, "cannot read '" + opts.records_path + "'");
    }
    const LoadReport loaded = load_records(records);
    err << "loaded " << loaded.records.size() << " records, rejected " << loaded.rejected
        << "\n";
    for (const auto& [reason, count] : loaded.rejection_reasons) {
      err << "  " << reason << ": " << count << "\n";
    }

    const std::vector<ProfileQuery> queries =
        opts.queries_path.empty() ? builtin_queries()
                                  : queries_from_json(read_file(opts.queries_path));
    ProfileSet profiles;
    for (const auto& q : queries) {
      const ProfileBuildResult built = build_profile(loaded.records, q);
      err << "query '" << q.id << "': " << built.matched_records << " matched, "
          << built.comfortable_records << " comfortable, range "
          << built.profile.t_min << "-" << built.profile.t_max << " C\n";
      profiles.push_back(built.profile);
    }
    write_file(opts.out_path, profiles_to_json(profiles));
    out << "wrote " << profiles.size() << " profiles to " << opts.out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg = opts.config_path.empty()
                               ? default_experiment_config()
                               : experiment_config_from_json(read_file(opts.config_path));
    if (!opts.seeds.empty()) {
      cfg.seeds = opts.seeds;
    }

    std::unique_ptr<RewardEngineer> engineer;
    if (opts.engineer == "scripted") {
      engineer = std::make_unique<ScriptedEngineer>(default_scripted_engineer());
    } else if (opts.engineer == "http") {
      engineer = std::make_unique<HttpEngineer>(cfg.engineer);
    } else {
      throw Error(ErrorCode::Config,
                  "engineer must be 'scripted' or 'http', got '" + opts.engineer + "'");
    }

    const ExperimentResult result = run_experiment(cfg, *engineer, opts.out_dir);
    out << "experiment '" << result.experiment_id << "': " << result.total_jobs
        << " train/evaluate jobs across " << result.rounds.size() << " rounds\n";
    for (const auto& r : result.rounds) {
      out << "  round " << r.round << " (" << r.description << "): composite cost "
          << r.composite.mean << " +- " << r.composite.std << ", CEI " << r.cei_stat.mean
          << ", worst profile " << r.worst_profile << "\n";
    }
    out << "record written under " << opts.out_dir << "/" << result.experiment_id << "\n";
    return 0;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.results_dir.empty()) {
      throw Error(ErrorCode::Config, "report requires a results directory");
    }
    const ReportBundle bundle = load_report_from_dir(opts.results_dir);
    const std::string dest = opts.out_dir.empty() ? opts.results_dir : opts.out_dir;
    emit_report(bundle, dest, opts.format);
    out << "wrote results_table, satisfaction_table, cost_series, weight_series ("
        << opts.format << ") to " << dest << "\n";
    return 0;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

}  // namespace occureward::cli
