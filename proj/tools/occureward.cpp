#include <CLI11.hpp>

#include <iostream>

#include "occureward/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equity-aware reward shaping sandbox for grid-interactive buildings"};
  app.require_subcommand(1);

  // profiles build
  auto* profiles = app.add_subcommand("profiles", "Occupant profile tools");
  profiles->require_subcommand(1);
  occureward::cli::ProfilesBuildOptions build_opts;
  auto* build = profiles->add_subcommand(
      "build", "Build occupant profiles from comfort-vote records");
  build->add_option("--records", build_opts.records_path,
                    "CSV of comfort records (age, sex, air_temp, thermal_comfort, health_flag)");
  build->add_option("--config", build_opts.queries_path,
                    "JSON query document; defaults to the built-in demographic queries");
  build->add_flag("--builtin", build_opts.use_builtin,
                  "Write the built-in profile constants instead of building from records");
  build->add_option("--out", build_opts.out_path, "Output profiles JSON path")->required();

  // run
  occureward::cli::RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run the three-round refinement experiment");
  run->add_option("--config", run_opts.config_path, "Experiment config JSON");
  run->add_option("--engineer", run_opts.engineer, "Reward engineer: scripted or http")
      ->check(CLI::IsMember({"scripted", "http"}));
  run->add_option("--seeds", run_opts.seeds, "Seed list override")->delimiter(',');
  run->add_option("--out", run_opts.out_dir, "Results directory (default: results)");

  // report
  occureward::cli::ReportOptions report_opts;
  auto* report = app.add_subcommand("report", "Emit tables and figure data from a record");
  report->add_option("results_dir", report_opts.results_dir,
                     "Experiment record directory (results/<experiment-id>)")
      ->required();
  report->add_option("--format", report_opts.format, "Output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  report->add_option("--out", report_opts.out_dir,
                     "Output directory (default: the record directory)");

  CLI11_PARSE(app, argc, argv);

  if (build->parsed()) {
    return occureward::cli::cmd_profiles_build(build_opts, std::cout, std::cerr);
  }
  if (run->parsed()) {
    return occureward::cli::cmd_run(run_opts, std::cout, std::cerr);
  }
  if (report->parsed()) {
    return occureward::cli::cmd_report(report_opts, std::cout, std::cerr);
  }
  return 1;
}
