#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "occureward/errors.hpp"

namespace occureward::cli {

int exit_code_for(ErrorCode code);

struct ProfilesBuildOptions {
  std::string records_path;
  std::string queries_path;  // empty: the built-in Table-style queries
  bool use_builtin = false;  // write the built-in profile constants verbatim
  std::string out_path;
};

struct RunOptions {
  std::string config_path;  // empty: desk defaults
  std::string engineer = "scripted";  // scripted | http
  std::vector<std::uint64_t> seeds;   // empty: config seeds
  std::string out_dir = "results";
};

struct ReportOptions {
  std::string results_dir;  // the results/<experiment-id> directory
  std::string format = "json";
  std::string out_dir;  // empty: alongside the record
};

int cmd_profiles_build(const ProfilesBuildOptions& opts, std::ostream& out,
                       std::ostream& err);
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace occureward::cli
