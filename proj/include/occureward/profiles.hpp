#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "occureward/comfort.hpp"

namespace occureward {

// One comfort vote: demographic attributes plus the recorded air temperature
// and a 1-6 thermal comfort rating.
struct ComfortRecord {
  double age = 0.0;
  Sex sex = Sex::Male;  // records carry M or F only
  double air_temp = 0.0;
  int thermal_comfort = 0;
  bool health_flag = false;
};

struct ProfileQuery {
  std::string id;
  double age_min = 0.0;
  double age_max = 0.0;  // inclusive
  std::set<Sex> sexes;   // subset of {Male, Female}
  bool health_only = false;
  double flex = 1.0;

  void validate() const;
};

struct LoadReport {
  std::vector<ComfortRecord> records;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> rejection_reasons;
};

struct ProfileBuildResult {
  OccupantProfile profile;
  std::size_t matched_records = 0;      // after demographic filtering
  std::size_t comfortable_records = 0;  // after the comfort threshold
};

// Reads comma-delimited comfort records with header columns
// age, sex, air_temp, thermal_comfort, health_flag. Rows that fail to parse
// or fall outside the valid ranges are skipped and tallied.
LoadReport load_records(std::istream& in);

std::vector<ComfortRecord> filter_records(const std::vector<ComfortRecord>& records,
                                          const ProfileQuery& query);

// Quantile of a sample via linear interpolation at position p*(n-1) on the
// sorted values.
double quantile_linear(std::vector<double> values, double p);

// Builds a profile whose preferred band is the [Q25, Q75] of air temperature
// among records rated >= comfort_threshold. sample_size reports the filtered
// (pre-threshold) count.
ProfileBuildResult build_profile(const std::vector<ComfortRecord>& records,
                                 const ProfileQuery& query,
                                 int comfort_threshold = 4);

// Query config document I/O (JSON, {"queries": [...]}).
std::vector<ProfileQuery> queries_from_json(const std::string& text);
std::string queries_to_json(const std::vector<ProfileQuery>& queries);

// The four built-in queries mirroring the built-in profile demographics.
std::vector<ProfileQuery> builtin_queries();

}  // namespace occureward
