#include "occureward/profiles.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

namespace occureward {

using json = nlohmann::json;

namespace {

constexpr double kAirTempMin = 0.0;
constexpr double kAirTempMax = 50.0;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    out.push_back("");
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, int& out) {
  try {
    size_t pos = 0;
    out = std::stoi(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

void ProfileQuery::validate() const {
  if (id.empty()) {
    throw Error(ErrorCode::InvalidInput, "query id must be non-empty");
  }
  if (!(age_min <= age_max)) {
    throw Error(ErrorCode::InvalidInput, "query '" + id + "' requires age_min <= age_max");
  }
  if (!(flex > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "query '" + id + "' requires flex > 0");
  }
  if (sexes.empty()) {
    throw Error(ErrorCode::InvalidInput, "query '" + id + "' requires at least one sex");
  }
  for (Sex s : sexes) {
    if (s == Sex::Mixed) {
      throw Error(ErrorCode::InvalidInput, "query sexes must be M or F, not Mixed");
    }
  }
}

LoadReport load_records(std::istream& in) {
  LoadReport report;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::Format, "record stream is empty (header row required)");
  }
  const auto header = split_csv(line);
  int col_age = -1, col_sex = -1, col_temp = -1, col_comfort = -1, col_health = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (header[i] == "age") col_age = idx;
    else if (header[i] == "sex") col_sex = idx;
    else if (header[i] == "air_temp") col_temp = idx;
    else if (header[i] == "thermal_comfort") col_comfort = idx;
    else if (header[i] == "health_flag") col_health = idx;
  }
  for (const auto& [name, col] : {std::pair<const char*, int>{"age", col_age},
                                  {"sex", col_sex},
                                  {"air_temp", col_temp},
                                  {"thermal_comfort", col_comfort},
                                  {"health_flag", col_health}}) {
    if (col < 0) {
      throw Error(ErrorCode::Format, std::string("missing required column '") + name + "'");
    }
  }

  auto reject = [&report](const char* reason) {
    ++report.rejected;
    ++report.rejection_reasons[reason];
  };

  const size_t min_fields = static_cast<size_t>(
      std::max({col_age, col_sex, col_temp, col_comfort, col_health})) + 1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() < min_fields) {
      reject("short-row");
      continue;
    }
    ComfortRecord rec;
    if (!parse_double(fields[static_cast<size_t>(col_age)], rec.age) || rec.age < 0.0) {
      reject("bad-age");
      continue;
    }
    const std::string& sex_field = fields[static_cast<size_t>(col_sex)];
    if (sex_field == "M" || sex_field == "m") {
      rec.sex = Sex::Male;
    } else if (sex_field == "F" || sex_field == "f") {
      rec.sex = Sex::Female;
    } else {
      reject("bad-sex");
      continue;
    }
    if (!parse_double(fields[static_cast<size_t>(col_temp)], rec.air_temp) ||
        rec.air_temp < kAirTempMin || rec.air_temp > kAirTempMax) {
      reject("air-temp-out-of-range");
      continue;
    }
    if (!parse_int(fields[static_cast<size_t>(col_comfort)], rec.thermal_comfort) ||
        rec.thermal_comfort < 1 || rec.thermal_comfort > 6) {
      reject("thermal-comfort-out-of-range");
      continue;
    }
    int health = 0;
    if (!parse_int(fields[static_cast<size_t>(col_health)], health) ||
        (health != 0 && health != 1)) {
      reject("bad-health-flag");
      continue;
    }
    rec.health_flag = health == 1;
    report.records.push_back(rec);
  }
  return report;
}

std::vector<ComfortRecord> filter_records(const std::vector<ComfortRecord>& records,
                                          const ProfileQuery& query) {
  query.validate();
  std::vector<ComfortRecord> out;
  for (const auto& rec : records) {
    if (rec.age < query.age_min || rec.age > query.age_max) continue;
    if (query.sexes.find(rec.sex) == query.sexes.end()) continue;
    if (query.health_only && !rec.health_flag) continue;
    out.push_back(rec);
  }
  return out;
}

double quantile_linear(std::vector<double> values, double p) {
  if (values.empty()) {
    throw Error(ErrorCode::InvalidInput, "quantile of an empty sample");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "quantile position must lie in [0,1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ProfileBuildResult build_profile(const std::vector<ComfortRecord>& records,
                                 const ProfileQuery& query,
                                 int comfort_threshold) {
  const auto matched = filter_records(records, query);
  std::vector<double> comfortable_temps;
  for (const auto& rec : matched) {
    if (rec.thermal_comfort >= comfort_threshold) {
      comfortable_temps.push_back(rec.air_temp);
    }
  }
  if (comfortable_temps.size() < 4) {
    throw Error(ErrorCode::InsufficientData,
                "query '" + query.id + "' matched " + std::to_string(comfortable_temps.size()) +
                    " comfortable records; at least 4 are required");
  }

  ProfileBuildResult result;
  result.matched_records = matched.size();
  result.comfortable_records = comfortable_temps.size();

  OccupantProfile p;
  p.id = query.id;
  p.age_min = static_cast<int>(query.age_min);
  p.age_max = static_cast<int>(query.age_max);
  p.sex = query.sexes.size() == 2 ? Sex::Mixed : *query.sexes.begin();
  p.sample_size = static_cast<int>(matched.size());
  p.t_min = quantile_linear(comfortable_temps, 0.25);
  p.t_max = quantile_linear(comfortable_temps, 0.75);
  p.flex = query.flex;
  if (!(p.t_min < p.t_max)) {
    throw Error(ErrorCode::DegenerateRange,
                "query '" + query.id + "' yields a degenerate range Q25 == Q75 == " +
                    std::to_string(p.t_min));
  }
  p.validate();
  result.profile = p;
  return result;
}

std::vector<ProfileQuery> queries_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad queries JSON: ") + e.what());
  }
  if (!doc.contains("queries") || !doc["queries"].is_array()) {
    throw Error(ErrorCode::Format, "queries document must contain a 'queries' array");
  }
  std::vector<ProfileQuery> out;
  for (const auto& item : doc["queries"]) {
    ProfileQuery q;
    try {
      q.id = item.at("id").get<std::string>();
      q.age_min = item.at("age_range").at(0).get<double>();
      q.age_max = item.at("age_range").at(1).get<double>();
      for (const auto& s : item.at("sexes")) {
        q.sexes.insert(sex_from_string(s.get<std::string>()));
      }
      q.health_only = item.value("health_only", false);
      q.flex = item.at("flex").get<double>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, std::string("bad query entry: ") + e.what());
    }
    q.validate();
    out.push_back(std::move(q));
  }
  return out;
}

std::string queries_to_json(const std::vector<ProfileQuery>& queries) {
  json doc;
  doc["queries"] = json::array();
  for (const auto& q : queries) {
    json sexes = json::array();
    for (Sex s : q.sexes) sexes.push_back(to_string(s));
    doc["queries"].push_back(json{{"id", q.id},
                                  {"age_range", json::array({q.age_min, q.age_max})},
                                  {"sexes", sexes},
                                  {"health_only", q.health_only},
                                  {"flex", q.flex}});
  }
  return doc.dump(2) + "\n";
}

std::vector<ProfileQuery> builtin_queries() {
  return {
      {"Young Male", 18, 35, {Sex::Male}, false, 2.0},
      {"Elderly Female", 65, 95, {Sex::Female}, false, 1.0},
      {"Mid-aged Female", 40, 55, {Sex::Female}, false, 1.5},
      {"Health Sensitive", 45, 60, {Sex::Male, Sex::Female}, true, 0.5},
  };
}

}  // namespace occureward
