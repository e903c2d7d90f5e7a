#include "occureward/comfort.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>
#include <utility>

namespace occureward {

using json = nlohmann::json;

std::string to_string(Sex s) {
  switch (s) {
    case Sex::Male: return "M";
    case Sex::Female: return "F";
    case Sex::Mixed: return "Mixed";
  }
  return "Mixed";
}

Sex sex_from_string(const std::string& s) {
  if (s == "M" || s == "m") return Sex::Male;
  if (s == "F" || s == "f") return Sex::Female;
  if (s == "Mixed" || s == "mixed" || s == "M/F") return Sex::Mixed;
  throw Error(ErrorCode::Format, "unknown sex value '" + s + "'");
}

void OccupantProfile::validate() const {
  if (id.empty()) {
    throw Error(ErrorCode::InvalidInput, "profile id must be non-empty");
  }
  if (!(t_min < t_max)) {
    throw Error(ErrorCode::DegenerateRange,
                "profile '" + id + "' requires t_min < t_max");
  }
  if (!(flex > 0.0) || !std::isfinite(flex)) {
    throw Error(ErrorCode::InvalidInput, "profile '" + id + "' requires flex > 0");
  }
  if (sample_size < 1) {
    throw Error(ErrorCode::InvalidInput, "profile '" + id + "' requires sample_size >= 1");
  }
  if (!std::isfinite(t_min) || !std::isfinite(t_max)) {
    throw Error(ErrorCode::InvalidInput, "profile '" + id + "' temperature range must be finite");
  }
}

const ProfileSet& builtin_profiles() {
  static const ProfileSet profiles = {
      {"Young Male", 18, 35, Sex::Male, 4503, 23.6, 27.7, 2.0},
      {"Elderly Female", 65, 95, Sex::Female, 298, 21.3, 23.8, 1.0},
      {"Mid-aged Female", 40, 55, Sex::Female, 1504, 21.9, 26.2, 1.5},
      {"Health Sensitive", 45, 60, Sex::Mixed, 3798, 22.1, 27.9, 0.5},
  };
  return profiles;
}

SatisfactionVector::SatisfactionVector(std::vector<std::string> profile_ids,
                                       Eigen::ArrayXd profile_scores)
    : ids(std::move(profile_ids)), scores(std::move(profile_scores)) {
  if (static_cast<Eigen::Index>(ids.size()) != scores.size()) {
    throw Error(ErrorCode::InvalidInput, "satisfaction ids and scores must align");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate profile id '" + id + "'");
    }
  }
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw Error(ErrorCode::InvalidInput,
                  "satisfaction score out of [0,1] for '" + ids[static_cast<size_t>(i)] + "'");
    }
  }
}

double satisfaction(const OccupantProfile& profile, double temp_c) {
  if (!std::isfinite(temp_c)) {
    throw Error(ErrorCode::InvalidInput, "satisfaction temperature must be finite");
  }
  profile.validate();
  if (temp_c >= profile.t_min && temp_c <= profile.t_max) {
    return 1.0;
  }
  const double delta =
      temp_c < profile.t_min ? profile.t_min - temp_c : temp_c - profile.t_max;
  return std::max(0.0, 1.0 - delta / profile.flex);
}

double jain_index(const std::vector<double>& scores) {
  Eigen::Map<const Eigen::ArrayXd> view(scores.data(),
                                        static_cast<Eigen::Index>(scores.size()));
  return jain_index(view);
}

EquityReport cei(const SatisfactionVector& satisfactions) {
  EquityReport report;
  report.jain = jain_index(satisfactions.scores);
  report.cei = 1.0 - report.jain;
  report.satisfactions = satisfactions;
  report.n = satisfactions.size();
  Eigen::Index worst = 0;
  for (Eigen::Index i = 1; i < satisfactions.scores.size(); ++i) {
    if (satisfactions.scores[i] < satisfactions.scores[worst]) {
      worst = i;
    }
  }
  report.worst_profile = satisfactions.ids[static_cast<size_t>(worst)];
  return report;
}

SatisfactionVector episode_satisfaction(const ProfileSet& profiles,
                                        const Eigen::Ref<const Eigen::ArrayXd>& temps) {
  if (temps.size() == 0) {
    throw Error(ErrorCode::InvalidInput, "episode_satisfaction requires a non-empty trace");
  }
  std::vector<std::string> ids;
  Eigen::ArrayXd scores(static_cast<Eigen::Index>(profiles.size()));
  for (size_t p = 0; p < profiles.size(); ++p) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < temps.size(); ++t) {
      acc += satisfaction(profiles[p], temps[t]);
    }
    scores[static_cast<Eigen::Index>(p)] = acc / static_cast<double>(temps.size());
    ids.push_back(profiles[p].id);
  }
  return SatisfactionVector(std::move(ids), std::move(scores));
}

SatisfactionVector district_episode_satisfaction(
    const ProfileSet& profiles, const Eigen::Ref<const Eigen::ArrayXXd>& temps) {
  if (temps.size() == 0) {
    throw Error(ErrorCode::InvalidInput, "episode_satisfaction requires a non-empty trace");
  }
  Eigen::Map<const Eigen::ArrayXd> flat(temps.data(), temps.size());
  return episode_satisfaction(profiles, flat);
}

SatisfactionVector instant_satisfaction(const ProfileSet& profiles,
                                        const Eigen::Ref<const Eigen::ArrayXd>& indoor_temps) {
  // Same aggregation as an episode trace: the mean over building temperatures.
  return episode_satisfaction(profiles, indoor_temps);
}

namespace {

json profile_to_json(const OccupantProfile& p) {
  return json{{"id", p.id},
              {"age_range", json::array({p.age_min, p.age_max})},
              {"sex", to_string(p.sex)},
              {"sample_size", p.sample_size},
              {"t_min", p.t_min},
              {"t_max", p.t_max},
              {"flex", p.flex}};
}

OccupantProfile profile_from_json(const json& j) {
  OccupantProfile p;
  try {
    p.id = j.at("id").get<std::string>();
    p.age_min = j.at("age_range").at(0).get<int>();
    p.age_max = j.at("age_range").at(1).get<int>();
    p.sex = sex_from_string(j.at("sex").get<std::string>());
    p.sample_size = j.at("sample_size").get<int>();
    p.t_min = j.at("t_min").get<double>();
    p.t_max = j.at("t_max").get<double>();
    p.flex = j.at("flex").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad profile document: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace

std::string profiles_to_json(const ProfileSet& profiles) {
  json doc;
  doc["profiles"] = json::array();
  for (const auto& p : profiles) {
    doc["profiles"].push_back(profile_to_json(p));
  }
  return doc.dump(2) + "\n";
}

ProfileSet profiles_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad profiles JSON: ") + e.what());
  }
  if (!doc.contains("profiles") || !doc["profiles"].is_array()) {
    throw Error(ErrorCode::Format, "profiles document must contain a 'profiles' array");
  }
  ProfileSet out;
  for (const auto& item : doc["profiles"]) {
    out.push_back(profile_from_json(item));
  }
  return out;
}

ProfileSet load_profiles(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return profiles_from_json(text);
}

void save_profiles(const ProfileSet& profiles, std::ostream& out) {
  out << profiles_to_json(profiles);
}

}  // namespace occureward
