#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "occureward/errors.hpp"

namespace occureward {

enum class Sex { Male, Female, Mixed };

std::string to_string(Sex s);
Sex sex_from_string(const std::string& s);

// A demographic group's preferred indoor temperature band plus a linear
// tolerance half-width beyond it.
struct OccupantProfile {
  std::string id;
  int age_min = 0;
  int age_max = 0;
  Sex sex = Sex::Mixed;
  int sample_size = 1;
  double t_min = 0.0;  // degC
  double t_max = 0.0;  // degC
  double flex = 1.0;   // degC, tolerance beyond [t_min, t_max]

  void validate() const;
};

using ProfileSet = std::vector<OccupantProfile>;

// The four built-in demographic profiles, in canonical order:
// Young Male, Elderly Female, Mid-aged Female, Health Sensitive.
const ProfileSet& builtin_profiles();

// Per-profile comfort score aligned with a profile ordering.
struct SatisfactionVector {
  std::vector<std::string> ids;
  Eigen::ArrayXd scores;

  SatisfactionVector() = default;
  SatisfactionVector(std::vector<std::string> profile_ids, Eigen::ArrayXd profile_scores);

  Eigen::Index size() const { return scores.size(); }
};

struct EquityReport {
  double cei = 0.0;
  double jain = 1.0;
  std::string worst_profile;
  SatisfactionVector satisfactions;
  Eigen::Index n = 0;
};

// Piecewise-linear comfort score: 1 inside [t_min, t_max], decaying to 0 at
// distance flex beyond either edge.
double satisfaction(const OccupantProfile& profile, double temp_c);

// Jain's fairness index (sum x)^2 / (n * sum x^2) over non-negative scores.
// An all-zero vector is uniform and maps to 1 by convention.
template <typename Derived>
double jain_index(const Eigen::ArrayBase<Derived>& scores) {
  if (scores.size() == 0) {
    throw Error(ErrorCode::InvalidInput, "jain_index requires at least one score");
  }
  if (!scores.isFinite().all() || (scores < 0.0).any()) {
    throw Error(ErrorCode::InvalidInput, "jain_index scores must be finite and non-negative");
  }
  const double sum = scores.sum();
  const double sum_sq = scores.square().sum();
  if (sum_sq == 0.0) {
    return 1.0;
  }
  return (sum * sum) / (static_cast<double>(scores.size()) * sum_sq);
}

double jain_index(const std::vector<double>& scores);

// Comfort Equity Index: 1 - Jain over the satisfaction scores, with the worst
// profile resolved by minimal score (ties to the lowest index).
EquityReport cei(const SatisfactionVector& satisfactions);

// Mean of satisfaction(profile, T_t) over a temperature trace, per profile.
SatisfactionVector episode_satisfaction(const ProfileSet& profiles,
                                        const Eigen::Ref<const Eigen::ArrayXd>& temps);

// District variant: trace rows are timesteps, columns buildings; the score
// averages over every (timestep, building) cell.
SatisfactionVector district_episode_satisfaction(
    const ProfileSet& profiles, const Eigen::Ref<const Eigen::ArrayXXd>& temps);

// Instantaneous satisfactions for one timestep across buildings.
SatisfactionVector instant_satisfaction(const ProfileSet& profiles,
                                        const Eigen::Ref<const Eigen::ArrayXd>& indoor_temps);

// Profiles document I/O (JSON, {"profiles": [...]}).
std::string profiles_to_json(const ProfileSet& profiles);
ProfileSet profiles_from_json(const std::string& text);
ProfileSet load_profiles(std::istream& in);
void save_profiles(const ProfileSet& profiles, std::ostream& out);

}  // namespace occureward
