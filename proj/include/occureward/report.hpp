#pragma once

#include <optional>
#include <string>
#include <vector>

#include "occureward/refinement.hpp"

namespace occureward {

struct ResultsRow {
  int round = 0;
  std::string description;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  double cei_mean = 0.0;
  double cei_std = 0.0;
  std::string worst_profile;
};

struct SatisfactionRow {
  std::string profile;
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double change = 0.0;
  std::string change_label;  // e.g. "+0.68 (+567%)"
};

struct CostPoint {
  int round = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct WeightPoint {
  int round = 0;
  double cost_w = 0.0;
  double carbon_w = 0.0;
  double solar_w = 0.0;
  double soc_w = 0.0;
  double equity_w = 0.0;
};

struct ReportBundle {
  std::vector<ResultsRow> results_table;
  std::vector<SatisfactionRow> satisfaction_table;
  std::vector<CostPoint> cost_series;
  std::vector<WeightPoint> weight_series;
};

// Display form of an R1 -> R3 change: absolute to two decimals, relative to
// the nearest integer percent, "n/a" when the base is not positive.
std::string format_change(double r1, double r3);

ReportBundle build_report(const ExperimentResult& result);

// Reads a persisted experiment directory; throws listing any missing files.
ReportBundle load_report_from_dir(const std::string& experiment_dir);

// Emits results_table, satisfaction_table, cost_series and weight_series as
// <name>.json or <name>.csv under out_dir. Never touches the record itself.
void emit_report(const ReportBundle& bundle, const std::string& out_dir,
                 const std::string& format);

std::string results_table_csv(const ReportBundle& bundle);
std::string satisfaction_table_csv(const ReportBundle& bundle);
std::string cost_series_csv(const ReportBundle& bundle);
std::string weight_series_csv(const ReportBundle& bundle);

std::string results_table_json(const ReportBundle& bundle);
std::string satisfaction_table_json(const ReportBundle& bundle);
std::string cost_series_json(const ReportBundle& bundle);
std::string weight_series_json(const ReportBundle& bundle);

// Minimal CSV reader for the emitted tables (header + string cells).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);

}  // namespace occureward
