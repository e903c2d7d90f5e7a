#include "occureward/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace occureward {

using json = nlohmann::json;

namespace {

// Serialize a double exactly as the JSON emitter would, so CSV and JSON
// carry identical values.
std::string num(double v) { return json(v).dump(); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot read " + path.string());
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string format_change(double r1, double r3) {
  char abs_buf[32];
  std::snprintf(abs_buf, sizeof(abs_buf), "%+.2f", r3 - r1);
  std::string label = abs_buf;
  if (r1 > 0.0) {
    const long pct = std::lround((r3 - r1) / r1 * 100.0);
    char pct_buf[32];
    std::snprintf(pct_buf, sizeof(pct_buf), "%+ld%%", pct);
    label += " (" + std::string(pct_buf) + ")";
  } else {
    label += " (n/a)";
  }
  return label;
}

ReportBundle build_report(const ExperimentResult& result) {
  if (result.rounds.size() != 3) {
    throw Error(ErrorCode::InvalidInput,
                "report requires exactly 3 rounds, found " +
                    std::to_string(result.rounds.size()));
  }
  ReportBundle b;
  for (const auto& r : result.rounds) {
    b.results_table.push_back({r.round, r.description, r.composite.mean, r.composite.std,
                               r.cei_stat.mean, r.cei_stat.std, r.worst_profile});
    b.cost_series.push_back({r.round, r.composite.mean, r.composite.std});
    b.weight_series.push_back({r.round, r.weights.cost_w, r.weights.carbon_w,
                               r.weights.solar_w, r.weights.soc_w, r.weights.equity_w});
  }
  for (const auto& c : result.satisfaction_change) {
    b.satisfaction_table.push_back(
        {c.id, c.r1, c.r2, c.r3, c.change, format_change(c.r1, c.r3)});
  }
  return b;
}

ReportBundle load_report_from_dir(const std::string& experiment_dir) {
  const std::filesystem::path dir(experiment_dir);
  std::vector<std::string> missing;
  for (const char* name : {"round1.json", "round2.json", "round3.json", "experiment.json"}) {
    if (!std::filesystem::exists(dir / name)) {
      missing.push_back(name);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (size_t i = 0; i < missing.size(); ++i) {
      if (i > 0) list += ", ";
      list += missing[i];
    }
    throw Error(ErrorCode::InvalidInput,
                "incomplete experiment record in '" + experiment_dir + "': missing " + list);
  }
  const ExperimentResult result =
      experiment_result_from_json(read_file(dir / "experiment.json"));
  return build_report(result);
}

std::string results_table_csv(const ReportBundle& b) {
  std::ostringstream os;
  os << "round,description,cost_mean,cost_std,cei_mean,cei_std,worst_profile\n";
  for (const auto& r : b.results_table) {
    os << r.round << ',' << r.description << ',' << num(r.cost_mean) << ','
       << num(r.cost_std) << ',' << num(r.cei_mean) << ',' << num(r.cei_std) << ','
       << r.worst_profile << '\n';
  }
  return os.str();
}

std::string satisfaction_table_csv(const ReportBundle& b) {
  std::ostringstream os;
  os << "profile,r1,r2,r3,change,change_label\n";
  for (const auto& r : b.satisfaction_table) {
    os << r.profile << ',' << num(r.r1) << ',' << num(r.r2) << ',' << num(r.r3) << ','
       << num(r.change) << ',' << r.change_label << '\n';
  }
  return os.str();
}

std::string cost_series_csv(const ReportBundle& b) {
  std::ostringstream os;
  os << "round,mean,std\n";
  for (const auto& p : b.cost_series) {
    os << p.round << ',' << num(p.mean) << ',' << num(p.std) << '\n';
  }
  return os.str();
}

std::string weight_series_csv(const ReportBundle& b) {
  std::ostringstream os;
  os << "round,cost,carbon,solar,soc,equity\n";
  for (const auto& p : b.weight_series) {
    os << p.round << ',' << num(p.cost_w) << ',' << num(p.carbon_w) << ','
       << num(p.solar_w) << ',' << num(p.soc_w) << ',' << num(p.equity_w) << '\n';
  }
  return os.str();
}

std::string results_table_json(const ReportBundle& b) {
  json arr = json::array();
  for (const auto& r : b.results_table) {
    arr.push_back(json{{"round", r.round},
                       {"description", r.description},
                       {"cost_mean", r.cost_mean},
                       {"cost_std", r.cost_std},
                       {"cei_mean", r.cei_mean},
                       {"cei_std", r.cei_std},
                       {"worst_profile", r.worst_profile}});
  }
  return arr.dump(2) + "\n";
}

std::string satisfaction_table_json(const ReportBundle& b) {
  json arr = json::array();
  for (const auto& r : b.satisfaction_table) {
    arr.push_back(json{{"profile", r.profile},
                       {"r1", r.r1},
                       {"r2", r.r2},
                       {"r3", r.r3},
                       {"change", r.change},
                       {"change_label", r.change_label}});
  }
  return arr.dump(2) + "\n";
}

std::string cost_series_json(const ReportBundle& b) {
  json arr = json::array();
  for (const auto& p : b.cost_series) {
    arr.push_back(json{{"round", p.round}, {"mean", p.mean}, {"std", p.std}});
  }
  return arr.dump(2) + "\n";
}

std::string weight_series_json(const ReportBundle& b) {
  json arr = json::array();
  for (const auto& p : b.weight_series) {
    arr.push_back(json{{"round", p.round},
                       {"cost", p.cost_w},
                       {"carbon", p.carbon_w},
                       {"solar", p.solar_w},
                       {"soc", p.soc_w},
                       {"equity", p.equity_w}});
  }
  return arr.dump(2) + "\n";
}

void emit_report(const ReportBundle& bundle, const std::string& out_dir,
                 const std::string& format) {
  if (format != "json" && format != "csv") {
    throw Error(ErrorCode::Config, "report format must be json or csv, got '" + format + "'");
  }
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  auto write = [&dir](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
    }
    out << content;
  };
  if (format == "csv") {
    write("results_table.csv", results_table_csv(bundle));
    write("satisfaction_table.csv", satisfaction_table_csv(bundle));
    write("cost_series.csv", cost_series_csv(bundle));
    write("weight_series.csv", weight_series_csv(bundle));
  } else {
    write("results_table.json", results_table_json(bundle));
    write("satisfaction_table.json", satisfaction_table_json(bundle));
    write("cost_series.json", cost_series_json(bundle));
    write("weight_series.json", weight_series_json(bundle));
  }
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) {
    throw Error(ErrorCode::Format, "CSV table has no header row");
  }
  return table;
}

}  // namespace occureward
