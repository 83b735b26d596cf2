#include "helm/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "helm/errors.hpp"
#include "helm/format.hpp"

namespace helm {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::success: return "success";
    case RunStatus::step_cap: return "step_cap";
    case RunStatus::blowup: return "blowup";
  }
  return "unknown";
}

namespace {

RunStatus run_status_from(std::string_view s) {
  if (s == "success") return RunStatus::success;
  if (s == "step_cap") return RunStatus::step_cap;
  if (s == "blowup") return RunStatus::blowup;
  throw InvalidParameter("unknown run status '" + std::string(s) + "'");
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(',', pos);
    out.push_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no, std::string_view column) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InvalidParameter("line " + std::to_string(line_no) + ": column " + std::string(column) +
                           " is not a number: '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s, std::size_t line_no, std::string_view column) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InvalidParameter("line " + std::to_string(line_no) + ": column " + std::string(column) +
                           " is not an integer: '" + std::string(s) + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename Columns>
void expect_header(std::istream& in, const Columns& columns) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidParameter("CSV is empty: missing header");
  strip_cr(line);
  const auto cols = split(line);
  if (cols.size() != columns.size()) {
    throw InvalidParameter("CSV header has " + std::to_string(cols.size()) + " columns, expected " +
                           std::to_string(columns.size()));
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] != columns[i]) {
      throw InvalidParameter("CSV header column " + std::to_string(i) + " is '" + std::string(cols[i]) +
                             "', expected '" + std::string(columns[i]) + "'");
    }
  }
}

double json_double(const ordered_json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

ordered_json metrics_to_json(const RunMetrics& m) {
  ordered_json j;
  j["scenario"] = m.scenario;
  j["controller"] = m.controller;
  j["status"] = std::string(to_string(m.status));
  j["success"] = m.success;
  j["partial"] = m.partial;
  j["steps"] = m.steps;
  j["dt_s"] = m.dt_s;
  j["rms_cross_track_L"] = m.rms_cross_track_L;
  j["rms_cross_track_post_L"] = m.rms_cross_track_post_L;
  j["rudder_effort_radps"] = m.rudder_effort_radps;
  j["rms_rudder_rad"] = m.rms_rudder_rad;
  j["waypoints"] = m.waypoints;
  j["capture_times_s"] = m.capture_times_s;
  j["error"] = m.error;
  return j;
}

RunMetrics metrics_from_json(const ordered_json& j) {
  RunMetrics m;
  m.scenario = j.at("scenario").get<std::string>();
  m.controller = j.at("controller").get<std::string>();
  m.status = run_status_from(j.at("status").get<std::string>());
  m.success = j.at("success").get<bool>();
  m.partial = j.at("partial").get<bool>();
  m.steps = j.at("steps").get<int>();
  m.dt_s = json_double(j.at("dt_s"));
  m.rms_cross_track_L = json_double(j.at("rms_cross_track_L"));
  m.rms_cross_track_post_L = json_double(j.at("rms_cross_track_post_L"));
  m.rudder_effort_radps = json_double(j.at("rudder_effort_radps"));
  m.rms_rudder_rad = json_double(j.at("rms_rudder_rad"));
  m.waypoints = j.at("waypoints").get<int>();
  m.capture_times_s = j.at("capture_times_s").get<std::vector<double>>();
  m.error = j.at("error").get<std::string>();
  return m;
}

ordered_json parse_json(std::istream& in, const char* what) {
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string(what) + " is not valid JSON: " + e.what());
  }
}

constexpr std::array<std::string_view, 13> kTrainLogColumns{
    "iteration", "mean_return", "mean_return_no_bonus", "success_rate", "mean_episode_length",
    "actor_loss", "critic_loss", "entropy", "log_std", "approx_kl", "clip_fraction", "lr", "status"};

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) {
    out << (i ? "," : "") << kTrajectoryColumns[i];
  }
  out << '\n';
  for (const auto& r : traj) {
    const double vals[] = {r.t_s, r.x_m, r.y_m, r.psi_rad, r.u_mps, r.v_mps, r.r_radps, r.delta_rad,
                           r.delta_c_rad, r.d_c_L, r.chi_e_rad, r.d_wp_L};
    for (std::size_t i = 0; i < std::size(vals); ++i) out << (i ? "," : "") << format_double(vals[i]);
    out << ',' << r.active_wp << ',' << format_double(r.r1) << ',' << format_double(r.r2) << ','
        << format_double(r.r3) << ',' << format_double(r.reward_total) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  expect_header(in, kTrajectoryColumns);
  Trajectory traj;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kTrajectoryColumns.size()) {
      throw InvalidParameter("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(kTrajectoryColumns.size()) + " fields, got " +
                             std::to_string(f.size()));
    }
    auto d = [&](std::size_t i) { return parse_double(f[i], line_no, kTrajectoryColumns[i]); };
    TrajectoryRow r;
    r.t_s = d(0);
    r.x_m = d(1);
    r.y_m = d(2);
    r.psi_rad = d(3);
    r.u_mps = d(4);
    r.v_mps = d(5);
    r.r_radps = d(6);
    r.delta_rad = d(7);
    r.delta_c_rad = d(8);
    r.d_c_L = d(9);
    r.chi_e_rad = d(10);
    r.d_wp_L = d(11);
    r.active_wp = parse_int(f[12], line_no, kTrajectoryColumns[12]);
    r.r1 = d(13);
    r.r2 = d(14);
    r.r3 = d(15);
    r.reward_total = d(16);
    traj.push_back(r);
  }
  return traj;
}

void write_metrics_json(std::ostream& out, const RunMetrics& metrics) {
  out << metrics_to_json(metrics).dump(2) << '\n';
}

RunMetrics read_metrics_json(std::istream& in) {
  const auto j = parse_json(in, "metrics");
  try {
    return metrics_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("metrics JSON schema error: ") + e.what());
  }
}

void write_report_json(std::ostream& out, const ComparisonReport& report) {
  ordered_json j;
  j["scenario"] = report.scenario;
  j["valid"] = report.valid;
  j["controller_a"] = report.a.controller;
  j["controller_b"] = report.b.controller;
  j["rms_cross_track_a_L"] = report.a.rms_cross_track_L;
  j["rms_cross_track_b_L"] = report.b.rms_cross_track_L;
  j["rms_reduction_pct"] = report.rms_reduction_pct;
  j["rms_post_reduction_pct"] = report.rms_post_reduction_pct;
  j["rudder_effort_a_radps"] = report.a.rudder_effort_radps;
  j["rudder_effort_b_radps"] = report.b.rudder_effort_radps;
  j["effort_ratio"] = report.effort_ratio;
  j["metrics_a"] = metrics_to_json(report.a);
  j["metrics_b"] = metrics_to_json(report.b);
  out << j.dump(2) << '\n';
}

ComparisonReport read_report_json(std::istream& in) {
  const auto j = parse_json(in, "report");
  try {
    ComparisonReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.valid = j.at("valid").get<bool>();
    r.rms_reduction_pct = json_double(j.at("rms_reduction_pct"));
    r.rms_post_reduction_pct = json_double(j.at("rms_post_reduction_pct"));
    r.effort_ratio = json_double(j.at("effort_ratio"));
    r.a = metrics_from_json(j.at("metrics_a"));
    r.b = metrics_from_json(j.at("metrics_b"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("report JSON schema error: ") + e.what());
  }
}

std::string train_log_header() {
  std::string s;
  for (std::size_t i = 0; i < kTrainLogColumns.size(); ++i) {
    if (i) s += ',';
    s += kTrainLogColumns[i];
  }
  return s;
}

std::string train_log_line(const TrainLogRow& r) {
  std::string s = std::to_string(r.iteration);
  for (double v : {r.mean_return, r.mean_return_no_bonus, r.success_rate, r.mean_episode_length,
                   r.actor_loss, r.critic_loss, r.entropy, r.log_std, r.approx_kl, r.clip_fraction, r.lr}) {
    s += ',';
    s += std::isnan(v) ? std::string("nan") : format_double(v);
  }
  s += ',';
  s += r.status;
  return s;
}

void write_train_log_csv(std::ostream& out, const std::vector<TrainLogRow>& rows) {
  out << train_log_header() << '\n';
  for (const auto& r : rows) out << train_log_line(r) << '\n';
}

std::vector<TrainLogRow> read_train_log_csv(std::istream& in) {
  expect_header(in, kTrainLogColumns);
  std::vector<TrainLogRow> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kTrainLogColumns.size()) {
      throw InvalidParameter("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(kTrainLogColumns.size()) + " fields");
    }
    auto d = [&](std::size_t i) { return parse_double(f[i], line_no, kTrainLogColumns[i]); };
    TrainLogRow r;
    r.iteration = parse_int(f[0], line_no, kTrainLogColumns[0]);
    r.mean_return = d(1);
    r.mean_return_no_bonus = d(2);
    r.success_rate = d(3);
    r.mean_episode_length = d(4);
    r.actor_loss = d(5);
    r.critic_loss = d(6);
    r.entropy = d(7);
    r.log_std = d(8);
    r.approx_kl = d(9);
    r.clip_fraction = d(10);
    r.lr = d(11);
    r.status = std::string(f[12]);
    rows.push_back(r);
  }
  return rows;
}

void write_manifest_json(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  ordered_json runs = ordered_json::array();
  for (const auto& e : entries) {
    ordered_json j;
    j["scenario"] = e.scenario;
    j["controller"] = e.controller;
    j["trajectory_csv"] = e.trajectory_csv;
    j["metrics_json"] = e.metrics_json;
    j["status"] = e.status;
    runs.push_back(j);
  }
  ordered_json doc;
  doc["runs"] = runs;
  out << doc.dump(2) << '\n';
}

}  // namespace helm
