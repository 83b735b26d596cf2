#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "helm/ppo.hpp"
#include "helm/trajectory.hpp"

namespace helm {

/// CSV with the kTrajectoryColumns header; doubles in shortest round-trip form.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// Throws InvalidParameter naming the offending line or column.
Trajectory read_trajectory_csv(std::istream& in);

void write_metrics_json(std::ostream& out, const RunMetrics& metrics);
RunMetrics read_metrics_json(std::istream& in);

void write_report_json(std::ostream& out, const ComparisonReport& report);
ComparisonReport read_report_json(std::istream& in);

std::string train_log_header();
std::string train_log_line(const TrainLogRow& row);
void write_train_log_csv(std::ostream& out, const std::vector<TrainLogRow>& rows);
std::vector<TrainLogRow> read_train_log_csv(std::istream& in);

struct ManifestEntry {
  std::string scenario;
  std::string controller;
  std::string trajectory_csv;
  std::string metrics_json;
  std::string status;
};

void write_manifest_json(std::ostream& out, const std::vector<ManifestEntry>& entries);

}  // namespace helm
