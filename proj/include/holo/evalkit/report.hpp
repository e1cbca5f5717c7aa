#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace holo {

/// Per-task, per-modality scores laid out like the results tables: one row per
/// task, one column per modality, plus an "Avg" column that is the plain mean
/// of the row.
struct MetricReport {
  std::string setting;
  std::string config_hash;
  std::vector<std::string> modalities;  // column order
  std::vector<std::string> tasks;       // row order
  std::map<std::string, std::map<std::string, double>> scores;       // task -> modality -> score
  std::map<std::string, std::map<std::string, std::size_t>> counts;  // task -> modality -> samples
  std::map<std::string, double> diagnostics;                         // free-form extras

  void set(const std::string& task, const std::string& modality, double score, std::size_t count);
  double at(const std::string& task, const std::string& modality) const;
  /// Mean over the modality columns of `task`. Throws MetricError if the row is empty.
  double average(const std::string& task) const;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
  std::string to_csv() const;
  /// Writes <stem>.json and <stem>.csv under `dir`.
  void write(const std::filesystem::path& dir, const std::string& stem = "metrics") const;
};

/// Fixed-precision rendering used by every textual report.
std::string format_score(double v);

}  // namespace holo
