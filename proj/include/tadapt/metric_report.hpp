// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tadapt/accuracy_matrix.hpp"
#include "tadapt/metrics.hpp"

namespace tadapt {

struct SkippedTime {
  TimeIndex t = 0;
  std::string label;
  std::string reason;

  friend bool operator==(const SkippedTime&, const SkippedTime&) = default;
};

/// Matrix-level accuracy summaries, independent of which train times were
/// evaluable.
struct AccuracySummary {
  std::optional<double> id_avg;   // mean of present diagonal cells
  std::optional<double> ood_avg;  // mean of present cells with tau > t
  std::optional<double> ood_min;  // minimum present cell with tau > t

  static AccuracySummary of(const AccuracyMatrix& m);

  friend bool operator==(const AccuracySummary&, const AccuracySummary&) = default;
};

/// Per-train-time SH/DH/TAS for one model plus aggregates. `train_times`,
/// `sh.per_train_time`, `dh.per_train_time` and `tas.per_train_time` are
/// aligned and ascending in t.
struct MetricReport {
  std::string model_name;
  std::vector<std::string> axis_labels;
  std::vector<TimeIndex> train_times;
  HorizonResult sh;
  HorizonResult dh;
  TasResult tas;
  std::vector<SkippedTime> skipped;
  AccuracySummary accuracy;
  MetricConfig config;

  /// Builds a report from per-t records, computing every aggregate.
  static MetricReport assemble(std::string model_name, std::vector<std::string> axis_labels,
                               std::vector<TimeIndex> train_times, std::vector<HorizonValue> sh,
                               std::vector<HorizonValue> dh, std::vector<TasValue> tas,
                               std::vector<SkippedTime> skipped, AccuracySummary accuracy,
                               MetricConfig config);

  /// Throws Error(Mismatch) if vectors are misaligned or any aggregate
  /// differs from its recomputation.
  void check_consistency() const;

  const std::string& label_of(TimeIndex t) const { return axis_labels.at(t); }

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

nlohmann::ordered_json config_to_json(const MetricConfig& cfg);

/// Overlays the keys present in `j` onto `cfg`. Unknown keys and wrong types
/// throw Error(Config).
MetricConfig config_from_json(const nlohmann::json& j, MetricConfig cfg = {});

nlohmann::ordered_json report_to_json(const MetricReport& r);

/// Inverse of report_to_json. Throws Error(Parse) on schema violations and
/// Error(Mismatch) if the stored aggregates do not match the records.
MetricReport report_from_json(const nlohmann::json& j);

}  // namespace tadapt
