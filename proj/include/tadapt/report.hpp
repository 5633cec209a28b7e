// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tadapt/accuracy_matrix.hpp"
#include "tadapt/metric_report.hpp"
#include "tadapt/metrics.hpp"

namespace tadapt {

enum class Column { Id, Ood, OodMin, TasAvg, TasMin, ShAvg, DhAvg };

std::string_view column_name(Column c);
std::optional<Column> column_from_name(std::string_view name);

/// ID, OOD, TAS-avg, SH-avg, DH-avg.
std::vector<Column> default_columns();
std::vector<Column> all_columns();

struct TableCell {
  std::optional<double> value;
  std::string text;
  bool includes_truncated = false;
};

/// One row per model, in input order. Percentages and horizons carry one
/// decimal; horizon means that include truncated values are starred.
struct ComparisonTable {
  std::vector<Column> columns;
  std::vector<std::string> models;
  std::vector<std::vector<TableCell>> rows;
  MetricConfig config;
  std::string unit;

  bool any_truncated() const;
  std::string to_text() const;
  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
};

/// Throws Error(Config) for an empty report set or reports computed under
/// different configurations.
ComparisonTable comparison_table(std::span<const MetricReport> reports, std::span<const Column> columns,
                                 std::string unit = "steps");

/// Percent with one decimal, e.g. 0.759 -> "75.9%".
std::string format_percent(double fraction);
/// Horizon with one decimal and unit, e.g. 5.1 -> "5.1 steps".
std::string format_horizon(double steps, std::string_view unit);

/// Machine-readable grid for an external diverging-colormap plotter. Each cell
/// carries a tag: "above-center", "at-center", "below-center" ("value" when no
/// center is set), "non-evaluated", or "undefined-oracle".
struct Heatmap {
  std::string kind;  // "accuracy" or "ttr"
  std::string model_name;
  std::vector<std::string> labels;
  std::optional<double> center;
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<std::vector<std::string>> tags;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

Heatmap heatmap_data(const AccuracyMatrix& m, std::optional<double> center = std::nullopt);
Heatmap heatmap_data(const TtrMatrix& ttr, std::optional<double> center = std::nullopt);

struct TimelinePoint {
  TimeIndex t = 0;
  std::string label;
  double id = 0.0;   // A(t,t)
  double ood = 0.0;  // forward OOD average used by TAS
  double tas = 0.0;
};

struct Timeline {
  std::string model_name;
  std::vector<TimelinePoint> points;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Throws Error(Mismatch) if the report was not derived from `m`.
Timeline timeline_series(const MetricReport& report, const AccuracyMatrix& m);

/// Mean over the timeline of id - ood.
double mean_id_ood_gap(const Timeline& timeline);

std::string report_to_text(const MetricReport& r, std::string_view unit = "steps");
std::string report_to_csv(const MetricReport& r);

}  // namespace tadapt
