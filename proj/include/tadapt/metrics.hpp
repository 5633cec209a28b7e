// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tadapt/accuracy_matrix.hpp"

namespace tadapt {

/// How the Stability Horizon treats a row that dips below delta and recovers.
enum class ShMode {
  Contiguous,  // the first defined cell below delta ends the horizon
  LiteralMax,  // largest offset whose ratio is >= delta, dips ignored
};

/// How the adaptation score is bounded.
enum class TasMode {
  RatioOfMeans,  // mean(OOD) / mean(oracle), clipped once
  MeanOfRatios,  // mean of per-offset clipped transfer ratios
};

struct MetricConfig {
  double delta = 0.6;
  double epsilon = 0.02;
  double lambda = 0.15;
  std::size_t max_horizon = 6;
  std::size_t tas_window = 6;
  ShMode sh_mode = ShMode::Contiguous;
  bool clip_ttr = true;
  TasMode tas_mode = TasMode::RatioOfMeans;

  /// Throws Error(Config) naming the first offending field.
  void validate() const;

  friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

/// Schema entry for one MetricConfig field. The CLI registers one flag per
/// entry, and the help-parity test walks this table.
struct ConfigField {
  std::string_view name;
  std::string_view flag;
  std::string_view default_value;
  std::string_view description;
};

std::span<const ConfigField> config_fields();

std::string_view to_string(ShMode mode);
std::string_view to_string(TasMode mode);
std::optional<ShMode> sh_mode_from_name(std::string_view name);
std::optional<TasMode> tas_mode_from_name(std::string_view name);

enum class TtrState : std::uint8_t {
  Defined,
  Absent,           // A(t, tau) not evaluated
  UndefinedOracle,  // A(tau, tau) absent or zero
};

/// Grid of transfer ratios A(t, tau) / A(tau, tau).
class TtrMatrix {
 public:
  TtrMatrix() = default;
  TtrMatrix(TimeAxis axis, bool clipped);

  const TimeAxis& axis() const noexcept { return axis_; }
  std::size_t size() const noexcept { return axis_.size(); }
  bool clipped() const noexcept { return clipped_; }

  TtrState state(TimeIndex t, TimeIndex tau) const { return states_[t * size() + tau]; }
  std::optional<double> at(TimeIndex t, TimeIndex tau) const {
    if (state(t, tau) != TtrState::Defined) return std::nullopt;
    return values_[t * size() + tau];
  }

  void set(TimeIndex t, TimeIndex tau, TtrState state, double value = 0.0);

  friend bool operator==(const TtrMatrix&, const TtrMatrix&) = default;

 private:
  TimeAxis axis_;
  bool clipped_ = true;
  std::vector<TtrState> states_;
  std::vector<double> values_;
};

/// A horizon in steps. `truncated` marks a value limited by the observable
/// window rather than by a threshold crossing.
struct HorizonValue {
  std::size_t steps = 0;
  bool truncated = false;

  friend bool operator==(const HorizonValue&, const HorizonValue&) = default;
};

struct HorizonResult {
  std::vector<HorizonValue> per_train_time;
  double mean = 0.0;

  /// Builds the result and its mean. Truncated values (including the DH
  /// sentinel) count toward the mean at face value.
  static HorizonResult from(std::vector<HorizonValue> values);
  bool any_truncated() const;

  friend bool operator==(const HorizonResult&, const HorizonResult&) = default;
};

struct TasValue {
  double ood_avg = 0.0;
  double id_avg = 0.0;
  double tas = 0.0;

  friend bool operator==(const TasValue&, const TasValue&) = default;
};

struct TasResult {
  std::vector<TasValue> per_train_time;
  double mean_tas = 0.0;
  double min_tas = 0.0;

  static TasResult from(std::vector<TasValue> values);

  friend bool operator==(const TasResult&, const TasResult&) = default;
};

TtrMatrix compute_ttr(const AccuracyMatrix& m, const MetricConfig& cfg);

/// Throws Error(Precondition) if g(t,t) is undefined.
HorizonValue stability_horizon(const TtrMatrix& ttr, TimeIndex t, const MetricConfig& cfg);

/// Returns S_1..S_h for every h in [1, H] that lies on the axis. An absent
/// A(t, t+h) carries S_{h-1} forward unchanged.
std::vector<double> drift_statistic(const AccuracyMatrix& m, TimeIndex t, const MetricConfig& cfg);

/// Smallest h with S_h > lambda; H+1 with truncated set when never crossed.
HorizonValue drift_horizon(const AccuracyMatrix& m, TimeIndex t, const MetricConfig& cfg);

/// Averages over the offsets k in [1, n] where both A(t, t+k) and A(t+k, t+k)
/// are present.
TasValue temporal_adaptation_score(const AccuracyMatrix& m, TimeIndex t, const MetricConfig& cfg);

struct MetricReport;

/// Runs SH, DH and TAS for every train time whose preconditions hold. Train
/// times that fail any precondition are recorded in MetricReport::skipped.
/// Throws Error(Precondition) when no train time is evaluable.
MetricReport evaluate_model(const AccuracyMatrix& m, const MetricConfig& cfg);

}  // namespace tadapt
