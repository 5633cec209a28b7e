// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tadapt {

using TimeIndex = std::size_t;

/// Ordered, duplicate-free sequence of time-period labels. Horizon offsets are
/// index arithmetic on this axis; label content is opaque.
class TimeAxis {
 public:
  TimeAxis() = default;
  explicit TimeAxis(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::string& label(TimeIndex i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<TimeIndex> index_of(std::string_view label) const;

  friend bool operator==(const TimeAxis& a, const TimeAxis& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, TimeIndex> index_;
};

/// One present cell of a matrix row, addressed by its forward offset from the
/// diagonal.
struct RowEntry {
  std::size_t offset;
  double accuracy;

  friend bool operator==(const RowEntry&, const RowEntry&) = default;
};

/// Partial grid A(train, eval) of accuracies in [0,1]. An absent cell means the
/// pair was not evaluated, which is distinct from an accuracy of 0.
///
/// Cells with eval < train are accepted and retained; horizon metrics ignore them.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  AccuracyMatrix(std::string model_name, TimeAxis axis);

  const std::string& model_name() const noexcept { return model_name_; }
  void set_model_name(std::string name) { model_name_ = std::move(name); }
  const TimeAxis& axis() const noexcept { return axis_; }
  std::size_t size() const noexcept { return axis_.size(); }

  /// Throws Error(Precondition) for an out-of-range index and Error(Parse) for
  /// a value outside [0,1] or not finite.
  void set(TimeIndex train, TimeIndex eval, double accuracy);
  void erase(TimeIndex train, TimeIndex eval);

  std::optional<double> at(TimeIndex train, TimeIndex eval) const {
    return cells_[train * axis_.size() + eval];
  }
  bool present(TimeIndex train, TimeIndex eval) const { return at(train, eval).has_value(); }
  std::size_t present_count() const noexcept { return present_count_; }

  friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;

 private:
  std::string model_name_;
  TimeAxis axis_;
  std::vector<std::optional<double>> cells_;
  std::size_t present_count_ = 0;
};

enum class MatrixFormat { Csv, Json };

/// Parses a matrix document. CSV carries no model name, so `model_name` is
/// used for CSV input and ignored for JSON. Violations throw Error(Parse) with
/// the offending line/column or cell named.
AccuracyMatrix parse_matrix(std::string_view source, MatrixFormat format,
                            std::string_view model_name = {});

/// Writes a document that parse_matrix reads back to an identical matrix.
/// Values are emitted as the shortest decimal that round-trips.
std::string serialize_matrix(const AccuracyMatrix& m, MatrixFormat format);

/// Present cells (t, t+h), h >= 0, in increasing h.
std::vector<RowEntry> eval_row(const AccuracyMatrix& m, TimeIndex t);

/// Shortest round-trippable decimal for a binary64 value.
std::string format_shortest(double value);

std::optional<MatrixFormat> format_from_name(std::string_view name);

}  // namespace tadapt
