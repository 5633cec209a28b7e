// SPDX-License-Identifier: Apache-2.0

#include "tadapt/report.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "tadapt/error.hpp"

namespace tadapt {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<std::pair<Column, std::string_view>, 7> kColumns{{
    {Column::Id, "ID"},
    {Column::Ood, "OOD"},
    {Column::OodMin, "OOD-min"},
    {Column::TasAvg, "TAS-avg"},
    {Column::TasMin, "TAS-min"},
    {Column::ShAvg, "SH-avg"},
    {Column::DhAvg, "DH-avg"},
}};

constexpr std::string_view kTruncationNote =
    "* mean includes truncated horizons (SH limited by the observable window, DH sentinel H+1)";

bool is_horizon(Column c) { return c == Column::ShAvg || c == Column::DhAvg; }

TableCell make_cell(const MetricReport& r, Column c, std::string_view unit) {
  TableCell cell;
  switch (c) {
    case Column::Id: cell.value = r.accuracy.id_avg; break;
    case Column::Ood: cell.value = r.accuracy.ood_avg; break;
    case Column::OodMin: cell.value = r.accuracy.ood_min; break;
    case Column::TasAvg: cell.value = r.tas.mean_tas; break;
    case Column::TasMin: cell.value = r.tas.min_tas; break;
    case Column::ShAvg:
      cell.value = r.sh.mean;
      cell.includes_truncated = r.sh.any_truncated();
      break;
    case Column::DhAvg:
      cell.value = r.dh.mean;
      cell.includes_truncated = r.dh.any_truncated();
      break;
  }
  if (!cell.value) {
    cell.text = "n/a";
  } else if (is_horizon(c)) {
    cell.text = format_horizon(*cell.value, unit);
    if (cell.includes_truncated) cell.text += "*";
  } else {
    cell.text = format_percent(*cell.value);
  }
  return cell;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string tag_for(std::optional<double> center, double v) {
  if (!center) return "value";
  if (v == *center) return "at-center";
  return v > *center ? "above-center" : "below-center";
}

}  // namespace

std::string_view column_name(Column c) {
  for (const auto& [col, name] : kColumns) {
    if (col == c) return name;
  }
  return "?";
}

std::optional<Column> column_from_name(std::string_view name) {
  for (const auto& [col, n] : kColumns) {
    if (n == name) return col;
  }
  return std::nullopt;
}

std::vector<Column> default_columns() {
  return {Column::Id, Column::Ood, Column::TasAvg, Column::ShAvg, Column::DhAvg};
}

std::vector<Column> all_columns() {
  std::vector<Column> cols;
  for (const auto& [col, name] : kColumns) cols.push_back(col);
  return cols;
}

std::string format_percent(double fraction) { return fmt::format("{:.1f}%", fraction * 100.0); }

std::string format_horizon(double steps, std::string_view unit) { return fmt::format("{:.1f} {}", steps, unit); }

ComparisonTable comparison_table(std::span<const MetricReport> reports, std::span<const Column> columns,
                                 std::string unit) {
  if (reports.empty()) throw Error(ErrorKind::Config, "comparison table: empty report set");
  const auto& cfg = reports.front().config;
  for (const auto& r : reports) {
    if (!(r.config == cfg)) {
      throw Error(ErrorKind::Config,
                  fmt::format("comparison table: mixed configs ('{}' differs from '{}')", r.model_name,
                              reports.front().model_name));
    }
  }
  ComparisonTable table;
  table.columns.assign(columns.begin(), columns.end());
  table.config = cfg;
  table.unit = std::move(unit);
  for (const auto& r : reports) {
    table.models.push_back(r.model_name);
    std::vector<TableCell> row;
    for (auto c : columns) row.push_back(make_cell(r, c, table.unit));
    table.rows.push_back(std::move(row));
  }
  return table;
}

bool ComparisonTable::any_truncated() const {
  for (const auto& row : rows) {
    for (const auto& cell : row) {
      if (cell.includes_truncated) return true;
    }
  }
  return false;
}

std::string ComparisonTable::to_text() const {
  std::vector<std::size_t> widths;
  std::size_t model_width = std::string_view("Model").size();
  for (const auto& m : models) model_width = std::max(model_width, m.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::size_t w = column_name(columns[c]).size();
    for (const auto& row : rows) w = std::max(w, row[c].text.size());
    widths.push_back(w);
  }
  std::string out = fmt::format("{:<{}}", "Model", model_width);
  for (std::size_t c = 0; c < columns.size(); ++c) out += fmt::format(" | {:>{}}", column_name(columns[c]), widths[c]);
  out += "\n";
  out += std::string(model_width, '-');
  for (auto w : widths) out += "-+-" + std::string(w, '-');
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += fmt::format("{:<{}}", models[r], model_width);
    for (std::size_t c = 0; c < columns.size(); ++c) out += fmt::format(" | {:>{}}", rows[r][c].text, widths[c]);
    out += "\n";
  }
  if (any_truncated()) {
    out += "\n";
    out += kTruncationNote;
    out += "\n";
  }
  return out;
}

std::string ComparisonTable::to_csv() const {
  std::string out = "model";
  for (auto c : columns) out += "," + std::string(column_name(c));
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += csv_field(models[r]);
    for (const auto& cell : rows[r]) out += "," + csv_field(cell.text);
    out += "\n";
  }
  return out;
}

ojson ComparisonTable::to_json() const {
  ojson cols = ojson::array();
  for (auto c : columns) cols.push_back(std::string(column_name(c)));
  ojson out_rows = ojson::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ojson cells = ojson::object();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& cell = rows[r][c];
      ojson entry{{"value", optional_json(cell.value)}, {"text", cell.text}};
      if (is_horizon(columns[c])) entry["includes_truncated"] = cell.includes_truncated;
      cells[std::string(column_name(columns[c]))] = std::move(entry);
    }
    out_rows.push_back({{"model", models[r]}, {"cells", std::move(cells)}});
  }
  return ojson{{"columns", std::move(cols)},
               {"unit", unit},
               {"config", config_to_json(config)},
               {"rows", std::move(out_rows)},
               {"includes_truncated", any_truncated()}};
}

Heatmap heatmap_data(const AccuracyMatrix& m, std::optional<double> center) {
  Heatmap h{"accuracy", m.model_name(), m.axis().labels(), center, {}, {}};
  for (TimeIndex t = 0; t < m.size(); ++t) {
    std::vector<std::optional<double>> values;
    std::vector<std::string> tags;
    for (TimeIndex tau = 0; tau < m.size(); ++tau) {
      auto v = m.at(t, tau);
      values.push_back(v);
      tags.push_back(v ? tag_for(center, *v) : "non-evaluated");
    }
    h.values.push_back(std::move(values));
    h.tags.push_back(std::move(tags));
  }
  return h;
}

Heatmap heatmap_data(const TtrMatrix& ttr, std::optional<double> center) {
  Heatmap h{"ttr", "", ttr.axis().labels(), center, {}, {}};
  for (TimeIndex t = 0; t < ttr.size(); ++t) {
    std::vector<std::optional<double>> values;
    std::vector<std::string> tags;
    for (TimeIndex tau = 0; tau < ttr.size(); ++tau) {
      auto v = ttr.at(t, tau);
      values.push_back(v);
      switch (ttr.state(t, tau)) {
        case TtrState::Defined: tags.push_back(tag_for(center, *v)); break;
        case TtrState::Absent: tags.push_back("non-evaluated"); break;
        case TtrState::UndefinedOracle: tags.push_back("undefined-oracle"); break;
      }
    }
    h.values.push_back(std::move(values));
    h.tags.push_back(std::move(tags));
  }
  return h;
}

ojson Heatmap::to_json() const {
  ojson vals = ojson::array();
  for (const auto& row : values) {
    ojson r = ojson::array();
    for (const auto& v : row) r.push_back(optional_json(v));
    vals.push_back(std::move(r));
  }
  return ojson{{"kind", kind},
               {"model_name", model_name},
               {"labels", labels},
               {"center", optional_json(center)},
               {"values", std::move(vals)},
               {"tags", tags}};
}

std::string Heatmap::to_csv() const {
  std::string out = "train\\eval";
  for (const auto& l : labels) out += "," + csv_field(l);
  out += "\n";
  for (std::size_t t = 0; t < values.size(); ++t) {
    out += csv_field(labels[t]);
    for (const auto& v : values[t]) {
      out += ",";
      if (v) out += format_shortest(*v);
    }
    out += "\n";
  }
  return out;
}

Timeline timeline_series(const MetricReport& report, const AccuracyMatrix& m) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::Mismatch,
                fmt::format("report '{}' does not match matrix '{}': {}", report.model_name, m.model_name(), why));
  };
  if (report.model_name != m.model_name()) fail("model names differ");
  if (report.axis_labels != m.axis().labels()) fail("time axes differ");
  Timeline tl{report.model_name, {}};
  for (std::size_t i = 0; i < report.train_times.size(); ++i) {
    const auto t = report.train_times[i];
    const auto diag = m.at(t, t);
    if (!diag) fail(fmt::format("A(t,t) absent at '{}'", m.axis().label(t)));
    const auto& tas = report.tas.per_train_time[i];
    tl.points.push_back({t, m.axis().label(t), *diag, tas.ood_avg, tas.tas});
  }
  return tl;
}

double mean_id_ood_gap(const Timeline& timeline) {
  if (timeline.points.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : timeline.points) sum += p.id - p.ood;
  return sum / static_cast<double>(timeline.points.size());
}

ojson Timeline::to_json() const {
  ojson series = ojson::array();
  for (const auto& p : points) {
    series.push_back({{"t", p.t}, {"label", p.label}, {"id", p.id}, {"ood", p.ood}, {"tas", p.tas}});
  }
  return ojson{{"model_name", model_name}, {"series", std::move(series)}};
}

std::string Timeline::to_csv() const {
  std::string out = "label,id,ood,tas\n";
  for (const auto& p : points) {
    out += fmt::format("{},{},{},{}\n", csv_field(p.label), format_shortest(p.id), format_shortest(p.ood),
                       format_shortest(p.tas));
  }
  return out;
}

std::string report_to_text(const MetricReport& r, std::string_view unit) {
  std::string out = fmt::format("model: {}\n", r.model_name);
  const auto& c = r.config;
  out += fmt::format("config: delta={} epsilon={} lambda={} max_horizon={} tas_window={} sh_mode={} clip_ttr={} "
                     "tas_mode={}\n\n",
                     format_shortest(c.delta), format_shortest(c.epsilon), format_shortest(c.lambda), c.max_horizon,
                     c.tas_window, to_string(c.sh_mode), c.clip_ttr ? "true" : "false", to_string(c.tas_mode));
  std::size_t label_width = std::string_view("t").size();
  for (auto t : r.train_times) label_width = std::max(label_width, r.label_of(t).size());
  out += fmt::format("{:<{}} | {:>4} | {:>4} | {:>7} | {:>7} | {:>7}\n", "t", label_width, "SH", "DH", "ID-next",
                     "OOD", "TAS");
  for (std::size_t i = 0; i < r.train_times.size(); ++i) {
    const auto& sh = r.sh.per_train_time[i];
    const auto& dh = r.dh.per_train_time[i];
    const auto& tas = r.tas.per_train_time[i];
    out += fmt::format("{:<{}} | {:>4} | {:>4} | {:>7} | {:>7} | {:>7}\n", r.label_of(r.train_times[i]), label_width,
                       fmt::format("{}{}", sh.steps, sh.truncated ? "*" : ""),
                       fmt::format("{}{}", dh.steps, dh.truncated ? "*" : ""), format_percent(tas.id_avg),
                       format_percent(tas.ood_avg), format_percent(tas.tas));
  }
  auto opt_pct = [](const std::optional<double>& v) { return v ? format_percent(*v) : std::string("n/a"); };
  out += fmt::format("\nID avg: {}\nOOD avg: {}\nOOD min: {}\nTAS mean: {}\nTAS min: {}\n", opt_pct(r.accuracy.id_avg),
                     opt_pct(r.accuracy.ood_avg), opt_pct(r.accuracy.ood_min), format_percent(r.tas.mean_tas),
                     format_percent(r.tas.min_tas));
  out += fmt::format("SH mean: {}{}\nDH mean: {}{}\n", format_horizon(r.sh.mean, unit), r.sh.any_truncated() ? "*" : "",
                     format_horizon(r.dh.mean, unit), r.dh.any_truncated() ? "*" : "");
  for (const auto& s : r.skipped) out += fmt::format("skipped {}: {}\n", s.label, s.reason);
  if (r.sh.any_truncated() || r.dh.any_truncated()) {
    out += "\n";
    out += kTruncationNote;
    out += "\n";
  }
  return out;
}

std::string report_to_csv(const MetricReport& r) {
  std::string out = "label,sh,sh_truncated,dh,dh_truncated,ood_avg,id_avg,tas\n";
  for (std::size_t i = 0; i < r.train_times.size(); ++i) {
    const auto& sh = r.sh.per_train_time[i];
    const auto& dh = r.dh.per_train_time[i];
    const auto& tas = r.tas.per_train_time[i];
    out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(r.label_of(r.train_times[i])), sh.steps, sh.truncated,
                       dh.steps, dh.truncated, format_shortest(tas.ood_avg), format_shortest(tas.id_avg),
                       format_shortest(tas.tas));
  }
  return out;
}

}  // namespace tadapt
