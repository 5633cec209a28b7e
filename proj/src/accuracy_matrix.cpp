// SPDX-License-Identifier: Apache-2.0

#include "tadapt/accuracy_matrix.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>

#include "tadapt/error.hpp"

namespace tadapt {

namespace {

constexpr std::string_view kCornerCell = "train\\eval";

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }

bool valid_accuracy(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// One CSV record with the 1-based line it starts on.
struct CsvRecord {
  std::size_t line;
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain separators, quotes ("") and newlines.
// Blank lines are skipped; a trailing CR before LF is dropped.
std::vector<CsvRecord> read_csv(std::string_view src) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    if (src[i] == '\n' || (src[i] == '\r' && i + 1 < n && src[i + 1] == '\n')) {
      i += src[i] == '\r' ? 2 : 1;
      ++line;
      continue;
    }
    CsvRecord rec{line, {}};
    std::string field;
    bool done = false;
    while (!done) {
      field.clear();
      if (i < n && src[i] == '"') {
        const std::size_t open_line = line;
        ++i;
        for (;;) {
          if (i >= n) parse_fail(fmt::format("line {}: unterminated quoted field", open_line));
          if (src[i] == '"') {
            if (i + 1 < n && src[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (src[i] == '\n') ++line;
          field.push_back(src[i++]);
        }
        if (i < n && src[i] != ',' && src[i] != '\n' && src[i] != '\r') {
          parse_fail(fmt::format("line {}: unexpected character after quoted field", line));
        }
      } else {
        while (i < n && src[i] != ',' && src[i] != '\n' && src[i] != '\r') {
          if (src[i] == '"') parse_fail(fmt::format("line {}: stray quote in unquoted field", line));
          field.push_back(src[i++]);
        }
      }
      rec.fields.push_back(field);
      if (i < n && src[i] == ',') {
        ++i;
      } else {
        if (i < n && src[i] == '\r') {
          if (i + 1 < n && src[i + 1] == '\n') {
            ++i;
          } else {
            parse_fail(fmt::format("line {}: bare carriage return", line));
          }
        }
        if (i < n) {
          ++i;  // '\n'
          ++line;
        }
        done = true;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos && !s.empty()) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_value_text(std::string_view text, const std::string& where) {
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::general);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_fail(fmt::format("{}: value not parseable as a number: '{}'", where, text));
  }
  if (!valid_accuracy(v)) parse_fail(fmt::format("{}: value outside [0,1]: {}", where, text));
  return v;
}

AccuracyMatrix parse_csv(std::string_view src, std::string_view model_name) {
  auto records = read_csv(src);
  if (records.empty()) parse_fail("line 1: malformed header: empty document");
  const auto& header = records.front();
  if (header.fields.front() != kCornerCell) {
    parse_fail(fmt::format("line {}, column 1: malformed header: expected '{}', got '{}'", header.line,
                           kCornerCell, header.fields.front()));
  }
  if (header.fields.size() < 2) {
    parse_fail(fmt::format("line {}: malformed header: no time labels", header.line));
  }
  std::vector<std::string> labels(header.fields.begin() + 1, header.fields.end());
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c].empty()) {
      parse_fail(fmt::format("line {}, column {}: malformed header: empty time label", header.line, c + 2));
    }
    if (!seen.emplace(labels[c], c).second) {
      parse_fail(fmt::format("line {}, column {}: duplicate time label '{}'", header.line, c + 2, labels[c]));
    }
  }
  AccuracyMatrix m(std::string(model_name), TimeAxis(std::move(labels)));
  std::vector<bool> row_seen(m.size(), false);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != m.size() + 1) {
      parse_fail(fmt::format("line {}: expected {} fields, got {}", rec.line, m.size() + 1, rec.fields.size()));
    }
    auto train = m.axis().index_of(rec.fields.front());
    if (!train) {
      parse_fail(fmt::format("line {}, column 1: unknown train-time label '{}'", rec.line, rec.fields.front()));
    }
    if (row_seen[*train]) {
      parse_fail(fmt::format("line {}, column 1: duplicate cell: row '{}' appears twice", rec.line,
                             rec.fields.front()));
    }
    row_seen[*train] = true;
    for (std::size_t c = 0; c < m.size(); ++c) {
      const std::string& text = rec.fields[c + 1];
      if (text.empty()) continue;
      const auto where = fmt::format("line {}, column {} ({}, {})", rec.line, c + 2, rec.fields.front(),
                                     m.axis().label(c));
      m.set(*train, c, parse_value_text(text, where));
    }
  }
  return m;
}

AccuracyMatrix parse_json(std::string_view src) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(src);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!doc.is_object()) parse_fail("malformed header: top-level value must be an object");
  for (const char* key : {"model_name", "labels", "cells"}) {
    if (!doc.contains(key)) parse_fail(fmt::format("malformed header: missing key '{}'", key));
  }
  if (!doc["model_name"].is_string()) parse_fail("malformed header: 'model_name' must be a string");
  if (!doc["labels"].is_array() || doc["labels"].empty()) {
    parse_fail("malformed header: 'labels' must be a non-empty array");
  }
  if (!doc["cells"].is_array()) parse_fail("malformed header: 'cells' must be an array");

  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < doc["labels"].size(); ++i) {
    const auto& l = doc["labels"][i];
    if (!l.is_string() || l.get<std::string>().empty()) {
      parse_fail(fmt::format("labels[{}]: time label must be a non-empty string", i));
    }
    if (!seen.emplace(l.get<std::string>(), i).second) {
      parse_fail(fmt::format("labels[{}]: duplicate time label '{}'", i, l.get<std::string>()));
    }
    labels.push_back(l.get<std::string>());
  }
  AccuracyMatrix m(doc["model_name"].get<std::string>(), TimeAxis(std::move(labels)));
  const auto& cells = doc["cells"];
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (!c.is_object() || !c.contains("train") || !c.contains("eval") || !c.contains("acc")) {
      parse_fail(fmt::format("cells[{}]: expected object with 'train', 'eval', 'acc'", i));
    }
    if (!c["train"].is_string() || !c["eval"].is_string()) {
      parse_fail(fmt::format("cells[{}]: 'train' and 'eval' must be label strings", i));
    }
    const auto train_label = c["train"].get<std::string>();
    const auto eval_label = c["eval"].get<std::string>();
    auto train = m.axis().index_of(train_label);
    auto eval = m.axis().index_of(eval_label);
    if (!train) parse_fail(fmt::format("cells[{}]: unknown train-time label '{}'", i, train_label));
    if (!eval) parse_fail(fmt::format("cells[{}]: unknown eval-time label '{}'", i, eval_label));
    const auto where = fmt::format("cells[{}] ({}, {})", i, train_label, eval_label);
    if (!c["acc"].is_number()) parse_fail(fmt::format("{}: value not parseable as a number", where));
    const double v = c["acc"].get<double>();
    if (!valid_accuracy(v)) parse_fail(fmt::format("{}: value outside [0,1]: {}", where, c["acc"].dump()));
    if (m.present(*train, *eval)) parse_fail(fmt::format("{}: duplicate cell", where));
    m.set(*train, *eval, v);
  }
  return m;
}

std::string serialize_csv(const AccuracyMatrix& m) {
  std::string out(kCornerCell);
  for (const auto& l : m.axis().labels()) {
    out.push_back(',');
    out += csv_escape(l);
  }
  out.push_back('\n');
  for (TimeIndex t = 0; t < m.size(); ++t) {
    bool any = false;
    for (TimeIndex e = 0; e < m.size() && !any; ++e) any = m.present(t, e);
    if (!any) continue;
    out += csv_escape(m.axis().label(t));
    for (TimeIndex e = 0; e < m.size(); ++e) {
      out.push_back(',');
      if (auto v = m.at(t, e)) out += format_shortest(*v);
    }
    out.push_back('\n');
  }
  return out;
}

std::string serialize_json(const AccuracyMatrix& m) {
  nlohmann::ordered_json doc;
  doc["model_name"] = m.model_name();
  doc["labels"] = m.axis().labels();
  doc["cells"] = nlohmann::ordered_json::array();
  for (TimeIndex t = 0; t < m.size(); ++t) {
    for (TimeIndex e = 0; e < m.size(); ++e) {
      if (auto v = m.at(t, e)) {
        doc["cells"].push_back({{"train", m.axis().label(t)}, {"eval", m.axis().label(e)}, {"acc", *v}});
      }
    }
  }
  return doc.dump(2) + "\n";
}

}  // namespace

TimeAxis::TimeAxis(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw Error(ErrorKind::Parse, fmt::format("empty time label at index {}", i));
    if (!index_.emplace(labels_[i], i).second) {
      throw Error(ErrorKind::Parse, fmt::format("duplicate time label '{}'", labels_[i]));
    }
  }
}

std::optional<TimeIndex> TimeAxis::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AccuracyMatrix::AccuracyMatrix(std::string model_name, TimeAxis axis)
    : model_name_(std::move(model_name)), axis_(std::move(axis)), cells_(axis_.size() * axis_.size()) {}

void AccuracyMatrix::set(TimeIndex train, TimeIndex eval, double accuracy) {
  if (train >= size() || eval >= size()) {
    throw Error(ErrorKind::Precondition,
                fmt::format("cell ({}, {}) outside axis of size {}", train, eval, size()));
  }
  if (!valid_accuracy(accuracy)) {
    throw Error(ErrorKind::Parse, fmt::format("value outside [0,1]: {}", accuracy));
  }
  auto& cell = cells_[train * size() + eval];
  if (!cell) ++present_count_;
  cell = accuracy;
}

void AccuracyMatrix::erase(TimeIndex train, TimeIndex eval) {
  auto& cell = cells_.at(train * size() + eval);
  if (cell) --present_count_;
  cell.reset();
}

AccuracyMatrix parse_matrix(std::string_view source, MatrixFormat format, std::string_view model_name) {
  return format == MatrixFormat::Csv ? parse_csv(source, model_name) : parse_json(source);
}

std::string serialize_matrix(const AccuracyMatrix& m, MatrixFormat format) {
  return format == MatrixFormat::Csv ? serialize_csv(m) : serialize_json(m);
}

std::vector<RowEntry> eval_row(const AccuracyMatrix& m, TimeIndex t) {
  if (t >= m.size()) {
    throw Error(ErrorKind::Precondition, fmt::format("train index {} out of range (axis size {})", t, m.size()));
  }
  std::vector<RowEntry> row;
  for (TimeIndex e = t; e < m.size(); ++e) {
    if (auto v = m.at(t, e)) row.push_back({e - t, *v});
  }
  return row;
}

std::string format_shortest(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::optional<MatrixFormat> format_from_name(std::string_view name) {
  if (name == "csv") return MatrixFormat::Csv;
  if (name == "json") return MatrixFormat::Json;
  return std::nullopt;
}

}  // namespace tadapt
