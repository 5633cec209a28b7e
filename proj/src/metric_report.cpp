// SPDX-License-Identifier: Apache-2.0

#include "tadapt/metric_report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "tadapt/error.hpp"

namespace tadapt {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void schema_fail(const std::string& msg) { throw Error(ErrorKind::Parse, "report: " + msg); }

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_fail(fmt::format("missing key '{}'", key));
  return j.at(key);
}

template <typename T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    schema_fail(fmt::format("key '{}': {}", key, e.what()));
  }
}

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) schema_fail(fmt::format("key '{}' must be a number or null", key));
  return v.get<double>();
}

}  // namespace

AccuracySummary AccuracySummary::of(const AccuracyMatrix& m) {
  AccuracySummary s;
  double id_sum = 0.0;
  std::size_t id_n = 0;
  double ood_sum = 0.0;
  std::size_t ood_n = 0;
  for (TimeIndex t = 0; t < m.size(); ++t) {
    if (auto d = m.at(t, t)) {
      id_sum += *d;
      ++id_n;
    }
    for (TimeIndex tau = t + 1; tau < m.size(); ++tau) {
      if (auto a = m.at(t, tau)) {
        ood_sum += *a;
        ++ood_n;
        s.ood_min = s.ood_min ? std::min(*s.ood_min, *a) : *a;
      }
    }
  }
  if (id_n > 0) s.id_avg = id_sum / static_cast<double>(id_n);
  if (ood_n > 0) s.ood_avg = ood_sum / static_cast<double>(ood_n);
  return s;
}

MetricReport MetricReport::assemble(std::string model_name, std::vector<std::string> axis_labels,
                                    std::vector<TimeIndex> train_times, std::vector<HorizonValue> sh,
                                    std::vector<HorizonValue> dh, std::vector<TasValue> tas,
                                    std::vector<SkippedTime> skipped, AccuracySummary accuracy,
                                    MetricConfig config) {
  MetricReport r;
  r.model_name = std::move(model_name);
  r.axis_labels = std::move(axis_labels);
  r.train_times = std::move(train_times);
  r.sh = HorizonResult::from(std::move(sh));
  r.dh = HorizonResult::from(std::move(dh));
  r.tas = TasResult::from(std::move(tas));
  r.skipped = std::move(skipped);
  r.accuracy = accuracy;
  r.config = config;
  r.check_consistency();
  return r;
}

void MetricReport::check_consistency() const {
  auto fail = [this](const std::string& msg) {
    throw Error(ErrorKind::Mismatch, fmt::format("report '{}': {}", model_name, msg));
  };
  const auto n = train_times.size();
  if (sh.per_train_time.size() != n || dh.per_train_time.size() != n || tas.per_train_time.size() != n) {
    fail("per-train-time records are misaligned");
  }
  if (!std::is_sorted(train_times.begin(), train_times.end()) ||
      std::adjacent_find(train_times.begin(), train_times.end()) != train_times.end()) {
    fail("train times must be strictly ascending");
  }
  for (auto t : train_times) {
    if (t >= axis_labels.size()) fail(fmt::format("train index {} outside axis", t));
  }
  for (const auto& s : skipped) {
    if (s.t >= axis_labels.size() || axis_labels[s.t] != s.label) fail("skipped entry does not match axis");
  }
  if (HorizonResult::from(sh.per_train_time) != sh) fail("SH mean differs from per-t records");
  if (HorizonResult::from(dh.per_train_time) != dh) fail("DH mean differs from per-t records");
  if (TasResult::from(tas.per_train_time) != tas) fail("TAS aggregates differ from per-t records");
}

ojson config_to_json(const MetricConfig& cfg) {
  return ojson{{"delta", cfg.delta},
               {"epsilon", cfg.epsilon},
               {"lambda", cfg.lambda},
               {"max_horizon", cfg.max_horizon},
               {"tas_window", cfg.tas_window},
               {"sh_mode", std::string(to_string(cfg.sh_mode))},
               {"clip_ttr", cfg.clip_ttr},
               {"tas_mode", std::string(to_string(cfg.tas_mode))}};
}

MetricConfig config_from_json(const nlohmann::json& j, MetricConfig cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "config: " + msg); };
  if (!j.is_object()) fail("expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto number = [&]() {
      if (!value.is_number()) fail(fmt::format("'{}' must be a number", key));
      return value.get<double>();
    };
    auto count = [&]() -> std::size_t {
      if (!value.is_number_unsigned()) fail(fmt::format("'{}' must be a non-negative integer", key));
      return value.get<std::size_t>();
    };
    auto text = [&]() {
      if (!value.is_string()) fail(fmt::format("'{}' must be a string", key));
      return value.get<std::string>();
    };
    if (key == "delta") {
      cfg.delta = number();
    } else if (key == "epsilon") {
      cfg.epsilon = number();
    } else if (key == "lambda") {
      cfg.lambda = number();
    } else if (key == "max_horizon") {
      cfg.max_horizon = count();
    } else if (key == "tas_window") {
      cfg.tas_window = count();
    } else if (key == "sh_mode") {
      auto mode = sh_mode_from_name(text());
      if (!mode) fail(fmt::format("unknown sh_mode '{}'", value.get<std::string>()));
      cfg.sh_mode = *mode;
    } else if (key == "clip_ttr") {
      if (!value.is_boolean()) fail("'clip_ttr' must be a boolean");
      cfg.clip_ttr = value.get<bool>();
    } else if (key == "tas_mode") {
      auto mode = tas_mode_from_name(text());
      if (!mode) fail(fmt::format("unknown tas_mode '{}'", value.get<std::string>()));
      cfg.tas_mode = *mode;
    } else {
      fail(fmt::format("unknown key '{}'", key));
    }
  }
  return cfg;
}

ojson report_to_json(const MetricReport& r) {
  ojson records = ojson::array();
  for (std::size_t i = 0; i < r.train_times.size(); ++i) {
    const auto t = r.train_times[i];
    const auto& sh = r.sh.per_train_time[i];
    const auto& dh = r.dh.per_train_time[i];
    const auto& tas = r.tas.per_train_time[i];
    records.push_back({{"t", t},
                       {"label", r.axis_labels[t]},
                       {"sh", sh.steps},
                       {"sh_truncated", sh.truncated},
                       {"dh", dh.steps},
                       {"dh_truncated", dh.truncated},
                       {"ood_avg", tas.ood_avg},
                       {"id_avg", tas.id_avg},
                       {"tas", tas.tas}});
  }
  ojson skipped = ojson::array();
  for (const auto& s : r.skipped) skipped.push_back({{"t", s.t}, {"label", s.label}, {"reason", s.reason}});
  return ojson{{"model_name", r.model_name},
               {"labels", r.axis_labels},
               {"config", config_to_json(r.config)},
               {"per_train_time", std::move(records)},
               {"skipped", std::move(skipped)},
               {"aggregates",
                {{"id_avg", optional_number(r.accuracy.id_avg)},
                 {"ood_avg", optional_number(r.accuracy.ood_avg)},
                 {"ood_min", optional_number(r.accuracy.ood_min)},
                 {"tas_mean", r.tas.mean_tas},
                 {"tas_min", r.tas.min_tas},
                 {"sh_mean", r.sh.mean},
                 {"sh_mean_includes_truncated", r.sh.any_truncated()},
                 {"dh_mean", r.dh.mean},
                 {"dh_mean_includes_truncated", r.dh.any_truncated()}}}};
}

MetricReport report_from_json(const nlohmann::json& j) {
  if (!j.is_object()) schema_fail("expected a JSON object");
  MetricConfig cfg;
  try {
    cfg = config_from_json(require(j, "config"));
  } catch (const Error& e) {
    schema_fail(e.what());
  }
  std::vector<TimeIndex> times;
  std::vector<HorizonValue> sh;
  std::vector<HorizonValue> dh;
  std::vector<TasValue> tas;
  const auto& records = require(j, "per_train_time");
  if (!records.is_array()) schema_fail("'per_train_time' must be an array");
  for (const auto& rec : records) {
    times.push_back(get_as<TimeIndex>(rec, "t"));
    sh.push_back({get_as<std::size_t>(rec, "sh"), get_as<bool>(rec, "sh_truncated")});
    dh.push_back({get_as<std::size_t>(rec, "dh"), get_as<bool>(rec, "dh_truncated")});
    tas.push_back({get_as<double>(rec, "ood_avg"), get_as<double>(rec, "id_avg"), get_as<double>(rec, "tas")});
  }
  std::vector<SkippedTime> skipped;
  const auto& skipped_json = require(j, "skipped");
  if (!skipped_json.is_array()) schema_fail("'skipped' must be an array");
  for (const auto& s : skipped_json) {
    skipped.push_back({get_as<TimeIndex>(s, "t"), get_as<std::string>(s, "label"), get_as<std::string>(s, "reason")});
  }
  const auto& agg = require(j, "aggregates");
  AccuracySummary acc{optional_from(agg, "id_avg"), optional_from(agg, "ood_avg"), optional_from(agg, "ood_min")};
  auto r = MetricReport::assemble(get_as<std::string>(j, "model_name"),
                                  get_as<std::vector<std::string>>(j, "labels"), std::move(times), std::move(sh),
                                  std::move(dh), std::move(tas), std::move(skipped), acc, cfg);
  if (get_as<double>(agg, "tas_mean") != r.tas.mean_tas || get_as<double>(agg, "tas_min") != r.tas.min_tas ||
      get_as<double>(agg, "sh_mean") != r.sh.mean || get_as<double>(agg, "dh_mean") != r.dh.mean) {
    throw Error(ErrorKind::Mismatch,
                fmt::format("report '{}': stored aggregates differ from per-t records", r.model_name));
  }
  return r;
}

}  // namespace tadapt
