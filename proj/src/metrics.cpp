// SPDX-License-Identifier: Apache-2.0

#include "tadapt/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "tadapt/error.hpp"
#include "tadapt/metric_report.hpp"

namespace tadapt {

namespace {

constexpr std::array<ConfigField, 8> kConfigFields{{
    {"delta", "--delta", "0.6", "stability tolerance: SH counts offsets with TTR >= delta, in [0,1]"},
    {"epsilon", "--epsilon", "0.02", "per-step slack subtracted from each drift deviation, >= 0"},
    {"lambda", "--lambda", "0.15", "drift significance threshold: DH is the first h with S_h > lambda, > 0"},
    {"max_horizon", "--max-horizon", "6", "maximum evaluation offset H in steps, >= 1"},
    {"tas_window", "--tas-window", "6", "number of future steps n averaged by TAS, >= 1"},
    {"sh_mode", "--sh-mode", "contiguous", "stability horizon mode: contiguous | literal-max"},
    {"clip_ttr", "--clip-ttr", "true", "clip transfer ratios and TAS to 1: true | false"},
    {"tas_mode", "--tas-mode", "ratio-of-means", "TAS aggregation: ratio-of-means | mean-of-ratios"},
}};

[[noreturn]] void precondition_fail(const std::string& msg) { throw Error(ErrorKind::Precondition, msg); }

void check_index(std::size_t size, TimeIndex t) {
  if (t >= size) precondition_fail(fmt::format("train index {} out of range (axis size {})", t, size));
}

double clip_if(bool clip, double v) { return clip ? std::min(1.0, v) : v; }

}  // namespace

void MetricConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (!(delta >= 0.0 && delta <= 1.0)) fail(fmt::format("delta must lie in [0,1], got {}", delta));
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail(fmt::format("epsilon must be >= 0, got {}", epsilon));
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(fmt::format("lambda must be > 0, got {}", lambda));
  if (max_horizon < 1) fail("max_horizon must be >= 1");
  if (tas_window < 1) fail("tas_window must be >= 1");
}

std::span<const ConfigField> config_fields() { return kConfigFields; }

std::string_view to_string(ShMode mode) { return mode == ShMode::Contiguous ? "contiguous" : "literal-max"; }

std::string_view to_string(TasMode mode) {
  return mode == TasMode::RatioOfMeans ? "ratio-of-means" : "mean-of-ratios";
}

std::optional<ShMode> sh_mode_from_name(std::string_view name) {
  if (name == "contiguous") return ShMode::Contiguous;
  if (name == "literal-max") return ShMode::LiteralMax;
  return std::nullopt;
}

std::optional<TasMode> tas_mode_from_name(std::string_view name) {
  if (name == "ratio-of-means") return TasMode::RatioOfMeans;
  if (name == "mean-of-ratios") return TasMode::MeanOfRatios;
  return std::nullopt;
}

TtrMatrix::TtrMatrix(TimeAxis axis, bool clipped)
    : axis_(std::move(axis)),
      clipped_(clipped),
      states_(axis_.size() * axis_.size(), TtrState::Absent),
      values_(axis_.size() * axis_.size(), 0.0) {}

void TtrMatrix::set(TimeIndex t, TimeIndex tau, TtrState state, double value) {
  const auto i = t * size() + tau;
  states_.at(i) = state;
  values_.at(i) = state == TtrState::Defined ? value : 0.0;
}

HorizonResult HorizonResult::from(std::vector<HorizonValue> values) {
  HorizonResult r;
  r.per_train_time = std::move(values);
  if (!r.per_train_time.empty()) {
    double sum = 0.0;
    for (const auto& v : r.per_train_time) sum += static_cast<double>(v.steps);
    r.mean = sum / static_cast<double>(r.per_train_time.size());
  }
  return r;
}

bool HorizonResult::any_truncated() const {
  return std::any_of(per_train_time.begin(), per_train_time.end(), [](const auto& v) { return v.truncated; });
}

TasResult TasResult::from(std::vector<TasValue> values) {
  TasResult r;
  r.per_train_time = std::move(values);
  if (!r.per_train_time.empty()) {
    double sum = 0.0;
    r.min_tas = r.per_train_time.front().tas;
    for (const auto& v : r.per_train_time) {
      sum += v.tas;
      r.min_tas = std::min(r.min_tas, v.tas);
    }
    r.mean_tas = sum / static_cast<double>(r.per_train_time.size());
  }
  return r;
}

TtrMatrix compute_ttr(const AccuracyMatrix& m, const MetricConfig& cfg) {
  TtrMatrix ttr(m.axis(), cfg.clip_ttr);
  const auto n = m.size();
  for (TimeIndex tau = 0; tau < n; ++tau) {
    const auto oracle = m.at(tau, tau);
    for (TimeIndex t = 0; t < n; ++t) {
      const auto acc = m.at(t, tau);
      if (!acc) continue;
      if (!oracle || *oracle == 0.0) {
        ttr.set(t, tau, TtrState::UndefinedOracle);
      } else {
        ttr.set(t, tau, TtrState::Defined, clip_if(cfg.clip_ttr, *acc / *oracle));
      }
    }
  }
  return ttr;
}

HorizonValue stability_horizon(const TtrMatrix& ttr, TimeIndex t, const MetricConfig& cfg) {
  check_index(ttr.size(), t);
  if (!ttr.at(t, t)) {
    precondition_fail(fmt::format("stability horizon undefined for '{}': oracle A(t,t) absent or zero",
                                  ttr.axis().label(t)));
  }
  const std::size_t last = std::min(cfg.max_horizon, ttr.size() - 1 - t);
  std::size_t last_defined = 0;
  std::size_t best = 0;
  bool crossed = false;
  for (std::size_t h = 0; h <= last; ++h) {
    const auto g = ttr.at(t, t + h);
    if (!g) continue;
    last_defined = h;
    if (*g >= cfg.delta) {
      if (!crossed) best = h;
    } else if (cfg.sh_mode == ShMode::Contiguous) {
      crossed = true;
      break;
    }
  }
  // Literal-max keeps scanning past dips, so `best` is the last satisfying h.
  return {best, !crossed && best == last_defined};
}

std::vector<double> drift_statistic(const AccuracyMatrix& m, TimeIndex t, const MetricConfig& cfg) {
  check_index(m.size(), t);
  const auto base = m.at(t, t);
  if (!base) {
    precondition_fail(fmt::format("drift statistic undefined for '{}': A(t,t) absent", m.axis().label(t)));
  }
  const std::size_t last = std::min(cfg.max_horizon, m.size() - 1 - t);
  std::vector<double> s;
  s.reserve(last);
  double prev = 0.0;
  for (std::size_t h = 1; h <= last; ++h) {
    if (auto a = m.at(t, t + h)) prev = std::max(0.0, prev + (std::abs(*a - *base) - cfg.epsilon));
    s.push_back(prev);
  }
  return s;
}

HorizonValue drift_horizon(const AccuracyMatrix& m, TimeIndex t, const MetricConfig& cfg) {
  const auto s = drift_statistic(m, t, cfg);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > cfg.lambda) return {i + 1, false};
  }
  return {cfg.max_horizon + 1, true};
}

TasValue temporal_adaptation_score(const AccuracyMatrix& m, TimeIndex t, const MetricConfig& cfg) {
  check_index(m.size(), t);
  const std::size_t last = std::min(cfg.tas_window, m.size() - 1 - t);
  double ood_sum = 0.0;
  double id_sum = 0.0;
  double ratio_sum = 0.0;
  std::size_t paired = 0;
  std::size_t ratios = 0;
  for (std::size_t k = 1; k <= last; ++k) {
    const auto ood = m.at(t, t + k);
    const auto oracle = m.at(t + k, t + k);
    if (!ood || !oracle) continue;
    ood_sum += *ood;
    id_sum += *oracle;
    ++paired;
    if (*oracle > 0.0) {
      ratio_sum += clip_if(cfg.clip_ttr, *ood / *oracle);
      ++ratios;
    }
  }
  const auto& label = m.axis().label(t);
  if (paired == 0) {
    precondition_fail(fmt::format("TAS undefined for '{}': no offset in [1,{}] has both A(t,t+k) and oracle",
                                  label, cfg.tas_window));
  }
  TasValue v;
  v.ood_avg = ood_sum / static_cast<double>(paired);
  v.id_avg = id_sum / static_cast<double>(paired);
  if (v.id_avg == 0.0) precondition_fail(fmt::format("TAS undefined for '{}': average oracle accuracy is 0", label));
  if (cfg.tas_mode == TasMode::RatioOfMeans) {
    v.tas = clip_if(cfg.clip_ttr, v.ood_avg / v.id_avg);
  } else {
    if (ratios == 0) precondition_fail(fmt::format("TAS undefined for '{}': every oracle is 0", label));
    v.tas = ratio_sum / static_cast<double>(ratios);
  }
  return v;
}

MetricReport evaluate_model(const AccuracyMatrix& m, const MetricConfig& cfg) {
  cfg.validate();
  const auto ttr = compute_ttr(m, cfg);
  std::vector<TimeIndex> times;
  std::vector<HorizonValue> sh;
  std::vector<HorizonValue> dh;
  std::vector<TasValue> tas;
  std::vector<SkippedTime> skipped;
  for (TimeIndex t = 0; t < m.size(); ++t) {
    try {
      auto sh_t = stability_horizon(ttr, t, cfg);
      auto dh_t = drift_horizon(m, t, cfg);
      auto tas_t = temporal_adaptation_score(m, t, cfg);
      times.push_back(t);
      sh.push_back(sh_t);
      dh.push_back(dh_t);
      tas.push_back(tas_t);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Precondition) throw;
      skipped.push_back({t, m.axis().label(t), e.what()});
    }
  }
  if (times.empty()) {
    throw Error(ErrorKind::Precondition, fmt::format("model '{}': no train time is evaluable", m.model_name()));
  }
  return MetricReport::assemble(m.model_name(), m.axis().labels(), std::move(times), std::move(sh), std::move(dh),
                                std::move(tas), std::move(skipped), AccuracySummary::of(m), cfg);
}

}  // namespace tadapt
