// SPDX-License-Identifier: Apache-2.0

#include "tadapt/scenario.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tadapt/error.hpp"
#include "tadapt/metric_report.hpp"
#include "tadapt/report.hpp"

namespace tadapt {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Output number k (1-based) of the SplitMix64 stream seeded with `seed`.
double uniform_draw(std::uint64_t seed, std::uint64_t k) {
  return static_cast<double>(mix64(seed + k * kGoldenGamma) >> 11) * 0x1.0p-53;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

bool cell_present(const ScenarioSpec& spec, TimeIndex t, TimeIndex tau) {
  switch (spec.presence) {
    case Presence::Full: return true;
    case Presence::UpperTriangle: return tau >= t;
    case Presence::Banded: return tau >= t && tau - t <= spec.band;
  }
  return false;
}

std::string_view presence_name(Presence p) {
  switch (p) {
    case Presence::Full: return "full";
    case Presence::UpperTriangle: return "upper-triangle";
    case Presence::Banded: return "banded";
  }
  return "?";
}

std::string_view signature_name(Signature s) {
  switch (s) {
    case Signature::Stationary: return "stationary";
    case Signature::PureDifficulty: return "pure-difficulty";
    case Signature::PureLag: return "pure-lag";
    case Signature::Mixed: return "mixed";
    case Signature::GapMatchedLag: return "gap-matched-lag";
  }
  return "?";
}

struct Evaluated {
  AccuracyMatrix matrix;
  MetricReport report;
  double gap = 0.0;
};

Evaluated evaluate_spec(const ScenarioSpec& spec, const MetricConfig& cfg) {
  auto m = generate(spec);
  auto r = evaluate_model(m, cfg);
  const double gap = mean_id_ood_gap(timeline_series(r, m));
  return {std::move(m), std::move(r), gap};
}

// Lag rate at which `lag_spec` reaches `target_gap`. The mean gap is
// nondecreasing in the lag rate, so plain bisection converges.
double solve_matched_lag(ScenarioSpec lag_spec, double target_gap, const MetricConfig& cfg) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    lag_spec.lag_rate = 0.5 * (lo + hi);
    if (evaluate_spec(lag_spec, cfg).gap < target_gap) {
      lo = lag_spec.lag_rate;
    } else {
      hi = lag_spec.lag_rate;
    }
  }
  return 0.5 * (lo + hi);
}

SignatureCheck check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

void add_tas_all_one(std::vector<SignatureCheck>& out, const MetricReport& r) {
  const bool ok = std::all_of(r.tas.per_train_time.begin(), r.tas.per_train_time.end(),
                              [](const TasValue& v) { return v.tas == 1.0; });
  out.push_back(check("TAS = 1 for every t", ok, fmt::format("min TAS {}", format_shortest(r.tas.min_tas))));
}

}  // namespace

void ScenarioSpec::validate() const {
  auto fail = [this](const std::string& msg) {
    throw Error(ErrorKind::Config, fmt::format("scenario '{}': {}", name, msg));
  };
  if (periods < 2) fail(fmt::format("periods must be >= 2, got {}", periods));
  if (!(base_acc > 0.0 && base_acc <= 1.0)) fail(fmt::format("base_acc must lie in (0,1], got {}", base_acc));
  if (!(difficulty_rate >= 0.0 && difficulty_rate <= 1.0)) {
    fail(fmt::format("difficulty_rate must lie in [0,1], got {}", difficulty_rate));
  }
  if (!(lag_rate >= 0.0 && lag_rate <= 1.0)) fail(fmt::format("lag_rate must lie in [0,1], got {}", lag_rate));
  if (!(floor_g >= 0.0 && floor_g <= 1.0)) fail(fmt::format("floor_g must lie in [0,1], got {}", floor_g));
  if (!(noise_amp >= 0.0) || !std::isfinite(noise_amp)) fail(fmt::format("noise_amp must be >= 0, got {}", noise_amp));
}

double target_transfer(const ScenarioSpec& spec, std::size_t h) {
  return std::max(spec.floor_g, std::pow(1.0 - spec.lag_rate, static_cast<double>(h)));
}

AccuracyMatrix generate(const ScenarioSpec& spec) {
  spec.validate();
  const auto n = spec.periods;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  AccuracyMatrix m(spec.name, TimeAxis(std::move(labels)));
  std::vector<double> oracle(n);
  for (std::size_t t = 0; t < n; ++t) {
    oracle[t] = clamp01(spec.base_acc * std::pow(1.0 - spec.difficulty_rate, static_cast<double>(t)));
  }
  for (TimeIndex t = 0; t < n; ++t) {
    for (TimeIndex tau = 0; tau < n; ++tau) {
      if (!cell_present(spec, t, tau)) continue;
      const std::size_t h = tau >= t ? tau - t : t - tau;
      double v = oracle[tau] * target_transfer(spec, h);
      if (spec.noise_amp > 0.0) {
        const double u = uniform_draw(spec.seed, static_cast<std::uint64_t>(t * n + tau + 1));
        v = clamp01(v + spec.noise_amp * (2.0 * u - 1.0));
      }
      m.set(t, tau, v);
    }
  }
  return m;
}

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json j{{"name", spec.name},
                           {"periods", spec.periods},
                           {"base_acc", spec.base_acc},
                           {"difficulty_rate", spec.difficulty_rate},
                           {"lag_rate", spec.lag_rate},
                           {"floor_g", spec.floor_g},
                           {"noise_amp", spec.noise_amp},
                           {"seed", spec.seed},
                           {"presence", std::string(presence_name(spec.presence))}};
  if (spec.presence == Presence::Banded) j["band"] = spec.band;
  return j;
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Parse, "scenario: " + msg); };
  if (!j.is_object()) fail("expected a JSON object");
  ScenarioSpec s;
  bool band_given = false;
  for (const auto& [key, value] : j.items()) {
    auto number = [&]() {
      if (!value.is_number()) fail(fmt::format("'{}' must be a number", key));
      return value.get<double>();
    };
    auto count = [&]() {
      if (!value.is_number_unsigned()) fail(fmt::format("'{}' must be a non-negative integer", key));
      return value.get<std::uint64_t>();
    };
    if (key == "name") {
      if (!value.is_string()) fail("'name' must be a string");
      s.name = value.get<std::string>();
    } else if (key == "periods") {
      s.periods = count();
    } else if (key == "base_acc") {
      s.base_acc = number();
    } else if (key == "difficulty_rate") {
      s.difficulty_rate = number();
    } else if (key == "lag_rate") {
      s.lag_rate = number();
    } else if (key == "floor_g") {
      s.floor_g = number();
    } else if (key == "noise_amp") {
      s.noise_amp = number();
    } else if (key == "seed") {
      s.seed = count();
    } else if (key == "presence") {
      const auto p = value.is_string() ? value.get<std::string>() : std::string();
      if (p == "full") {
        s.presence = Presence::Full;
      } else if (p == "upper-triangle") {
        s.presence = Presence::UpperTriangle;
      } else if (p == "banded") {
        s.presence = Presence::Banded;
      } else {
        fail(fmt::format("'presence' must be one of full, upper-triangle, banded; got {}", value.dump()));
      }
    } else if (key == "band") {
      s.band = count();
      band_given = true;
    } else {
      fail(fmt::format("unknown key '{}'", key));
    }
  }
  if (s.presence == Presence::Banded && !band_given) fail("presence 'banded' requires 'band'");
  s.validate();
  return s;
}

std::vector<Scenario> scenario_suite() {
  auto spec = [](std::string name, std::size_t periods, double base, double difficulty, double lag) {
    ScenarioSpec s;
    s.name = std::move(name);
    s.periods = periods;
    s.base_acc = base;
    s.difficulty_rate = difficulty;
    s.lag_rate = lag;
    return s;
  };
  std::vector<Scenario> suite;
  suite.push_back({spec("stationary", 10, 0.9, 0.0, 0.0), Signature::Stationary,
                   "TAS = 1, SH truncated at the window, DH truncated at H+1 for every t", std::nullopt});
  suite.push_back({spec("pure-difficulty", 10, 0.95, 0.03, 0.0), Signature::PureDifficulty,
                   "oracle decays, TAS = 1 for every t, ID-OOD gap positive", std::nullopt});
  suite.push_back({spec("pure-lag", 10, 0.9, 0.0, 0.08), Signature::PureLag,
                   "flat oracle, TAS < 1 and equal to the mean transfer target", std::nullopt});
  suite.push_back({spec("mixed", 10, 0.95, 0.03, 0.08), Signature::Mixed,
                   "mean TAS strictly between the pure-lag reference and 1", std::string("pure-lag")});

  auto matched_difficulty = spec("gap-matched-difficulty", 10, 0.95, 0.12, 0.0);
  suite.push_back({matched_difficulty, Signature::PureDifficulty,
                   "oracle decays, TAS = 1 for every t, ID-OOD gap positive", std::nullopt});
  const MetricConfig defaults;
  auto matched_lag = spec("gap-matched-lag", 10, 0.6, 0.0, 0.0);
  matched_lag.lag_rate = solve_matched_lag(matched_lag, evaluate_spec(matched_difficulty, defaults).gap, defaults);
  suite.push_back({matched_lag, Signature::GapMatchedLag,
                   "same mean ID-OOD gap as gap-matched-difficulty, mean TAS lower by >= 0.2",
                   std::string("gap-matched-difficulty")});
  return suite;
}

bool ScenarioOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const SignatureCheck& c) { return c.passed; });
}

std::vector<ScenarioOutcome> run_suite(const std::vector<Scenario>& suite, const MetricConfig& cfg) {
  std::vector<Evaluated> evaluated;
  for (const auto& s : suite) evaluated.push_back(evaluate_spec(s.spec, cfg));
  auto find = [&](const std::string& name) -> const Evaluated* {
    for (std::size_t i = 0; i < suite.size(); ++i) {
      if (suite[i].spec.name == name) return &evaluated[i];
    }
    return nullptr;
  };

  std::vector<ScenarioOutcome> outcomes;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& sc = suite[i];
    const auto& ev = evaluated[i];
    const auto& r = ev.report;
    const auto& m = ev.matrix;
    ScenarioOutcome out{fmt::format("{} ({})", sc.spec.name, signature_name(sc.signature)), {}};
    auto& checks = out.checks;
    const Evaluated* ref = sc.reference ? find(*sc.reference) : nullptr;
    if (sc.reference && !ref) {
      checks.push_back(check("reference scenario present", false, *sc.reference));
      outcomes.push_back(std::move(out));
      continue;
    }

    switch (sc.signature) {
      case Signature::Stationary: {
        add_tas_all_one(checks, r);
        bool sh_ok = true;
        bool dh_ok = true;
        for (std::size_t k = 0; k < r.train_times.size(); ++k) {
          const auto window = std::min(cfg.max_horizon, m.size() - 1 - r.train_times[k]);
          const auto& sh = r.sh.per_train_time[k];
          const auto& dh = r.dh.per_train_time[k];
          sh_ok = sh_ok && sh.truncated && sh.steps == window;
          dh_ok = dh_ok && dh.truncated && dh.steps == cfg.max_horizon + 1;
        }
        checks.push_back(check("SH truncated at the observable window", sh_ok, format_horizon(r.sh.mean, "steps")));
        checks.push_back(check("DH truncated at H+1", dh_ok, format_horizon(r.dh.mean, "steps")));
        break;
      }
      case Signature::PureDifficulty: {
        add_tas_all_one(checks, r);
        bool decays = true;
        for (TimeIndex t = 1; t < m.size(); ++t) decays = decays && *m.at(t, t) < *m.at(t - 1, t - 1);
        checks.push_back(check("oracle diagonal strictly decreasing", decays, ""));
        const auto tl = timeline_series(r, m);
        const bool gap_positive =
            std::all_of(tl.points.begin(), tl.points.end(), [](const TimelinePoint& p) { return p.id > p.ood; });
        checks.push_back(check("ID above forward OOD for every t", gap_positive,
                               fmt::format("mean gap {:.4f}", mean_id_ood_gap(tl))));
        break;
      }
      case Signature::PureLag: {
        bool flat = true;
        for (TimeIndex t = 1; t < m.size(); ++t) flat = flat && *m.at(t, t) == *m.at(0, 0);
        checks.push_back(check("oracle diagonal flat", flat, ""));
        bool below = true;
        double worst = 0.0;
        for (std::size_t k = 0; k < r.train_times.size(); ++k) {
          const auto t = r.train_times[k];
          const auto window = std::min(cfg.tas_window, m.size() - 1 - t);
          double expected = 0.0;
          for (std::size_t h = 1; h <= window; ++h) expected += target_transfer(sc.spec, h);
          expected /= static_cast<double>(window);
          const double tas = r.tas.per_train_time[k].tas;
          below = below && tas < 1.0;
          worst = std::max(worst, std::abs(tas - expected));
        }
        checks.push_back(check("TAS < 1 for every t", below, fmt::format("mean TAS {:.4f}", r.tas.mean_tas)));
        checks.push_back(check("TAS equals mean transfer target", worst <= 1e-12,
                               fmt::format("max deviation {:.3g}", worst)));
        break;
      }
      case Signature::Mixed: {
        const double lo = ref->report.tas.mean_tas;
        const double v = r.tas.mean_tas;
        checks.push_back(check("mean TAS strictly between reference and 1", lo < v && v < 1.0,
                               fmt::format("{:.4f} < {:.4f} < 1", lo, v)));
        break;
      }
      case Signature::GapMatchedLag: {
        checks.push_back(check("mean ID-OOD gap equals reference", std::abs(ev.gap - ref->gap) <= kGapMatchTolerance,
                               fmt::format("{:.6f} vs {:.6f}", ev.gap, ref->gap)));
        const double drop = ref->report.tas.mean_tas - r.tas.mean_tas;
        checks.push_back(check("mean TAS lower than reference by >= 0.2", drop >= kGapMatchedTasDrop,
                               fmt::format("drop {:.4f}", drop)));
        break;
      }
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

}  // namespace tadapt
