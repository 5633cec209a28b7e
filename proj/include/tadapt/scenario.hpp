// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tadapt/accuracy_matrix.hpp"
#include "tadapt/metrics.hpp"

namespace tadapt {

enum class Presence { Full, UpperTriangle, Banded };

/// Parameters of a synthetic accuracy matrix.
///
/// Oracle diagonal: A(t,t) = base_acc * (1 - difficulty_rate)^t.
/// Transfer target: g(h) = max(floor_g, (1 - lag_rate)^|h|).
/// Off-diagonal:    A(t,tau) = A(tau,tau) * g(tau - t).
///
/// Noise is uniform on [-noise_amp, noise_amp], added after construction and
/// clamped to [0,1]. The draw for cell (t,tau) on an axis of size P is output
/// number k = t*P + tau + 1 of a SplitMix64 stream seeded with `seed`, i.e.
/// mix64(seed + k * 0x9E3779B97F4A7C15), mapped to u = (x >> 11) * 2^-53 and
/// noise = noise_amp * (2u - 1). A cell's noise therefore does not depend on
/// which other cells are present.
struct ScenarioSpec {
  std::string name = "synthetic";
  std::size_t periods = 10;
  double base_acc = 0.9;
  double difficulty_rate = 0.0;
  double lag_rate = 0.0;
  double floor_g = 0.3;
  double noise_amp = 0.0;
  std::uint64_t seed = 0;
  Presence presence = Presence::UpperTriangle;
  std::size_t band = 0;  // max forward offset kept when presence == Banded

  /// Throws Error(Config).
  void validate() const;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Noise-free transfer target for offset h.
double target_transfer(const ScenarioSpec& spec, std::size_t h);

/// Deterministic for a fixed spec. Labels are "0", "1", ...
AccuracyMatrix generate(const ScenarioSpec& spec);

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

enum class Signature {
  Stationary,      // TAS = 1, SH and DH truncated everywhere
  PureDifficulty,  // TAS = 1 while the oracle decays
  PureLag,         // flat oracle, TAS < 1 equal to the mean transfer target
  Mixed,           // TAS strictly between its lag-only reference and 1
  GapMatchedLag,   // same mean ID-OOD gap as its reference, TAS lower by >= 0.2
};

struct Scenario {
  ScenarioSpec spec;
  Signature signature = Signature::Stationary;
  std::string expectation;
  std::optional<std::string> reference;  // scenario compared against
};

/// Canonical scenarios: stationary, pure-difficulty, pure-lag, mixed, and a
/// pure-difficulty / pure-lag pair with equal mean ID-OOD gap. The lag rate of
/// the matched member is solved by bisection under the default MetricConfig.
std::vector<Scenario> scenario_suite();

/// Minimum TAS drop of a gap-matched lag scenario relative to its reference.
inline constexpr double kGapMatchedTasDrop = 0.2;
/// Tolerance on the equality of the matched mean ID-OOD gaps.
inline constexpr double kGapMatchTolerance = 1e-9;

struct SignatureCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ScenarioOutcome {
  std::string name;
  std::vector<SignatureCheck> checks;
  bool passed() const;
};

/// Generates and evaluates every suite member under `cfg` and checks its
/// signature.
std::vector<ScenarioOutcome> run_suite(const std::vector<Scenario>& suite, const MetricConfig& cfg);

}  // namespace tadapt
