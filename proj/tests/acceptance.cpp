// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "tadapt/accuracy_matrix.hpp"
#include "tadapt/error.hpp"
#include "tadapt/metric_report.hpp"
#include "tadapt/metrics.hpp"
#include "tadapt/report.hpp"
#include "tadapt/scenario.hpp"
#include "test_support.hpp"

using namespace tadapt;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void fail(std::string why) {
    if (passed) detail = std::move(why);
    passed = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

// Horizon means from per-year records, including the DH sentinel.
Outcome published_horizon_means() {
  Outcome o;
  const auto start = Clock::now();
  std::vector<HorizonValue> sh;
  for (std::size_t v : {4, 6, 5, 5, 5, 4, 4, 6, 6, 6}) sh.push_back({v, false});
  std::vector<HorizonValue> dh;
  const MetricConfig cfg;
  for (std::size_t v : {2, 7, 7, 7, 6, 7, 7, 7, 7, 7}) dh.push_back({v, v == cfg.max_horizon + 1});
  const auto sh_r = HorizonResult::from(sh);
  const auto dh_r = HorizonResult::from(dh);
  if (sh_r.mean != 5.1) o.fail(fmt::format("SH mean {}", sh_r.mean));
  if (dh_r.mean != 6.4) o.fail(fmt::format("DH mean {}", dh_r.mean));
  if (!dh_r.any_truncated()) o.fail("sentinel not flagged");
  const auto secs = seconds_since(start);
  if (secs >= 1.0) o.fail(fmt::format("took {:.3f} s", secs));
  if (o.passed) o.detail = fmt::format("SH mean {}, DH mean {} in {:.6f} s", sh_r.mean, dh_r.mean, secs);
  return o;
}

Outcome clipping() {
  Outcome o;
  std::mt19937_64 rng(1);
  std::size_t defined = 0;
  std::size_t saturated = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = testing::random_matrix(rng);
    const auto ttr = compute_ttr(m, MetricConfig{});
    for (TimeIndex t = 0; t < m.size(); ++t) {
      for (TimeIndex tau = 0; tau < m.size(); ++tau) {
        const auto g = ttr.at(t, tau);
        if (!g) continue;
        ++defined;
        if (*g < 0.0 || *g > 1.0) o.fail(fmt::format("g={} outside [0,1]", *g));
        const auto a = m.at(t, tau);
        const auto oracle = m.at(tau, tau);
        if (*oracle > 0.0 && *a >= *oracle) {
          ++saturated;
          if (*g != 1.0) o.fail(fmt::format("A >= oracle but g={}", *g));
        }
      }
    }
  }
  if (o.passed) o.detail = fmt::format("{} defined cells, {} saturated at 1", defined, saturated);
  return o;
}

Outcome hand_traces() {
  Outcome o;
  AccuracyMatrix m("cusum", TimeAxis(labels(4)));
  m.set(0, 0, 0.8);
  m.set(0, 1, 0.78);
  m.set(0, 2, 0.70);
  m.set(0, 3, 0.60);
  MetricConfig cfg;
  cfg.epsilon = 0.05;
  cfg.lambda = 0.15;
  const auto s = drift_statistic(m, 0, cfg);
  const std::vector<double> expected = {0.0, 0.05, 0.20};
  if (s.size() != expected.size()) {
    o.fail(fmt::format("S has {} entries", s.size()));
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::abs(s[i] - expected[i]) > 1e-12) o.fail(fmt::format("S_{}={}", i + 1, s[i]));
    }
  }
  const auto dh = drift_horizon(m, 0, cfg);
  if (dh != HorizonValue{3, false}) o.fail(fmt::format("DH={}", dh.steps));

  TtrMatrix row(TimeAxis(labels(5)), true);
  const std::vector<double> g = {1.0, 0.9, 0.7, 0.55, 0.8};
  for (TimeIndex h = 0; h < g.size(); ++h) row.set(0, h, TtrState::Defined, g[h]);
  MetricConfig sh_cfg;
  sh_cfg.delta = 0.6;
  const auto contiguous = stability_horizon(row, 0, sh_cfg);
  sh_cfg.sh_mode = ShMode::LiteralMax;
  const auto literal = stability_horizon(row, 0, sh_cfg);
  if (contiguous.steps != 2) o.fail(fmt::format("contiguous SH={}", contiguous.steps));
  if (literal.steps != 4) o.fail(fmt::format("literal-max SH={}", literal.steps));
  if (o.passed) o.detail = "S=[0,0.05,0.2], DH=3, SH=2/4";
  return o;
}

std::size_t dh_rank(const HorizonValue& v) { return v.steps; }

Outcome monotonicity() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t checks = 0;
  for (int i = 0; i < 600; ++i) {
    const auto m = testing::random_matrix(rng);
    auto lo = testing::random_config(rng);
    lo.delta = unit(rng);
    auto delta_hi = lo;
    delta_hi.delta = lo.delta + (1.0 - lo.delta) * unit(rng);
    auto lambda_hi = lo;
    lambda_hi.lambda = lo.lambda + unit(rng) * 0.3;
    auto eps_hi = lo;
    eps_hi.epsilon = lo.epsilon + unit(rng) * 0.1;
    const auto ttr = compute_ttr(m, lo);
    for (TimeIndex t = 0; t < m.size(); ++t) {
      if (ttr.at(t, t)) {
        for (auto mode : {ShMode::Contiguous, ShMode::LiteralMax}) {
          auto a = lo;
          auto b = delta_hi;
          a.sh_mode = b.sh_mode = mode;
          ++checks;
          if (stability_horizon(ttr, t, a).steps < stability_horizon(ttr, t, b).steps) o.fail("SH not monotone in delta");
        }
        auto c = lo;
        c.sh_mode = ShMode::Contiguous;
        auto l = lo;
        l.sh_mode = ShMode::LiteralMax;
        ++checks;
        if (stability_horizon(ttr, t, l).steps < stability_horizon(ttr, t, c).steps) o.fail("literal-max < contiguous");
      }
      if (m.at(t, t)) {
        const auto base = dh_rank(drift_horizon(m, t, lo));
        checks += 2;
        if (base > dh_rank(drift_horizon(m, t, lambda_hi))) o.fail("DH not monotone in lambda");
        if (base > dh_rank(drift_horizon(m, t, eps_hi))) o.fail("DH not monotone in epsilon");
      }
    }
  }
  if (o.passed) o.detail = fmt::format("600 matrices, {} comparisons, 0 violations", checks);
  return o;
}

Outcome naive_equivalence() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::size_t rows = 0;
  for (int i = 0; i < 2000 && o.passed; ++i) {
    const auto m = testing::random_matrix(rng);
    const auto cfg = testing::random_config(rng);
    const auto grid = testing::to_grid(m);
    const auto ttr = compute_ttr(m, cfg);
    for (TimeIndex t = 0; t < m.size(); ++t) {
      ++rows;
      for (TimeIndex tau = 0; tau < m.size(); ++tau) {
        if (ttr.at(t, tau) != testing::naive::ttr(grid, t, tau, cfg.clip_ttr)) o.fail("TTR differs");
      }
      if (const auto ref = testing::naive::stability(grid, t, cfg)) {
        const auto v = stability_horizon(ttr, t, cfg);
        if (v.steps != ref->steps || v.truncated != ref->truncated) o.fail("SH differs");
      }
      if (const auto ref = testing::naive::drift(grid, t, cfg)) {
        const auto s = drift_statistic(m, t, cfg);
        if (s.size() != ref->size()) o.fail("S length differs");
        for (std::size_t h = 0; h < std::min(s.size(), ref->size()); ++h) {
          if (std::abs(s[h] - (*ref)[h]) > 1e-12) o.fail("S differs");
        }
        const auto v = drift_horizon(m, t, cfg);
        const auto dh_ref = testing::naive::drift_horizon(grid, t, cfg);
        if (v.steps != dh_ref->steps || v.truncated != dh_ref->truncated) o.fail("DH differs");
      }
      if (const auto ref = testing::naive::tas(grid, t, cfg)) {
        const auto v = temporal_adaptation_score(m, t, cfg);
        if (v.tas != ref->tas || v.ood_avg != ref->ood || v.id_avg != ref->id) o.fail("TAS differs");
      }
    }
  }
  if (o.passed) o.detail = fmt::format("2000 matrices up to 8x8, {} train times", rows);
  return o;
}

Outcome disentanglement() {
  Outcome o;
  const MetricConfig cfg;
  const auto suite = scenario_suite();
  auto find = [&](std::string_view name) -> const ScenarioSpec& {
    for (const auto& s : suite) {
      if (s.spec.name == name) return s.spec;
    }
    throw Error(ErrorKind::Config, fmt::format("missing scenario {}", name));
  };
  auto evaluate = [&](const ScenarioSpec& s) {
    const auto m = generate(s);
    const auto r = evaluate_model(m, cfg);
    return std::pair{r, mean_id_ood_gap(timeline_series(r, m))};
  };
  for (const auto& s : suite) {
    if (s.signature != Signature::PureDifficulty) continue;
    const auto [r, gap] = evaluate(s.spec);
    for (const auto& v : r.tas.per_train_time) {
      if (v.tas != 1.0) o.fail(fmt::format("{}: TAS {}", s.spec.name, v.tas));
    }
  }
  const auto [rd, gap_d] = evaluate(find("gap-matched-difficulty"));
  const auto [rl, gap_l] = evaluate(find("gap-matched-lag"));
  if (gap_d <= 0.15) o.fail(fmt::format("difficulty gap {} not above 0.15", gap_d));
  for (const auto& v : rd.tas.per_train_time) {
    if (v.tas != 1.0) o.fail(fmt::format("gap-matched-difficulty TAS {}", v.tas));
  }
  if (std::abs(gap_d - gap_l) > kGapMatchTolerance) o.fail(fmt::format("gaps {} vs {}", gap_d, gap_l));
  const double drop = rd.tas.mean_tas - rl.tas.mean_tas;
  if (drop < 0.2) o.fail(fmt::format("TAS drop {}", drop));
  if (o.passed) {
    o.detail = fmt::format("gap {:.6f} vs {:.6f}, TAS {:.4f} vs {:.4f}", gap_d, gap_l, rd.tas.mean_tas,
                           rl.tas.mean_tas);
  }
  return o;
}

Outcome scale_invariance() {
  Outcome o;
  std::mt19937_64 rng(4);
  const double c = 0.5;
  for (int i = 0; i < 1000; ++i) {
    const auto m = testing::random_matrix(rng);
    const auto cfg = testing::random_config(rng);
    AccuracyMatrix scaled(m.model_name(), m.axis());
    for (TimeIndex t = 0; t < m.size(); ++t) {
      for (TimeIndex e = 0; e < m.size(); ++e) {
        if (auto v = m.at(t, e)) scaled.set(t, e, *v * c);
      }
    }
    auto scaled_cfg = cfg;
    scaled_cfg.epsilon *= c;
    scaled_cfg.lambda *= c;
    const auto g = compute_ttr(m, cfg);
    const auto gs = compute_ttr(scaled, cfg);
    if (!(g == gs)) o.fail("TTR changed");
    const auto grid = testing::to_grid(m);
    for (TimeIndex t = 0; t < m.size(); ++t) {
      if (g.at(t, t) && stability_horizon(g, t, cfg) != stability_horizon(gs, t, cfg)) o.fail("SH changed");
      if (m.at(t, t) && drift_horizon(m, t, cfg) != drift_horizon(scaled, t, scaled_cfg)) o.fail("DH changed");
      if (testing::naive::tas(grid, t, cfg) &&
          temporal_adaptation_score(m, t, cfg).tas != temporal_adaptation_score(scaled, t, cfg).tas) {
        o.fail("TAS changed");
      }
    }
  }
  if (o.passed) o.detail = "1000 matrices, TTR/SH/TAS bit-identical, DH equal under scaled thresholds";
  return o;
}

Outcome plumbing() {
  Outcome o;
  std::mt19937_64 rng(5);
  testing::RandomMatrixOptions opt;
  opt.presence = 0.5;
  opt.odd_labels = true;
  for (int i = 0; i < 1000; ++i) {
    const auto m = testing::random_matrix(rng, opt);
    if (!(parse_matrix(serialize_matrix(m, MatrixFormat::Csv), MatrixFormat::Csv, m.model_name()) == m)) {
      o.fail("CSV round-trip differs");
    }
    if (!(parse_matrix(serialize_matrix(m, MatrixFormat::Json), MatrixFormat::Json) == m)) {
      o.fail("JSON round-trip differs");
    }
  }

  constexpr std::size_t n = 1000;
  AccuracyMatrix dense("dense", TimeAxis(labels(n)));
  std::uniform_real_distribution<double> unit(0.5, 1.0);
  for (TimeIndex t = 0; t < n; ++t) {
    for (TimeIndex e = 0; e < n; ++e) dense.set(t, e, unit(rng));
  }
  const auto start = Clock::now();
  const auto report = evaluate_model(dense, MetricConfig{});
  const auto doc = report_to_json(report).dump();
  const auto secs = seconds_since(start);
  if (report.train_times.size() != n - 1) o.fail(fmt::format("{} train times evaluated", report.train_times.size()));
  if (secs >= 1.0) o.fail(fmt::format("1000x1000 report took {:.3f} s", secs));
  if (o.passed) o.detail = fmt::format("1000 CSV+JSON round-trips exact; 1000x1000 report in {:.3f} s", secs);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"horizon means from per-year records (5.1 / 6.4)", published_horizon_means},
      {"TTR clipping on 1000 random matrices", clipping},
      {"CUSUM and stability hand traces", hand_traces},
      {"monotonicity in delta, lambda, epsilon and SH mode", monotonicity},
      {"kernels equal naive enumeration up to 8x8", naive_equivalence},
      {"difficulty vs lag disentanglement", disentanglement},
      {"scale invariance with c = 0.5", scale_invariance},
      {"CSV/JSON round-trips and 1000x1000 runtime", plumbing},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(fmt::format("exception: {}", e.what()));
    }
    if (!o.passed) ++failures;
    std::printf("%s criterion %zu: %s -- %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
