// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <string>

#include "tadapt/error.hpp"
#include "tadapt/metric_report.hpp"
#include "tadapt/report.hpp"
#include "tadapt/scenario.hpp"
#include "test_support.hpp"

using namespace tadapt;

namespace {

bool contains(const std::string& haystack, std::string_view needle) {
  return haystack.find(needle) != std::string::npos;
}

AccuracyMatrix two_by_two(std::string name, double id0, double ood, double id1) {
  AccuracyMatrix m(std::move(name), TimeAxis({"y0", "y1"}));
  m.set(0, 0, id0);
  m.set(0, 1, ood);
  m.set(1, 1, id1);
  return m;
}

ScenarioSpec scenario(double difficulty, double lag) {
  ScenarioSpec s;
  s.periods = 8;
  s.base_acc = 0.9;
  s.difficulty_rate = difficulty;
  s.lag_rate = lag;
  return s;
}

}  // namespace

TEST_SUITE("reporting") {
  TEST_CASE("percent and horizon formatting") {
    CHECK(format_percent(0.759) == "75.9%");
    CHECK(format_percent(0.978) == "97.8%");
    CHECK(format_percent(0.893) == "89.3%");
    CHECK(format_percent(1.0) == "100.0%");
    CHECK(format_horizon(5.1, "years") == "5.1 years");
    CHECK(format_horizon(6.4, "steps") == "6.4 steps");
  }

  TEST_CASE("column names round-trip") {
    for (auto c : all_columns()) CHECK(column_from_name(column_name(c)) == c);
    CHECK_FALSE(column_from_name("bogus"));
    CHECK(default_columns().size() == 5);
  }

  TEST_CASE("comparison table formats cells and is deterministic") {
    const MetricConfig cfg;
    std::vector<MetricReport> reports = {evaluate_model(two_by_two("a", 0.978, 0.893, 0.95), cfg),
                                         evaluate_model(two_by_two("b", 0.8, 0.6, 0.8), cfg)};
    const auto cols = all_columns();
    const auto t1 = comparison_table(reports, cols, "years");
    const auto t2 = comparison_table(reports, cols, "years");
    CHECK(t1.to_text() == t2.to_text());
    CHECK(t1.to_csv() == t2.to_csv());
    CHECK(t1.to_json().dump() == t2.to_json().dump());
    REQUIRE(t1.models == std::vector<std::string>{"a", "b"});
    CHECK(t1.rows[0][0].text == "96.4%");  // mean of 0.978 and 0.95
    CHECK(t1.rows[0][1].text == "89.3%");
    CHECK(t1.rows[1][3].text == "75.0%");
    const auto text = t1.to_text();
    CHECK(contains(text, "ID"));
    CHECK(contains(text, "DH-avg"));
    CHECK(contains(text, " | "));
    CHECK(contains(text, "years"));
  }

  TEST_CASE("truncated horizons are starred with a footnote and flagged in JSON") {
    const MetricConfig cfg;
    std::vector<MetricReport> reports = {evaluate_model(two_by_two("flat", 0.9, 0.9, 0.9), cfg)};
    const std::vector<Column> cols = {Column::ShAvg, Column::DhAvg, Column::TasAvg};
    const auto t = comparison_table(reports, cols);
    CHECK(t.any_truncated());
    CHECK(t.rows[0][0].text == "1.0 steps*");
    CHECK(t.rows[0][1].text == "7.0 steps*");
    CHECK(contains(t.to_text(), "* mean includes truncated horizons"));
    const auto j = t.to_json();
    CHECK(j.dump().find("includes_truncated") != std::string::npos);
    CHECK(contains(j.dump(), "true"));

    // A row that dips below delta ends SH without truncation and DH fires.
    std::vector<MetricReport> dipped = {evaluate_model(two_by_two("dip", 0.9, 0.3, 0.9), cfg)};
    const auto td = comparison_table(dipped, cols);
    CHECK_FALSE(td.any_truncated());
    CHECK(td.rows[0][0].text == "0.0 steps");
    CHECK_FALSE(contains(td.to_text(), "truncated"));
  }

  TEST_CASE("comparison table rejects mixed configs and empty input") {
    MetricConfig a;
    MetricConfig b;
    b.delta = 0.7;
    std::vector<MetricReport> reports = {evaluate_model(two_by_two("a", 0.9, 0.8, 0.9), a),
                                         evaluate_model(two_by_two("b", 0.9, 0.8, 0.9), b)};
    const auto cols = default_columns();
    try {
      comparison_table(reports, cols);
      FAIL("mixed configs accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      CHECK(contains(e.what(), "mixed configs"));
    }
    std::vector<MetricReport> none;
    CHECK_THROWS_AS(comparison_table(none, cols), Error);
  }

  TEST_CASE("accuracy heatmap tags") {
    AccuracyMatrix m("m", TimeAxis({"0", "1", "2"}));
    m.set(0, 0, 0.9);
    m.set(1, 1, 0.8);
    m.set(2, 2, 0.7);
    const auto h = heatmap_data(m);
    CHECK(h.kind == "accuracy");
    CHECK(h.tags[0][0] == "value");
    CHECK(h.tags[0][1] == "non-evaluated");
    CHECK_FALSE(h.values[0][1]);
    const auto j = h.to_json();
    CHECK(j["values"][0][1].is_null());
    CHECK(heatmap_data(m).to_csv() == h.to_csv());
  }

  TEST_CASE("ttr heatmap centers on delta and marks undefined oracles") {
    AccuracyMatrix m("m", TimeAxis({"0", "1", "2", "3"}));
    m.set(0, 0, 0.9);
    m.set(1, 1, 1.0);
    m.set(0, 1, 0.6);  // g = 0.6 exactly
    m.set(2, 2, 0.0);
    m.set(0, 2, 0.5);
    m.set(0, 3, 0.1);
    m.set(3, 3, 0.5);
    m.set(1, 3, 0.45);
    const MetricConfig cfg;
    const auto h = heatmap_data(compute_ttr(m, cfg), cfg.delta);
    CHECK(h.kind == "ttr");
    CHECK(h.center == 0.6);
    CHECK(h.tags[0][1] == "at-center");
    CHECK(h.tags[0][0] == "above-center");
    CHECK(h.tags[0][2] == "undefined-oracle");
    CHECK(h.tags[0][3] == "below-center");
    CHECK(h.tags[1][3] == "above-center");
    CHECK(h.tags[1][2] == "non-evaluated");
    CHECK(h.tags[2][2] == "undefined-oracle");
  }

  TEST_CASE("diagonal-only ttr heatmap") {
    AccuracyMatrix m("m", TimeAxis({"0", "1", "2"}));
    for (TimeIndex t = 0; t < 3; ++t) m.set(t, t, 0.5 + 0.1 * static_cast<double>(t));
    const auto h = heatmap_data(compute_ttr(m, MetricConfig{}), 0.6);
    for (TimeIndex t = 0; t < 3; ++t) {
      for (TimeIndex e = 0; e < 3; ++e) {
        if (t == e) {
          CHECK(h.values[t][e] == 1.0);
          CHECK(h.tags[t][e] == "above-center");
        } else {
          CHECK(h.tags[t][e] == "non-evaluated");
        }
      }
    }
  }

  TEST_CASE("timeline on synthetic regimes") {
    const MetricConfig cfg;
    SUBCASE("stationary: flat and gap-free") {
      const auto m = generate(scenario(0.0, 0.0));
      const auto tl = timeline_series(evaluate_model(m, cfg), m);
      REQUIRE(tl.points.size() == 7);
      for (const auto& p : tl.points) {
        CHECK(p.id == 0.9);
        CHECK(p.ood == 0.9);
        CHECK(p.tas == 1.0);
      }
      CHECK(mean_id_ood_gap(tl) == 0.0);
    }
    SUBCASE("pure difficulty: ID decays, TAS stays at 1") {
      const auto m = generate(scenario(0.05, 0.0));
      const auto tl = timeline_series(evaluate_model(m, cfg), m);
      for (std::size_t i = 1; i < tl.points.size(); ++i) CHECK(tl.points[i].id < tl.points[i - 1].id);
      for (const auto& p : tl.points) CHECK(p.tas == 1.0);
      CHECK(mean_id_ood_gap(tl) > 0.0);
    }
    SUBCASE("pure lag: ID flat, TAS below 1") {
      const auto m = generate(scenario(0.0, 0.08));
      const auto tl = timeline_series(evaluate_model(m, cfg), m);
      for (const auto& p : tl.points) {
        CHECK(p.id == 0.9);
        CHECK(p.ood < p.id);
        CHECK(p.tas < 1.0);
      }
      CHECK(tl.to_json()["series"].size() == tl.points.size());
      CHECK(contains(tl.to_csv(), "label"));
    }
  }

  TEST_CASE("timeline rejects a matrix that does not match the report") {
    const MetricConfig cfg;
    const auto m = generate(scenario(0.0, 0.05));
    auto other = generate(scenario(0.0, 0.05));
    const auto r = evaluate_model(m, cfg);
    AccuracyMatrix renamed("other", m.axis());
    for (TimeIndex t = 0; t < m.size(); ++t) {
      for (TimeIndex e = 0; e < m.size(); ++e) {
        if (auto v = m.at(t, e)) renamed.set(t, e, *v);
      }
    }
    try {
      timeline_series(r, renamed);
      FAIL("mismatch accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Mismatch);
    }
    other.erase(0, 0);
    CHECK_THROWS_AS(timeline_series(r, other), Error);
  }

  TEST_CASE("report JSON round-trip over random matrices") {
    std::mt19937_64 rng(99);
    int evaluated = 0;
    for (int i = 0; i < 300; ++i) {
      const auto m = testing::random_matrix(rng);
      const auto cfg = testing::random_config(rng);
      MetricReport r;
      try {
        r = evaluate_model(m, cfg);
      } catch (const Error&) {
        continue;
      }
      ++evaluated;
      const auto text = report_to_json(r).dump();
      REQUIRE(report_from_json(nlohmann::json::parse(text)) == r);
      CHECK(report_to_json(r).dump() == text);
      CHECK(report_to_text(r) == report_to_text(r));
      CHECK_FALSE(report_to_csv(r).empty());
    }
    CHECK(evaluated > 50);
  }

  TEST_CASE("report JSON with tampered aggregates is rejected") {
    const auto r = evaluate_model(two_by_two("a", 0.9, 0.8, 0.9), MetricConfig{});
    auto j = nlohmann::json::parse(report_to_json(r).dump());
    j["aggregates"]["tas_mean"] = 0.1;
    CHECK_THROWS_AS(report_from_json(j), Error);
  }

  TEST_CASE("config JSON overlay") {
    MetricConfig base;
    const auto cfg = config_from_json(nlohmann::json::parse(R"({"delta": 0.7, "sh_mode": "literal-max"})"), base);
    CHECK(cfg.delta == 0.7);
    CHECK(cfg.sh_mode == ShMode::LiteralMax);
    CHECK(cfg.epsilon == base.epsilon);
    CHECK(config_from_json(nlohmann::json::parse(config_to_json(cfg).dump())) == cfg);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"nope": 1})")), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"delta": "x"})")), Error);
  }
}
