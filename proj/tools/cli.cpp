// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tadapt/accuracy_matrix.hpp"
#include "tadapt/error.hpp"
#include "tadapt/metric_report.hpp"
#include "tadapt/metrics.hpp"
#include "tadapt/report.hpp"
#include "tadapt/scenario.hpp"

namespace tadapt::cli {

namespace {

namespace fs = std::filesystem;

// Raw flag values; only flags the user passed override the config file.
struct ConfigFlags {
  std::string config_file;
  double delta = 0;
  double epsilon = 0;
  double lambda = 0;
  std::size_t max_horizon = 0;
  std::size_t tas_window = 0;
  std::string sh_mode;
  bool clip_ttr = true;
  std::string tas_mode;
  std::map<std::string, std::vector<CLI::Option*>> options;  // one option per subcommand
};

std::string flag_help(std::string_view name) {
  for (const auto& f : config_fields()) {
    if (f.name == name) return fmt::format("{} (default: {})", f.description, f.default_value);
  }
  return {};
}

void add_config_flags(CLI::App& app, ConfigFlags& flags) {
  app.add_option("--config", flags.config_file, "JSON file with MetricConfig fields; flags override it");
  auto& o = flags.options;
  o["delta"].push_back(app.add_option("--delta", flags.delta, flag_help("delta")));
  o["epsilon"].push_back(app.add_option("--epsilon", flags.epsilon, flag_help("epsilon")));
  o["lambda"].push_back(app.add_option("--lambda", flags.lambda, flag_help("lambda")));
  o["max_horizon"].push_back(app.add_option("--max-horizon", flags.max_horizon, flag_help("max_horizon")));
  o["tas_window"].push_back(app.add_option("--tas-window", flags.tas_window, flag_help("tas_window")));
  o["sh_mode"].push_back(app.add_option("--sh-mode", flags.sh_mode, flag_help("sh_mode")));
  o["clip_ttr"].push_back(app.add_option("--clip-ttr", flags.clip_ttr, flag_help("clip_ttr")));
  o["tas_mode"].push_back(app.add_option("--tas-mode", flags.tas_mode, flag_help("tas_mode")));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, fmt::format("{}: cannot open file", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: malformed JSON: {}", path, e.what()));
  }
}

MetricConfig resolve_config(const ConfigFlags& flags) {
  MetricConfig cfg;
  if (!flags.config_file.empty()) {
    try {
      cfg = config_from_json(read_json_file(flags.config_file), cfg);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{}: {}", flags.config_file, e.what()));
    }
  }
  auto given = [&](const char* name) {
    const auto& opts = flags.options.at(name);
    return std::any_of(opts.begin(), opts.end(), [](const CLI::Option* o) { return o->count() > 0; });
  };
  if (given("delta")) cfg.delta = flags.delta;
  if (given("epsilon")) cfg.epsilon = flags.epsilon;
  if (given("lambda")) cfg.lambda = flags.lambda;
  if (given("max_horizon")) cfg.max_horizon = flags.max_horizon;
  if (given("tas_window")) cfg.tas_window = flags.tas_window;
  if (given("sh_mode")) {
    auto mode = sh_mode_from_name(flags.sh_mode);
    if (!mode) throw Error(ErrorKind::Config, fmt::format("--sh-mode: unknown mode '{}'", flags.sh_mode));
    cfg.sh_mode = *mode;
  }
  if (given("clip_ttr")) cfg.clip_ttr = flags.clip_ttr;
  if (given("tas_mode")) {
    auto mode = tas_mode_from_name(flags.tas_mode);
    if (!mode) throw Error(ErrorKind::Config, fmt::format("--tas-mode: unknown mode '{}'", flags.tas_mode));
    cfg.tas_mode = *mode;
  }
  cfg.validate();
  return cfg;
}

MatrixFormat detect_format(const std::string& path, const std::string& content, const std::string& forced) {
  if (!forced.empty()) {
    auto f = format_from_name(forced);
    if (!f) throw Error(ErrorKind::Config, fmt::format("--input-format: unknown format '{}'", forced));
    return *f;
  }
  const auto ext = fs::path(path).extension().string();
  if (ext == ".csv") return MatrixFormat::Csv;
  if (ext == ".json") return MatrixFormat::Json;
  const auto first = content.find_first_not_of(" \t\r\n");
  return first != std::string::npos && content[first] == '{' ? MatrixFormat::Json : MatrixFormat::Csv;
}

AccuracyMatrix load_matrix(const std::string& path, const std::string& forced_format) {
  const auto content = read_file(path);
  try {
    return parse_matrix(content, detect_format(path, content, forced_format), fs::path(path).stem().string());
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path, e.what()));
  }
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
  void write(const std::string& doc) {
    if (path_.empty()) {
      fallback_ << doc;
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw Error(ErrorKind::Config, fmt::format("{}: cannot open for writing", path_));
    f << doc;
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

void require_format(const std::string& format, std::initializer_list<std::string_view> allowed) {
  if (std::find(allowed.begin(), allowed.end(), format) == allowed.end()) {
    throw Error(ErrorKind::Config, fmt::format("--format: '{}' not supported by this subcommand", format));
  }
}

int exit_code(ErrorKind kind) { return kind == ErrorKind::Precondition ? kExitPrecondition : kExitInvalidInput; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal adaptation metrics: transfer ratio, stability horizon, drift horizon, adaptation score",
               "tadapt"};
  app.require_subcommand(1);
  bool show_version = false;
  app.add_flag("--version", show_version, "print the version string and exit");

  std::string format = "text";
  std::string output_path;
  std::string input_format;
  auto add_io = [&](CLI::App& sub, std::string default_format, std::string formats) {
    sub.add_option("--format", format, fmt::format("output format: {} (default: {})", formats, default_format));
    sub.add_option("-o,--output", output_path, "write the document to this file instead of stdout");
    return default_format;
  };

  ConfigFlags flags;
  std::vector<std::string> inputs;
  std::string unit = "steps";
  std::string columns_arg;
  std::optional<double> center;
  bool series = false;

  auto* evaluate = app.add_subcommand("evaluate", "compute SH, DH and TAS for one accuracy matrix");
  auto evaluate_default = add_io(*evaluate, "text", "text|json|csv");
  evaluate->add_option("matrix", inputs, "accuracy matrix file (.csv or .json)")->required()->expected(1);
  evaluate->add_option("--input-format", input_format, "override input format detection: csv|json");
  evaluate->add_option("--unit", unit, "horizon unit label (default: steps)");
  evaluate->add_flag("--series", series, "emit the per-t ID/OOD/TAS timeline instead of the report");
  add_config_flags(*evaluate, flags);

  auto* compare = app.add_subcommand("compare", "comparison table over matrices or evaluate --format json reports");
  auto compare_default = add_io(*compare, "text", "text|json|csv");
  compare->add_option("inputs", inputs, "matrix or report files, one per model")->required();
  compare->add_option("--input-format", input_format, "override matrix format detection: csv|json");
  compare->add_option("--columns", columns_arg,
                      "comma-separated columns among ID,OOD,OOD-min,TAS-avg,TAS-min,SH-avg,DH-avg "
                      "(default: ID,OOD,TAS-avg,SH-avg,DH-avg)");
  compare->add_option("--unit", unit, "horizon unit label (default: steps)");
  add_config_flags(*compare, flags);

  auto* ttr = app.add_subcommand("ttr", "transfer-ratio heatmap data for one accuracy matrix");
  auto ttr_default = add_io(*ttr, "json", "json|csv");
  ttr->add_option("matrix", inputs, "accuracy matrix file (.csv or .json)")->required()->expected(1);
  ttr->add_option("--input-format", input_format, "override input format detection: csv|json");
  ttr->add_option("--center", center, "colormap center (default: delta)");
  add_config_flags(*ttr, flags);

  auto* synth = app.add_subcommand("synth", "generate a synthetic accuracy matrix from a scenario JSON file");
  auto synth_default = add_io(*synth, "csv", "csv|json");
  synth->add_option("spec", inputs, "scenario spec file (.json)")->required()->expected(1);

  auto* suite = app.add_subcommand("suite", "run the canonical scenario suite and check each signature");
  auto suite_default = add_io(*suite, "text", "text|json");
  add_config_flags(*suite, flags);

  // CLI11 consumes arguments in reverse order.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    if (std::find(args.begin(), args.end(), "--version") != args.end() &&
        std::find(args.begin(), args.end(), "--help") == args.end()) {
      out << kVersion << "\n";
      return kExitOk;
    }
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::string help;
    for (auto* sub : app.get_subcommands()) help = sub->help();
    out << (help.empty() ? app.help() : help);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }

  try {
    Output sink(output_path, out);
    const bool format_given = [&] {
      for (auto* sub : app.get_subcommands()) {
        if (sub->get_option("--format")->count() > 0) return true;
      }
      return false;
    }();

    if (evaluate->parsed()) {
      if (!format_given) format = evaluate_default;
      require_format(format, {"text", "json", "csv"});
      const auto cfg = resolve_config(flags);
      const auto m = load_matrix(inputs.front(), input_format);
      const auto report = evaluate_model(m, cfg);
      if (series) {
        const auto tl = timeline_series(report, m);
        sink.write(format == "csv" ? tl.to_csv() : dump(tl.to_json()));
      } else if (format == "json") {
        sink.write(dump(report_to_json(report)));
      } else if (format == "csv") {
        sink.write(report_to_csv(report));
      } else {
        sink.write(report_to_text(report, unit));
      }
    } else if (compare->parsed()) {
      if (!format_given) format = compare_default;
      require_format(format, {"text", "json", "csv"});
      const auto cfg = resolve_config(flags);
      std::vector<Column> columns = default_columns();
      if (!columns_arg.empty()) {
        columns.clear();
        std::stringstream ss(columns_arg);
        std::string name;
        while (std::getline(ss, name, ',')) {
          auto c = column_from_name(name);
          if (!c) throw Error(ErrorKind::Config, fmt::format("--columns: unknown column '{}'", name));
          columns.push_back(*c);
        }
      }
      std::vector<MetricReport> reports;
      for (const auto& path : inputs) {
        const auto content = read_file(path);
        if (input_format.empty() && detect_format(path, content, "") == MatrixFormat::Json) {
          auto j = read_json_file(path);
          if (j.is_object() && j.contains("per_train_time")) {
            try {
              reports.push_back(report_from_json(j));
            } catch (const Error& e) {
              throw Error(e.kind(), fmt::format("{}: {}", path, e.what()));
            }
            continue;
          }
        }
        const auto m = load_matrix(path, input_format);
        try {
          reports.push_back(evaluate_model(m, cfg));
        } catch (const Error& e) {
          throw Error(e.kind(), fmt::format("{}: {}", path, e.what()));
        }
      }
      const auto table = comparison_table(reports, columns, unit);
      if (format == "json") {
        sink.write(dump(table.to_json()));
      } else if (format == "csv") {
        sink.write(table.to_csv());
      } else {
        sink.write(table.to_text());
      }
    } else if (ttr->parsed()) {
      if (!format_given) format = ttr_default;
      require_format(format, {"json", "csv"});
      const auto cfg = resolve_config(flags);
      const auto m = load_matrix(inputs.front(), input_format);
      auto grid = heatmap_data(compute_ttr(m, cfg), center.value_or(cfg.delta));
      grid.model_name = m.model_name();
      sink.write(format == "csv" ? grid.to_csv() : dump(grid.to_json()));
    } else if (synth->parsed()) {
      if (!format_given) format = synth_default;
      require_format(format, {"csv", "json"});
      ScenarioSpec spec;
      try {
        spec = scenario_from_json(read_json_file(inputs.front()));
      } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("{}: {}", inputs.front(), e.what()));
      }
      sink.write(serialize_matrix(generate(spec), *format_from_name(format)));
    } else if (suite->parsed()) {
      if (!format_given) format = suite_default;
      require_format(format, {"text", "json"});
      const auto cfg = resolve_config(flags);
      const auto scenarios = scenario_suite();
      const auto outcomes = run_suite(scenarios, cfg);
      bool all_ok = true;
      if (format == "json") {
        nlohmann::ordered_json doc = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          nlohmann::ordered_json checks = nlohmann::ordered_json::array();
          for (const auto& c : outcomes[i].checks) {
            checks.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
          }
          doc.push_back({{"scenario", scenario_to_json(scenarios[i].spec)},
                         {"expectation", scenarios[i].expectation},
                         {"passed", outcomes[i].passed()},
                         {"checks", std::move(checks)}});
          all_ok = all_ok && outcomes[i].passed();
        }
        sink.write(dump(doc));
      } else {
        std::string text;
        for (const auto& o : outcomes) {
          text += fmt::format("{} {}\n", o.passed() ? "PASS" : "FAIL", o.name);
          for (const auto& c : o.checks) {
            text += fmt::format("  [{}] {}{}\n", c.passed ? "ok" : "FAIL", c.name,
                                c.detail.empty() ? "" : fmt::format(" ({})", c.detail));
          }
          all_ok = all_ok && o.passed();
        }
        sink.write(text);
      }
      return all_ok ? kExitOk : kExitPrecondition;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  return kExitOk;
}

}  // namespace tadapt::cli
