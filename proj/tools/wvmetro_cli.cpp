// Copyright 2026 The wvmetro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver for analytic and Monte Carlo sweeps.
//
//   wvmetro sweep <config> [--out PATH]
//   wvmetro preset <name> --out <path> [--mode M] [--seed S] [--trials M] [--particles N]
//   wvmetro compare <config> [--out PATH]
//
// Exit codes: 0 success, 1 failed oracle comparison, 2 config error, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wvmetro/sweep.hpp"

namespace {

using namespace wvmetro;

constexpr int kExitCompareFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

Mode parse_mode(const std::string& s) {
  if (s == "analytic") return Mode::Analytic;
  if (s == "montecarlo") return Mode::MonteCarlo;
  if (s == "both") return Mode::Both;
  throw ConfigError("invalid mode '" + s + "'");
}

OutputFormat format_for(const std::string& path, std::optional<std::string> flag) {
  if (flag) {
    if (*flag == "csv") return OutputFormat::Csv;
    if (*flag == "json") return OutputFormat::Json;
    throw ConfigError("invalid format '" + *flag + "'");
  }
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0 ? OutputFormat::Json
                                                                             : OutputFormat::Csv;
}

void report(const SeriesFile& file) {
  std::size_t singular = 0;
  for (const auto& r : file.rows) singular += r.singular ? 1 : 0;
  std::cerr << "wrote " << file.rows.size() << " rows (" << singular << " singular) to "
            << file.config.output << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-measurement metrology sweeps: analytic estimators and Monte Carlo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config_path;
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: WVMETRO_THREADS or all cores)");

  auto* sweep = app.add_subcommand("sweep", "Run the sweep described by a config file");
  sweep->add_option("config", config_path, "Config file")->required();
  std::string sweep_out;
  sweep->add_option("--out", sweep_out, "Override the output path");

  auto* preset = app.add_subcommand("preset", "Run a built-in figure preset");
  std::string preset_name, preset_out, mode_flag;
  std::optional<std::string> format_flag;
  std::optional<std::uint64_t> seed;
  std::optional<Count> trials, particles;
  bool print_config = false;
  preset->add_option("name", preset_name, "Preset name")
      ->required()
      ->check(CLI::IsMember(preset_names()));
  preset->add_option("--out", preset_out, "Output path (.csv or .json)");
  preset->add_option("--mode", mode_flag, "analytic, montecarlo or both")
      ->check(CLI::IsMember({"analytic", "montecarlo", "both"}));
  preset->add_option("--format", format_flag, "csv or json (default: from the extension)");
  preset->add_option("--seed", seed, "Master seed");
  preset->add_option("--trials", trials, "Monte Carlo trials per point");
  preset->add_option("--particles", particles, "Particles per trial");
  preset->add_flag("--print-config", print_config, "Print the preset config and exit");

  auto* compare = app.add_subcommand("compare", "Oracle comparison at every axis point");
  compare->add_option("config", config_path, "Config file")->required();
  std::string compare_out;
  compare->add_option("--out", compare_out, "Write the report here instead of the config output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sweep) {
      SweepConfig cfg = load_config(config_path);
      if (!sweep_out.empty()) cfg.output = sweep_out;
      if (cfg.output.empty()) throw ConfigError("no output path: set output or pass --out");
      const SeriesFile file = run_sweep(cfg, threads);
      write_series(file);
      report(file);
      return 0;
    }
    if (*preset) {
      SweepConfig cfg = figure_preset(preset_name);
      if (!mode_flag.empty()) cfg.mode = parse_mode(mode_flag);
      if (seed) cfg.seed = *seed;
      if (trials) cfg.trials = *trials;
      if (particles) cfg.particles = *particles;
      cfg.output = preset_out;
      cfg.format = format_for(preset_out, format_flag);
      cfg.validate();
      if (print_config) {
        std::cout << emit_config(cfg);
        return 0;
      }
      if (preset_out.empty()) throw ConfigError("preset needs --out <path>");
      const SeriesFile file = run_sweep(cfg, threads);
      write_series(file);
      report(file);
      return 0;
    }
    if (*compare) {
      SweepConfig cfg = load_config(config_path);
      if (!compare_out.empty()) cfg.output = compare_out;
      const auto rows = run_compare(cfg, threads);
      const std::string text = format_compare(cfg, rows);
      if (cfg.output.empty()) {
        std::cout << text;
      } else {
        write_atomic(cfg.output, text);
      }
      bool all_pass = true;
      for (const auto& r : rows) {
        if (r.report && !r.report->all_pass) all_pass = false;
      }
      std::cerr << (all_pass ? "all checks passed" : "some checks failed") << "\n";
      return all_pass ? 0 : kExitCompareFailed;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
