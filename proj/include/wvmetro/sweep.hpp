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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wvmetro/analytic.hpp"
#include "wvmetro/noise.hpp"
#include "wvmetro/oracle.hpp"

namespace wvmetro {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

enum class Mode { Analytic, MonteCarlo, Both };
enum class OutputFormat { Csv, Json };
enum class Family { Real, Imaginary, Tilted };
enum class Quantity { Amplification, Snr, EffFi, FTot, WeakValueRe };
enum class AxisScale { Linear, Log };

/// Parameters an axis can sweep.
enum class Parameter { Theta, Phi, G, J, Jp, N, Beta };

std::string_view to_string(Mode m);
std::string_view to_string(OutputFormat f);
std::string_view to_string(Family f);
std::string_view to_string(Quantity q);
std::string_view to_string(AxisScale s);
std::string_view to_string(Parameter p);

struct AxisSpec {
  Parameter parameter = Parameter::Theta;
  double from = 0.0;
  double to = 1.0;
  int steps = 2;
  AxisScale scale = AxisScale::Linear;

  /// Inclusive grid of `steps` points, geometric for AxisScale::Log.
  std::vector<double> values() const;
  bool operator==(const AxisSpec&) const = default;
};

/// The physical system at a sweep point before the axis values are applied.
struct SystemSpec {
  Family family = Family::Real;
  double theta = 0.7853981633974483;
  double phi = 0.7853981633974483;
  /// Relative phase of the |2> amplitude of the tilted post-selection
  /// cos(theta/2)|1> + e^{i tilt} sin(theta/2)|2>.
  double tilt = 0.0;
  double g = 0.01;
  double d = 1.0;
  Basis basis = Basis::X;
  NoiseKind noise = NoiseKind::None;
  double noise_width = 0.0;
  double beta = 1.0;

  bool operator==(const SystemSpec&) const = default;
};

/// One output column group.
struct SeriesSpec {
  std::string name;
  Scheme scheme = Scheme::JWM;
  Quantity quantity = Quantity::Snr;
  std::optional<double> beta;  // overrides the system beta
  Branch branch = Branch::PSA;  // WVA branch
  std::optional<double> g;      // overrides the system g

  bool operator==(const SeriesSpec&) const = default;
};

struct SweepConfig {
  Mode mode = Mode::Analytic;
  AxisSpec axis;
  std::optional<AxisSpec> axis2;
  SystemSpec system;
  std::vector<SeriesSpec> series;
  std::string output;
  OutputFormat format = OutputFormat::Csv;
  std::uint64_t seed = 1;
  Count trials = 200;
  Count particles = 10000;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  bool operator==(const SweepConfig&) const = default;
};

/// Parses the flat `key = value` format with [sweep], [system] and
/// [series <name>] sections. Throws ConfigError with the line number.
SweepConfig parse_config(std::string_view text);
SweepConfig load_config(const std::string& path);
/// Canonical text form; parse_config(emit_config(c)) == c.
std::string emit_config(const SweepConfig& cfg);

/// Throws UnknownPreset.
SweepConfig figure_preset(std::string_view name);
std::vector<std::string> preset_names();

struct SeriesValue {
  std::optional<double> raw;
  std::optional<double> scaled;
  std::optional<double> mc;
  std::optional<double> mc_se;
  std::optional<double> mc_scaled;
};

struct SeriesRow {
  double axis_value = 0.0;
  std::optional<double> axis2_value;
  std::optional<double> p_f;
  std::optional<double> re_aw;
  std::optional<double> im_aw;
  bool singular = false;
  std::vector<SeriesValue> values;  // one per series
};

struct SeriesFile {
  SweepConfig config;
  std::vector<std::string> columns;
  std::vector<SeriesRow> rows;
};

/// The system configuration at a parameter point.
SystemConfig build_system(const SystemSpec& spec);
/// Noise model implied by a system spec.
NoiseSpec build_noise(const SystemSpec& spec);

/// Evaluates every axis point. Rows follow axis order (axis2 fastest).
SeriesFile run_sweep(const SweepConfig& cfg, unsigned workers = 0);

std::string format_csv(const SeriesFile& file);
std::string format_json(const SeriesFile& file);
/// Writes to path via a temporary file and rename; throws IoError.
void write_atomic(const std::string& path, const std::string& contents);
/// Formats per cfg.format and writes to cfg.output.
void write_series(const SeriesFile& file);

struct CompareRow {
  double axis_value = 0.0;
  std::optional<double> axis2_value;
  std::optional<ComparisonReport> report;  // empty when the point is singular
  std::string note;
};

/// Runs oracle_compare at every axis point with the system's basis, noise and
/// beta, using cfg.trials and cfg.particles.
std::vector<CompareRow> run_compare(const SweepConfig& cfg, unsigned workers = 0);
std::string format_compare(const SweepConfig& cfg, const std::vector<CompareRow>& rows);

/// Compact 17-significant-digit rendering used in every output.
std::string format_number(double v);

}  // namespace wvmetro
