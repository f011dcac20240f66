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

#include "wvmetro/sweep.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oracle_util.hpp"

namespace {

using namespace wvmetro;
using wvtest::kPi;

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "wvmetro_sweep_test";
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

std::size_t column(const SeriesFile& f, const std::string& name) {
  for (std::size_t i = 0; i < f.columns.size(); ++i) {
    if (f.columns[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

const char* kThetaSweep = R"(
# JWM and WVA SNR against theta
[sweep]
axis = theta
from = 0.1
to = 3.0
steps = 50
mode = analytic
particles = 10000
output = out.csv

[system]
family = real
g = 0.01

[series jwm]
scheme = jwm
quantity = snr

[series wva]
scheme = wva
quantity = snr
branch = psa
)";

TEST(Config, ParsesAndFillsDefaults) {
  const SweepConfig c = parse_config(kThetaSweep);
  EXPECT_EQ(c.axis.parameter, Parameter::Theta);
  EXPECT_EQ(c.axis.steps, 50);
  EXPECT_EQ(c.series.size(), 2u);
  EXPECT_EQ(c.series[1].scheme, Scheme::WVA);
  EXPECT_EQ(c.system.g, 0.01);
  EXPECT_EQ(c.output, "out.csv");
  EXPECT_EQ(c.format, OutputFormat::Csv);
}

TEST(Config, PiExpressions) {
  std::string text = kThetaSweep;
  text.replace(text.find("from = 0.1"), 10, "from = pi/4");
  text.replace(text.find("to = 3.0"), 8, "to = 3pi/4");
  const SweepConfig c = parse_config(text);
  EXPECT_DOUBLE_EQ(c.axis.from, kPi / 4);
  EXPECT_DOUBLE_EQ(c.axis.to, 3 * kPi / 4);
}

TEST(Config, RoundTripOfPresets) {
  for (const auto& name : preset_names()) {
    SweepConfig c = figure_preset(name);
    c.output = "x/" + name + ".json";
    c.format = OutputFormat::Json;
    const std::string text = emit_config(c);
    EXPECT_EQ(parse_config(text), c) << name;
    EXPECT_EQ(emit_config(parse_config(text)), text) << name;
  }
}

TEST(Config, RoundTripOfRandomConfigs) {
  wvtest::StateGen gen(71);
  for (int i = 0; i < 200; ++i) {
    SweepConfig c;
    c.axis = AxisSpec{Parameter::Theta, gen.uniform(0, 1), gen.uniform(1.5, 6), 2 + i % 40,
                      i % 3 ? AxisScale::Linear : AxisScale::Log};
    if (i % 4 == 0) c.axis2 = AxisSpec{Parameter::G, gen.log_uniform(1e-6, 1e-3), 0.5, 3};
    c.mode = static_cast<Mode>(i % 3);
    c.system.family = i % 2 ? Family::Real : Family::Tilted;
    c.system.tilt = gen.uniform(-3, 3);
    c.system.theta = gen.uniform(0, 6);
    c.system.phi = gen.uniform(0, 6);
    if (c.axis2) {
      c.system.g = 0.01;
    } else {
      c.system.g = gen.log_uniform(1e-6, 1);
    }
    c.system.d = gen.uniform(0.5, 2);
    c.system.basis = i % 5 ? Basis::X : Basis::P;
    c.system.noise = i % 5 ? NoiseKind::X0 : NoiseKind::P0;
    c.system.noise_width = gen.uniform(0, 2);
    c.system.beta = gen.uniform(0, 3);
    c.seed = static_cast<std::uint64_t>(gen.uniform(0, 1e15));
    c.trials = 2 + i;
    c.particles = 2 + 100 * i;
    c.output = i % 2 ? "" : "out_" + std::to_string(i) + ".csv";
    SeriesSpec s;
    s.name = "s" + std::to_string(i);
    s.scheme = static_cast<Scheme>(i % 3);
    s.quantity = i % 2 ? Quantity::Snr : Quantity::EffFi;
    if (i % 3 == 0) s.beta = gen.uniform(0, 2);
    if (i % 7 == 0 && !c.axis2) s.g = gen.log_uniform(1e-4, 1);
    s.branch = i % 2 ? Branch::PSA : Branch::PSR;
    c.series = {s};
    ASSERT_NO_THROW(c.validate()) << emit_config(c);
    EXPECT_EQ(parse_config(emit_config(c)), c) << emit_config(c);
  }
}

TEST(Config, Errors) {
  auto bad = [](std::string from, std::string to) {
    std::string t = kThetaSweep;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  EXPECT_THROW(parse_config(bad("steps = 50", "steps = 1")), ConfigError);
  EXPECT_THROW(parse_config(bad("steps = 50", "steps = fifty")), ConfigError);
  EXPECT_THROW(parse_config(bad("to = 3.0", "to = 0.1")), ConfigError);
  EXPECT_THROW(parse_config(bad("g = 0.01", "g = 0")), ConfigError);
  EXPECT_THROW(parse_config(bad("g = 0.01", "g = 0.01\ng = 0.02")), ConfigError);
  EXPECT_THROW(parse_config(bad("g = 0.01", "colour = blue")), ConfigError);
  EXPECT_THROW(parse_config(bad("g = 0.01", "noise = p0")), ConfigError);
  EXPECT_THROW(parse_config(bad("axis = theta", "axis = phi")), ConfigError);
  EXPECT_THROW(parse_config(bad("quantity = snr\n\n[series wva]", "\n[series wva]")), ConfigError);
  EXPECT_THROW(parse_config(bad("[series wva]", "[series jwm]")), ConfigError);
  EXPECT_THROW(parse_config(bad("[system]", "[systems]")), ConfigError);
  EXPECT_THROW(parse_config("axis = theta\n"), ConfigError);
  EXPECT_EQ(parse_config(bad("g = 0.01", "g = 0.02   # stronger coupling")).system.g, 0.02);
  SweepConfig c = parse_config(kThetaSweep);
  c.output = "run#1.csv";
  EXPECT_THROW(c.validate(), ConfigError);
  try {
    parse_config(bad("steps = 50", "steps = x"));
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos) << e.what();
  }
}

TEST(Presets, Contents) {
  const SweepConfig f5 = figure_preset("fig5");
  EXPECT_EQ(f5.axis.parameter, Parameter::Phi);
  EXPECT_GT(f5.axis.from, 0.0);
  EXPECT_LT(f5.axis.to, 2 * kPi);
  EXPECT_EQ(f5.system.family, Family::Imaginary);
  EXPECT_EQ(f5.system.noise, NoiseKind::P0);
  EXPECT_DOUBLE_EQ(f5.system.noise_width, 0.1);
  EXPECT_DOUBLE_EQ(f5.system.g, 0.01);
  ASSERT_EQ(f5.series.size(), 3u);
  EXPECT_EQ(f5.series[0].scheme, Scheme::JWM);
  EXPECT_EQ(f5.series[1].scheme, Scheme::WVA);
  EXPECT_EQ(f5.series[1].branch, Branch::PSA);
  EXPECT_EQ(f5.series[2].branch, Branch::PSR);

  const SweepConfig f4 = figure_preset("fig4");
  EXPECT_EQ(f4.axis.parameter, Parameter::Theta);
  EXPECT_GT(f4.axis.from, 0.0);
  EXPECT_LT(f4.axis.to, kPi);
  ASSERT_EQ(f4.series.size(), 3u);
  EXPECT_EQ(f4.series[0].quantity, Quantity::EffFi);
  EXPECT_EQ(f4.series[1].scheme, Scheme::WVA);
  EXPECT_EQ(f4.series[2].quantity, Quantity::FTot);

  EXPECT_THROW(figure_preset("fig7"), UnknownPreset);
  EXPECT_THROW(figure_preset("fig7"), ConfigError);
}

TEST(Sweep, RowCountAndScaling) {
  const SweepConfig c = parse_config(kThetaSweep);
  const SeriesFile f = run_sweep(c);
  ASSERT_EQ(f.rows.size(), 50u);
  EXPECT_EQ(data_lines(format_csv(f)).size(), 50u);
  const MeterConfig m(1.0, 0.01);
  for (const auto& r : f.rows) {
    ASSERT_TRUE(r.values[0].raw.has_value());
    EXPECT_NEAR(*r.values[0].scaled, *r.values[0].raw / cm_snr_reference(m, 10000), 1e-12);
  }
  for (std::size_t i = 1; i < f.rows.size(); ++i) {
    EXPECT_GT(f.rows[i].axis_value, f.rows[i - 1].axis_value);
  }
}

TEST(Sweep, Fig2aDivergesTowardBalance) {
  const SeriesFile f = run_sweep(figure_preset("fig2a"));
  ASSERT_EQ(f.rows.size(), 200u * 100u);
  // Slice at the g value closest to 1e-2.
  const auto gs = figure_preset("fig2a").axis2->values();
  std::size_t gi = 0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    if (std::abs(std::log(gs[k] / 1e-2)) < std::abs(std::log(gs[gi] / 1e-2))) gi = k;
  }
  double near_pi = 0, mid = 0;
  for (std::size_t t = 0; t < 200; ++t) {
    const auto& r = f.rows[t * 100 + gi];
    if (!r.values[0].scaled) continue;
    const double v = std::abs(*r.values[0].scaled);
    if (std::abs(r.axis_value - kPi) < 0.02) near_pi = std::max(near_pi, v);
    if (std::abs(r.axis_value - kPi / 2) < 0.02) mid = std::max(mid, v);
  }
  EXPECT_GT(near_pi, 20 * mid);
  EXPECT_GT(near_pi, 50.0);
}

TEST(Sweep, SnrPresetsBoundedAtFileLevel) {
  for (const char* name : {"fig3a", "fig3b"}) {
    const SeriesFile f = run_sweep(figure_preset(name));
    const std::size_t col = column(f, f.config.series[0].name + "_scaled");
    std::size_t checked = 0;
    for (const auto& line : data_lines(format_csv(f))) {
      const auto cells = split(line);
      if (cells[col].empty()) continue;
      EXPECT_LE(std::stod(cells[col]), 1 + 1e-6) << name << ": " << line;
      ++checked;
    }
    EXPECT_GT(checked, 19000u);
  }
}

TEST(Sweep, SingularPointsAreFlaggedWithEmptyFields) {
  std::string t = kThetaSweep;
  t.replace(t.find("from = 0.1"), 10, "from = pi/2");
  t.replace(t.find("to = 3.0"), 8, "to = 3pi/2");
  t.replace(t.find("steps = 50"), 10, "steps = 3");
  const SeriesFile f = run_sweep(parse_config(t));
  ASSERT_EQ(f.rows.size(), 3u);
  EXPECT_EQ(f.rows[1].axis_value, kPi);
  EXPECT_TRUE(f.rows[1].singular);
  EXPECT_FALSE(f.rows[1].values[0].raw.has_value());
  const auto lines = data_lines(format_csv(f));
  const auto cells = split(lines[1]);
  EXPECT_EQ(cells[column(f, "singular")], "1");
  EXPECT_EQ(cells[column(f, "jwm")], "");
  EXPECT_EQ(cells[column(f, "jwm_scaled")], "");
  EXPECT_NE(cells[column(f, "wva")], "");
}

TEST(Sweep, DeterministicFilesIndependentOfWorkers) {
  SweepConfig c = parse_config(kThetaSweep);
  c.mode = Mode::Both;
  c.axis.steps = 6;
  c.trials = 20;
  c.particles = 500;
  const fs::path dir = scratch_dir();
  c.output = (dir / "a.csv").string();
  write_series(run_sweep(c, 1));
  c.output = (dir / "b.csv").string();
  write_series(run_sweep(c, 3));
  std::string a = read_file(dir / "a.csv");
  std::string b = read_file(dir / "b.csv");
  // The echoed output path is the only permitted difference.
  const auto strip = [](std::string s) {
    const auto at = s.find("# config: output = ");
    return s.erase(at, s.find('\n', at) - at);
  };
  EXPECT_EQ(strip(a), strip(b));
  c.output = (dir / "a.csv").string();
  write_series(run_sweep(c, 2));
  EXPECT_EQ(read_file(dir / "a.csv"), a);
  EXPECT_FALSE(fs::exists(dir / "a.csv.tmp"));
}

TEST(Sweep, MonteCarloColumnsAgreeWithAnalytic) {
  SweepConfig c = parse_config(kThetaSweep);
  c.mode = Mode::MonteCarlo;
  c.axis = AxisSpec{Parameter::Theta, 0.3, 2.7, 12};
  c.trials = 200;
  c.particles = 2000;
  SeriesSpec amp;
  amp.name = "jwm_amp";
  amp.scheme = Scheme::JWM;
  amp.quantity = Quantity::Amplification;
  SeriesSpec fi;
  fi.name = "wva_fi";
  fi.scheme = Scheme::WVA;
  fi.quantity = Quantity::EffFi;
  c.series.push_back(amp);
  c.series.push_back(fi);
  const SeriesFile f = run_sweep(c);
  const auto lines = data_lines(format_csv(f));
  std::size_t cells = 0, exceed = 0;
  for (const auto& line : lines) {
    const auto row = split(line);
    for (const auto& s : c.series) {
      const auto& se = row[column(f, s.name + "_mc_se")];
      ASSERT_FALSE(se.empty()) << line;
      const double d = std::stod(row[column(f, s.name + "_mc")]) - std::stod(row[column(f, s.name)]);
      ++cells;
      if (std::abs(d) > 5 * std::stod(se)) ++exceed;
    }
  }
  EXPECT_EQ(cells, 12u * 4u);
  EXPECT_LE(exceed, cells / 100);
}

TEST(Sweep, JsonOutput) {
  SweepConfig c = parse_config(kThetaSweep);
  c.axis.steps = 5;
  c.format = OutputFormat::Json;
  const SeriesFile f = run_sweep(c);
  const auto j = nlohmann::json::parse(format_json(f));
  EXPECT_EQ(j["rows"].size(), 5u);
  EXPECT_EQ(j["columns"].size(), f.columns.size());
  EXPECT_EQ(j["schema"], "wvmetro-sweep");
  EXPECT_EQ(parse_config(j["config"].get<std::string>()), c);
  EXPECT_NEAR(j["rows"][2][0].get<double>(), f.rows[2].axis_value, 0.0);
}

TEST(Sweep, SeriesGOverride) {
  const SeriesFile f = run_sweep(figure_preset("fig6b"));
  ASSERT_EQ(f.rows.size(), 200u);
  ASSERT_EQ(f.config.series.size(), 3u);
  // At Jp = 0 each series equals a direct evaluation at its own g.
  for (std::size_t k = 0; k < 3; ++k) {
    const double g = *f.config.series[k].g;
    const auto cfg = imaginary_config(3 * kPi / 4, g);
    const NoiseSpec ns = NoiseSpec::p0(0.0);
    const double ref = noisy_snr_jwm(cfg, 10000, noisy_expected_partition(cfg, 10000, ns), ns);
    EXPECT_NEAR(*f.rows[0].values[k].raw, ref, 1e-12 * ref);
  }
}

TEST(Sweep, WriteFailureIsIoError) {
  EXPECT_THROW(write_atomic("/nonexistent-dir/x/y.csv", "a"), IoError);
  EXPECT_THROW(load_config("/nonexistent-dir/cfg.ini"), IoError);
}

TEST(Sweep, CompareRunsOraclePerPoint) {
  SweepConfig c = parse_config(kThetaSweep);
  c.axis = AxisSpec{Parameter::Theta, kPi / 4, 3 * kPi / 4, 2};
  c.trials = 100;
  c.particles = 2000;
  const auto rows = run_compare(c);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.report.has_value());
    EXPECT_TRUE(r.report->all_pass);
  }
  const std::string text = format_compare(c, rows);
  EXPECT_NE(text.find("signal"), std::string::npos);
}

}  // namespace
