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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "json.hpp"
#include "wvmetro/mc_engine.hpp"
#include "wvmetro/parallel.hpp"

namespace wvmetro {

SystemConfig build_system(const SystemSpec& s) {
  switch (s.family) {
    case Family::Real: return real_config(s.theta, s.g, s.d);
    case Family::Imaginary: return imaginary_config(s.phi, s.g, s.d);
    case Family::Tilted:
      return SystemConfig(SpinState(1.0, 1.0), SpinState::polar(s.theta, s.tilt),
                          MeterConfig(s.d, s.g));
  }
  throw ConfigError("unknown family");
}

NoiseSpec build_noise(const SystemSpec& s) {
  switch (s.noise) {
    case NoiseKind::None: return NoiseSpec::none(s.basis);
    case NoiseKind::X0: return NoiseSpec::x0(s.basis, s.noise_width);
    case NoiseKind::P0: return NoiseSpec::p0(s.noise_width);
  }
  throw ConfigError("unknown noise kind");
}

namespace {

struct PointSpec {
  SystemSpec system;
  Count n = 2;
  double axis_value = 0.0;
  std::optional<double> axis2_value;
};

void apply(Parameter p, double v, PointSpec& pt) {
  auto& s = pt.system;
  switch (p) {
    case Parameter::Theta: s.theta = v; break;
    case Parameter::Phi: s.phi = v; break;
    case Parameter::G: s.g = v; break;
    case Parameter::J:
    case Parameter::Jp: s.noise_width = v; break;
    case Parameter::N: pt.n = static_cast<Count>(v); break;
    case Parameter::Beta: s.beta = v; break;
  }
}

std::vector<PointSpec> expand_points(const SweepConfig& cfg) {
  std::vector<PointSpec> out;
  const auto outer = cfg.axis.values();
  const std::vector<double> inner = cfg.axis2 ? cfg.axis2->values() : std::vector<double>{0.0};
  out.reserve(outer.size() * inner.size());
  for (double a : outer) {
    for (double b : inner) {
      PointSpec pt;
      pt.system = cfg.system;
      pt.n = cfg.particles;
      apply(cfg.axis.parameter, a, pt);
      pt.axis_value = a;
      if (cfg.axis2) {
        apply(cfg.axis2->parameter, b, pt);
        pt.axis2_value = b;
      }
      out.push_back(pt);
    }
  }
  return out;
}

SystemSpec series_system(const SeriesSpec& sr, const SystemSpec& base) {
  SystemSpec s = base;
  if (sr.g) s.g = *sr.g;
  if (sr.beta) s.beta = *sr.beta;
  return s;
}

std::optional<double> finite(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

double reference(const SeriesSpec& sr, const MeterConfig& m, Count n) {
  switch (sr.quantity) {
    case Quantity::Snr: return cm_snr_reference(m, n);
    case Quantity::EffFi:
    case Quantity::FTot: return cm_fi_reference(m, n);
    default: return 1.0;
  }
}

double analytic_value(const SeriesSpec& sr, const SystemSpec& spec, Count n) {
  const SystemConfig cfg = build_system(spec);
  const NoiseSpec noise = build_noise(spec);
  const auto& m = cfg.meter();
  const double d = m.d();
  if (sr.quantity == Quantity::WeakValueRe) return weak_value(cfg, sr.branch).real();
  if (sr.scheme == Scheme::CM) {
    switch (sr.quantity) {
      case Quantity::Amplification: return 1.0;
      case Quantity::Snr: return cm_snr_reference(m, n);
      default: return cm_fi_reference(m, n);
    }
  }
  const Partition part = noisy_expected_partition(cfg, n, noise);
  if (sr.quantity == Quantity::FTot) {
    const GridSpec grid = default_x_grid(m);
    double total = 0.0;
    if (part.n1 > 0) {
      total += static_cast<double>(part.n1) * branch_fisher_information(cfg, Branch::PSA, grid);
    }
    if (part.n2 > 0) {
      total += static_cast<double>(part.n2) * branch_fisher_information(cfg, Branch::PSR, grid);
    }
    return total;
  }
  if (sr.scheme == Scheme::JWM) {
    const DcsvEstimate e = noisy_dcsv(cfg, n, part, noise, spec.beta);
    switch (sr.quantity) {
      case Quantity::Amplification: return e.signal / d;
      case Quantity::Snr: return e.snr;
      default: return e.eff_fi;
    }
  }
  const NoisyMoments nm = readout_moments(cfg, sr.branch, noise);
  const double ns = static_cast<double>(sr.branch == Branch::PSA ? part.n1 : part.n2);
  switch (sr.quantity) {
    case Quantity::Amplification: return nm.mean / d;
    case Quantity::Snr: return noisy_snr_wva(cfg, part, noise, sr.branch);
    default: return (nm.mean / d) * (nm.mean / d) * ns / nm.variance;
  }
}

bool mc_supported(const SeriesSpec& sr) {
  return sr.scheme != Scheme::CM &&
         (sr.quantity == Quantity::Amplification || sr.quantity == Quantity::Snr ||
          sr.quantity == Quantity::EffFi);
}

struct Estimate {
  double value;
  double se;
};

// Ratio statistics |m|/sqrt(v) and (m/d)^2/v with delta-method errors,
// treating the mean and variance estimates as independent.
Estimate ratio(Quantity q, double m, double se_m, double v, double se_v, double d) {
  const double rel_v = se_v / v;
  if (q == Quantity::Amplification) return {m / d, se_m / d};
  if (q == Quantity::Snr) {
    const double snr = std::abs(m) / std::sqrt(v);
    return {snr, std::hypot(se_m / std::sqrt(v), 0.5 * snr * rel_v)};
  }
  const double fi = (m / d) * (m / d) / v;
  return {fi, std::hypot(2.0 * std::abs(m) * se_m / (d * d * v), fi * rel_v)};
}

Estimate mc_value(const SeriesSpec& sr, const EnsembleStats& s, double d) {
  if (sr.scheme == Scheme::JWM) {
    return ratio(sr.quantity, s.mean_dcsv, s.se_mean_dcsv, s.conditional_var,
                 s.se_conditional_var, d);
  }
  const MomentAccumulator& y = sr.branch == Branch::PSA ? s.y1 : s.y2;
  return ratio(sr.quantity, y.mean, y.se_mean(), y.sample_variance(), y.se_variance(), d);
}

void evaluate_analytic(const SweepConfig& cfg, const PointSpec& pt, SeriesRow& row) {
  row.axis_value = pt.axis_value;
  row.axis2_value = pt.axis2_value;
  row.values.assign(cfg.series.size(), SeriesValue{});
  try {
    const SystemConfig sys = build_system(pt.system);
    row.p_f = finite(noisy_selection_probability(sys, Branch::PSA, build_noise(pt.system)));
    const Complex aw = weak_value(sys, Branch::PSA);
    row.re_aw = finite(aw.real());
    row.im_aw = finite(aw.imag());
  } catch (const OrthogonalPostSelection&) {
    row.singular = true;
  }
  for (std::size_t k = 0; k < cfg.series.size(); ++k) {
    const auto& sr = cfg.series[k];
    const SystemSpec spec = series_system(sr, pt.system);
    auto& out = row.values[k];
    try {
      out.raw = finite(analytic_value(sr, spec, pt.n));
    } catch (const SingularCombination&) {
    } catch (const OrthogonalPostSelection&) {
    } catch (const DegenerateModification&) {
    }
    if (out.raw) {
      out.scaled = finite(*out.raw / reference(sr, MeterConfig(spec.d, spec.g), pt.n));
    } else {
      row.singular = true;
    }
  }
}

void evaluate_mc(const SweepConfig& cfg, const PointSpec& pt, std::size_t index, unsigned workers,
                 SeriesRow& row) {
  // One ensemble per distinct meter; the beta weighting only enters the
  // reduction, so series that differ in beta share the raw trials.
  std::map<double, std::vector<TrialRecord>> ensembles;
  std::map<double, std::size_t> ensemble_index;
  for (std::size_t k = 0; k < cfg.series.size(); ++k) {
    const auto& sr = cfg.series[k];
    if (!mc_supported(sr)) continue;
    const SystemSpec spec = series_system(sr, pt.system);
    auto it = ensembles.find(spec.g);
    if (it == ensembles.end()) {
      const std::size_t gi = ensemble_index.size();
      ensemble_index[spec.g] = gi;
      const ParticleSampler sampler(build_system(spec), spec.basis, build_noise(spec));
      it = ensembles
               .emplace(spec.g, simulate_ensemble(sampler, pt.n, cfg.trials,
                                                  derive_seed(cfg.seed, index, gi), workers))
               .first;
    }
    auto& out = row.values[k];
    try {
      const EnsembleStats s = summarize(it->second, spec.beta, spec.d);
      const Estimate est = mc_value(sr, s, spec.d);
      const double ref = reference(sr, MeterConfig(spec.d, spec.g), pt.n);
      out.mc = finite(est.value);
      out.mc_se = finite(est.se);
      if (out.mc) out.mc_scaled = finite(*out.mc / ref);
    } catch (const AllTrialsSingular&) {
      row.singular = true;
    }
  }
}

std::vector<std::string> make_columns(const SweepConfig& cfg) {
  std::vector<std::string> cols{std::string(to_string(cfg.axis.parameter))};
  if (cfg.axis2) cols.emplace_back(to_string(cfg.axis2->parameter));
  for (const char* c : {"p_f", "re_aw", "im_aw", "singular"}) cols.emplace_back(c);
  for (const auto& sr : cfg.series) {
    cols.push_back(sr.name);
    cols.push_back(sr.name + "_scaled");
    if (cfg.mode != Mode::Analytic) {
      cols.push_back(sr.name + "_mc");
      cols.push_back(sr.name + "_mc_se");
      cols.push_back(sr.name + "_mc_scaled");
    }
  }
  return cols;
}

// Row cells in column order; nullopt marks an empty field.
std::vector<std::optional<double>> row_cells(const SweepConfig& cfg, const SeriesRow& r) {
  std::vector<std::optional<double>> cells{r.axis_value};
  if (cfg.axis2) cells.push_back(r.axis2_value);
  cells.push_back(r.p_f);
  cells.push_back(r.re_aw);
  cells.push_back(r.im_aw);
  cells.push_back(r.singular ? 1.0 : 0.0);
  for (const auto& v : r.values) {
    cells.push_back(v.raw);
    cells.push_back(v.scaled);
    if (cfg.mode != Mode::Analytic) {
      cells.push_back(v.mc);
      cells.push_back(v.mc_se);
      cells.push_back(v.mc_scaled);
    }
  }
  return cells;
}

}  // namespace

SeriesFile run_sweep(const SweepConfig& cfg, unsigned workers) {
  cfg.validate();
  SeriesFile file;
  file.config = cfg;
  file.columns = make_columns(cfg);
  const auto points = expand_points(cfg);
  file.rows.resize(points.size());
  const unsigned w = resolve_workers(workers);
  parallel_for(points.size(), w, [&](std::size_t i) {
    evaluate_analytic(cfg, points[i], file.rows[i]);
  });
  if (cfg.mode != Mode::Analytic) {
    for (std::size_t i = 0; i < points.size(); ++i) evaluate_mc(cfg, points[i], i, w, file.rows[i]);
  }
  return file;
}

std::string format_csv(const SeriesFile& file) {
  const auto& cfg = file.config;
  std::string out = fmt::format("# wvmetro sweep csv v{}\n", kCsvSchemaVersion);
  out += fmt::format("# tool_version: {}\n", kToolVersion);
  out += fmt::format("# seed: {}\n", cfg.seed);
  out += fmt::format("# mode: {}\n", to_string(cfg.mode));
  const std::string echo = emit_config(cfg);
  std::size_t pos = 0;
  while (pos < echo.size()) {
    const auto nl = echo.find('\n', pos);
    out += "# config: " + echo.substr(pos, nl - pos) + "\n";
    pos = nl + 1;
  }
  for (std::size_t c = 0; c < file.columns.size(); ++c) {
    out += (c ? "," : "") + file.columns[c];
  }
  out += '\n';
  for (const auto& r : file.rows) {
    const auto cells = row_cells(cfg, r);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      if (cells[c]) out += format_number(*cells[c]);
    }
    out += '\n';
  }
  return out;
}

std::string format_json(const SeriesFile& file) {
  using nlohmann::json;
  const auto& cfg = file.config;
  std::string out = "{\n";
  out += fmt::format("  \"schema\": \"wvmetro-sweep\",\n  \"version\": {},\n", kCsvSchemaVersion);
  out += fmt::format("  \"tool_version\": {},\n", json(std::string(kToolVersion)).dump());
  out += fmt::format("  \"seed\": {},\n", cfg.seed);
  out += fmt::format("  \"mode\": {},\n", json(std::string(to_string(cfg.mode))).dump());
  out += fmt::format("  \"config\": {},\n", json(emit_config(cfg)).dump());
  out += "  \"columns\": " + json(file.columns).dump() + ",\n";
  out += "  \"rows\": [";
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    out += i ? ",\n    [" : "\n    [";
    const auto cells = row_cells(cfg, file.rows[i]);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ", ";
      out += cells[c] ? format_number(*cells[c]) : "null";
    }
    out += ']';
  }
  out += file.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

void write_atomic(const std::string& path, const std::string& contents) {
  if (path.empty()) throw IoError("no output path given");
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path);
  }
}

void write_series(const SeriesFile& file) {
  write_atomic(file.config.output,
               file.config.format == OutputFormat::Csv ? format_csv(file) : format_json(file));
}

std::vector<CompareRow> run_compare(const SweepConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto points = expand_points(cfg);
  std::vector<CompareRow> rows(points.size());
  const unsigned w = resolve_workers(workers);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    auto& row = rows[i];
    row.axis_value = pt.axis_value;
    row.axis2_value = pt.axis2_value;
    try {
      row.report = oracle_compare(build_system(pt.system), pt.n, cfg.trials, pt.system.basis,
                                  build_noise(pt.system), pt.system.beta,
                                  derive_seed(cfg.seed, i), w);
    } catch (const Error& e) {
      row.note = e.what();
    }
  }
  return rows;
}

std::string format_compare(const SweepConfig& cfg, const std::vector<CompareRow>& rows) {
  std::string out = fmt::format("# wvmetro compare v{}\n# seed: {}\n", kCsvSchemaVersion, cfg.seed);
  out += to_string(cfg.axis.parameter);
  if (cfg.axis2) out += fmt::format(",{}", to_string(cfg.axis2->parameter));
  out += ",check,analytic,empirical,std_error,z,pass\n";
  for (const auto& r : rows) {
    std::string lead = format_number(r.axis_value);
    if (r.axis2_value) lead += "," + format_number(*r.axis2_value);
    if (!r.report) {
      out += fmt::format("{},singular,,,,,\n", lead);
      continue;
    }
    for (const auto& c : r.report->checks) {
      out += fmt::format("{},{},{},{},{},{},{}\n", lead, c.name, format_number(c.analytic),
                         format_number(c.empirical), format_number(c.std_error),
                         format_number(c.z), c.pass ? 1 : 0);
    }
  }
  return out;
}

}  // namespace wvmetro
