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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "wvmetro/sweep.hpp"

namespace wvmetro {

namespace {

template <typename E>
struct Names {
  E value;
  std::string_view name;
};

constexpr Names<Mode> kModes[] = {
    {Mode::Analytic, "analytic"}, {Mode::MonteCarlo, "montecarlo"}, {Mode::Both, "both"}};
constexpr Names<OutputFormat> kFormats[] = {{OutputFormat::Csv, "csv"},
                                            {OutputFormat::Json, "json"}};
constexpr Names<Family> kFamilies[] = {
    {Family::Real, "real"}, {Family::Imaginary, "imaginary"}, {Family::Tilted, "tilted"}};
constexpr Names<Quantity> kQuantities[] = {{Quantity::Amplification, "amplification"},
                                           {Quantity::Snr, "snr"},
                                           {Quantity::EffFi, "eff_fi"},
                                           {Quantity::FTot, "f_tot"},
                                           {Quantity::WeakValueRe, "weak_value_re"}};
constexpr Names<AxisScale> kScales[] = {{AxisScale::Linear, "linear"}, {AxisScale::Log, "log"}};
constexpr Names<Parameter> kParameters[] = {
    {Parameter::Theta, "theta"}, {Parameter::Phi, "phi"}, {Parameter::G, "g"},
    {Parameter::J, "j"},         {Parameter::Jp, "jp"},   {Parameter::N, "n"},
    {Parameter::Beta, "beta"}};
constexpr Names<Scheme> kSchemes[] = {
    {Scheme::CM, "cm"}, {Scheme::WVA, "wva"}, {Scheme::JWM, "jwm"}};
constexpr Names<Basis> kBases[] = {{Basis::X, "x"}, {Basis::P, "p"}};
constexpr Names<NoiseKind> kNoises[] = {
    {NoiseKind::None, "none"}, {NoiseKind::X0, "x0"}, {NoiseKind::P0, "p0"}};
constexpr Names<Branch> kBranches[] = {{Branch::PSA, "psa"}, {Branch::PSR, "psr"}};

template <typename E, std::size_t K>
std::string_view name_of(const Names<E> (&table)[K], E v) {
  for (const auto& n : table) {
    if (n.value == v) return n.name;
  }
  return "?";
}

template <typename E, std::size_t K>
E parse_enum(const Names<E> (&table)[K], std::string_view s, std::string_view what) {
  for (const auto& n : table) {
    if (n.name == s) return n.value;
  }
  std::string options;
  for (const auto& n : table) {
    if (!options.empty()) options += ", ";
    options += n.name;
  }
  throw ConfigError(fmt::format("invalid {} '{}' (expected one of: {})", what, s, options));
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_plain(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Accepts a plain number or a multiple of pi written as [c]pi[/q].
double parse_real(std::string_view s, std::string_view key) {
  double v = 0.0;
  if (parse_plain(s, v)) return v;
  const auto at = s.find("pi");
  if (at != std::string_view::npos) {
    const std::string_view head = s.substr(0, at);
    std::string_view tail = s.substr(at + 2);
    double c = 1.0;
    if (head == "-") {
      c = -1.0;
    } else if (!head.empty() && !parse_plain(head.back() == '*' ? head.substr(0, head.size() - 1) : head, c)) {
      throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, s));
    }
    double q = 1.0;
    if (!tail.empty()) {
      if (tail.front() != '/' || !parse_plain(tail.substr(1), q) || q == 0.0) {
        throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, s));
      }
    }
    return c * std::numbers::pi / q;
  }
  throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, s));
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view key) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as an integer", key, s));
  }
  return v;
}

bool valid_series_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == '+';
  });
}

void append_axis(std::string& out, std::string_view prefix, const AxisSpec& a) {
  const bool primary = prefix.empty();
  out += fmt::format("{} = {}\n", primary ? "axis" : "axis2", to_string(a.parameter));
  out += fmt::format("{}from = {}\n", prefix, format_number(a.from));
  out += fmt::format("{}to = {}\n", prefix, format_number(a.to));
  out += fmt::format("{}steps = {}\n", prefix, a.steps);
  out += fmt::format("{}scale = {}\n", prefix, to_string(a.scale));
}

void validate_axis(const AxisSpec& a, std::string_view which) {
  if (a.steps < 2) throw ConfigError(fmt::format("{}: steps must be >= 2", which));
  if (!std::isfinite(a.from) || !std::isfinite(a.to)) {
    throw ConfigError(fmt::format("{}: range must be finite", which));
  }
  if (a.from == a.to) throw ConfigError(fmt::format("{}: range is empty", which));
  if (a.scale == AxisScale::Log && !(a.from > 0.0 && a.to > 0.0)) {
    throw ConfigError(fmt::format("{}: log scale needs a positive range", which));
  }
  const double lo = std::min(a.from, a.to);
  switch (a.parameter) {
    case Parameter::G:
      if (!(lo > 0.0)) throw ConfigError(fmt::format("{}: g must be > 0", which));
      break;
    case Parameter::J:
    case Parameter::Jp:
    case Parameter::Beta:
      if (lo < 0.0) throw ConfigError(fmt::format("{}: values must be >= 0", which));
      break;
    case Parameter::N:
      if (lo < 2.0) throw ConfigError(fmt::format("{}: particle counts must be >= 2", which));
      break;
    default: break;
  }
}

}  // namespace

std::string_view to_string(Mode m) { return name_of(kModes, m); }
std::string_view to_string(OutputFormat f) { return name_of(kFormats, f); }
std::string_view to_string(Family f) { return name_of(kFamilies, f); }
std::string_view to_string(Quantity q) { return name_of(kQuantities, q); }
std::string_view to_string(AxisScale s) { return name_of(kScales, s); }
std::string_view to_string(Parameter p) { return name_of(kParameters, p); }

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

std::vector<double> AxisSpec::values() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(steps, 0)));
  const double span = static_cast<double>(steps - 1);
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / span;
    out[static_cast<std::size_t>(k)] =
        scale == AxisScale::Log ? from * std::pow(to / from, t) : from + (to - from) * t;
  }
  if (steps >= 2) out.back() = to;
  if (parameter == Parameter::N) {
    for (double& v : out) v = std::round(v);
  }
  return out;
}

void SweepConfig::validate() const {
  validate_axis(axis, "axis");
  auto uses = [&](Parameter p) {
    return axis.parameter == p || (axis2 && axis2->parameter == p);
  };
  if (axis2) {
    validate_axis(*axis2, "axis2");
    if (axis2->parameter == axis.parameter) throw ConfigError("axis2 repeats the primary axis");
  }
  if (output.find_first_of("#\n\r") != std::string::npos ||
      (!output.empty() && (std::isspace(static_cast<unsigned char>(output.front())) ||
                           std::isspace(static_cast<unsigned char>(output.back()))))) {
    throw ConfigError("output path must not contain '#', line breaks or surrounding blanks");
  }
  const auto& s = system;
  if (!(s.g > 0.0) || !std::isfinite(s.g)) throw ConfigError("system.g must be > 0");
  if (!(s.d > 0.0) || !std::isfinite(s.d)) throw ConfigError("system.d must be > 0");
  if (!(s.noise_width >= 0.0) || !std::isfinite(s.noise_width)) {
    throw ConfigError("system.noise_width must be >= 0");
  }
  if (!(s.beta >= 0.0) || !std::isfinite(s.beta)) throw ConfigError("system.beta must be >= 0");
  for (double v : {s.theta, s.phi, s.tilt}) {
    if (!std::isfinite(v)) throw ConfigError("system angles must be finite");
  }
  if (s.noise == NoiseKind::P0 && s.basis != Basis::P) {
    throw ConfigError("p0 noise requires basis = p");
  }
  if (uses(Parameter::Theta) && s.family == Family::Imaginary) {
    throw ConfigError("a theta axis needs family real or tilted");
  }
  if (uses(Parameter::Phi) && s.family != Family::Imaginary) {
    throw ConfigError("a phi axis needs family imaginary");
  }
  if (uses(Parameter::J) && s.noise != NoiseKind::X0) {
    throw ConfigError("a j axis needs noise = x0");
  }
  if (uses(Parameter::Jp) && s.noise != NoiseKind::P0) {
    throw ConfigError("a jp axis needs noise = p0");
  }
  if (series.empty()) throw ConfigError("at least one [series <name>] section is required");
  std::set<std::string> names;
  for (const auto& sr : series) {
    if (!valid_series_name(sr.name)) throw ConfigError("invalid series name '" + sr.name + "'");
    if (!names.insert(sr.name).second) throw ConfigError("duplicate series '" + sr.name + "'");
    if (sr.beta && (!(*sr.beta >= 0.0) || !std::isfinite(*sr.beta))) {
      throw ConfigError("series " + sr.name + ": beta must be >= 0");
    }
    if (sr.g && (!(*sr.g > 0.0) || !std::isfinite(*sr.g))) {
      throw ConfigError("series " + sr.name + ": g must be > 0");
    }
    if (sr.g && uses(Parameter::G)) {
      throw ConfigError("series " + sr.name + ": g override conflicts with a g axis");
    }
    if (sr.branch == Branch::Conventional) {
      throw ConfigError("series " + sr.name + ": branch must be psa or psr");
    }
    if (sr.quantity == Quantity::FTot && (s.basis != Basis::X || s.noise != NoiseKind::None)) {
      throw ConfigError("series " + sr.name + ": f_tot needs basis = x without noise");
    }
  }
  if (mode != Mode::Analytic) {
    if (trials < 2) throw ConfigError("trials must be >= 2");
  }
  if (particles < 2) throw ConfigError("particles must be >= 2");
}

SweepConfig parse_config(std::string_view text) {
  SweepConfig cfg;
  cfg.series.clear();
  enum class Section { None, Sweep, System, Series } section = Section::None;
  std::set<std::string> seen;
  std::string scope;
  bool have_axis = false, have_from = false, have_to = false, have_steps = false;
  AxisSpec axis2;
  bool have_axis2 = false;
  std::set<std::string> series_scheme, series_quantity;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    // A '#' after whitespace starts a trailing comment.
    for (std::size_t i = 1; i < line.size(); ++i) {
      if (line[i] == '#' && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line = trim(line.substr(0, i));
        break;
      }
    }
    auto fail = [&](const std::string& msg) -> ConfigError {
      return ConfigError(fmt::format("line {}: {}", line_no, msg));
    };
    if (line.front() == '[') {
      if (line.back() != ']') throw fail("unterminated section header");
      const std::string_view inner = trim(line.substr(1, line.size() - 2));
      if (inner == "sweep") {
        section = Section::Sweep;
        scope = "sweep";
      } else if (inner == "system") {
        section = Section::System;
        scope = "system";
      } else if (inner.substr(0, 6) == "series" && inner.size() > 6 &&
                 (inner[6] == ' ' || inner[6] == '\t')) {
        const std::string name(trim(inner.substr(6)));
        if (!valid_series_name(name)) throw fail("invalid series name '" + name + "'");
        section = Section::Series;
        scope = "series " + name;
        if (!seen.insert("[" + scope + "]").second) throw fail("duplicate section [" + scope + "]");
        cfg.series.push_back(SeriesSpec{});
        cfg.series.back().name = name;
        continue;
      } else {
        throw fail("unknown section [" + std::string(inner) + "]");
      }
      if (!seen.insert("[" + scope + "]").second) throw fail("duplicate section [" + scope + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section == Section::None) throw fail("key '" + key + "' outside a section");
    if (!seen.insert(scope + "." + key).second) throw fail("duplicate key '" + key + "'");
    if (value.empty() && !(section == Section::Sweep && key == "output")) {
      throw fail("empty value for '" + key + "'");
    }
    try {
      if (section == Section::Sweep) {
        if (key == "axis") {
          cfg.axis.parameter = parse_enum(kParameters, value, "axis");
          have_axis = true;
        } else if (key == "from") {
          cfg.axis.from = parse_real(value, key);
          have_from = true;
        } else if (key == "to") {
          cfg.axis.to = parse_real(value, key);
          have_to = true;
        } else if (key == "steps") {
          cfg.axis.steps = parse_int<int>(value, key);
          have_steps = true;
        } else if (key == "scale") {
          cfg.axis.scale = parse_enum(kScales, value, "scale");
        } else if (key == "axis2") {
          axis2.parameter = parse_enum(kParameters, value, "axis2");
          have_axis2 = true;
        } else if (key == "axis2_from") {
          axis2.from = parse_real(value, key);
        } else if (key == "axis2_to") {
          axis2.to = parse_real(value, key);
        } else if (key == "axis2_steps") {
          axis2.steps = parse_int<int>(value, key);
        } else if (key == "axis2_scale") {
          axis2.scale = parse_enum(kScales, value, "axis2_scale");
        } else if (key == "mode") {
          cfg.mode = parse_enum(kModes, value, "mode");
        } else if (key == "seed") {
          cfg.seed = parse_int<std::uint64_t>(value, key);
        } else if (key == "trials") {
          cfg.trials = parse_int<Count>(value, key);
        } else if (key == "particles") {
          cfg.particles = parse_int<Count>(value, key);
        } else if (key == "output") {
          cfg.output = std::string(value);
        } else if (key == "format") {
          cfg.format = parse_enum(kFormats, value, "format");
        } else {
          throw ConfigError("unknown key '" + key + "' in [sweep]");
        }
      } else if (section == Section::System) {
        auto& s = cfg.system;
        if (key == "family") {
          s.family = parse_enum(kFamilies, value, "family");
        } else if (key == "theta") {
          s.theta = parse_real(value, key);
        } else if (key == "phi") {
          s.phi = parse_real(value, key);
        } else if (key == "tilt") {
          s.tilt = parse_real(value, key);
        } else if (key == "g") {
          s.g = parse_real(value, key);
        } else if (key == "d") {
          s.d = parse_real(value, key);
        } else if (key == "basis") {
          s.basis = parse_enum(kBases, value, "basis");
        } else if (key == "noise") {
          s.noise = parse_enum(kNoises, value, "noise");
        } else if (key == "noise_width") {
          s.noise_width = parse_real(value, key);
        } else if (key == "beta") {
          s.beta = parse_real(value, key);
        } else {
          throw ConfigError("unknown key '" + key + "' in [system]");
        }
      } else {
        auto& sr = cfg.series.back();
        if (key == "scheme") {
          sr.scheme = parse_enum(kSchemes, value, "scheme");
          series_scheme.insert(sr.name);
        } else if (key == "quantity") {
          sr.quantity = parse_enum(kQuantities, value, "quantity");
          series_quantity.insert(sr.name);
        } else if (key == "beta") {
          sr.beta = parse_real(value, key);
        } else if (key == "branch") {
          sr.branch = parse_enum(kBranches, value, "branch");
        } else if (key == "g") {
          sr.g = parse_real(value, key);
        } else {
          throw ConfigError("unknown key '" + key + "' in [" + scope + "]");
        }
      }
    } catch (const ConfigError& e) {
      throw fail(e.what());
    }
  }
  if (!(have_axis && have_from && have_to && have_steps)) {
    throw ConfigError("[sweep] needs axis, from, to and steps");
  }
  if (have_axis2) cfg.axis2 = axis2;
  for (const auto& sr : cfg.series) {
    if (!series_scheme.count(sr.name) || !series_quantity.count(sr.name)) {
      throw ConfigError("series " + sr.name + " needs scheme and quantity");
    }
  }
  cfg.validate();
  return cfg;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file " + path);
  return parse_config(ss.str());
}

std::string emit_config(const SweepConfig& cfg) {
  std::string out = "[sweep]\n";
  append_axis(out, "", cfg.axis);
  if (cfg.axis2) append_axis(out, "axis2_", *cfg.axis2);
  out += fmt::format("mode = {}\n", to_string(cfg.mode));
  out += fmt::format("seed = {}\n", cfg.seed);
  out += fmt::format("trials = {}\n", cfg.trials);
  out += fmt::format("particles = {}\n", cfg.particles);
  out += fmt::format("output = {}\n", cfg.output);
  out += fmt::format("format = {}\n", to_string(cfg.format));
  const auto& s = cfg.system;
  out += "\n[system]\n";
  out += fmt::format("family = {}\n", to_string(s.family));
  out += fmt::format("theta = {}\n", format_number(s.theta));
  out += fmt::format("phi = {}\n", format_number(s.phi));
  out += fmt::format("tilt = {}\n", format_number(s.tilt));
  out += fmt::format("g = {}\n", format_number(s.g));
  out += fmt::format("d = {}\n", format_number(s.d));
  out += fmt::format("basis = {}\n", name_of(kBases, s.basis));
  out += fmt::format("noise = {}\n", name_of(kNoises, s.noise));
  out += fmt::format("noise_width = {}\n", format_number(s.noise_width));
  out += fmt::format("beta = {}\n", format_number(s.beta));
  for (const auto& sr : cfg.series) {
    out += fmt::format("\n[series {}]\n", sr.name);
    out += fmt::format("scheme = {}\n", name_of(kSchemes, sr.scheme));
    out += fmt::format("quantity = {}\n", to_string(sr.quantity));
    if (sr.beta) out += fmt::format("beta = {}\n", format_number(*sr.beta));
    out += fmt::format("branch = {}\n", name_of(kBranches, sr.branch));
    if (sr.g) out += fmt::format("g = {}\n", format_number(*sr.g));
  }
  return out;
}

namespace {

constexpr double kPi = std::numbers::pi;

// Cell midpoints of (0, span), so the singular angles (multiples of pi/2)
// fall between grid points.
AxisSpec angle_axis(Parameter p, int steps, double span) {
  const double half = span / (2.0 * steps);
  return {p, half, span - half, steps, AxisScale::Linear};
}

AxisSpec g_axis() { return {Parameter::G, 1e-4, 1.0, 100, AxisScale::Log}; }

SeriesSpec series(std::string name, Scheme scheme, Quantity q, Branch b = Branch::PSA) {
  SeriesSpec s;
  s.name = std::move(name);
  s.scheme = scheme;
  s.quantity = q;
  s.branch = b;
  return s;
}

SweepConfig real_surface(std::vector<SeriesSpec> list) {
  SweepConfig c;
  c.axis = angle_axis(Parameter::Theta, 200, kPi);
  c.axis2 = g_axis();
  c.system.family = Family::Real;
  c.series = std::move(list);
  return c;
}

SweepConfig imaginary_base() {
  SweepConfig c;
  c.system.family = Family::Imaginary;
  c.system.basis = Basis::P;
  c.system.noise = NoiseKind::P0;
  c.system.noise_width = 0.1;
  c.system.g = 0.01;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5", "fig6a", "fig6b"};
}

SweepConfig figure_preset(std::string_view name) {
  if (name == "fig2a") {
    return real_surface({series("jwm_amplification", Scheme::JWM, Quantity::Amplification)});
  }
  if (name == "fig2b") {
    return real_surface({series("wva_amplification", Scheme::WVA, Quantity::Amplification)});
  }
  if (name == "fig3a") return real_surface({series("jwm_snr", Scheme::JWM, Quantity::Snr)});
  if (name == "fig3b") return real_surface({series("wva_snr", Scheme::WVA, Quantity::Snr)});
  if (name == "fig4") {
    return real_surface({series("jwm_eff_fi", Scheme::JWM, Quantity::EffFi),
                         series("wva_eff_fi", Scheme::WVA, Quantity::EffFi),
                         series("f_tot", Scheme::JWM, Quantity::FTot)});
  }
  if (name == "fig5") {
    SweepConfig c = imaginary_base();
    c.axis = angle_axis(Parameter::Phi, 400, 2.0 * kPi);
    c.series = {series("jwm_snr", Scheme::JWM, Quantity::Snr),
                series("wva_f_snr", Scheme::WVA, Quantity::Snr, Branch::PSA),
                series("wva_fbar_snr", Scheme::WVA, Quantity::Snr, Branch::PSR)};
    return c;
  }
  if (name == "fig6a") {
    SweepConfig c = imaginary_base();
    c.axis = angle_axis(Parameter::Phi, 200, 2.0 * kPi);
    c.axis2 = AxisSpec{Parameter::Jp, 0.0, 2.0, 100, AxisScale::Linear};
    c.series = {series("jwm_snr", Scheme::JWM, Quantity::Snr)};
    return c;
  }
  if (name == "fig6b") {
    SweepConfig c = imaginary_base();
    c.system.phi = 3.0 * kPi / 4.0;
    c.axis = AxisSpec{Parameter::Jp, 0.0, 2.0, 200, AxisScale::Linear};
    for (double g : {1e-4, 1e-3, 1e-2}) {
      SeriesSpec s = series(fmt::format("jwm_snr_g{:g}", g), Scheme::JWM, Quantity::Snr);
      s.g = g;
      c.series.push_back(s);
    }
    return c;
  }
  throw UnknownPreset("unknown preset '" + std::string(name) + "'");
}

}  // namespace wvmetro
