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

#include "wvmetro/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace wvmetro {

DcsvExpectation expected_dcsv_statistics(const SystemConfig& cfg, Count n, Basis basis,
                                         const NoiseSpec& noise, double beta) {
  NoiseSpec spec = noise;
  spec.basis = basis;
  spec.validate();
  DcsvExpectation e;
  e.p_f = noisy_selection_probability(cfg, Branch::PSA, spec);
  e.psa = readout_moments(cfg, Branch::PSA, spec);
  e.psr = readout_moments(cfg, Branch::PSR, spec);

  const double nn = static_cast<double>(n);
  const double q = 1.0 - e.p_f;
  const double n1 = nn * e.p_f;
  const double n2 = nn - n1;
  const double denom = (1.0 + beta) * n1 - beta * nn;
  if (std::abs(denom) <= kSingularEpsilon * nn) {
    throw SingularCombination("expected_dcsv_statistics: N p_f sits on n1 = beta n2");
  }
  const double b1 = n1 / denom;
  const double b2 = beta * n2 / denom;
  const double m1 = e.psa.mean;
  const double m2 = e.psr.mean;
  e.signal_fixed = b1 * m1 - b2 * m2;
  e.conditional_variance = (n1 > 0.0 ? b1 * b1 * e.psa.variance / n1 : 0.0) +
                           (n2 > 0.0 ? b2 * b2 * e.psr.variance / n2 : 0.0);
  // Mean of the DCSV as a function of n1, expanded about N p_f.
  const double h1 = ((m1 + beta * m2) - (1.0 + beta) * e.signal_fixed) / denom;
  const double h2 = -2.0 * (1.0 + beta) * h1 / denom;
  const double count_var = nn * e.p_f * q;
  e.bias = 0.5 * h2 * count_var;
  e.signal = e.signal_fixed + e.bias;
  e.partition_variance = h1 * h1 * count_var;
  e.total_variance = e.conditional_variance + e.partition_variance;
  const double d = cfg.meter().d();
  e.snr = std::abs(e.signal) / std::sqrt(e.total_variance);
  e.eff_fi = (e.signal / d) * (e.signal / d) / e.total_variance;
  return e;
}

const QuantityCheck& ComparisonReport::at(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("ComparisonReport: no check named " + std::string(name));
}

QuantityCheck make_check(std::string name, double analytic, double empirical, double std_error,
                         double z_threshold) {
  QuantityCheck c;
  c.name = std::move(name);
  c.analytic = analytic;
  c.empirical = empirical;
  c.std_error = std_error;
  const double diff = empirical - analytic;
  if (std_error > 0.0) {
    c.z = diff / std_error;
    c.pass = std::abs(c.z) < z_threshold;
  } else {
    c.z = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
    c.pass = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(analytic));
  }
  return c;
}

ComparisonReport oracle_compare(const SystemConfig& cfg, Count n, Count trials, Basis basis,
                                const NoiseSpec& noise, double beta, std::uint64_t master_seed,
                                unsigned workers, double z_threshold) {
  ComparisonReport r;
  r.expected = expected_dcsv_statistics(cfg, n, basis, noise, beta);
  r.stats = run_ensemble(cfg, n, trials, basis, noise, beta, master_seed, workers);
  const auto& e = r.expected;
  const auto& s = r.stats;
  const double d = cfg.meter().d();
  auto add = [&](std::string name, double a, double emp, double se) {
    r.checks.push_back(make_check(std::move(name), a, emp, se, z_threshold));
  };

  add("signal", e.signal, s.mean_dcsv, s.se_mean_dcsv);
  add("variance", e.total_variance, s.var_dcsv, s.se_var_dcsv);
  add("conditional_variance", e.conditional_variance, s.conditional_var, s.se_conditional_var);

  // Delta-method errors of the ratio statistics; mean and variance treated as
  // independent.
  const double sd = std::sqrt(s.var_dcsv);
  const double rel_var_se = s.se_var_dcsv / s.var_dcsv;
  const double se_snr = std::hypot(s.se_mean_dcsv / sd, 0.5 * s.empirical_snr * rel_var_se);
  add("snr", e.snr, s.empirical_snr, se_snr);
  const double se_eff = std::hypot(2.0 * std::abs(s.mean_dcsv) * s.se_mean_dcsv / (d * d * s.var_dcsv),
                                   s.empirical_eff_fi * rel_var_se);
  add("eff_fi", e.eff_fi, s.empirical_eff_fi, se_eff);

  const double nn = static_cast<double>(n);
  const double count_var = nn * e.p_f * (1.0 - e.p_f);
  add("n1_mean", nn * e.p_f, s.n1.mean, std::sqrt(count_var / static_cast<double>(s.trials)));
  add("n1_variance", count_var, s.n1.sample_variance(), s.n1.se_variance());

  add("psa_mean", e.psa.mean, s.psa.mean, s.psa.se_mean());
  add("psa_second_moment", e.psa.second_moment, s.psa.raw_second(), s.psa.se_raw_second());
  add("psr_mean", e.psr.mean, s.psr.mean, s.psr.se_mean());
  add("psr_second_moment", e.psr.second_moment, s.psr.raw_second(), s.psr.se_raw_second());

  r.all_pass = true;
  for (const auto& c : r.checks) r.all_pass = r.all_pass && c.pass;
  return r;
}

}  // namespace wvmetro
