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
#include <string>
#include <string_view>
#include <vector>

#include "wvmetro/mc_engine.hpp"

namespace wvmetro {

/// Analytic statistics of the DCSV when the counts are themselves random,
/// n1 ~ Binomial(N, p_f). The fixed-count variance is taken at n1 = N p_f;
/// the count fluctuation adds partition_variance and shifts the mean by bias,
/// both to second order in the fluctuation.
struct DcsvExpectation {
  double p_f = 0.0;
  double signal_fixed = 0.0;  // E[x] at n1 = N p_f
  double bias = 0.0;
  double signal = 0.0;  // signal_fixed + bias
  double conditional_variance = 0.0;
  double partition_variance = 0.0;
  double total_variance = 0.0;
  double snr = 0.0;     // |signal| / sqrt(total_variance)
  double eff_fi = 0.0;  // (signal/d)^2 / total_variance
  NoisyMoments psa;
  NoisyMoments psr;
};

/// Throws SingularCombination when N p_f sits on the singular point.
DcsvExpectation expected_dcsv_statistics(const SystemConfig& cfg, Count n, Basis basis,
                                         const NoiseSpec& noise, double beta);

struct QuantityCheck {
  std::string name;
  double analytic = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  bool pass = false;
};

struct ComparisonReport {
  std::vector<QuantityCheck> checks;
  EnsembleStats stats;
  DcsvExpectation expected;
  bool all_pass = false;

  /// Throws std::out_of_range for an unknown name.
  const QuantityCheck& at(std::string_view name) const;
};

/// z-score comparison of an empirical value against an analytic one. A zero
/// standard error passes only on agreement to 1e-12.
QuantityCheck make_check(std::string name, double analytic, double empirical, double std_error,
                         double z_threshold = 5.0);

/// Runs an ensemble and compares signal, variances, SNR, effective FI, count
/// statistics and per-branch readout moments with their analytic values.
ComparisonReport oracle_compare(const SystemConfig& cfg, Count n, Count trials, Basis basis,
                                const NoiseSpec& noise, double beta, std::uint64_t master_seed,
                                unsigned workers = 0, double z_threshold = 5.0);

}  // namespace wvmetro
