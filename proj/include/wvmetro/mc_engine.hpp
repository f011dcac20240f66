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

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "wvmetro/analytic.hpp"
#include "wvmetro/noise.hpp"
#include "wvmetro/rng.hpp"

namespace wvmetro {

/// Inverse-CDF table of a tabulated density. Negative density values are
/// clipped to zero before integration; the CDF is normalized so cdf[last] = 1.
struct SamplerTable {
  Eigen::ArrayXd xs;
  Eigen::ArrayXd cdf;

  static SamplerTable from_pdf(const PdfGrid& pdf);
  /// Linear interpolation of the inverse CDF at u in (0, 1).
  double sample(double u) const;
  bool empty() const { return xs.size() == 0; }
};

inline constexpr std::size_t kSamplerTablePoints = std::size_t{1} << 14;

struct Particle {
  Branch branch = Branch::PSA;
  double readout = 0.0;
};

/// Draws (branch, readout) pairs for one configuration and noise model.
///
/// Two routes exist. The x basis, and the noiseless p basis, draw the branch
/// from (p_f, p_fbar) and the readout from the branch's inverse-CDF table,
/// adding x0 ~ N(0, J^2) for x-basis X0 noise. Noisy p-basis readouts are
/// drawn meter first: the noise value and the momentum are drawn, then the
/// branch follows the Born rule for that momentum. The two routes sample the
/// same joint law; the second avoids a table per noise realization.
class ParticleSampler {
 public:
  ParticleSampler(const SystemConfig& cfg, Basis basis, NoiseSpec noise,
                  std::size_t table_points = kSamplerTablePoints);

  Particle sample(CounterRng& rng) const;

  const SystemConfig& config() const { return cfg_; }
  Basis basis() const { return basis_; }
  const NoiseSpec& noise() const { return noise_; }
  /// Probability of the PSA outcome without noise.
  double p_f() const { return p_f_; }
  const SamplerTable& table(Branch b) const;

 private:
  SystemConfig cfg_;
  Basis basis_;
  NoiseSpec noise_;
  double p_f_;
  bool meter_first_;
  Complex a1_, a2_;  // PSA branch coefficients
  SamplerTable psa_, psr_;
};

Particle sample_particle(const ParticleSampler& sampler, CounterRng& rng);

/// Streaming central moments up to fourth order. merge() combines two
/// accumulators exactly as if their samples had been pushed in sequence.
struct MomentAccumulator {
  Count n = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sums of powers of deviations from the mean
  double m3 = 0.0;
  double m4 = 0.0;

  void push(double x);
  void merge(const MomentAccumulator& other);

  double population_variance() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
  double sample_variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double central(int k) const;
  double raw_second() const { return mean * mean + population_variance(); }
  double se_mean() const;
  /// Standard error of the raw second moment, delta method.
  double se_raw_second() const;
  /// Standard error of the population variance, large-sample approximation.
  double se_variance() const;
};

/// Per-branch readout accumulators of one N-particle experiment.
struct TrialRecord {
  MomentAccumulator psa;
  MomentAccumulator psr;
};

struct TrialResult {
  Count n1 = 0;
  Count n2 = 0;
  double y1 = 0.0;  // PSA group mean, 0 for an empty group
  double y2 = 0.0;
  double dcsv = 0.0;
  bool singular = false;
  /// beta1^2 s1^2/n1 + beta2^2 s2^2/n2 from the sample variances; NaN when a
  /// weighted group has fewer than two members.
  double plugin_variance = 0.0;
};

TrialRecord simulate_trial(const ParticleSampler& sampler, Count n, CounterRng& rng);

/// Forms the DCSV from observed counts. Singular iff n1 == beta n2 exactly.
TrialResult combine_trial(const TrialRecord& rec, double beta);

/// One experiment with the stream (seed, 0).
TrialResult run_trial(const SystemConfig& cfg, Count n, Basis basis, const NoiseSpec& noise,
                      double beta, std::uint64_t seed);

/// Trial t uses the stream (master_seed, t). The result does not depend on
/// the worker count.
std::vector<TrialRecord> simulate_ensemble(const ParticleSampler& sampler, Count n,
                                           Count trials, std::uint64_t master_seed,
                                           unsigned workers = 0);

struct EnsembleStats {
  Count trials = 0;
  Count used_trials = 0;  // non-singular
  double mean_dcsv = 0.0;
  double var_dcsv = 0.0;  // unbiased sample variance over used trials
  double empirical_snr = 0.0;
  double empirical_eff_fi = 0.0;
  double singular_fraction = 0.0;

  double se_mean_dcsv = 0.0;
  double se_var_dcsv = 0.0;
  /// Mean over used trials of the per-trial plug-in variance; estimates the
  /// variance at fixed counts.
  double conditional_var = 0.0;
  double se_conditional_var = 0.0;
  double conditional_snr = 0.0;     // |mean_dcsv| / sqrt(conditional_var)
  double conditional_eff_fi = 0.0;  // (mean_dcsv/d)^2 / conditional_var

  MomentAccumulator n1;  // PSA counts over all trials
  MomentAccumulator y1;  // group means over used trials
  MomentAccumulator y2;
  MomentAccumulator psa;  // readouts pooled over all trials
  MomentAccumulator psr;
};

/// Throws AllTrialsSingular when no trial is usable.
EnsembleStats summarize(const std::vector<TrialRecord>& records, double beta, double d);

/// Requires n >= 2 and trials >= 2.
EnsembleStats run_ensemble(const SystemConfig& cfg, Count n, Count trials, Basis basis,
                           const NoiseSpec& noise, double beta, std::uint64_t master_seed,
                           unsigned workers = 0);

}  // namespace wvmetro
