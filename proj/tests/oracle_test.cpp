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

#include <gtest/gtest.h>

#include <cmath>

#include "oracle_util.hpp"

namespace {

using namespace wvmetro;
using wvtest::kPi;

TEST(MakeCheck, ZScoreAndThreshold) {
  const QuantityCheck c = make_check("x", 1.0, 1.3, 0.1);
  EXPECT_NEAR(c.z, 3.0, 1e-12);
  EXPECT_TRUE(c.pass);
  EXPECT_FALSE(make_check("x", 1.0, 1.6, 0.1).pass);
  EXPECT_TRUE(make_check("x", 2.0, 2.0, 0.0).pass);
  EXPECT_FALSE(make_check("x", 2.0, 2.1, 0.0).pass);
}

TEST(Expectation, ZeroBetaHasNoCountTerm) {
  const auto cfg = real_config(kPi / 3, 0.01);
  const DcsvExpectation e = expected_dcsv_statistics(cfg, 10000, Basis::X, NoiseSpec::none(), 0.0);
  EXPECT_DOUBLE_EQ(e.signal, e.psa.mean);
  EXPECT_EQ(e.partition_variance, 0.0);
  EXPECT_EQ(e.bias, 0.0);
}

TEST(Expectation, CountTermsMatchExactBinomialAverage) {
  // Exact average of the fixed-count mean h(n1) over Binomial(N, p_f),
  // summed term by term.
  const auto cfg = real_config(kPi / 4, 0.01);
  const Count n = 2000;
  for (double beta : {1.0, 0.5}) {
    const DcsvExpectation e = expected_dcsv_statistics(cfg, n, Basis::X, NoiseSpec::none(), beta);
    const double p = e.p_f;
    const double m1 = e.psa.mean, m2 = e.psr.mean;
    double mean = 0, second = 0;
    for (Count k = 0; k <= n; ++k) {
      const double logw = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                          k * std::log(p) + (n - k) * std::log1p(-p);
      const double w = std::exp(logw);
      if (w < 1e-300) continue;
      const double denom = k - beta * (n - k);
      if (denom == 0) continue;
      const double h = (k * m1 - beta * (n - k) * m2) / denom;
      mean += w * h;
      second += w * h * h;
    }
    const double var = second - mean * mean;
    EXPECT_NEAR(e.signal, mean, 0.05 * std::abs(e.bias) + 1e-12);
    EXPECT_NEAR(e.partition_variance, var, 0.02 * var);
  }
}

TEST(Expectation, SingularSplitThrows) {
  EXPECT_THROW(expected_dcsv_statistics(real_config(kPi, 0.01), 1000, Basis::X,
                                        NoiseSpec::none(), 1.0),
               SingularCombination);
}

TEST(OracleCompare, NoiselessXBasisGridPoint) {
  const auto cfg = real_config(kPi / 4, 0.01);
  const ComparisonReport r = oracle_compare(cfg, 10000, 400, Basis::X, NoiseSpec::none(), 1.0, 101);
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << " z=" << c.z;
  EXPECT_TRUE(r.all_pass);
  EXPECT_GE(r.checks.size(), 8u);
  EXPECT_NO_THROW(r.at("signal"));
  EXPECT_THROW(r.at("nope"), std::out_of_range);
}

TEST(OracleCompare, X0NoiseInMomentumBasisIsInvisible) {
  const SystemConfig cfg(SpinState(1, 1), SpinState::polar(kPi / 3, kPi / 4), MeterConfig(1, 0.01));
  const double s = cfg.meter().sigma();
  const EnsembleStats quiet = run_ensemble(cfg, 10000, 200, Basis::P, NoiseSpec::none(Basis::P), 1.0, 7);
  const EnsembleStats noisy = run_ensemble(cfg, 10000, 200, Basis::P, NoiseSpec::x0(Basis::P, s), 1.0, 8);
  auto z = [](double a, double sa, double b, double sb) { return (a - b) / std::hypot(sa, sb); };
  EXPECT_LT(std::abs(z(quiet.psa.mean, quiet.psa.se_mean(), noisy.psa.mean, noisy.psa.se_mean())), 5);
  EXPECT_LT(std::abs(z(quiet.psa.raw_second(), quiet.psa.se_raw_second(), noisy.psa.raw_second(),
                       noisy.psa.se_raw_second())),
            5);
  EXPECT_LT(std::abs(z(quiet.psr.mean, quiet.psr.se_mean(), noisy.psr.mean, noisy.psr.se_mean())), 5);
}

TEST(OracleCompare, X0NoiseAddsVarianceInPositionBasis) {
  const auto cfg = real_config(kPi / 3, 0.01);
  const double s = cfg.meter().sigma();
  const ComparisonReport r =
      oracle_compare(cfg, 10000, 200, Basis::X, NoiseSpec::x0(Basis::X, s), 1.0, 103);
  EXPECT_TRUE(r.all_pass);
  // Pooled PSA readout variance against the noiseless value plus J^2.
  const double expect = conditional_variance_x(cfg, Branch::PSA) + s * s;
  EXPECT_NEAR(r.stats.psa.population_variance(), expect, 5 * r.stats.psa.se_variance());
}

TEST(OracleCompare, P0NoisePoint) {
  const auto cfg = imaginary_config(3 * kPi / 4, 0.01);
  const ComparisonReport r = oracle_compare(cfg, 10000, 200, Basis::P, NoiseSpec::p0(0.1), 1.0, 104);
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << " z=" << c.z;
}

}  // namespace
