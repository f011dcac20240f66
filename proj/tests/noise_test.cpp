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

#include "wvmetro/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracle_util.hpp"

namespace {

using namespace wvmetro;
using wvtest::kPi;

wvtest::Meter meter_of(const SystemConfig& c) { return {c.meter().d(), c.meter().sigma()}; }

void expect_same(const NoisyMoments& a, const NoisyMoments& b) {
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.second_moment, b.second_moment);
  EXPECT_EQ(a.variance, b.variance);
}

TEST(NoiseSpec, Validation) {
  EXPECT_NO_THROW(NoiseSpec::x0(Basis::X, 0.5).validate());
  EXPECT_NO_THROW(NoiseSpec::p0(0.1).validate());
  EXPECT_THROW((NoiseSpec{NoiseKind::P0, Basis::X, 0.1}).validate(), std::invalid_argument);
  EXPECT_THROW(NoiseSpec::x0(Basis::X, -1.0).validate(), std::invalid_argument);
  EXPECT_THROW(NoiseSpec::p0(std::nan("")).validate(), std::invalid_argument);
}

TEST(NoisyX, ZeroWidthIsNoiseless) {
  const auto cfg = real_config(kPi / 3, 0.02);
  const NoisyMoments m = noisy_moments_x(cfg, Branch::PSA, 0.0);
  const ConditionalMoments c = conditional_moments_x(cfg, Branch::PSA);
  EXPECT_EQ(m.mean, c.mean);
  EXPECT_EQ(m.second_moment, c.second_moment);
  EXPECT_EQ(m.variance, c.variance);
}

TEST(NoisyX, EigenstateVarianceDoubles) {
  const auto cfg = real_config(0.0, 0.01);
  const double s = cfg.meter().sigma();
  EXPECT_NEAR(noisy_moments_x(cfg, Branch::PSA, s).variance, 2 * s * s, 1e-10);
}

TEST(NoisyX, MeanInvariantVarianceAdditive) {
  for (int k = 1; k < 30; ++k) {
    const double theta = 2 * kPi * k / 30.0 + 0.02;
    const auto cfg = real_config(theta, 0.01);
    for (Branch b : {Branch::PSA, Branch::PSR}) {
      const NoisyMoments m0 = noisy_moments_x(cfg, b, 0.0);
      for (double j : {0.1, 1.0, 5.0, 30.0}) {
        const NoisyMoments mj = noisy_moments_x(cfg, b, j);
        EXPECT_EQ(mj.mean, m0.mean);
        EXPECT_NEAR(mj.variance - m0.variance, j * j, 1e-12 * std::max(1.0, j * j));
        EXPECT_NEAR(mj.second_moment - m0.second_moment, j * j, 1e-12 * std::max(1.0, j * j));
      }
    }
  }
}

TEST(NoisyPX0, IndependentOfWidth) {
  const auto cfg = imaginary_config(kPi / 3, 0.01);
  for (Branch b : {Branch::PSA, Branch::PSR}) {
    const NoisyMoments m0 = noisy_moments_p_x0(cfg, b, 0.0);
    for (double j : {0.1, 5.0, 100.0}) expect_same(noisy_moments_p_x0(cfg, b, j), m0);
  }
}

TEST(NoisyPX0, ImaginaryQuarterTurn) {
  const auto cfg = imaginary_config(kPi / 2, 0.01);
  const NoisyMoments m = noisy_moments_p_x0(cfg, Branch::PSA, 1.0);
  EXPECT_NEAR(m.mean, -0.019604, 1e-6);
  EXPECT_NEAR(m.second_moment, 0.01, 1e-15);
  const auto q = wvtest::p_moments(cfg.pre().amplitudes(), cfg.post().amplitudes(), meter_of(cfg));
  EXPECT_NEAR(m.mean, q.mean, 1e-10);
  EXPECT_NEAR(m.second_moment, q.second, 1e-10);
}

TEST(NoisyPX0, RealPostSelectionHasNoSignal) {
  for (double theta : {0.3, 1.0, 2.0, 2.9}) {
    EXPECT_NEAR(noisy_moments_p_x0(real_config(theta, 0.01), Branch::PSA, 0.5).mean, 0.0, 1e-15);
  }
}

TEST(NoisyPX0, MatchesQuadratureOnRandomStates) {
  wvtest::StateGen gen(31);
  for (int i = 0; i < 20; ++i) {
    const SystemConfig cfg(SpinState(gen.state()), SpinState(gen.state()),
                           MeterConfig(1.0, gen.log_uniform(1e-3, 1.0)));
    for (Branch b : {Branch::PSA, Branch::PSR}) {
      if (selection_probability(cfg, b) < 1e-4) continue;
      const NoisyMoments m = noisy_moments_p_x0(cfg, b, 0.0);
      const auto q = wvtest::p_moments(cfg.pre().amplitudes(),
                                       cfg.selection_state(b).amplitudes(), meter_of(cfg));
      EXPECT_NEAR(m.mean, q.mean, 1e-9 * std::max(1.0, std::abs(q.mean)));
      EXPECT_NEAR(m.second_moment, q.second, 1e-9 * q.second);
    }
  }
}

TEST(NoisyPP0, ZeroWidthReducesToX0Branch) {
  wvtest::StateGen gen(37);
  for (int i = 0; i < 50; ++i) {
    const SystemConfig cfg(SpinState(gen.state()), SpinState(gen.state()),
                           MeterConfig(1.0, gen.log_uniform(1e-4, 1.0)));
    for (Branch b : {Branch::PSA, Branch::PSR}) {
      expect_same(noisy_moments_p_p0(cfg, b, 0.0), noisy_moments_p_x0(cfg, b, 0.0));
    }
  }
}

TEST(NoisyPP0, ImaginaryQuarterTurn) {
  const auto cfg = imaginary_config(kPi / 2, 0.01);
  const NoisyMoments m = noisy_moments_p_p0(cfg, Branch::PSA, 0.1);
  // 1/sigma_J^2 = 0.01 + 0.01; mean = -(2 d / sigma_J^2) exp(-2 d^2 / sigma_J^2).
  EXPECT_NEAR(m.mean, -0.04 * std::exp(-0.04), 1e-15);
  EXPECT_NEAR(m.mean, -0.038432, 1e-6);
  EXPECT_NEAR(m.second_moment, 0.02, 1e-15);
}

TEST(NoisyPP0, UnitModulusWeakValueSecondMoment) {
  const auto cfg = imaginary_config(kPi / 2, 0.01);
  for (double jp : {0.0, 0.05, 0.3, 2.0}) {
    EXPECT_NEAR(noisy_moments_p_p0(cfg, Branch::PSA, jp).second_moment, 0.01 + jp * jp, 1e-14);
  }
}

TEST(NoisyPP0, MatchesNoiseAveragedQuadrature) {
  // Both branches, against the p0-averaged Born density.
  for (double phi : {kPi / 2, 3 * kPi / 4, 1.2}) {
    const auto cfg = imaginary_config(phi, 0.01);
    for (double jp : {0.1, 0.4}) {
      for (Branch b : {Branch::PSA, Branch::PSR}) {
        const NoisyMoments m = noisy_moments_p_p0(cfg, b, jp);
        const auto q = wvtest::p_moments(cfg.pre().amplitudes(),
                                         cfg.selection_state(b).amplitudes(), meter_of(cfg), jp);
        EXPECT_NEAR(m.mean, q.mean, 1e-7) << "phi=" << phi << " jp=" << jp;
        EXPECT_NEAR(m.second_moment, q.second, 1e-7 * q.second);
        EXPECT_NEAR(noisy_selection_probability(cfg, b, NoiseSpec::p0(jp)), q.norm, 1e-8);
      }
    }
  }
}

TEST(NoisyPP0, ContinuousAtZeroWidth) {
  const auto cfg = imaginary_config(2.0, 0.01);
  const NoisyMoments a = noisy_moments_p_p0(cfg, Branch::PSA, 0.0);
  const NoisyMoments b = noisy_moments_p_p0(cfg, Branch::PSA, 1e-9);
  EXPECT_NEAR(a.mean, b.mean, 1e-12);
  EXPECT_NEAR(a.second_moment, b.second_moment, 1e-12);
}

TEST(NoisySelection, OnlyP0ChangesTheSplit) {
  const auto cfg = imaginary_config(1.0, 0.05);
  const double p = selection_probability(cfg, Branch::PSA);
  EXPECT_EQ(noisy_selection_probability(cfg, Branch::PSA, NoiseSpec::x0(Basis::P, 3.0)), p);
  EXPECT_EQ(noisy_selection_probability(cfg, Branch::PSA, NoiseSpec::x0(Basis::X, 3.0)), p);
  EXPECT_EQ(noisy_selection_probability(cfg, Branch::PSA, NoiseSpec::p0(0.0)), p);
  const double q = noisy_selection_probability(cfg, Branch::PSA, NoiseSpec::p0(0.5));
  EXPECT_NEAR(q + noisy_selection_probability(cfg, Branch::PSR, NoiseSpec::p0(0.5)), 1.0, 1e-12);
  EXPECT_LT(std::abs(q - 0.5), std::abs(p - 0.5));
}

TEST(NoisySnr, NoNoiseEqualsNoiselessJwm) {
  const auto cfg = real_config(kPi / 3, 0.01);
  const Count n = 10000;
  const Partition part = expected_partition(cfg, n);
  EXPECT_NEAR(noisy_snr_jwm(cfg, n, part, NoiseSpec::none()), snr(Scheme::JWM, cfg, n, part),
              1e-12 * snr(Scheme::JWM, cfg, n, part));
}

TEST(NoisySnr, P0NoiseEnhancesImaginaryMeasurement) {
  // phi = pi/2 itself splits the counts exactly in half; use nearby angles.
  const Count n = 10000;
  for (double phi : {kPi / 2 + 0.05, 3 * kPi / 4}) {
    const auto cfg = imaginary_config(phi, 0.01);
    const NoiseSpec quiet = NoiseSpec::p0(0.0);
    const NoiseSpec noisy = NoiseSpec::p0(0.1);
    const double s0 = noisy_snr_jwm(cfg, n, noisy_expected_partition(cfg, n, quiet), quiet);
    const double s1 = noisy_snr_jwm(cfg, n, noisy_expected_partition(cfg, n, noisy), noisy);
    EXPECT_GT(s1, s0) << "phi=" << phi;
  }
}

TEST(NoisySnr, X0NoiseHalvesSingleBranchInformation) {
  const auto cfg = real_config(0.0, 0.01);
  const Partition part = expected_partition(cfg, 10000);
  const double s = cfg.meter().sigma();
  const double quiet = noisy_snr_wva(cfg, part, NoiseSpec::none());
  const double noisy = noisy_snr_wva(cfg, part, NoiseSpec::x0(Basis::X, s));
  EXPECT_NEAR(noisy / quiet, 1 / std::sqrt(2.0), 1e-12);
}

TEST(CriticalNoise, InteriorMaximum) {
  const auto cfg = imaginary_config(3 * kPi / 4, 0.01);
  const Count n = 10000;
  const CriticalNoise c = locate_critical_jp(cfg, n, 1.0, 0.0, 2.0);
  auto at = [&](double jp) {
    const NoiseSpec ns = NoiseSpec::p0(jp);
    return noisy_snr_jwm(cfg, n, noisy_expected_partition(cfg, n, ns), ns);
  };
  EXPECT_GT(c.jp, 0.1);
  EXPECT_LT(c.jp, 2.0);
  EXPECT_NEAR(c.snr, at(c.jp), 1e-12 * c.snr);
  EXPECT_GE(c.snr, at(c.jp * 0.9));
  EXPECT_GE(c.snr, at(c.jp * 1.1));
  EXPECT_GT(c.snr, at(0.0));
  EXPECT_THROW(locate_critical_jp(cfg, n, 1.0, 1.0, 0.5), std::invalid_argument);
}

}  // namespace
