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

// Technical noise on the meter: a Gaussian x0 shift of the packet (read out in
// either basis) or a Gaussian p0 shift of the momentum envelope (p basis only).

#include <string_view>

#include "wvmetro/analytic.hpp"

namespace wvmetro {

enum class NoiseKind { None, X0, P0 };
std::string_view to_string(NoiseKind k);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  Basis basis = Basis::X;
  /// J (length units) for X0, J_p (inverse length) for P0.
  double width = 0.0;

  static NoiseSpec none(Basis b = Basis::X) { return {NoiseKind::None, b, 0.0}; }
  static NoiseSpec x0(Basis b, double j) { return {NoiseKind::X0, b, j}; }
  static NoiseSpec p0(double jp) { return {NoiseKind::P0, Basis::P, jp}; }

  /// Throws std::invalid_argument for negative widths or P0 in the x basis.
  void validate() const;
};

struct NoisyMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  Branch branch = Branch::PSA;
};

/// x readout with x0 noise: the mean is untouched, J^2 adds to the second
/// moment and the variance.
NoisyMoments noisy_moments_x(const SystemConfig& cfg, Branch b, double j);

/// p readout with x0 noise. The x0 shift only contributes a global phase in
/// the p representation, so the result does not depend on J.
NoisyMoments noisy_moments_p_x0(const SystemConfig& cfg, Branch b, double j);

/// p readout with p0 noise of width Jp. The envelope width becomes
/// 1/sigma_J^2 = 1/(4 sigma^2) + Jp^2 and the modification factor
/// M_k = 1 + K (|A_w|^2 - 1) uses K = (1 - e^{-2 d^2/sigma_J^2}) / 2.
NoisyMoments noisy_moments_p_p0(const SystemConfig& cfg, Branch b, double jp);

/// Dispatches on basis and noise kind. NoiseKind::None in the p basis is the
/// J = 0 case of noisy_moments_p_x0.
NoisyMoments readout_moments(const SystemConfig& cfg, Branch b, const NoiseSpec& noise);

/// Probability of the branch outcome under the noise model. x0 noise leaves
/// it unchanged; p0 noise damps the interference term by e^{-2 d^2 Jp^2}.
double noisy_selection_probability(const SystemConfig& cfg, Branch b, const NoiseSpec& noise);
Partition noisy_expected_partition(const SystemConfig& cfg, Count n, const NoiseSpec& noise);

/// JWM SNR from the DCSV of the noisy branch moments.
double noisy_snr_jwm(const SystemConfig& cfg, Count n, const Partition& part,
                     const NoiseSpec& noise, double beta = 1.0);
DcsvEstimate noisy_dcsv(const SystemConfig& cfg, Count n, const Partition& part,
                        const NoiseSpec& noise, double beta = 1.0);
/// Single-branch (WVA) SNR sqrt(N_s) |<r>_s| / sigma_s under noise.
double noisy_snr_wva(const SystemConfig& cfg, const Partition& part, const NoiseSpec& noise,
                     Branch b = Branch::PSA);

struct CriticalNoise {
  double jp = 0.0;
  double snr = 0.0;
};

/// Golden-section search for the p0 width maximizing the JWM SNR on [lo, hi],
/// with the partition following the noisy selection probability. Assumes the
/// SNR is unimodal on the interval.
CriticalNoise locate_critical_jp(const SystemConfig& cfg, Count n, double beta, double lo,
                                 double hi, double tol = 1e-6);

}  // namespace wvmetro
