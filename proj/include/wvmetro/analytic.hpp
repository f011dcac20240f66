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

// Closed-form and quadrature metrology quantities for the WVA and JWM
// schemes: conditional readout moments, the difference-combined stochastic
// variable (DCSV), SNRs and Fisher information.

#include <cstdint>
#include <optional>
#include <string_view>

#include "wvmetro/quantum_core.hpp"

namespace wvmetro {

using Count = std::int64_t;

struct ConditionalMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  Branch branch = Branch::PSA;
};

struct Partition {
  Count n1 = 0;
  Count n2 = 0;
  Count total() const { return n1 + n2; }
};

/// N1 = round(N p_f), N2 = N - N1.
Partition expected_partition(Count n, double p_f);
Partition expected_partition(const SystemConfig& cfg, Count n);

/// Result of combining the PSA and PSR groups into
/// x = beta1 Y1 - beta2 Y2 with beta1 = n1/(n1 - beta n2), beta2 = beta n2/(n1 - beta n2).
struct DcsvEstimate {
  double signal = 0.0;    // E[x]
  double variance = 0.0;  // D[x]
  double snr = 0.0;       // |signal| / sqrt(variance)
  double eff_fi = 0.0;    // (signal / d)^2 / variance
  double beta1 = 0.0;
  double beta2 = 0.0;
  Count n1 = 0;
  Count n2 = 0;
};

/// M = 1 + G (|A_w|^2 - 1), G = (1 - e^{-2g}) / 2.
double modification_factor(ComplexAmplitude aw, double g);

/// <x>_s = d Re A_w / M for the branch's weak value.
double conditional_mean_x(const SystemConfig& cfg, Branch b);

/// Closed-form branch variance sigma^2 + d^2 eta ((|A_w|^2 + 1)/(2|Re A_w|) - eta),
/// eta = |<x>_s| / d. Throws std::domain_error when |Re A_w| < 1e-10.
double conditional_variance_x_closed(const SystemConfig& cfg, Branch b);

/// Branch variance. Uses the closed form where it is defined; falls back to
/// quadrature when Re A_w vanishes, and cross-checks against quadrature when
/// Re A_w < 0 (the quadrature value wins on a relative mismatch above 1e-6).
double conditional_variance_x(const SystemConfig& cfg, Branch b);

ConditionalMoments conditional_moments_x(const SystemConfig& cfg, Branch b);
ConditionalMoments quadrature_moments(const PdfGrid& pdf, Branch b);

DcsvEstimate dcsv_combine(const ConditionalMoments& m1, const ConditionalMoments& m2,
                          Count n1, Count n2, double beta, double d);

enum class Scheme { CM, WVA, JWM };
std::string_view to_string(Scheme s);

/// Reference scales of the conventional measurement with N particles.
double cm_snr_reference(const MeterConfig& m, Count n);  // sqrt(N) d / sigma
double cm_fi_reference(const MeterConfig& m, Count n);   // N / sigma^2

/// SNR of a scheme. CM ignores the partition; WVA uses the given branch
/// (PSA by default); JWM combines both branches with weight beta.
double snr(Scheme scheme, const SystemConfig& cfg, Count n, const Partition& part,
           double beta = 1.0, Branch wva_branch = Branch::PSA);

/// (E[x]/d)^2 / D[x] of the beta-weighted DCSV.
double effective_fi(const SystemConfig& cfg, Count n, const Partition& part, double beta = 1.0);

/// (<x>_s / d)^2 N_s / sigma_s^2, the precision delivered by a single branch.
double wva_effective_fi(const SystemConfig& cfg, const Partition& part,
                        Branch b = Branch::PSA);

struct FisherOptions {
  double relative_step = 1e-5;  // h = relative_step * sigma
  bool richardson = true;
};

/// Per-particle Fisher information about d carried by one branch's readouts,
/// holding sigma fixed. With include_selection the d-dependence of the
/// selection probability counts too: F = (1/p_s) int (d_d P~_s)^2 / P~_s dx.
/// Without it, only the shape of the normalized density P_s contributes.
/// Conventional returns the FI of the incoherent mixture.
double branch_fisher_information(const SystemConfig& cfg, Branch b, const GridSpec& grid,
                                 bool include_selection = true,
                                 const FisherOptions& opt = {});

struct FisherReport {
  double f1 = 0.0;        // per-particle FI of PSA data
  double f2 = 0.0;        // per-particle FI of PSR data
  double f1_shape = 0.0;  // shape-only FI of normalized P1
  double f2_shape = 0.0;
  double f_tot = 0.0;     // N1 f1 + N2 f2
  double f_cm = 0.0;      // 1 / sigma^2 per particle
  /// int (d_d P)^2 / |P| for the beta = 1 difference density.
  std::optional<double> generalized_f;
  /// (d xbar / d)^2 and generalized_f * int |P| (x - xbar)^2, the two sides of
  /// the Cauchy-Schwarz bound for the difference density.
  std::optional<double> crb_lhs;
  std::optional<double> crb_rhs;
  bool positive_definite = true;
  Partition partition;
};

FisherReport fisher_report(const SystemConfig& cfg, Count n, const Partition& part,
                           const GridSpec& grid);
FisherReport fisher_report(const SystemConfig& cfg, Count n, const Partition& part);

}  // namespace wvmetro
