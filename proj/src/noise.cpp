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

#include <cmath>
#include <stdexcept>

namespace wvmetro {

namespace {

// Conditional p moments for an envelope of variance `inv` (= 1/sigma_J^2):
//   <p>   = (Im A_w / M) 2 d inv e^{-2 d^2 inv}
//   <p^2> = inv + ((|A_w|^2 - 1) / M) 2 d^2 inv^2 e^{-2 d^2 inv}
// with M = 1 + K (|A_w|^2 - 1), K = (1 - e^{-2 d^2 inv}) / 2.
NoisyMoments p_moments(const SystemConfig& cfg, Branch b, double inv) {
  const double d = cfg.meter().d();
  const double damping = std::exp(-2.0 * d * d * inv);
  NoisyMoments out;
  out.branch = b;
  try {
    const ComplexAmplitude aw = weak_value(cfg, b);
    const double K = 0.5 * (1.0 - damping);
    const double excess = std::norm(aw) - 1.0;
    const double M = 1.0 + K * excess;
    out.mean = (aw.imag() / M) * 2.0 * d * inv * damping;
    out.second_moment = inv + (excess / M) * 2.0 * d * d * inv * inv * damping;
  } catch (const OrthogonalPostSelection&) {
    // Same quantities written through the branch amplitudes; the weak-value
    // form is 0/0 here but the moments stay finite.
    const auto [a, c] = branch_coefficients(cfg, b);
    const Complex ac = std::conj(a) * c;
    const double norm = std::norm(a) + std::norm(c) + 2.0 * ac.real() * damping;
    out.mean = -2.0 * ac.imag() * 2.0 * d * inv * damping / norm;
    out.second_moment = inv - 8.0 * d * d * inv * inv * ac.real() * damping / norm;
  }
  out.variance = out.second_moment - out.mean * out.mean;
  return out;
}

double base_p_inverse_width(const SystemConfig& cfg) {
  const double s = cfg.meter().sigma();
  return 1.0 / (4.0 * s * s);
}

}  // namespace

std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::X0: return "x0";
    case NoiseKind::P0: return "p0";
  }
  return "?";
}

void NoiseSpec::validate() const {
  if (!(width >= 0.0) || !std::isfinite(width)) {
    throw std::invalid_argument("NoiseSpec: width must be finite and >= 0");
  }
  if (kind == NoiseKind::P0 && basis != Basis::P) {
    throw std::invalid_argument("NoiseSpec: p0 noise requires the p basis");
  }
}

NoisyMoments noisy_moments_x(const SystemConfig& cfg, Branch b, double j) {
  if (!(j >= 0.0)) throw std::invalid_argument("noisy_moments_x: J must be >= 0");
  const ConditionalMoments m = conditional_moments_x(cfg, b);
  const double j2 = j * j;
  return {m.mean, m.second_moment + j2, m.variance + j2, b};
}

NoisyMoments noisy_moments_p_x0(const SystemConfig& cfg, Branch b, double j) {
  if (!(j >= 0.0)) throw std::invalid_argument("noisy_moments_p_x0: J must be >= 0");
  return p_moments(cfg, b, base_p_inverse_width(cfg));
}

NoisyMoments noisy_moments_p_p0(const SystemConfig& cfg, Branch b, double jp) {
  if (!(jp >= 0.0)) throw std::invalid_argument("noisy_moments_p_p0: Jp must be >= 0");
  return p_moments(cfg, b, base_p_inverse_width(cfg) + jp * jp);
}

NoisyMoments readout_moments(const SystemConfig& cfg, Branch b, const NoiseSpec& noise) {
  noise.validate();
  if (noise.basis == Basis::X) {
    return noisy_moments_x(cfg, b, noise.kind == NoiseKind::X0 ? noise.width : 0.0);
  }
  switch (noise.kind) {
    case NoiseKind::None: return noisy_moments_p_x0(cfg, b, 0.0);
    case NoiseKind::X0: return noisy_moments_p_x0(cfg, b, noise.width);
    case NoiseKind::P0: return noisy_moments_p_p0(cfg, b, noise.width);
  }
  return {};
}

double noisy_selection_probability(const SystemConfig& cfg, Branch b, const NoiseSpec& noise) {
  noise.validate();
  if (noise.kind != NoiseKind::P0 || b == Branch::Conventional) {
    return selection_probability(cfg, b);
  }
  const double d = cfg.meter().d();
  const double inv = base_p_inverse_width(cfg) + noise.width * noise.width;
  const auto [a, c] = branch_coefficients(cfg, b);
  return std::norm(a) + std::norm(c) +
         2.0 * (std::conj(a) * c).real() * std::exp(-2.0 * d * d * inv);
}

Partition noisy_expected_partition(const SystemConfig& cfg, Count n, const NoiseSpec& noise) {
  return expected_partition(n, noisy_selection_probability(cfg, Branch::PSA, noise));
}

DcsvEstimate noisy_dcsv(const SystemConfig& cfg, Count n, const Partition& part,
                        const NoiseSpec& noise, double beta) {
  if (part.total() != n) throw std::invalid_argument("noisy_dcsv: partition must sum to N");
  const NoisyMoments m1 = readout_moments(cfg, Branch::PSA, noise);
  const NoisyMoments m2 = readout_moments(cfg, Branch::PSR, noise);
  return dcsv_combine({m1.mean, m1.second_moment, m1.variance, Branch::PSA},
                      {m2.mean, m2.second_moment, m2.variance, Branch::PSR}, part.n1, part.n2,
                      beta, cfg.meter().d());
}

double noisy_snr_jwm(const SystemConfig& cfg, Count n, const Partition& part,
                     const NoiseSpec& noise, double beta) {
  return noisy_dcsv(cfg, n, part, noise, beta).snr;
}

double noisy_snr_wva(const SystemConfig& cfg, const Partition& part, const NoiseSpec& noise,
                     Branch b) {
  const Count ns = b == Branch::PSR ? part.n2 : part.n1;
  if (ns == 0) return 0.0;
  const NoisyMoments m = readout_moments(cfg, b, noise);
  return std::sqrt(static_cast<double>(ns)) * std::abs(m.mean) / std::sqrt(m.variance);
}

CriticalNoise locate_critical_jp(const SystemConfig& cfg, Count n, double beta, double lo,
                                 double hi, double tol) {
  if (!(hi > lo) || lo < 0.0) throw std::invalid_argument("locate_critical_jp: bad bracket");
  auto objective = [&](double jp) {
    const NoiseSpec noise = NoiseSpec::p0(jp);
    return noisy_snr_jwm(cfg, n, noisy_expected_partition(cfg, n, noise), noise, beta);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = objective(c);
  double fe = objective(e);
  while (b - a > tol) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = objective(e);
    }
  }
  const double jp = 0.5 * (a + b);
  return {jp, objective(jp)};
}

}  // namespace wvmetro
