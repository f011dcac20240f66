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

#include "wvmetro/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wvmetro/quadrature.hpp"

namespace wvmetro {

namespace {

constexpr double kDegenerateModification = 1e-12;
constexpr double kReAwFloor = 1e-10;
constexpr double kVarianceAgreement = 1e-6;
constexpr double kSignedDensityFloor = -1e-12;

void check_partition(Count n, const Partition& part) {
  if (part.n1 < 0 || part.n2 < 0 || part.total() != n) {
    throw std::invalid_argument("partition must satisfy n1, n2 >= 0 and n1 + n2 = N");
  }
}

double quadrature_variance(const SystemConfig& cfg, Branch b) {
  return pdf_x(cfg, b).variance();
}

// Densities at d + delta with sigma held fixed: either unnormalized P~_s,
// normalized P_s, or the normalized beta = 1 difference density.
enum class DensityKind { Unnormalized, Normalized, Difference };

Eigen::ArrayXd displaced_density(const SystemConfig& cfg, Branch b, DensityKind kind,
                                 double delta, const Eigen::ArrayXd& xs) {
  const MeterConfig& m = cfg.meter();
  const SystemConfig moved = cfg.with_meter(MeterConfig::from_width(m.d() + delta, m.sigma()));
  switch (kind) {
    case DensityKind::Unnormalized:
      return branch_density_x(moved, b, xs);
    case DensityKind::Normalized:
      return branch_density_x(moved, b, xs) / selection_probability(moved, b);
    case DensityKind::Difference: {
      const auto [pf, pfbar] = selection_probabilities(moved);
      return (branch_density_x(moved, Branch::PSA, xs) -
              branch_density_x(moved, Branch::PSR, xs)) /
             (pf - pfbar);
    }
  }
  return {};
}

Eigen::ArrayXd density_derivative(const SystemConfig& cfg, Branch b, DensityKind kind,
                                  const Eigen::ArrayXd& xs, const FisherOptions& opt) {
  const double h = opt.relative_step * cfg.meter().sigma();
  auto central = [&](double step) -> Eigen::ArrayXd {
    return (displaced_density(cfg, b, kind, step, xs) -
            displaced_density(cfg, b, kind, -step, xs)) /
           (2.0 * step);
  };
  if (!opt.richardson) return central(h);
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

// int (dP)^2 / |P| over the points where P does not vanish.
double fisher_integral(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& p,
                       const Eigen::ArrayXd& dp) {
  const Eigen::ArrayXd integrand =
      (p.abs() > 0.0).select(dp.square() / p.abs().max(1e-300), 0.0);
  return trapezoid(xs, integrand);
}

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::CM: return "CM";
    case Scheme::WVA: return "WVA";
    case Scheme::JWM: return "JWM";
  }
  return "?";
}

Partition expected_partition(Count n, double p_f) {
  if (n < 0) throw std::invalid_argument("expected_partition: N must be >= 0");
  const Count n1 = std::clamp<Count>(std::llround(static_cast<double>(n) * p_f), 0, n);
  return {n1, n - n1};
}

Partition expected_partition(const SystemConfig& cfg, Count n) {
  return expected_partition(n, selection_probability(cfg, Branch::PSA));
}

double modification_factor(ComplexAmplitude aw, double g) {
  const double G = 0.5 * (1.0 - std::exp(-2.0 * g));
  return 1.0 + G * (std::norm(aw) - 1.0);
}

double conditional_mean_x(const SystemConfig& cfg, Branch b) {
  const ComplexAmplitude aw = weak_value(cfg, b);
  const double M = modification_factor(aw, cfg.meter().g());
  if (std::abs(M) <= kDegenerateModification) {
    throw DegenerateModification("conditional_mean_x: |M| = " + std::to_string(std::abs(M)));
  }
  return cfg.meter().d() * aw.real() / M;
}

double conditional_variance_x_closed(const SystemConfig& cfg, Branch b) {
  const ComplexAmplitude aw = weak_value(cfg, b);
  if (std::abs(aw.real()) < kReAwFloor) {
    throw std::domain_error("conditional_variance_x_closed: Re A_w vanishes");
  }
  const MeterConfig& m = cfg.meter();
  const double eta = std::abs(conditional_mean_x(cfg, b)) / m.d();
  const double bracket = (std::norm(aw) + 1.0) / (2.0 * std::abs(aw.real())) - eta;
  return m.sigma() * m.sigma() + m.d() * m.d() * eta * bracket;
}

double conditional_variance_x(const SystemConfig& cfg, Branch b) {
  ComplexAmplitude aw;
  try {
    aw = weak_value(cfg, b);
  } catch (const OrthogonalPostSelection&) {
    return quadrature_variance(cfg, b);
  }
  if (std::abs(aw.real()) < kReAwFloor) return quadrature_variance(cfg, b);
  const double closed = conditional_variance_x_closed(cfg, b);
  if (aw.real() < 0.0) {
    const double quad = quadrature_variance(cfg, b);
    if (std::abs(closed - quad) > kVarianceAgreement * std::abs(quad)) return quad;
  }
  return closed;
}

ConditionalMoments conditional_moments_x(const SystemConfig& cfg, Branch b) {
  ConditionalMoments out;
  out.branch = b;
  try {
    out.mean = conditional_mean_x(cfg, b);
    out.variance = conditional_variance_x(cfg, b);
  } catch (const OrthogonalPostSelection&) {
    return quadrature_moments(pdf_x(cfg, b), b);
  }
  out.second_moment = out.variance + out.mean * out.mean;
  return out;
}

ConditionalMoments quadrature_moments(const PdfGrid& pdf, Branch b) {
  ConditionalMoments out;
  out.branch = b;
  out.mean = pdf.mean();
  out.second_moment = pdf.raw_moment(2);
  out.variance = pdf.variance();
  return out;
}

DcsvEstimate dcsv_combine(const ConditionalMoments& m1, const ConditionalMoments& m2,
                          Count n1, Count n2, double beta, double d) {
  if (n1 < 0 || n2 < 0 || n1 + n2 < 1) {
    throw std::invalid_argument("dcsv_combine: counts must be non-negative with N >= 1");
  }
  const double denom = static_cast<double>(n1) - beta * static_cast<double>(n2);
  if (std::abs(denom) / static_cast<double>(n1 + n2) <= kSingularEpsilon) {
    throw SingularCombination("dcsv_combine: n1 - beta n2 = " + std::to_string(denom));
  }
  DcsvEstimate out;
  out.n1 = n1;
  out.n2 = n2;
  out.beta1 = static_cast<double>(n1) / denom;
  out.beta2 = beta * static_cast<double>(n2) / denom;
  out.signal = out.beta1 * m1.mean - out.beta2 * m2.mean;
  if (n1 > 0) out.variance += out.beta1 * out.beta1 * m1.variance / static_cast<double>(n1);
  if (n2 > 0) out.variance += out.beta2 * out.beta2 * m2.variance / static_cast<double>(n2);
  out.snr = std::abs(out.signal) / std::sqrt(out.variance);
  out.eff_fi = (out.signal / d) * (out.signal / d) / out.variance;
  return out;
}

double cm_snr_reference(const MeterConfig& m, Count n) {
  return std::sqrt(static_cast<double>(n)) * m.d() / m.sigma();
}

double cm_fi_reference(const MeterConfig& m, Count n) {
  return static_cast<double>(n) / (m.sigma() * m.sigma());
}

double snr(Scheme scheme, const SystemConfig& cfg, Count n, const Partition& part, double beta,
           Branch wva_branch) {
  if (n < 1) throw std::invalid_argument("snr: N must be >= 1");
  switch (scheme) {
    case Scheme::CM:
      return cm_snr_reference(cfg.meter(), n);
    case Scheme::WVA: {
      check_partition(n, part);
      const Count ns = wva_branch == Branch::PSR ? part.n2 : part.n1;
      if (ns == 0) return 0.0;
      const ConditionalMoments m = conditional_moments_x(cfg, wva_branch);
      return std::sqrt(static_cast<double>(ns)) * std::abs(m.mean) / std::sqrt(m.variance);
    }
    case Scheme::JWM: {
      check_partition(n, part);
      return dcsv_combine(conditional_moments_x(cfg, Branch::PSA),
                          conditional_moments_x(cfg, Branch::PSR), part.n1, part.n2, beta,
                          cfg.meter().d())
          .snr;
    }
  }
  return 0.0;
}

double effective_fi(const SystemConfig& cfg, Count n, const Partition& part, double beta) {
  check_partition(n, part);
  return dcsv_combine(conditional_moments_x(cfg, Branch::PSA),
                      conditional_moments_x(cfg, Branch::PSR), part.n1, part.n2, beta,
                      cfg.meter().d())
      .eff_fi;
}

double wva_effective_fi(const SystemConfig& cfg, const Partition& part, Branch b) {
  const Count ns = b == Branch::PSR ? part.n2 : part.n1;
  if (ns == 0) return 0.0;
  const ConditionalMoments m = conditional_moments_x(cfg, b);
  const double ratio = m.mean / cfg.meter().d();
  return ratio * ratio * static_cast<double>(ns) / m.variance;
}

double branch_fisher_information(const SystemConfig& cfg, Branch b, const GridSpec& grid,
                                 bool include_selection, const FisherOptions& opt) {
  pdf_x(cfg, b, grid);  // grid adequacy
  const Eigen::ArrayXd xs = grid.points();
  if (b == Branch::Conventional) include_selection = false;
  const DensityKind kind = include_selection ? DensityKind::Unnormalized : DensityKind::Normalized;
  const Eigen::ArrayXd p = displaced_density(cfg, b, kind, 0.0, xs);
  const Eigen::ArrayXd dp = density_derivative(cfg, b, kind, xs, opt);
  const double integral = fisher_integral(xs, p, dp);
  return include_selection ? integral / selection_probability(cfg, b) : integral;
}

FisherReport fisher_report(const SystemConfig& cfg, Count n, const Partition& part,
                           const GridSpec& grid) {
  check_partition(n, part);
  FisherReport r;
  r.partition = part;
  r.f1 = branch_fisher_information(cfg, Branch::PSA, grid, true);
  r.f2 = branch_fisher_information(cfg, Branch::PSR, grid, true);
  r.f1_shape = branch_fisher_information(cfg, Branch::PSA, grid, false);
  r.f2_shape = branch_fisher_information(cfg, Branch::PSR, grid, false);
  r.f_tot = static_cast<double>(part.n1) * r.f1 + static_cast<double>(part.n2) * r.f2;
  const double s = cfg.meter().sigma();
  r.f_cm = 1.0 / (s * s);

  PdfGrid diff;
  try {
    diff = difference_pdf(cfg, 1.0, grid);
  } catch (const SingularCombination&) {
    return r;
  }
  r.positive_definite = diff.min_value() >= kSignedDensityFloor;
  const FisherOptions opt;
  const Eigen::ArrayXd dp = density_derivative(cfg, Branch::PSA, DensityKind::Difference,
                                               diff.xs, opt);
  r.generalized_f = fisher_integral(diff.xs, diff.vals, dp);
  const double xbar = diff.mean();
  const double dxbar = trapezoid(diff.xs, diff.xs * dp);
  r.crb_lhs = dxbar * dxbar;
  r.crb_rhs = *r.generalized_f * trapezoid(diff.xs, diff.vals.abs() * (diff.xs - xbar).square());
  return r;
}

FisherReport fisher_report(const SystemConfig& cfg, Count n, const Partition& part) {
  return fisher_report(cfg, n, part, default_x_grid(cfg.meter()));
}

}  // namespace wvmetro
