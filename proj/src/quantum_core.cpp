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

#include "wvmetro/quantum_core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wvmetro/quadrature.hpp"

namespace wvmetro {

namespace {

constexpr double kOrthogonalTolerance = 1e-14;
constexpr double kTailTolerance = 1e-9;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_tail(double bound, const char* what) {
  if (!(bound <= kTailTolerance)) {
    throw GridTooNarrow(std::string(what) + ": tail mass beyond grid bounded by " +
                        std::to_string(bound));
  }
}

// Bound on the tail mass of |a Phi_1 + b Phi_2|^2 outside the grid, using
// |u + v|^2 <= 2(|u|^2 + |v|^2).
double x_tail_bound(const MeterConfig& m, Complex a, Complex b, const GridSpec& grid) {
  const double t1 = gaussian_tail_outside(m.d(), m.sigma(), grid.lo, grid.hi);
  const double t2 = gaussian_tail_outside(-m.d(), m.sigma(), grid.lo, grid.hi);
  return 2.0 * (std::norm(a) * t1 + std::norm(b) * t2);
}

double p_tail_bound(const MeterConfig& m, Complex a, Complex b, const GridSpec& grid) {
  const double t = gaussian_tail_outside(0.0, 0.5 / m.sigma(), grid.lo, grid.hi);
  const double amp = std::abs(a) + std::abs(b);
  return amp * amp * t;
}

}  // namespace

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::PSA: return "PSA";
    case Branch::PSR: return "PSR";
    case Branch::Conventional: return "Conventional";
  }
  return "?";
}

std::string_view to_string(Basis b) { return b == Basis::X ? "x" : "p"; }

SpinState::SpinState(Complex a1, Complex a2) : SpinState(Vector2c(a1, a2)) {}

SpinState::SpinState(const Vector2c& amplitudes) {
  if (!finite(amplitudes(0)) || !finite(amplitudes(1))) {
    throw std::invalid_argument("SpinState: non-finite amplitude");
  }
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("SpinState: amplitudes must not all vanish");
  }
  scale_ = 1.0 / norm;
  amp_ = amplitudes * scale_;
}

SpinState SpinState::polar(double theta, double phase) {
  return SpinState(Complex(std::cos(theta / 2), 0.0),
                   std::polar(std::sin(theta / 2), phase));
}

MeterConfig::MeterConfig(double d, double g) : d_(d), g_(g) {
  if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("MeterConfig: d must be > 0");
  if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("MeterConfig: g must be > 0");
  sigma_ = d / (2.0 * std::sqrt(g));
  overlap_ = std::exp(-2.0 * g);
}

MeterConfig MeterConfig::from_width(double d, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("MeterConfig: sigma must be > 0");
  }
  const double ratio = d / (2.0 * sigma);
  MeterConfig m(d, ratio * ratio);
  m.sigma_ = sigma;
  return m;
}

SpinState complement(const SpinState& post) {
  Vector2c v(std::conj(post.a2()), -std::conj(post.a1()));
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double mag = std::abs(v(i));
    if (mag > 0.0) {
      v *= std::conj(v(i)) / mag;
      v(i) = Complex(std::abs(v(i)), 0.0);
      break;
    }
  }
  return SpinState(v);
}

SystemConfig::SystemConfig(SpinState pre, SpinState post, MeterConfig meter)
    : pre_(pre), post_(post), post_bar_(complement(post)), meter_(meter) {}

const SpinState& SystemConfig::selection_state(Branch b) const {
  switch (b) {
    case Branch::PSA: return post_;
    case Branch::PSR: return post_bar_;
    case Branch::Conventional: break;
  }
  throw std::invalid_argument("selection_state: conventional branch has no selection state");
}

SystemConfig real_config(double theta, double g, double d) {
  return {SpinState(1.0, 1.0), SpinState::polar(theta), MeterConfig(d, g)};
}

SystemConfig imaginary_config(double phi, double g, double d) {
  return {SpinState(1.0, 1.0), SpinState(1.0, std::polar(1.0, -phi)), MeterConfig(d, g)};
}

ComplexAmplitude weak_value(const SpinState& pre, const SpinState& post) {
  const Eigen::Matrix2cd sigma_z = Eigen::Vector2cd(1.0, -1.0).asDiagonal();
  const Complex overlap = post.overlap(pre);
  if (std::abs(overlap) <= kOrthogonalTolerance) {
    throw OrthogonalPostSelection("weak value undefined: |<post|pre>| = " +
                                  std::to_string(std::abs(overlap)));
  }
  return post.amplitudes().dot(sigma_z * pre.amplitudes()) / overlap;
}

ComplexAmplitude weak_value(const SystemConfig& cfg, Branch b) {
  return weak_value(cfg.pre(), cfg.selection_state(b));
}

std::pair<Complex, Complex> branch_coefficients(const SystemConfig& cfg, Branch b) {
  if (b == Branch::Conventional) return {cfg.pre().a1(), cfg.pre().a2()};
  const SpinState& s = cfg.selection_state(b);
  return {std::conj(s.a1()) * cfg.pre().a1(), std::conj(s.a2()) * cfg.pre().a2()};
}

double selection_probability(const SystemConfig& cfg, Branch b) {
  if (b == Branch::Conventional) return 1.0;
  const auto [a, c] = branch_coefficients(cfg, b);
  return std::norm(a) + std::norm(c) + 2.0 * (std::conj(a) * c).real() * cfg.meter().overlap();
}

SelectionProbabilities selection_probabilities(const SystemConfig& cfg) {
  return {selection_probability(cfg, Branch::PSA), selection_probability(cfg, Branch::PSR)};
}

Eigen::ArrayXd GridSpec::points() const {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("GridSpec: need n >= 2 and hi > lo");
  return Eigen::ArrayXd::LinSpaced(static_cast<Eigen::Index>(n), lo, hi);
}

GridSpec default_x_grid(const MeterConfig& m, std::size_t n) {
  const double half = m.d() + 10.0 * m.sigma();
  return {-half, half, n};
}

GridSpec default_p_grid(const MeterConfig& m, std::size_t n) {
  const double half = 10.0 / (2.0 * m.sigma());
  return {-half, half, n};
}

double PdfGrid::raw_moment(int k) const {
  return trapezoid(xs, xs.pow(k) * vals) / normalization;
}

double PdfGrid::mean() const { return trapezoid(xs, xs * vals) / normalization; }

double PdfGrid::variance() const {
  const double m = mean();
  return trapezoid(xs, (xs - m).square() * vals) / normalization;
}

Eigen::ArrayXd branch_density_x(const SystemConfig& cfg, Branch b,
                                const Eigen::Ref<const Eigen::ArrayXd>& xs) {
  const MeterConfig& m = cfg.meter();
  const double inv4s2 = 1.0 / (4.0 * m.sigma() * m.sigma());
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * m.sigma() * m.sigma());
  const Eigen::ArrayXd phi1 = (-(xs - m.d()).square() * inv4s2).exp();
  const Eigen::ArrayXd phi2 = (-(xs + m.d()).square() * inv4s2).exp();
  const auto [a, c] = branch_coefficients(cfg, b);
  if (b == Branch::Conventional) {
    return norm * (std::norm(a) * phi1.square() + std::norm(c) * phi2.square());
  }
  const double cross = 2.0 * (std::conj(a) * c).real();
  return norm * (std::norm(a) * phi1.square() + std::norm(c) * phi2.square() +
                 cross * phi1 * phi2);
}

Eigen::ArrayXd branch_density_p(const SystemConfig& cfg, Branch b,
                                const Eigen::Ref<const Eigen::ArrayXd>& ps) {
  const MeterConfig& m = cfg.meter();
  const double s2 = m.sigma() * m.sigma();
  const Eigen::ArrayXd envelope =
      std::sqrt(2.0 * s2 / std::numbers::pi) * (-2.0 * s2 * ps.square()).exp();
  const auto [a, c] = branch_coefficients(cfg, b);
  if (b == Branch::Conventional) return (std::norm(a) + std::norm(c)) * envelope;
  // |a e^{-idp} + c e^{idp}|^2 = |a|^2 + |c|^2 + 2 Re(conj(a) c e^{2idp})
  const Complex ac = std::conj(a) * c;
  const Eigen::ArrayXd phase = 2.0 * m.d() * ps;
  const Eigen::ArrayXd interference =
      2.0 * (ac.real() * phase.cos() - ac.imag() * phase.sin());
  return envelope * (std::norm(a) + std::norm(c) + interference);
}

PdfGrid pdf_x(const SystemConfig& cfg, Branch b, const GridSpec& grid) {
  const auto [a, c] = branch_coefficients(cfg, b);
  const double p = selection_probability(cfg, b);
  const double bound = b == Branch::Conventional
                           ? 0.5 * x_tail_bound(cfg.meter(), a, c, grid)
                           : x_tail_bound(cfg.meter(), a, c, grid) / p;
  check_tail(bound, "pdf_x");
  PdfGrid out;
  out.xs = grid.points();
  out.vals = branch_density_x(cfg, b, out.xs) / p;
  out.normalization = trapezoid(out.xs, out.vals);
  return out;
}

PdfGrid pdf_x(const SystemConfig& cfg, Branch b) {
  return pdf_x(cfg, b, default_x_grid(cfg.meter()));
}

PdfGrid pdf_p(const SystemConfig& cfg, Branch b, const GridSpec& grid) {
  const auto [a, c] = branch_coefficients(cfg, b);
  const double p = selection_probability(cfg, b);
  check_tail(p_tail_bound(cfg.meter(), a, c, grid) / p, "pdf_p");
  PdfGrid out;
  out.xs = grid.points();
  out.vals = branch_density_p(cfg, b, out.xs) / p;
  out.normalization = trapezoid(out.xs, out.vals);
  return out;
}

PdfGrid pdf_p(const SystemConfig& cfg, Branch b) {
  return pdf_p(cfg, b, default_p_grid(cfg.meter()));
}

PdfGrid difference_pdf(const SystemConfig& cfg, double beta, const GridSpec& grid) {
  const auto [pf, pfbar] = selection_probabilities(cfg);
  const double denom = pf - beta * pfbar;
  if (std::abs(denom) <= kSingularEpsilon) {
    throw SingularCombination("difference_pdf: |p_f - beta p_fbar| = " +
                              std::to_string(std::abs(denom)));
  }
  const auto [a1, c1] = branch_coefficients(cfg, Branch::PSA);
  const auto [a2, c2] = branch_coefficients(cfg, Branch::PSR);
  const double bound = (x_tail_bound(cfg.meter(), a1, c1, grid) +
                        std::abs(beta) * x_tail_bound(cfg.meter(), a2, c2, grid)) /
                       std::abs(denom);
  check_tail(bound, "difference_pdf");
  PdfGrid out;
  out.xs = grid.points();
  out.vals = (branch_density_x(cfg, Branch::PSA, out.xs) -
              beta * branch_density_x(cfg, Branch::PSR, out.xs)) /
             denom;
  out.normalization = trapezoid(out.xs, out.vals);
  return out;
}

PdfGrid difference_pdf(const SystemConfig& cfg, double beta) {
  return difference_pdf(cfg, beta, default_x_grid(cfg.meter()));
}

}  // namespace wvmetro
