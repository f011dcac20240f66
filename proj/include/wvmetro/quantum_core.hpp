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

// Two-level system coupled to a Gaussian meter through H' = kappa * P * sigma_z.
// The meter packets Phi_1, Phi_2 are centered at +d and -d with width sigma,
// and the measurement strength is g = (d / 2 sigma)^2.

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <string_view>

#include "wvmetro/errors.hpp"

namespace wvmetro {

using Complex = std::complex<double>;
using ComplexAmplitude = Complex;
using Vector2c = Eigen::Vector2cd;

enum class Branch { PSA, PSR, Conventional };
enum class Basis { X, P };

std::string_view to_string(Branch b);
std::string_view to_string(Basis b);

/// Normalized pure state of the two-level system in the {|1>, |2>} basis.
///
/// The constructor rescales the input amplitudes to unit norm and records the
/// factor it applied. Non-finite or all-zero inputs are rejected.
class SpinState {
 public:
  SpinState(Complex a1, Complex a2);
  explicit SpinState(const Vector2c& amplitudes);

  /// cos(theta/2)|1> + e^{i phase} sin(theta/2)|2>.
  static SpinState polar(double theta, double phase = 0.0);

  const Vector2c& amplitudes() const { return amp_; }
  Complex a1() const { return amp_(0); }
  Complex a2() const { return amp_(1); }
  /// Factor the constructor multiplied the raw input by.
  double applied_scale() const { return scale_; }

  /// <this|other>
  Complex overlap(const SpinState& other) const { return amp_.dot(other.amp_); }

 private:
  Vector2c amp_;
  double scale_ = 1.0;
};

/// Meter shift d (the estimated parameter, unit of length) and strength g.
class MeterConfig {
 public:
  MeterConfig(double d, double g);
  static MeterConfig from_width(double d, double sigma);

  double d() const { return d_; }
  double g() const { return g_; }
  double sigma() const { return sigma_; }
  /// <Phi_1|Phi_2> = exp(-2 g).
  double overlap() const { return overlap_; }

 private:
  double d_;
  double g_;
  double sigma_;
  double overlap_;
};

/// Orthogonal complement of a state. The result's first nonzero amplitude is
/// real and non-negative.
SpinState complement(const SpinState& post);

/// Pre-selection, post-selection and meter. The rejected-branch state is
/// computed once at construction.
class SystemConfig {
 public:
  SystemConfig(SpinState pre, SpinState post, MeterConfig meter);

  const SpinState& pre() const { return pre_; }
  const SpinState& post() const { return post_; }
  const SpinState& post_complement() const { return post_bar_; }
  const MeterConfig& meter() const { return meter_; }

  /// |f> for PSA, |f-bar> for PSR. Conventional has no selection state.
  const SpinState& selection_state(Branch b) const;

  SystemConfig with_meter(const MeterConfig& m) const { return {pre_, post_, m}; }

 private:
  SpinState pre_;
  SpinState post_;
  SpinState post_bar_;
  MeterConfig meter_;
};

/// pre = (|1> + |2>)/sqrt2, post = cos(theta/2)|1> + sin(theta/2)|2>.
SystemConfig real_config(double theta, double g, double d = 1.0);
/// pre = (|1> + |2>)/sqrt2, post = (|1> + e^{-i phi}|2>)/sqrt2.
SystemConfig imaginary_config(double phi, double g, double d = 1.0);

/// AAV weak value of sigma_z: <post|sigma_z|pre> / <post|pre>.
ComplexAmplitude weak_value(const SpinState& pre, const SpinState& post);
/// Weak value of the branch's selection state.
ComplexAmplitude weak_value(const SystemConfig& cfg, Branch b);

/// Amplitudes (c1s, c2s) = (<s|1> c1, <s|2> c2) of the meter superposition
/// left after selecting s. For Conventional returns (c1, c2).
std::pair<Complex, Complex> branch_coefficients(const SystemConfig& cfg, Branch b);

struct SelectionProbabilities {
  double p_f;
  double p_fbar;
};

SelectionProbabilities selection_probabilities(const SystemConfig& cfg);
double selection_probability(const SystemConfig& cfg, Branch b);

struct GridSpec {
  double lo;
  double hi;
  std::size_t n;

  Eigen::ArrayXd points() const;
  double step() const { return (hi - lo) / static_cast<double>(n - 1); }
};

inline constexpr std::size_t kDefaultGridPoints = std::size_t{1} << 12;

/// [-(d + 10 sigma), d + 10 sigma].
GridSpec default_x_grid(const MeterConfig& m, std::size_t n = kDefaultGridPoints);
/// [-10/(2 sigma), 10/(2 sigma)].
GridSpec default_p_grid(const MeterConfig& m, std::size_t n = kDefaultGridPoints);

/// A density tabulated on a strictly increasing grid. For signed densities
/// (the difference PDF) vals may be negative.
struct PdfGrid {
  Eigen::ArrayXd xs;
  Eigen::ArrayXd vals;
  double normalization = 0.0;

  double mean() const;
  double raw_moment(int k) const;
  double variance() const;
  double min_value() const { return vals.minCoeff(); }
};

// Unnormalized branch densities (|Phi_s(x)|^2, with integral p_s) evaluated
// pointwise. They take any Eigen array expression of positions/momenta.
Eigen::ArrayXd branch_density_x(const SystemConfig& cfg, Branch b,
                                const Eigen::Ref<const Eigen::ArrayXd>& xs);
Eigen::ArrayXd branch_density_p(const SystemConfig& cfg, Branch b,
                                const Eigen::Ref<const Eigen::ArrayXd>& ps);

/// Normalized x-space readout density of a branch. Conventional is the
/// incoherent mixture |c1|^2 |Phi_1|^2 + |c2|^2 |Phi_2|^2.
PdfGrid pdf_x(const SystemConfig& cfg, Branch b, const GridSpec& grid);
PdfGrid pdf_x(const SystemConfig& cfg, Branch b);
/// Normalized momentum-space readout density of the PSA or PSR branch.
PdfGrid pdf_p(const SystemConfig& cfg, Branch b, const GridSpec& grid);
PdfGrid pdf_p(const SystemConfig& cfg, Branch b);

inline constexpr double kSingularEpsilon = 1e-9;

/// (p_f P1(x) - beta p_fbar P2(x)) / (p_f - beta p_fbar), a signed density.
PdfGrid difference_pdf(const SystemConfig& cfg, double beta, const GridSpec& grid);
PdfGrid difference_pdf(const SystemConfig& cfg, double beta);

}  // namespace wvmetro
