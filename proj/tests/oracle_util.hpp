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

// Independent reference computations for the tests. Nothing here calls the
// library's density or moment code: wavefunctions are built as explicit
// Eigen 2-vectors per grid point and integrated with composite Simpson.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace wvtest {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2cd;

inline constexpr double kPi = std::numbers::pi;

/// Composite Simpson rule with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Meter at a single configuration: shift d, width sigma.
struct Meter {
  double d;
  double sigma;

  static Meter from_g(double d, double g) { return {d, d / (2.0 * std::sqrt(g))}; }

  /// Position wavefunction centred at c, |phi|^2 has standard deviation sigma.
  double phi_x(double x, double c) const {
    return std::pow(2.0 * kPi * sigma * sigma, -0.25) *
           std::exp(-(x - c) * (x - c) / (4.0 * sigma * sigma));
  }
  /// Momentum wavefunction of the pointer shifted by +c (a phase e^{-i c p}).
  Complex phi_p(double p, double c, double p0 = 0.0) const {
    const double env = std::pow(2.0 * sigma * sigma / kPi, 0.25) *
                       std::exp(-sigma * sigma * (p - p0) * (p - p0));
    return env * std::polar(1.0, -c * p);
  }
};

/// Joint system-meter state at a readout value, |1> Phi(x - d) c1 + |2> Phi(x + d) c2.
inline Vec2 joint_x(const Vec2& pre, const Meter& m, double x, double x0 = 0.0) {
  Vec2 v;
  v << pre(0) * m.phi_x(x - x0, m.d), pre(1) * m.phi_x(x - x0, -m.d);
  return v;
}

inline Vec2 joint_p(const Vec2& pre, const Meter& m, double p, double x0 = 0.0, double p0 = 0.0) {
  const Complex kick = std::polar(1.0, -x0 * p);
  Vec2 v;
  v << pre(0) * m.phi_p(p, m.d, p0) * kick, pre(1) * m.phi_p(p, -m.d, p0) * kick;
  return v;
}

/// Born density of selecting `post` at readout value r: |<post|psi(r)>|^2
/// computed as psi^dagger P psi with the projector P = |post><post|.
inline double born(const Vec2& post, const Vec2& psi) {
  const Eigen::Matrix2cd proj = post * post.adjoint();
  return (psi.adjoint() * proj * psi)(0, 0).real();
}

inline Vec2 normalized(Complex a, Complex b) {
  Vec2 v(a, b);
  return v / v.norm();
}

/// Orthogonal partner of a normalized 2-vector (any phase).
inline Vec2 orthogonal(const Vec2& v) { return Vec2(-std::conj(v(1)), std::conj(v(0))); }

struct Moments {
  double norm;  // integral of the unnormalized density
  double mean;
  double second;
  double variance() const { return second - mean * mean; }
};

/// Moments of an unnormalized density over [a, b].
inline Moments moments(const std::function<double(double)>& rho, double a, double b,
                       int n = 20000) {
  Moments m;
  m.norm = simpson(rho, a, b, n);
  m.mean = simpson([&](double x) { return x * rho(x); }, a, b, n) / m.norm;
  m.second = simpson([&](double x) { return x * x * rho(x); }, a, b, n) / m.norm;
  return m;
}

/// x-readout moments of the branch selecting `post`.
inline Moments x_moments(const Vec2& pre, const Vec2& post, const Meter& m, int n = 20000) {
  const double L = m.d + 12.0 * m.sigma;
  return moments([&](double x) { return born(post, joint_x(pre, m, x)); }, -L, L, n);
}

/// p-readout moments of the branch selecting `post`, optionally averaged over
/// p0 ~ N(0, jp^2) by an outer Simpson integral.
inline Moments p_moments(const Vec2& pre, const Vec2& post, const Meter& m, double jp = 0.0,
                         int n = 4000) {
  const double sp = 1.0 / (2.0 * m.sigma);
  auto inner = [&](double p0) {
    return [&, p0](double p) { return born(post, joint_p(pre, m, p, 0.0, p0)); };
  };
  if (jp == 0.0) {
    const double L = 12.0 * sp;
    return moments(inner(0.0), -L, L, n);
  }
  const double L = 12.0 * std::sqrt(sp * sp + jp * jp);
  auto avg = [&](const std::function<double(double)>& weight) {
    return simpson(
        [&](double p0) {
          const double w = std::exp(-p0 * p0 / (2.0 * jp * jp)) / std::sqrt(2.0 * kPi * jp * jp);
          const auto rho = inner(p0);
          return w * simpson([&](double p) { return weight(p) * rho(p); }, -L, L, 800);
        },
        -8.0 * jp, 8.0 * jp, 400);
  };
  Moments out;
  out.norm = avg([](double) { return 1.0; });
  out.mean = avg([](double p) { return p; }) / out.norm;
  out.second = avg([](double p) { return p * p; }) / out.norm;
  return out;
}

/// Hand-rolled generator of random states for property tests.
class StateGen {
 public:
  explicit StateGen(std::uint64_t seed) : rng_(seed) {}

  Vec2 state() {
    std::normal_distribution<double> n;
    Vec2 v(Complex(n(rng_), n(rng_)), Complex(n(rng_), n(rng_)));
    return v / v.norm();
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace wvtest
