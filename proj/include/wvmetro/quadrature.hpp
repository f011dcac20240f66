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

#include <cassert>
#include <cmath>

namespace wvmetro {

/// Uniform or non-uniform trapezoid rule over sampled values.
template <typename XDerived, typename YDerived>
typename YDerived::Scalar trapezoid(const Eigen::ArrayBase<XDerived>& xs,
                                    const Eigen::ArrayBase<YDerived>& ys) {
  using Scalar = typename YDerived::Scalar;
  assert(xs.size() == ys.size());
  const Eigen::Index n = xs.size();
  if (n < 2) return Scalar(0);
  const auto dx = xs.tail(n - 1) - xs.head(n - 1);
  return (dx * (ys.tail(n - 1) + ys.head(n - 1))).sum() * Scalar(0.5);
}

/// Running trapezoid integral; out(0) = 0 and out(n-1) is the full integral.
template <typename XDerived, typename YDerived>
Eigen::Array<typename YDerived::Scalar, Eigen::Dynamic, 1> cumulative_trapezoid(
    const Eigen::ArrayBase<XDerived>& xs, const Eigen::ArrayBase<YDerived>& ys) {
  using Scalar = typename YDerived::Scalar;
  const Eigen::Index n = xs.size();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(n);
  if (n == 0) return out;
  out(0) = Scalar(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    out(i) = out(i - 1) + Scalar(0.5) * (xs(i) - xs(i - 1)) * (ys(i) + ys(i - 1));
  }
  return out;
}

/// Mass of N(mean, sd^2) lying outside [lo, hi].
template <typename Scalar>
Scalar gaussian_tail_outside(Scalar mean, Scalar sd, Scalar lo, Scalar hi) {
  using std::erfc;
  using std::sqrt;
  const Scalar s = sd * sqrt(Scalar(2));
  return Scalar(0.5) * (erfc((mean - lo) / s) + erfc((hi - mean) / s));
}

}  // namespace wvmetro
