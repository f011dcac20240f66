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

#include "wvmetro/mc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wvmetro/parallel.hpp"
#include "wvmetro/quadrature.hpp"

namespace wvmetro {

namespace {

NoiseSpec in_basis(NoiseSpec noise, Basis basis) {
  noise.basis = basis;
  noise.validate();
  return noise;
}

}  // namespace

SamplerTable SamplerTable::from_pdf(const PdfGrid& pdf) {
  if (pdf.xs.size() < 2 || pdf.xs.size() != pdf.vals.size()) {
    throw std::invalid_argument("SamplerTable: need at least two tabulated points");
  }
  SamplerTable t;
  t.xs = pdf.xs;
  t.cdf = cumulative_trapezoid(pdf.xs, pdf.vals.max(0.0).eval());
  const double total = t.cdf(t.cdf.size() - 1);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("SamplerTable: density has no positive mass");
  }
  t.cdf /= total;
  t.cdf(t.cdf.size() - 1) = 1.0;
  return t;
}

double SamplerTable::sample(double u) const {
  const double* begin = cdf.data();
  const double* end = begin + cdf.size();
  const double* it = std::upper_bound(begin, end, u);
  if (it == begin) return xs(0);
  if (it == end) return xs(xs.size() - 1);
  const auto i = it - begin;
  const double lo = cdf(i - 1);
  const double width = cdf(i) - lo;
  if (!(width > 0.0)) return xs(i - 1);
  return xs(i - 1) + (u - lo) / width * (xs(i) - xs(i - 1));
}

ParticleSampler::ParticleSampler(const SystemConfig& cfg, Basis basis, NoiseSpec noise,
                                 std::size_t table_points)
    : cfg_(cfg),
      basis_(basis),
      noise_(in_basis(noise, basis)),
      p_f_(selection_probability(cfg, Branch::PSA)),
      meter_first_(basis == Basis::P && noise_.kind != NoiseKind::None) {
  std::tie(a1_, a2_) = branch_coefficients(cfg, Branch::PSA);
  if (meter_first_) return;
  const auto& m = cfg.meter();
  const GridSpec grid =
      basis == Basis::X ? default_x_grid(m, table_points) : default_p_grid(m, table_points);
  auto build = [&](Branch b) {
    if (!(selection_probability(cfg, b) > 0.0)) return SamplerTable{};
    return SamplerTable::from_pdf(basis == Basis::X ? pdf_x(cfg, b, grid) : pdf_p(cfg, b, grid));
  };
  psa_ = build(Branch::PSA);
  psr_ = build(Branch::PSR);
}

const SamplerTable& ParticleSampler::table(Branch b) const {
  if (b == Branch::Conventional) throw std::invalid_argument("sampler has no conventional table");
  return b == Branch::PSA ? psa_ : psr_;
}

Particle ParticleSampler::sample(CounterRng& rng) const {
  Particle out;
  if (!meter_first_) {
    out.branch = rng.uniform() < p_f_ ? Branch::PSA : Branch::PSR;
    out.readout = table(out.branch).sample(rng.uniform());
    if (noise_.kind == NoiseKind::X0) out.readout += noise_.width * rng.normal();
    return out;
  }
  // Momentum readout of a meter that arrived with a random x0 shift or p0 kick.
  const double d = cfg_.meter().d();
  const double shift = noise_.width * rng.normal();
  const double x0 = noise_.kind == NoiseKind::X0 ? shift : 0.0;
  const double p0 = noise_.kind == NoiseKind::P0 ? shift : 0.0;
  const double p = p0 + rng.normal() / (2.0 * cfg_.meter().sigma());
  const Complex amp = std::polar(1.0, -x0 * p) *
                      (a1_ * std::polar(1.0, -d * p) + a2_ * std::polar(1.0, d * p));
  out.branch = rng.uniform() < std::norm(amp) ? Branch::PSA : Branch::PSR;
  out.readout = p;
  return out;
}

Particle sample_particle(const ParticleSampler& sampler, CounterRng& rng) {
  return sampler.sample(rng);
}

void MomentAccumulator::push(double x) {
  const double n0 = static_cast<double>(n);
  ++n;
  const double n1 = static_cast<double>(n);
  const double delta = x - mean;
  const double dn = delta / n1;
  const double dn2 = dn * dn;
  const double term = delta * dn * n0;
  mean += dn;
  m4 += term * dn2 * (n1 * n1 - 3.0 * n1 + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
  m3 += term * dn * (n1 - 2.0) - 3.0 * dn * m2;
  m2 += term;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n);
  const double nb = static_cast<double>(o.n);
  const double nt = na + nb;
  const double delta = o.mean - mean;
  const double d2 = delta * delta;
  const double d3 = d2 * delta;
  const double d4 = d2 * d2;
  const double m4n = m4 + o.m4 + d4 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
                     6.0 * d2 * (na * na * o.m2 + nb * nb * m2) / (nt * nt) +
                     4.0 * delta * (na * o.m3 - nb * m3) / nt;
  const double m3n = m3 + o.m3 + d3 * na * nb * (na - nb) / (nt * nt) +
                     3.0 * delta * (na * o.m2 - nb * m2) / nt;
  const double m2n = m2 + o.m2 + d2 * na * nb / nt;
  mean += delta * nb / nt;
  m2 = m2n;
  m3 = m3n;
  m4 = m4n;
  n += o.n;
}

double MomentAccumulator::central(int k) const {
  if (n == 0) return 0.0;
  const double nn = static_cast<double>(n);
  switch (k) {
    case 0: return 1.0;
    case 1: return 0.0;
    case 2: return m2 / nn;
    case 3: return m3 / nn;
    case 4: return m4 / nn;
    default: throw std::invalid_argument("MomentAccumulator: order above 4");
  }
}

double MomentAccumulator::se_mean() const {
  return n > 1 ? std::sqrt(sample_variance() / static_cast<double>(n)) : 0.0;
}

double MomentAccumulator::se_raw_second() const {
  if (n < 2) return 0.0;
  // Var(x^2) in terms of central moments about the mean mu.
  const double mu = mean;
  const double c2 = central(2);
  const double v = 4.0 * mu * mu * c2 + 4.0 * mu * central(3) + central(4) - c2 * c2;
  return std::sqrt(std::max(v, 0.0) / static_cast<double>(n));
}

double MomentAccumulator::se_variance() const {
  if (n < 2) return 0.0;
  const double c2 = central(2);
  return std::sqrt(std::max(central(4) - c2 * c2, 0.0) / static_cast<double>(n));
}

TrialRecord simulate_trial(const ParticleSampler& sampler, Count n, CounterRng& rng) {
  TrialRecord rec;
  for (Count i = 0; i < n; ++i) {
    const Particle p = sampler.sample(rng);
    (p.branch == Branch::PSA ? rec.psa : rec.psr).push(p.readout);
  }
  return rec;
}

TrialResult combine_trial(const TrialRecord& rec, double beta) {
  TrialResult r;
  r.n1 = rec.psa.n;
  r.n2 = rec.psr.n;
  r.y1 = rec.psa.mean;
  r.y2 = rec.psr.mean;
  const double n1 = static_cast<double>(r.n1);
  const double n2 = static_cast<double>(r.n2);
  const double denom = n1 - beta * n2;
  if (denom == 0.0) {
    r.singular = true;
    r.dcsv = std::numeric_limits<double>::quiet_NaN();
    r.plugin_variance = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double b1 = n1 / denom;
  const double b2 = beta * n2 / denom;
  r.dcsv = b1 * r.y1 - b2 * r.y2;
  auto group = [](double w, const MomentAccumulator& acc) {
    if (w == 0.0) return 0.0;
    if (acc.n < 2) return std::numeric_limits<double>::quiet_NaN();
    return w * w * acc.sample_variance() / static_cast<double>(acc.n);
  };
  r.plugin_variance = group(b1, rec.psa) + group(b2, rec.psr);
  return r;
}

TrialResult run_trial(const SystemConfig& cfg, Count n, Basis basis, const NoiseSpec& noise,
                      double beta, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("run_trial: N must be >= 2");
  const ParticleSampler sampler(cfg, basis, noise);
  CounterRng rng(seed, 0);
  return combine_trial(simulate_trial(sampler, n, rng), beta);
}

std::vector<TrialRecord> simulate_ensemble(const ParticleSampler& sampler, Count n,
                                           Count trials, std::uint64_t master_seed,
                                           unsigned workers) {
  if (trials < 0) throw std::invalid_argument("simulate_ensemble: negative trial count");
  std::vector<TrialRecord> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), resolve_workers(workers), [&](std::size_t t) {
    CounterRng rng(master_seed, t);
    out[t] = simulate_trial(sampler, n, rng);
  });
  return out;
}

EnsembleStats summarize(const std::vector<TrialRecord>& records, double beta, double d) {
  EnsembleStats s;
  s.trials = static_cast<Count>(records.size());
  MomentAccumulator dcsv;
  MomentAccumulator cond;
  for (const auto& rec : records) {
    s.n1.push(static_cast<double>(rec.psa.n));
    s.psa.merge(rec.psa);
    s.psr.merge(rec.psr);
    const TrialResult r = combine_trial(rec, beta);
    if (r.singular) continue;
    dcsv.push(r.dcsv);
    if (r.n1 > 0) s.y1.push(r.y1);
    if (r.n2 > 0) s.y2.push(r.y2);
    if (std::isfinite(r.plugin_variance)) cond.push(r.plugin_variance);
  }
  s.used_trials = dcsv.n;
  if (s.used_trials == 0) {
    throw AllTrialsSingular("all " + std::to_string(s.trials) + " trials were singular");
  }
  s.singular_fraction =
      s.trials > 0 ? static_cast<double>(s.trials - s.used_trials) / static_cast<double>(s.trials)
                   : 0.0;
  s.mean_dcsv = dcsv.mean;
  s.var_dcsv = dcsv.sample_variance();
  s.se_mean_dcsv = dcsv.se_mean();
  s.se_var_dcsv = dcsv.se_variance();
  s.empirical_snr = std::abs(s.mean_dcsv) / std::sqrt(s.var_dcsv);
  s.empirical_eff_fi = (s.mean_dcsv / d) * (s.mean_dcsv / d) / s.var_dcsv;
  s.conditional_var = cond.mean;
  s.se_conditional_var = cond.se_mean();
  if (cond.n > 0) {
    s.conditional_snr = std::abs(s.mean_dcsv) / std::sqrt(s.conditional_var);
    s.conditional_eff_fi = (s.mean_dcsv / d) * (s.mean_dcsv / d) / s.conditional_var;
  }
  return s;
}

EnsembleStats run_ensemble(const SystemConfig& cfg, Count n, Count trials, Basis basis,
                           const NoiseSpec& noise, double beta, std::uint64_t master_seed,
                           unsigned workers) {
  if (n < 2) throw std::invalid_argument("run_ensemble: N must be >= 2");
  if (trials < 2) throw std::invalid_argument("run_ensemble: need at least two trials");
  const ParticleSampler sampler(cfg, basis, noise);
  return summarize(simulate_ensemble(sampler, n, trials, master_seed, workers), beta,
                   cfg.meter().d());
}

}  // namespace wvmetro
