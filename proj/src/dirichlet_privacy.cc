// Copyright 2026 The privmdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privmdp/dirichlet_privacy.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "privmdp/error.h"
#include "privmdp/parallel.h"
#include "privmdp/special_functions.h"

namespace privmdp {
namespace {

constexpr std::size_t kChunk = 8192;
constexpr double kAdjacencySlack = 1e-12;

// log of a Gamma(shape, 1) variate. Small shapes use
// G(a) = G(a + 1) * U^(1/a) so the draw cannot underflow to zero.
double LogGammaVariate(double shape, Engine& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = g(rng);
  return std::log(x) + std::log1p(-u(rng)) / shape;
}

void CheckK(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    ThrowInvalidArgument("concentration k must be positive and finite");
  }
}

void CheckMechanismInput(const SimplexVector& zeta) {
  zeta.Validate();
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    if (zeta.support[i] && !(zeta.entries[i] > 0.0)) {
      ThrowInvalidArgument("supported entry " + std::to_string(i) +
                           " must be positive");
    }
  }
}

double FractionAbove(const std::vector<double>& sorted, double psi) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), psi);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

}  // namespace

SimplexVector SimplexVector::FromEntries(std::vector<double> entries) {
  SimplexVector v;
  v.support.resize(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) v.support[i] = entries[i] > 0.0;
  v.entries = std::move(entries);
  return v;
}

SimplexVector SimplexVector::FromRow(const TransitionMatrix& m, std::size_t row) {
  SimplexVector v;
  v.entries.assign(m.row(row).begin(), m.row(row).end());
  v.support.assign(m.support_row(row).begin(), m.support_row(row).end());
  return v;
}

std::size_t SimplexVector::support_size() const {
  std::size_t c = 0;
  for (const auto s : support) c += s;
  return c;
}

void SimplexVector::Validate() const {
  if (support.size() != entries.size()) {
    ThrowInvalidArgument("support mask length does not match entries");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i] >= 0.0)) ThrowInvalidArgument("negative simplex entry");
    if (!support[i] && entries[i] != 0.0) {
      ThrowInvalidArgument("simplex entry outside support is nonzero");
    }
    sum += entries[i];
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    ThrowInvalidArgument("simplex vector does not sum to 1");
  }
}

SimplexVector SampleMechanism(const SimplexVector& zeta, double k, Engine& rng) {
  CheckK(k);
  CheckMechanismInput(zeta);
  if (zeta.support_size() < 2) return zeta;
  const std::size_t n = zeta.size();
  std::vector<double> logs(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    if (zeta.support[i]) logs[i] = LogGammaVariate(k * zeta.entries[i], rng);
  }
  const double lse = LogSumExp(logs);
  SimplexVector out;
  out.support = zeta.support;
  out.entries.assign(n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (zeta.support[i]) {
      out.entries[i] = std::exp(logs[i] - lse);
      sum += out.entries[i];
    }
  }
  for (double& v : out.entries) v /= sum;
  return out;
}

SimplexVector AdjacentVector(const SimplexVector& zeta, double h, std::size_t i,
                             std::size_t j) {
  zeta.Validate();
  if (!(h >= 0.0 && h <= 1.0)) ThrowInvalidArgument("h must lie in [0, 1]");
  if (h == 0.0) return zeta;
  if (i >= zeta.size() || j >= zeta.size() || i == j) {
    ThrowInvalidArgument("adjacent_vector needs two distinct indices");
  }
  if (!zeta.support[i] || !zeta.support[j]) {
    ThrowInvalidArgument("adjacent_vector indices must be in the support");
  }
  if (zeta.entries[i] < h / 2.0) {
    ThrowInvalidArgument("moving h/2 from entry " + std::to_string(i) +
                         " would make it negative");
  }
  SimplexVector out = zeta;
  out.entries[i] -= h / 2.0;
  out.entries[j] += h / 2.0;
  return out;
}

bool IsAdjacent(const SimplexVector& zeta, const SimplexVector& eta, double h) {
  if (zeta.size() != eta.size()) return false;
  std::size_t differing = 0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    const double d = std::abs(zeta.entries[i] - eta.entries[i]);
    if (d != 0.0) ++differing;
    l1 += d;
  }
  return differing <= 2 && l1 <= h + kAdjacencySlack;
}

double EpsilonGuarantee(const PrivacyParams& params, double omega, double omega_bar,
                        std::size_t w_size) {
  const double k = params.k;
  const double h = params.h;
  const double psi = params.psi;
  CheckK(k);
  if (!(h >= 0.0 && h <= 1.0)) ThrowInvalidArgument("h must lie in [0, 1]");
  if (!(psi > 0.0 && psi < 1.0) || !(omega > 0.0 && omega < 1.0) ||
      !(omega_bar > 0.0 && omega_bar < 1.0) || w_size < 1) {
    ThrowInvalidArgument("parameters outside the epsilon bound domain");
  }
  const double a0 = k * omega;
  const double b0 = k * (1.0 - omega_bar - omega);
  const double a1 = k * (omega + h / 2.0);
  const double b1 = k * (1.0 - omega_bar - omega - h / 2.0);
  const double ratio = (1.0 - (static_cast<double>(w_size) - 1.0) * psi) / psi;
  if (!(a0 > 0.0 && b0 > 0.0 && a1 > 0.0 && b1 > 0.0 && ratio > 0.0)) {
    ThrowInvalidArgument("parameters outside the epsilon bound domain");
  }
  return LogBeta(a0, b0) - LogBeta(a1, b1) + 0.5 * k * h * std::log(ratio);
}

std::vector<double> SampleMaxComponents(const SimplexVector& zeta, double k,
                                        std::size_t n_samples, std::uint64_t seed) {
  CheckK(k);
  CheckMechanismInput(zeta);
  std::vector<double> maxes(n_samples);
  const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;
  ParallelFor(chunks, [&](std::size_t c) {
    Engine rng = MakeEngine(seed, streams::kDelta, c);
    const std::size_t end = std::min(n_samples, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      const SimplexVector draw = SampleMechanism(zeta, k, rng);
      maxes[s] = *std::max_element(draw.entries.begin(), draw.entries.end());
    }
  });
  return maxes;
}

DeltaEstimate EstimateDelta(const SimplexVector& zeta, double k, double psi,
                            std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1000) ThrowInvalidArgument("estimate_delta needs at least 1000 samples");
  if (!(psi >= 0.0 && psi <= 1.0)) ThrowInvalidArgument("psi must lie in [0, 1]");
  const std::vector<double> maxes = SampleMaxComponents(zeta, k, n_samples, seed);
  std::size_t fails = 0;
  for (const double m : maxes) fails += m > psi;
  DeltaEstimate est;
  est.n_samples = n_samples;
  est.delta = static_cast<double>(fails) / static_cast<double>(n_samples);
  est.standard_error =
      std::sqrt(est.delta * (1.0 - est.delta) / static_cast<double>(n_samples));
  return est;
}

double PsiForDelta(const SimplexVector& zeta, double k, double target_delta,
                   std::size_t n_samples, std::uint64_t seed) {
  if (!(target_delta >= 0.0 && target_delta <= 1.0)) {
    ThrowInvalidArgument("delta must lie in [0, 1]");
  }
  std::vector<double> maxes = SampleMaxComponents(zeta, k, n_samples, seed);
  std::sort(maxes.begin(), maxes.end());
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (FractionAbove(maxes, mid) <= target_delta) hi = mid; else lo = mid;
  }
  return hi;
}

DirichletMoments ComputeDirichletMoments(const SimplexVector& zeta, double k) {
  CheckK(k);
  CheckMechanismInput(zeta);
  const std::size_t n = zeta.size();
  DirichletMoments m;
  m.mean = zeta.entries;
  m.variance.assign(n, 0.0);
  m.covariance = Grid(n, n);
  const bool degenerate = zeta.support_size() < 2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (degenerate || !zeta.support[i] || !zeta.support[j]) continue;
      const double zi = zeta.entries[i], zj = zeta.entries[j];
      m.covariance(i, j) = i == j ? zi * (1.0 - zi) / (k + 1.0) : -zi * zj / (k + 1.0);
    }
    m.variance[i] = m.covariance(i, i);
  }
  return m;
}

TransitionMatrix PrivatizeMatrix(const TransitionMatrix& p, double k, Engine& rng) {
  Grid out(p.n(), p.n());
  for (std::size_t b = 0; b < p.n(); ++b) {
    const SimplexVector draw = SampleMechanism(SimplexVector::FromRow(p, b), k, rng);
    for (std::size_t a = 0; a < p.n(); ++a) out(b, a) = draw.entries[a];
  }
  return TransitionMatrix::FromGrid(std::move(out), p.support_mask());
}

PrivacyReport AccountMatrix(const TransitionMatrix& p, const PrivacyParams& params,
                            bool psi_given, const AccountingOptions& options) {
  CheckK(params.k);
  PrivacyReport report;
  report.k = params.k;
  report.h = params.h;
  const std::size_t n = p.n();
  std::vector<std::vector<double>> maxes(n);
  for (std::size_t b = 0; b < n; ++b) {
    if (p.support_size(b) < 2) continue;
    maxes[b] = SampleMaxComponents(SimplexVector::FromRow(p, b), params.k,
                                   options.n_samples, DeriveSeed(options.seed, b));
    std::sort(maxes[b].begin(), maxes[b].end());
  }
  auto worst_delta = [&](double psi) {
    double worst = 0.0;
    for (const auto& m : maxes) {
      if (!m.empty()) worst = std::max(worst, FractionAbove(m, psi));
    }
    return worst;
  };
  if (psi_given) {
    report.psi = params.psi;
  } else {
    if (!(params.delta >= 0.0 && params.delta <= 1.0)) {
      ThrowInvalidArgument("delta must lie in [0, 1]");
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (worst_delta(mid) <= params.delta) hi = mid; else lo = mid;
    }
    report.psi = hi;
  }
  report.delta = worst_delta(report.psi);
  report.delta_stderr = options.n_samples > 0
      ? std::sqrt(report.delta * (1.0 - report.delta) /
                  static_cast<double>(options.n_samples))
      : 0.0;

  PrivacyParams row_params = params;
  row_params.psi = report.psi;
  report.per_row_epsilon.assign(n, std::nullopt);
  for (std::size_t b = 0; b < n; ++b) {
    if (p.support_size(b) < 2) continue;
    double lo = 1.0, hi = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!p.supported(b, a)) continue;
      lo = std::min(lo, p(b, a));
      hi = std::max(hi, p(b, a));
    }
    try {
      report.per_row_epsilon[b] =
          EpsilonGuarantee(row_params, options.omega.value_or(lo),
                           options.omega_bar.value_or(hi), options.w_size.value_or(1));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kInvalidArgument) throw;
    }
    // A negative bound carries no guarantee; treat it like an out-of-domain row.
    if (report.per_row_epsilon[b] && *report.per_row_epsilon[b] < 0.0) {
      report.per_row_epsilon[b].reset();
    }
    if (report.per_row_epsilon[b]) {
      report.epsilon = std::max(report.epsilon.value_or(*report.per_row_epsilon[b]),
                                *report.per_row_epsilon[b]);
    }
  }
  return report;
}

nlohmann::ordered_json PrivacyReportToJson(const PrivacyReport& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["h"] = r.h;
  j["psi"] = r.psi;
  j["delta"] = r.delta;
  j["delta_stderr"] = r.delta_stderr;
  j["epsilon"] = r.epsilon ? nlohmann::ordered_json(*r.epsilon) : nlohmann::ordered_json();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& e : r.per_row_epsilon) {
    rows.push_back(e ? nlohmann::ordered_json(*e) : nlohmann::ordered_json());
  }
  j["per_row_epsilon"] = std::move(rows);
  return j;
}

}  // namespace privmdp
