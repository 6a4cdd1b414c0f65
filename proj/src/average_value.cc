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

#include "privmdp/average_value.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "privmdp/dirichlet_privacy.h"
#include "privmdp/error.h"
#include "privmdp/parallel.h"
#include "privmdp/rng.h"
#include "privmdp/special_functions.h"

namespace privmdp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct RowDraw {
  TransitionMatrix matrix;
  std::size_t redraws = 0;
};

RowDraw DrawMatrix(const TransitionMatrix& p_bar, double k, Engine& rng) {
  const std::size_t n = p_bar.n();
  Grid out(n, n);
  std::size_t redraws = 0;
  for (std::size_t b = 0; b < n; ++b) {
    const SimplexVector zeta = SimplexVector::FromRow(p_bar, b);
    const bool privatized = zeta.support_size() >= 2;
    SimplexVector draw = SampleMechanism(zeta, k, rng);
    int attempts = 0;
    auto collapsed = [&] {
      if (!privatized) return false;
      for (std::size_t a = 0; a < n; ++a) {
        if (zeta.support[a] && draw.entries[a] == 0.0) return true;
      }
      return false;
    };
    while (collapsed()) {
      if (++attempts > kMaxRowRedraws) {
        ThrowNumericalError("row " + std::to_string(b) +
                            " collapsed on every redraw; k is too small");
      }
      ++redraws;
      draw = SampleMechanism(zeta, k, rng);
    }
    for (std::size_t a = 0; a < n; ++a) out(b, a) = draw.entries[a];
  }
  return {TransitionMatrix::FromGrid(std::move(out), p_bar.support_mask()), redraws};
}

// Row-local quantities of the ratio expansion for one (t, b).
struct RowExpansion {
  std::vector<double> leading;     // p z / S
  std::vector<double> expected;    // second-order E[ratio]
  std::vector<double> variance;    // second-order Var[ratio]
  double row_sum = 0.0;
};

RowExpansion ExpandRow(std::span<const double> p, std::span<const std::uint8_t> support,
                       std::span<const double> log_z, double k,
                       ExpansionDenominators denominators) {
  const std::size_t n = p.size();
  double hi = kNegInf;
  for (std::size_t a = 0; a < n; ++a) {
    if (support[a]) hi = std::max(hi, log_z[a]);
  }
  // The expansion is invariant to a common scale of z.
  std::vector<double> z(n, 0.0);
  double s = 0.0, q2 = 0.0, q3 = 0.0, pz2 = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (!support[a]) continue;
    z[a] = std::exp(log_z[a] - hi);
    const double x = p[a] * z[a];
    s += x;
    q2 += x * x;
    q3 += x * x * x;
    pz2 += p[a] * z[a] * z[a];
  }
  const double kp1 = k + 1.0;
  const double var_y = (pz2 - s * s) / kp1;
  const double d2 = denominators == ExpansionDenominators::kConsistent ? s * s : q2;
  const double d3 = denominators == ExpansionDenominators::kConsistent ? s * s * s : q3;
  RowExpansion r;
  r.leading.assign(n, 0.0);
  r.expected.assign(n, 0.0);
  r.variance.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (!support[a]) continue;
    const double ex = p[a] * z[a];
    const double var_x = z[a] * z[a] * p[a] * (1.0 - p[a]) / kp1;
    const double cov_xy = z[a] * p[a] * (z[a] - s) / kp1;
    r.leading[a] = ex / s;
    r.expected[a] = ex / s - cov_xy / d2 + ex * var_y / d3;
    r.variance[a] = var_x / (s * s) - 2.0 * ex * cov_xy / (s * s * s) +
                    ex * ex * var_y / (s * s * s * s);
    r.row_sum += r.expected[a];
  }
  return r;
}

}  // namespace

PolicySampleSet SamplePrivatePolicies(const TransitionMatrix& p_bar,
                                      const UtilitySchedule& u, double gamma,
                                      std::size_t horizon, double k,
                                      std::size_t n_samples, std::uint64_t seed,
                                      unsigned threads) {
  if (n_samples < 1) ThrowInvalidArgument("n_samples must be at least 1");
  if (!(k > 0.0)) ThrowInvalidArgument("concentration k must be positive");
  if (u.horizon() != horizon) ThrowInvalidArgument("utility horizon mismatch");
  PolicySampleSet set;
  set.k = k;
  set.n = n_samples;
  set.seed = seed;
  set.samples.resize(n_samples);
  std::vector<std::size_t> redraws(n_samples, 0);
  ParallelFor(n_samples, [&](std::size_t j) {
    Engine rng = MakeEngine(seed, streams::kPolicySamples, j);
    RowDraw draw = DrawMatrix(p_bar, k, rng);
    redraws[j] = draw.redraws;
    Solution sol = SolveLsmdp(draw.matrix, u, gamma);
    set.samples[j] = PolicySample{std::move(draw.matrix), std::move(sol)};
  }, threads);
  for (const auto r : redraws) set.redraws += r;
  return set;
}

Policy MeanPolicy(const PolicySampleSet& set) {
  if (set.samples.empty()) ThrowInvalidArgument("mean_policy needs at least one sample");
  const Policy& first = set.samples.front().solution.policy;
  const std::size_t n = first.n();
  Policy out;
  out.gamma = first.gamma;
  for (std::size_t t = 0; t < first.steps.size(); ++t) {
    Grid acc(n, n);
    for (const auto& s : set.samples) {
      const auto& m = s.solution.policy.steps[t];
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t a = 0; a < n; ++a) acc(b, a) += m(b, a);
      }
    }
    for (std::size_t b = 0; b < n; ++b) {
      double sum = 0.0;
      for (std::size_t a = 0; a < n; ++a) sum += acc(b, a);
      for (std::size_t a = 0; a < n; ++a) acc(b, a) /= sum;
    }
    out.steps.push_back(TransitionMatrix::FromGrid(std::move(acc), first.steps[t].support_mask()));
  }
  return out;
}

AnalyticalPolicy ExpectedPolicyAnalytical(const TransitionMatrix& p_bar,
                                          const Desirability& z_tilde, double k,
                                          double gamma,
                                          ExpansionDenominators denominators) {
  if (!(k > 0.0)) ThrowInvalidArgument("concentration k must be positive");
  const std::size_t n = p_bar.n();
  if (z_tilde.n() != n || z_tilde.horizon() < 1) {
    ThrowInvalidArgument("desirability does not match the default matrix");
  }
  AnalyticalPolicy out;
  out.policy.gamma = gamma;
  out.row_sums = Grid(z_tilde.horizon() - 1, n);
  for (std::size_t t = 0; t + 1 < z_tilde.horizon(); ++t) {
    Grid m(n, n);
    for (std::size_t b = 0; b < n; ++b) {
      const RowExpansion r = ExpandRow(p_bar.row(b), p_bar.support_row(b),
                                       z_tilde.log_z.row(t + 1), k, denominators);
      out.row_sums(t, b) = r.row_sum;
      // Truncation can push a tiny entry below zero; clip before renormalizing.
      double sum = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        m(b, a) = std::max(r.expected[a], 0.0);
        sum += m(b, a);
      }
      if (!(sum > 0.0)) ThrowNumericalError("expected policy row has no mass");
      for (std::size_t a = 0; a < n; ++a) m(b, a) /= sum;
    }
    out.policy.steps.push_back(TransitionMatrix::FromGrid(std::move(m), p_bar.support_mask()));
  }
  return out;
}

MonteCarloCost MonteCarloCostOfPrivacy(const TransitionMatrix& p_bar,
                                       const Solution& nonprivate,
                                       const PolicySampleSet& set,
                                       std::span<const double> rho0, double gamma) {
  const std::size_t n = p_bar.n();
  const std::size_t steps = nonprivate.policy.steps.size();
  const Grid log_p = p_bar.log_probabilities();
  MonteCarloCost mc;
  mc.n = set.samples.size();
  mc.per_state_mean = Grid(steps, n);
  if (mc.n == 0) return mc;
  Grid nominal(steps, n);
  std::vector<double> terms(n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t a = 0; a < n; ++a) {
        terms[a] = p_bar.supported(b, a)
                       ? log_p(b, a) + nonprivate.desirability.log_z(t + 1, a) : kNegInf;
      }
      nominal(t, b) = gamma * LogSumExp(terms);
    }
  }
  std::vector<double> totals(mc.n, 0.0);
  for (std::size_t j = 0; j < mc.n; ++j) {
    const PolicySample& s = set.samples[j];
    const Grid log_pj = s.p_tilde.log_probabilities();
    for (std::size_t t = 0; t < steps; ++t) {
      const TransitionMatrix& pt = s.solution.policy.steps[t];
      for (std::size_t b = 0; b < n; ++b) {
        double shift = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
          if (!p_bar.supported(b, a)) {
            terms[a] = kNegInf;
            continue;
          }
          if (pt(b, a) > 0.0) shift += pt(b, a) * (log_pj(b, a) - log_p(b, a));
          terms[a] = log_pj(b, a) + s.solution.desirability.log_z(t + 1, a);
        }
        const double dc = gamma * shift - gamma * LogSumExp(terms) + nominal(t, b);
        mc.per_state_mean(t, b) += dc;
        if (t == 0) totals[j] += rho0[b] * dc;
      }
    }
  }
  for (double& v : mc.per_state_mean.values()) v /= static_cast<double>(mc.n);
  double sum = 0.0;
  for (const double v : totals) sum += v;
  mc.mean = sum / static_cast<double>(mc.n);
  double ss = 0.0;
  for (const double v : totals) ss += (v - mc.mean) * (v - mc.mean);
  const double var = mc.n > 1 ? ss / static_cast<double>(mc.n - 1) : 0.0;
  mc.standard_error = std::sqrt(var / static_cast<double>(mc.n));
  mc.ci_low = mc.mean - 1.96 * mc.standard_error;
  mc.ci_high = mc.mean + 1.96 * mc.standard_error;
  return mc;
}

CostReport ExpectedCostAnalytical(const TransitionMatrix& p_bar, const Desirability& z,
                                  const Desirability& z_tilde, double gamma, double k,
                                  const Policy& expected_policy,
                                  std::span<const double> rho0,
                                  const Solution* nonprivate,
                                  const PolicySampleSet* samples) {
  const std::size_t n = p_bar.n();
  const std::size_t steps = expected_policy.steps.size();
  if (z.horizon() != steps + 1 || z_tilde.horizon() != steps + 1 || rho0.size() != n) {
    ThrowInvalidArgument("expected cost inputs differ in shape");
  }
  const Grid log_p = p_bar.log_probabilities();
  CostReport report;
  report.method = "average";
  report.k = k;
  report.delta_c = Grid(steps, n);
  std::vector<double> a_terms(n), b_terms(n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      const RowExpansion r = ExpandRow(p_bar.row(b), p_bar.support_row(b),
                                       z_tilde.log_z.row(t + 1), k,
                                       ExpansionDenominators::kConsistent);
      const auto e = expected_policy.steps[t].row(b);
      double acc = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        if (!p_bar.supported(b, a)) {
          a_terms[a] = b_terms[a] = kNegInf;
          continue;
        }
        const double log_w = log_p(b, a) + z_tilde.log_z(t + 1, a);
        acc += r.variance[a] + e[a] * e[a] - r.leading[a] * r.leading[a] -
               (e[a] - r.leading[a]) * log_w;
        a_terms[a] = log_p(b, a) + z.log_z(t + 1, a);
        b_terms[a] = log_w;
      }
      report.delta_c(t, b) =
          gamma * acc + gamma * LogSumExp(a_terms) - gamma * LogSumExp(b_terms);
    }
  }
  if (steps > 0) {
    for (std::size_t b = 0; b < n; ++b) report.total += rho0[b] * report.delta_c(0, b);
  }
  if (nonprivate != nullptr && samples != nullptr) {
    const MonteCarloCost mc = MonteCarloCostOfPrivacy(p_bar, *nonprivate, *samples,
                                                      rho0, gamma);
    report.extra["mc_samples"] = mc.n;
    report.extra["mc_mean"] = mc.mean;
    report.extra["mc_stderr"] = mc.standard_error;
    report.extra["mc_ci_low"] = mc.ci_low;
    report.extra["mc_ci_high"] = mc.ci_high;
    report.extra["gap"] = report.total - mc.mean;
    report.extra["within_ci"] = report.total >= mc.ci_low && report.total <= mc.ci_high;
  }
  return report;
}

double MeanRealizedCost(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                        double gamma, const Solution& nonprivate,
                        const PolicySampleSet& set, std::span<const double> rho0) {
  if (set.samples.empty()) ThrowInvalidArgument("no samples");
  const double j0 = EvaluateObjective(nonprivate.policy, p_bar, u, rho0, gamma);
  double sum = 0.0;
  for (const auto& s : set.samples) {
    sum += EvaluateObjective(s.solution.policy, p_bar, u, rho0, gamma) - j0;
  }
  return sum / static_cast<double>(set.samples.size());
}

double MaxRowL1(const Policy& x, const Policy& y) {
  if (x.steps.size() != y.steps.size() || x.n() != y.n()) {
    ThrowInvalidArgument("policies differ in shape");
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < x.steps.size(); ++t) {
    for (std::size_t b = 0; b < x.n(); ++b) {
      double l1 = 0.0;
      for (std::size_t a = 0; a < x.n(); ++a) {
        l1 += std::abs(x.steps[t](b, a) - y.steps[t](b, a));
      }
      worst = std::max(worst, l1);
    }
  }
  return worst;
}

nlohmann::ordered_json SampleSetSummaryJson(const PolicySampleSet& set,
                                            const Policy& mean_policy,
                                            const AnalyticalPolicy& analytical) {
  nlohmann::ordered_json j;
  j["k"] = set.k;
  j["N"] = set.n;
  j["seed"] = set.seed;
  j["redraws"] = set.redraws;
  j["mean_policy"] = PolicyToJson(mean_policy);
  j["analytical_policy"] = PolicyToJson(analytical.policy);
  auto sums = nlohmann::ordered_json::array();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t t = 0; t < analytical.row_sums.rows(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (const double v : analytical.row_sums.row(t)) {
      row.push_back(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    sums.push_back(std::move(row));
  }
  nlohmann::ordered_json diag;
  diag["min"] = analytical.row_sums.empty() ? 1.0 : lo;
  diag["max"] = analytical.row_sums.empty() ? 1.0 : hi;
  diag["per_step"] = std::move(sums);
  j["row_sum_diagnostics"] = std::move(diag);
  j["l1_gap"] = MaxRowL1(mean_policy, analytical.policy);
  return j;
}

}  // namespace privmdp
