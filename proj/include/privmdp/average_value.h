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

#ifndef PRIVMDP_AVERAGE_VALUE_H_
#define PRIVMDP_AVERAGE_VALUE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "privmdp/grid.h"
#include "privmdp/lsmdp.h"
#include "privmdp/private_policies.h"
#include "privmdp/transition_matrix.h"

namespace privmdp {

struct PolicySample {
  TransitionMatrix p_tilde;   // privatized default matrix draw
  Solution solution;          // non-private solve on p_tilde
};

struct PolicySampleSet {
  double k = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t redraws = 0;    // rows redrawn after collapsing numerically
  std::vector<PolicySample> samples;
};

// Rows are redrawn at most this many times before giving up.
inline constexpr int kMaxRowRedraws = 10;

// Draws N privatized matrices and solves each one. Sample j uses its own
// seed derived from (seed, j), so the set does not depend on `threads`.
PolicySampleSet SamplePrivatePolicies(const TransitionMatrix& p_bar,
                                      const UtilitySchedule& u, double gamma,
                                      std::size_t horizon, double k,
                                      std::size_t n_samples, std::uint64_t seed,
                                      unsigned threads = 0);

// Entrywise mean of the sample policies, rows renormalized.
Policy MeanPolicy(const PolicySampleSet& set);

enum class ExpansionDenominators {
  kConsistent,  // powers of E[Y] = sum_a p_a z_a
  kPrinted,     // powers-of-squares sum_a (p_a z_a)^m as displayed in print
};

struct AnalyticalPolicy {
  Policy policy;
  Grid row_sums;  // (T-1) x n, before renormalization
};

// Second-order expectation of the ratio p~ z / sum p~ z under the Dirichlet
// covariance. z_tilde is treated as deterministic.
AnalyticalPolicy ExpectedPolicyAnalytical(
    const TransitionMatrix& p_bar, const Desirability& z_tilde, double k,
    double gamma, ExpansionDenominators denominators = ExpansionDenominators::kConsistent);

struct MonteCarloCost {
  std::size_t n = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Grid per_state_mean;  // (T-1) x n
};

// Per-sample cost of privacy against the nominal solution:
//   gamma sum_a P~j (log p~j - log p_bar) - gamma log sum p~j z~j
//     + gamma log sum p_bar z,
// aggregated by rho0 at t = 0.
MonteCarloCost MonteCarloCostOfPrivacy(const TransitionMatrix& p_bar,
                                       const Solution& nonprivate,
                                       const PolicySampleSet& set,
                                       std::span<const double> rho0, double gamma);

// Expected cost of privacy for the averaged policy, with x log x ~ x^2 - x
// expanded around the leading term:
//   gamma sum_a [V_a + E_a^2 - L_a^2 - (E_a - L_a)(log p_a + log z~_a)]
//     + gamma log sum p z - gamma log sum p z~
// where L is the leading term p z~ / sum p z~, E the expected policy and V
// the second-order variance of the ratio. When `samples` is given, the
// Monte Carlo reference is reported in `extra` together with the gap.
CostReport ExpectedCostAnalytical(const TransitionMatrix& p_bar,
                                  const Desirability& z, const Desirability& z_tilde,
                                  double gamma, double k, const Policy& expected_policy,
                                  std::span<const double> rho0,
                                  const Solution* nonprivate = nullptr,
                                  const PolicySampleSet* samples = nullptr);

// Mean over samples of objective(P~j) - objective(nonprivate), from rho0.
double MeanRealizedCost(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                        double gamma, const Solution& nonprivate,
                        const PolicySampleSet& set, std::span<const double> rho0);

// Largest per-row L1 distance between two policies of equal shape.
double MaxRowL1(const Policy& a, const Policy& b);

nlohmann::ordered_json SampleSetSummaryJson(const PolicySampleSet& set,
                                            const Policy& mean_policy,
                                            const AnalyticalPolicy& analytical);

}  // namespace privmdp

#endif  // PRIVMDP_AVERAGE_VALUE_H_
