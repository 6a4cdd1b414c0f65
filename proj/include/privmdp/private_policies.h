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

#ifndef PRIVMDP_PRIVATE_POLICIES_H_
#define PRIVMDP_PRIVATE_POLICIES_H_

#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "privmdp/grid.h"
#include "privmdp/lsmdp.h"
#include "privmdp/transition_matrix.h"

namespace privmdp {

enum class ElogMethod { kExact, kTaylor, kDigamma };

const char* ElogMethodName(ElogMethod method);

// Expected log of the privatized default matrix, -inf off the support.
struct ExpectedLogMatrix {
  Grid values;
  ElogMethod method = ElogMethod::kExact;
  double k = 0.0;
};

// Corrections below this log value are clamped for tiny probabilities.
inline constexpr double kTaylorClampLog = -30.0;
inline constexpr double kTaylorClampBelow = 1e-6;

// log p - (1 - p) / (2 p (k + 1)); the correction is clamped at
// kTaylorClampLog when p < kTaylorClampBelow.
ExpectedLogMatrix ExpectedLogTaylor(const TransitionMatrix& p_bar, double k);

// digamma(k p) - digamma(k).
ExpectedLogMatrix ExpectedLogDigamma(const TransitionMatrix& p_bar, double k);

// log p itself, the no-privacy limit.
ExpectedLogMatrix ExpectedLogExact(const TransitionMatrix& p_bar);

// Solves the recursion with weights exp(elog) left unnormalized; only the
// returned policy rows are normalized.
Solution SolvePrivate(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                      double gamma, std::size_t horizon,
                      const ExpectedLogMatrix& elog);

struct CostReport {
  std::string method;
  double k = 0.0;
  Grid delta_c;   // (T-1) x n, currency per (t, beta)
  double total = 0.0;  // sum_b rho0[b] * delta_c[0][b]
  // Objective of the private policy minus that of the non-private one,
  // both from rho0.
  std::optional<double> realized_total;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

// Per (t, b):
//   gamma * sum_a Pt~[b][a] (elog[b][a] - log p_bar[b][a])
//     + gamma * log sum_a p_bar[b][a] z[t+1][a]
//     - gamma * log sum_a exp(elog[b][a]) z~[t+1][a]
// Every entry is checked against the difference of one-step values built
// directly from the two policies; a mismatch above 1e-8 (relative to the
// value scale) throws kNumerical.
CostReport CostOfPrivacyStochastic(const TransitionMatrix& p_bar,
                                   const UtilitySchedule& u, double gamma,
                                   const ExpectedLogMatrix& elog,
                                   const Solution& private_solution,
                                   const Solution& nonprivate_solution,
                                   std::span<const double> rho0);

// One-step value of `policy` at (t, b) with continuation log_z[t+1]:
//   -U[t][b] + sum_a P[b][a] (gamma log P[b][a] - gamma log p_bar[b][a]
//                              - gamma log_z[t+1][a]).
double OneStepValue(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                    double gamma, const TransitionMatrix& step,
                    const Desirability& continuation, std::size_t t,
                    std::size_t b);

nlohmann::ordered_json CostReportToJson(const CostReport& report);

}  // namespace privmdp

#endif  // PRIVMDP_PRIVATE_POLICIES_H_
