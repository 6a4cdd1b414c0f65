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

#ifndef PRIVMDP_LSMDP_H_
#define PRIVMDP_LSMDP_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "privmdp/grid.h"
#include "privmdp/transition_matrix.h"

namespace privmdp {

// Aggregator utility per (time step, state), currency units. T x n.
struct UtilitySchedule {
  Grid values;

  std::size_t horizon() const { return values.rows(); }
  std::size_t n() const { return values.cols(); }
};

// Natural-log desirability per (time step, state). T x n.
struct Desirability {
  Grid log_z;

  std::size_t horizon() const { return log_z.rows(); }
  std::size_t n() const { return log_z.cols(); }
};

// One controlled transition matrix per step t = 0..T-2.
struct Policy {
  double gamma = 0.0;
  std::vector<TransitionMatrix> steps;

  std::size_t horizon() const { return steps.size() + 1; }
  std::size_t n() const { return steps.empty() ? 0 : steps.front().n(); }
};

// Occupation probabilities per (time step, state). T x n.
struct DistributionTrajectory {
  Grid rho;
};

struct Solution {
  Desirability desirability;
  Policy policy;
};

// Backward recursion in log domain:
//   log z[T-1] = U[T-1]/gamma
//   log z[t][b] = U[t][b]/gamma + logsumexp_a(log_weights[b][a] + log z[t+1][a])
// where the sum runs over the support. With log_weights = log(p_bar) this is
// the non-private recursion; other weights need not be row-normalized.
Desirability SolveDesirabilityLog(const Grid& log_weights,
                                  std::span<const std::uint8_t> support,
                                  const UtilitySchedule& u, double gamma,
                                  std::size_t horizon);

Desirability SolveDesirability(const TransitionMatrix& p_bar,
                               const UtilitySchedule& u, double gamma,
                               std::size_t horizon);

// Policy rows are softmax(log_weights[b] + log z[t+1]) over the support,
// normalized exactly.
Policy PolicyFromLogWeights(const Grid& log_weights,
                            std::span<const std::uint8_t> support,
                            const Desirability& z, double gamma);

Policy OptimalPolicy(const TransitionMatrix& p_bar, const Desirability& z,
                     double gamma);

// Desirability plus policy for the non-private problem.
Solution SolveLsmdp(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                    double gamma);

// Same recursion with arbitrary log weights on p_bar's support.
Solution SolveWithLogWeights(const TransitionMatrix& p_bar,
                             const Grid& log_weights, const UtilitySchedule& u,
                             double gamma);

// rho[t+1] = rho[t] * P_t. Drift of a row sum beyond 1e-9 is an error.
DistributionTrajectory Propagate(const Policy& policy,
                                 std::span<const double> rho0);
DistributionTrajectory Propagate(std::span<const TransitionMatrix> steps,
                                 std::span<const double> rho0);

// Expected cost along the trajectory induced by the policy itself:
//   sum_t sum_b rho[t][b] * (gamma * KL(P_t[b] || p_bar[b]))
//     - sum_t sum_a rho[t+1][a] * U[t+1][a].
// Utility of the initial step is not counted.
double EvaluateObjective(const Policy& policy, const TransitionMatrix& p_bar,
                         const UtilitySchedule& u, std::span<const double> rho0,
                         double gamma);

// sum_i p_i log(p_i / q_i) with 0 log 0 = 0. Mass of p where q is zero
// throws "KL undefined".
double KlDivergence(std::span<const double> p, std::span<const double> q);

// Throws kInvalidArgument unless v is a probability vector within 1e-9.
void CheckSimplex(std::span<const double> v, const char* what);

nlohmann::ordered_json PolicyToJson(const Policy& policy);
Policy PolicyFromJson(const nlohmann::json& j);

void WriteDesirabilityCsv(const Desirability& z, const std::filesystem::path& path);

}  // namespace privmdp

#endif  // PRIVMDP_LSMDP_H_
