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

#ifndef PRIVMDP_DIRICHLET_PRIVACY_H_
#define PRIVMDP_DIRICHLET_PRIVACY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "privmdp/grid.h"
#include "privmdp/rng.h"
#include "privmdp/transition_matrix.h"

namespace privmdp {

struct PrivacyParams {
  double k = 50.0;    // Dirichlet concentration scale
  double h = 0.03;    // adjacency bound on the L1 distance
  double delta = 0.0; // failure probability
  double psi = 0.9;   // component threshold of the success region
  std::optional<double> epsilon;  // set by accounting
};

// Probability vector with an explicit support.
struct SimplexVector {
  std::vector<double> entries;
  std::vector<std::uint8_t> support;

  // Support taken as the strictly positive entries.
  static SimplexVector FromEntries(std::vector<double> entries);
  static SimplexVector FromRow(const TransitionMatrix& m, std::size_t row);

  std::size_t size() const { return entries.size(); }
  std::size_t support_size() const;
  // Throws kInvalidArgument if the simplex invariants fail.
  void Validate() const;
};

// One draw of Dirichlet(k * zeta) on the support of zeta, via normalized
// Gamma(k * zeta_i, 1) variates. Off-support entries stay zero. Vectors
// with fewer than two supported entries are returned unchanged.
SimplexVector SampleMechanism(const SimplexVector& zeta, double k, Engine& rng);

// Moves h/2 of mass from entry i to entry j, so the L1 distance is h.
SimplexVector AdjacentVector(const SimplexVector& zeta, double h, std::size_t i,
                             std::size_t j);

// At most two coordinates differ and the L1 distance is at most h.
bool IsAdjacent(const SimplexVector& zeta, const SimplexVector& eta, double h);

// Privacy loss for the given (k, h, psi) and row statistics:
//   log B(k w, k(1 - wb - w)) - log B(k(w + h/2), k(1 - wb - w - h/2))
//     + (k h / 2) log((1 - (|W| - 1) psi) / psi)
double EpsilonGuarantee(const PrivacyParams& params, double omega,
                        double omega_bar, std::size_t w_size);

struct DeltaEstimate {
  double delta = 0.0;
  double standard_error = 0.0;
  std::size_t n_samples = 0;
};

// Monte Carlo estimate of 1 - P[every component of M(zeta) <= psi].
DeltaEstimate EstimateDelta(const SimplexVector& zeta, double k, double psi,
                            std::size_t n_samples, std::uint64_t seed);

// Largest component of each of n_samples mechanism draws. Shared by the
// delta estimate and the threshold search.
std::vector<double> SampleMaxComponents(const SimplexVector& zeta, double k,
                                        std::size_t n_samples, std::uint64_t seed);

// Smallest psi whose estimated delta is at most target, found by bisection
// over a fixed set of draws.
double PsiForDelta(const SimplexVector& zeta, double k, double target_delta,
                   std::size_t n_samples, std::uint64_t seed);

struct DirichletMoments {
  std::vector<double> mean;
  std::vector<double> variance;
  Grid covariance;  // diagonal holds the variances
};

DirichletMoments ComputeDirichletMoments(const SimplexVector& zeta, double k);

// Applies the mechanism to every row. The result keeps the input support.
TransitionMatrix PrivatizeMatrix(const TransitionMatrix& p, double k, Engine& rng);

// Per-row accounting inputs. Unset fields use the defaults: omega = smallest
// supported entry, omega_bar = largest, |W| = 1.
struct AccountingOptions {
  std::optional<double> omega;
  std::optional<double> omega_bar;
  std::optional<std::size_t> w_size;
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
};

struct PrivacyReport {
  double k = 0.0;
  double h = 0.0;
  double psi = 0.0;
  double delta = 0.0;
  double delta_stderr = 0.0;
  std::optional<double> epsilon;  // max over rows with a defined value
  std::vector<std::optional<double>> per_row_epsilon;
};

// Accounts a whole matrix. When `psi_given` is false, psi is searched so the
// worst-row delta does not exceed params.delta; otherwise delta is estimated
// at params.psi. Rows with fewer than two supported entries are not
// privatized and carry no epsilon; rows whose statistics fall outside the
// formula's domain are reported without one as well.
PrivacyReport AccountMatrix(const TransitionMatrix& p, const PrivacyParams& params,
                            bool psi_given, const AccountingOptions& options);

nlohmann::ordered_json PrivacyReportToJson(const PrivacyReport& report);

}  // namespace privmdp

#endif  // PRIVMDP_DIRICHLET_PRIVACY_H_
