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

#include "privmdp/lsmdp.h"

#include <cmath>
#include <limits>
#include <string>

#include "privmdp/error.h"
#include "privmdp/io.h"
#include "privmdp/special_functions.h"

namespace privmdp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSimplexTolerance = 1e-9;

void CheckInstance(const Grid& log_weights, std::span<const std::uint8_t> support,
                   const UtilitySchedule& u, double gamma, std::size_t horizon) {
  const std::size_t n = log_weights.rows();
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    ThrowInvalidArgument("gamma must be positive");
  }
  if (horizon < 1) ThrowInvalidArgument("horizon must be at least 1");
  if (log_weights.cols() != n || support.size() != n * n) {
    ThrowInvalidArgument("weight matrix dimensions are inconsistent");
  }
  if (u.horizon() != horizon || u.n() != n) {
    ThrowInvalidArgument("utility schedule is " + std::to_string(u.horizon()) +
                         "x" + std::to_string(u.n()) + ", expected " +
                         std::to_string(horizon) + "x" + std::to_string(n));
  }
  for (const double v : u.values.values()) {
    if (!std::isfinite(v)) ThrowInvalidArgument("utility values must be finite");
  }
  for (std::size_t b = 0; b < n; ++b) {
    bool any = false;
    for (std::size_t a = 0; a < n; ++a) {
      any = any || (support[b * n + a] && log_weights(b, a) > kNegInf);
    }
    if (!any) {
      ThrowInvalidArgument("absorbing state with no transitions (state " +
                           std::to_string(b) + ")");
    }
  }
}

}  // namespace

void CheckSimplex(std::span<const double> v, const char* what) {
  double sum = 0.0;
  for (const double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      ThrowInvalidArgument(std::string(what) + " has a negative or non-finite entry");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    ThrowInvalidArgument(std::string(what) + " does not sum to 1");
  }
}

Desirability SolveDesirabilityLog(const Grid& log_weights,
                                  std::span<const std::uint8_t> support,
                                  const UtilitySchedule& u, double gamma,
                                  std::size_t horizon) {
  CheckInstance(log_weights, support, u, gamma, horizon);
  const std::size_t n = log_weights.rows();
  Desirability z{Grid(horizon, n)};
  for (std::size_t b = 0; b < n; ++b) {
    z.log_z(horizon - 1, b) = u.values(horizon - 1, b) / gamma;
  }
  std::vector<double> terms(n);
  for (std::size_t t = horizon - 1; t-- > 0;) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t a = 0; a < n; ++a) {
        terms[a] = support[b * n + a] ? log_weights(b, a) + z.log_z(t + 1, a) : kNegInf;
      }
      z.log_z(t, b) = u.values(t, b) / gamma + LogSumExp(terms);
      if (!std::isfinite(z.log_z(t, b))) {
        ThrowNumericalError("desirability overflow at t=" + std::to_string(t));
      }
    }
  }
  return z;
}

Desirability SolveDesirability(const TransitionMatrix& p_bar,
                               const UtilitySchedule& u, double gamma,
                               std::size_t horizon) {
  return SolveDesirabilityLog(p_bar.log_probabilities(), p_bar.support_mask(), u,
                              gamma, horizon);
}

Policy PolicyFromLogWeights(const Grid& log_weights,
                            std::span<const std::uint8_t> support,
                            const Desirability& z, double gamma) {
  const std::size_t n = log_weights.rows();
  if (z.n() != n || z.horizon() < 1) {
    ThrowInvalidArgument("desirability does not match the weight matrix");
  }
  Policy policy;
  policy.gamma = gamma;
  std::vector<std::uint8_t> mask(support.begin(), support.end());
  std::vector<double> terms(n);
  for (std::size_t t = 0; t + 1 < z.horizon(); ++t) {
    Grid p(n, n);
    for (std::size_t b = 0; b < n; ++b) {
      double hi = kNegInf;
      for (std::size_t a = 0; a < n; ++a) {
        terms[a] = support[b * n + a] ? log_weights(b, a) + z.log_z(t + 1, a) : kNegInf;
        hi = std::max(hi, terms[a]);
      }
      if (hi == kNegInf) {
        ThrowInvalidArgument("absorbing state with no transitions (state " +
                             std::to_string(b) + ")");
      }
      double sum = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double w = terms[a] == kNegInf ? 0.0 : std::exp(terms[a] - hi);
        p(b, a) = w;
        sum += w;
      }
      for (std::size_t a = 0; a < n; ++a) p(b, a) /= sum;
    }
    policy.steps.push_back(TransitionMatrix::FromGrid(std::move(p), mask));
  }
  return policy;
}

Policy OptimalPolicy(const TransitionMatrix& p_bar, const Desirability& z,
                     double gamma) {
  return PolicyFromLogWeights(p_bar.log_probabilities(), p_bar.support_mask(), z,
                              gamma);
}

Solution SolveLsmdp(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                    double gamma) {
  return SolveWithLogWeights(p_bar, p_bar.log_probabilities(), u, gamma);
}

Solution SolveWithLogWeights(const TransitionMatrix& p_bar, const Grid& log_weights,
                             const UtilitySchedule& u, double gamma) {
  Solution s;
  s.desirability = SolveDesirabilityLog(log_weights, p_bar.support_mask(), u, gamma,
                                        u.horizon());
  s.policy = PolicyFromLogWeights(log_weights, p_bar.support_mask(), s.desirability,
                                  gamma);
  return s;
}

DistributionTrajectory Propagate(std::span<const TransitionMatrix> steps,
                                 std::span<const double> rho0) {
  CheckSimplex(rho0, "rho0");
  const std::size_t n = rho0.size();
  for (const auto& m : steps) {
    if (m.n() != n) ThrowInvalidArgument("rho0 dimension does not match policy");
  }
  DistributionTrajectory out{Grid(steps.size() + 1, n)};
  for (std::size_t a = 0; a < n; ++a) out.rho(0, a) = rho0[a];
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const TransitionMatrix& p = steps[t];
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < n; ++b) acc += out.rho(t, b) * p(b, a);
      out.rho(t + 1, a) = acc;
      sum += acc;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      ThrowNumericalError("distribution drift at t=" + std::to_string(t + 1));
    }
    for (std::size_t a = 0; a < n; ++a) out.rho(t + 1, a) /= sum;
  }
  return out;
}

DistributionTrajectory Propagate(const Policy& policy, std::span<const double> rho0) {
  return Propagate(std::span<const TransitionMatrix>(policy.steps), rho0);
}

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) ThrowInvalidArgument("KL arguments differ in length");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) ThrowInvalidArgument("KL undefined: mass outside support");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double EvaluateObjective(const Policy& policy, const TransitionMatrix& p_bar,
                         const UtilitySchedule& u, std::span<const double> rho0,
                         double gamma) {
  const std::size_t n = p_bar.n();
  if (u.horizon() != policy.horizon() || u.n() != n) {
    ThrowInvalidArgument("utility schedule does not match the policy");
  }
  for (const auto& m : policy.steps) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t a = 0; a < n; ++a) {
        if (m(b, a) > 0.0 && !p_bar.supported(b, a)) {
          ThrowInvalidArgument("KL undefined: policy mass outside default support");
        }
      }
    }
  }
  const DistributionTrajectory traj = Propagate(policy, rho0);
  double total = 0.0;
  for (std::size_t t = 0; t < policy.steps.size(); ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      if (traj.rho(t, b) == 0.0) continue;
      total += traj.rho(t, b) * gamma *
               KlDivergence(policy.steps[t].row(b), p_bar.row(b));
    }
    for (std::size_t a = 0; a < n; ++a) {
      total -= traj.rho(t + 1, a) * u.values(t + 1, a);
    }
  }
  return total;
}

nlohmann::ordered_json PolicyToJson(const Policy& policy) {
  nlohmann::ordered_json j;
  j["gamma"] = policy.gamma;
  j["T"] = policy.horizon();
  auto mats = nlohmann::ordered_json::array();
  for (const auto& m : policy.steps) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t b = 0; b < m.n(); ++b) {
      auto r = nlohmann::ordered_json::array();
      for (const double v : m.row(b)) r.push_back(v);
      rows.push_back(std::move(r));
    }
    mats.push_back(std::move(rows));
  }
  j["matrices"] = std::move(mats);
  return j;
}

Policy PolicyFromJson(const nlohmann::json& j) {
  try {
    Policy p;
    p.gamma = j.at("gamma").get<double>();
    for (const auto& rows : j.at("matrices")) {
      p.steps.push_back(TransitionMatrix::FromRows(
          rows.get<std::vector<std::vector<double>>>()));
    }
    if (p.horizon() != j.at("T").get<std::size_t>()) {
      ThrowDataError("policy T does not match the number of matrices");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    ThrowDataError(std::string("malformed policy JSON: ") + e.what());
  }
}

void WriteDesirabilityCsv(const Desirability& z, const std::filesystem::path& path) {
  CsvWriter csv({"t", "state", "log_z"});
  for (std::size_t t = 0; t < z.horizon(); ++t) {
    for (std::size_t b = 0; b < z.n(); ++b) {
      csv.cell(t).cell(b).cell(z.log_z(t, b));
      csv.end_row();
    }
  }
  csv.save(path);
}

}  // namespace privmdp
