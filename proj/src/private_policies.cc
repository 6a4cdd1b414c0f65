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

#include "privmdp/private_policies.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "privmdp/error.h"
#include "privmdp/special_functions.h"

namespace privmdp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kCrossCheckTolerance = 1e-8;

void CheckPositiveK(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    ThrowInvalidArgument("concentration k must be positive and finite");
  }
}

void CheckSupportedPositive(const TransitionMatrix& p) {
  for (std::size_t b = 0; b < p.n(); ++b) {
    for (std::size_t a = 0; a < p.n(); ++a) {
      if (p.supported(b, a) && !(p(b, a) > 0.0)) {
        ThrowInvalidArgument("supported default entries must be positive");
      }
    }
  }
}

}  // namespace

const char* ElogMethodName(ElogMethod method) {
  switch (method) {
    case ElogMethod::kExact: return "exact";
    case ElogMethod::kTaylor: return "taylor";
    case ElogMethod::kDigamma: return "digamma";
  }
  return "unknown";
}

ExpectedLogMatrix ExpectedLogTaylor(const TransitionMatrix& p_bar, double k) {
  CheckPositiveK(k);
  CheckSupportedPositive(p_bar);
  const std::size_t n = p_bar.n();
  ExpectedLogMatrix out{Grid(n, n, kNegInf), ElogMethod::kTaylor, k};
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t a = 0; a < n; ++a) {
      if (!p_bar.supported(b, a)) continue;
      const double p = p_bar(b, a);
      double correction = -(1.0 - p) / (2.0 * p * (k + 1.0));
      if (p < kTaylorClampBelow) correction = std::max(correction, kTaylorClampLog);
      out.values(b, a) = std::log(p) + correction;
    }
  }
  return out;
}

ExpectedLogMatrix ExpectedLogDigamma(const TransitionMatrix& p_bar, double k) {
  CheckPositiveK(k);
  CheckSupportedPositive(p_bar);
  const std::size_t n = p_bar.n();
  ExpectedLogMatrix out{Grid(n, n, kNegInf), ElogMethod::kDigamma, k};
  const double psi_k = Digamma(k);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t a = 0; a < n; ++a) {
      if (!p_bar.supported(b, a)) continue;
      out.values(b, a) = Digamma(k * p_bar(b, a)) - psi_k;
    }
  }
  return out;
}

ExpectedLogMatrix ExpectedLogExact(const TransitionMatrix& p_bar) {
  return {p_bar.log_probabilities(), ElogMethod::kExact,
          std::numeric_limits<double>::infinity()};
}

Solution SolvePrivate(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                      double gamma, std::size_t horizon,
                      const ExpectedLogMatrix& elog) {
  const std::size_t n = p_bar.n();
  if (elog.values.rows() != n || elog.values.cols() != n) {
    ThrowInvalidArgument("expected-log matrix dimensions differ from the default matrix");
  }
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t a = 0; a < n; ++a) {
      const bool finite = std::isfinite(elog.values(b, a));
      if (finite != p_bar.supported(b, a)) {
        ThrowInvalidArgument("expected-log support mismatch at (" + std::to_string(b) +
                             "," + std::to_string(a) + ")");
      }
    }
  }
  if (u.horizon() != horizon) ThrowInvalidArgument("utility horizon mismatch");
  Solution s;
  s.desirability =
      SolveDesirabilityLog(elog.values, p_bar.support_mask(), u, gamma, horizon);
  s.policy = PolicyFromLogWeights(elog.values, p_bar.support_mask(), s.desirability, gamma);
  return s;
}

double OneStepValue(const TransitionMatrix& p_bar, const UtilitySchedule& u,
                    double gamma, const TransitionMatrix& step,
                    const Desirability& continuation, std::size_t t, std::size_t b) {
  double v = -u.values(t, b);
  for (std::size_t a = 0; a < p_bar.n(); ++a) {
    const double p = step(b, a);
    if (p == 0.0) continue;
    v += p * (gamma * std::log(p) - gamma * std::log(p_bar(b, a)) -
              gamma * continuation.log_z(t + 1, a));
  }
  return v;
}

CostReport CostOfPrivacyStochastic(const TransitionMatrix& p_bar,
                                   const UtilitySchedule& u, double gamma,
                                   const ExpectedLogMatrix& elog,
                                   const Solution& priv, const Solution& nonpriv,
                                   std::span<const double> rho0) {
  const std::size_t n = p_bar.n();
  const std::size_t steps = priv.policy.steps.size();
  if (nonpriv.policy.steps.size() != steps || u.horizon() != steps + 1 ||
      priv.desirability.n() != n || nonpriv.desirability.n() != n) {
    ThrowInvalidArgument("private and non-private solutions differ in shape");
  }
  if (rho0.size() != n) ThrowInvalidArgument("rho0 dimension mismatch");
  const Grid log_p = p_bar.log_probabilities();
  CostReport report;
  report.method = ElogMethodName(elog.method);
  report.k = elog.k;
  report.delta_c = Grid(steps, n);
  std::vector<double> a_terms(n), b_terms(n);
  for (std::size_t t = 0; t < steps; ++t) {
    const TransitionMatrix& pt = priv.policy.steps[t];
    for (std::size_t b = 0; b < n; ++b) {
      double shift = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        if (p_bar.supported(b, a)) {
          shift += pt(b, a) * (elog.values(b, a) - log_p(b, a));
          a_terms[a] = log_p(b, a) + nonpriv.desirability.log_z(t + 1, a);
          b_terms[a] = elog.values(b, a) + priv.desirability.log_z(t + 1, a);
        } else {
          a_terms[a] = b_terms[a] = kNegInf;
        }
      }
      const double dc =
          gamma * shift + gamma * LogSumExp(a_terms) - gamma * LogSumExp(b_terms);

      const double phi = OneStepValue(p_bar, u, gamma, nonpriv.policy.steps[t],
                                      nonpriv.desirability, t, b);
      const double phi_tilde =
          OneStepValue(p_bar, u, gamma, pt, priv.desirability, t, b);
      const double direct = phi_tilde - phi;
      const double scale = std::max({1.0, std::abs(phi), std::abs(phi_tilde)});
      if (!std::isfinite(dc) || std::abs(dc - direct) > kCrossCheckTolerance * scale) {
        ThrowNumericalError("cost-of-privacy cross-check failed at t=" +
                            std::to_string(t) + ", state " + std::to_string(b));
      }
      report.delta_c(t, b) = dc;
    }
  }
  if (steps > 0) {
    for (std::size_t b = 0; b < n; ++b) report.total += rho0[b] * report.delta_c(0, b);
  }
  const double j_priv = EvaluateObjective(priv.policy, p_bar, u, rho0, gamma);
  const double j_non = EvaluateObjective(nonpriv.policy, p_bar, u, rho0, gamma);
  report.realized_total = j_priv - j_non;
  return report;
}

nlohmann::ordered_json CostReportToJson(const CostReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["k"] = std::isfinite(r.k) ? nlohmann::ordered_json(r.k) : nlohmann::ordered_json();
  auto per_state = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < r.delta_c.rows(); ++t) {
    for (std::size_t b = 0; b < r.delta_c.cols(); ++b) {
      nlohmann::ordered_json e;
      e["t"] = t;
      e["beta"] = b;
      e["delta_c"] = r.delta_c(t, b);
      per_state.push_back(std::move(e));
    }
  }
  j["per_state"] = std::move(per_state);
  j["total"] = r.total;
  if (r.realized_total) j["realized_total"] = *r.realized_total;
  for (const auto& [key, value] : r.extra.items()) j[key] = value;
  return j;
}

}  // namespace privmdp
