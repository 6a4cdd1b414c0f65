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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "privmdp/error.h"

namespace privmdp {
namespace {

struct Instance {
  TransitionMatrix p;
  UtilitySchedule u;
  double gamma = 1.0;
  std::vector<double> rho0;
};

Instance RandomInstance(std::mt19937_64& rng, std::size_t n, std::size_t T,
                        double min_entry = 0.05) {
  Instance in;
  in.p = oracle::RandomMatrix(n, 0.6, rng, min_entry);
  in.u = oracle::RandomUtility(T, n, 3.0, rng);
  in.gamma = 0.5 + 2.0 * std::uniform_real_distribution<double>()(rng);
  in.rho0.assign(n, 1.0 / n);
  return in;
}

ExpectedLogMatrix Elog(ElogMethod m, const TransitionMatrix& p, double k) {
  switch (m) {
    case ElogMethod::kTaylor: return ExpectedLogTaylor(p, k);
    case ElogMethod::kDigamma: return ExpectedLogDigamma(p, k);
    case ElogMethod::kExact: break;
  }
  return ExpectedLogExact(p);
}

CostReport Cost(const Instance& in, const ExpectedLogMatrix& elog) {
  const auto non = SolveLsmdp(in.p, in.u, in.gamma);
  const auto priv = SolvePrivate(in.p, in.u, in.gamma, in.u.horizon(), elog);
  return CostOfPrivacyStochastic(in.p, in.u, in.gamma, elog, priv, non, in.rho0);
}

double MaxPolicyDiff(const Policy& a, const Policy& b) {
  double d = 0.0;
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    for (std::size_t i = 0; i < a.n(); ++i) {
      for (std::size_t j = 0; j < a.n(); ++j) {
        d = std::max(d, std::abs(a.steps[t](i, j) - b.steps[t](i, j)));
      }
    }
  }
  return d;
}

TEST(ExpectedLogTaylor, Examples) {
  const auto p = TransitionMatrix::FromRows({{1.0, 0.0}, {0.5, 0.5}});
  const auto e = ExpectedLogTaylor(p, 49.0);
  EXPECT_EQ(e.values(0, 0), 0.0);
  EXPECT_TRUE(std::isinf(e.values(0, 1)));
  EXPECT_NEAR(e.values(1, 0), std::log(0.5) - 0.01, 1e-15);
  const auto big = ExpectedLogTaylor(p, 1e12);
  EXPECT_NEAR(big.values(1, 1), std::log(0.5), 1e-12);
}

TEST(ExpectedLogTaylor, ClampsTinyEntries) {
  const double tiny = 1e-9;
  const auto p = TransitionMatrix::FromRows({{tiny, 1.0 - tiny}, {0.5, 0.5}});
  const auto e = ExpectedLogTaylor(p, 50.0);
  EXPECT_NEAR(e.values(0, 0), std::log(tiny) + kTaylorClampLog, 1e-12);
  // Just above the threshold the raw correction applies.
  const double small = 2e-6;
  const auto q = TransitionMatrix::FromRows({{small, 1.0 - small}, {0.5, 0.5}});
  const auto eq = ExpectedLogTaylor(q, 50.0);
  EXPECT_NEAR(eq.values(0, 0), std::log(small) - (1.0 - small) / (2.0 * small * 51.0),
              1e-9);
  const auto sol = SolvePrivate(p, UtilitySchedule{Grid(3, 2)}, 1.0, 3, e);
  for (double v : sol.desirability.log_z.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(ExpectedLogDigamma, Examples) {
  const auto p = TransitionMatrix::FromRows({{0.5, 0.5}, {0.25, 0.75}});
  const auto e = ExpectedLogDigamma(p, 2.0);
  EXPECT_NEAR(e.values(0, 0), -1.0, 1e-13);
  EXPECT_NEAR(e.values(0, 1), -1.0, 1e-13);
  const auto big = ExpectedLogDigamma(p, 1e6);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t a = 0; a < 2; ++a) {
      EXPECT_NEAR(big.values(b, a), std::log(p(b, a)), 1e-4);
    }
  }
}

TEST(ExpectedLog, SupportedValuesNegative) {
  std::mt19937_64 rng(1);
  const auto p = oracle::RandomMatrix(7, 0.5, rng, 0.01);
  for (auto m : {ElogMethod::kTaylor, ElogMethod::kDigamma}) {
    const auto e = Elog(m, p, 40.0);
    for (std::size_t b = 0; b < 7; ++b) {
      for (std::size_t a = 0; a < 7; ++a) {
        if (p.supported(b, a) && p(b, a) < 1.0) EXPECT_LT(e.values(b, a), 0.0);
        if (!p.supported(b, a)) EXPECT_TRUE(std::isinf(e.values(b, a)));
      }
    }
  }
}

TEST(SolvePrivate, ExactLogReducesToNonPrivate) {
  std::mt19937_64 rng(2);
  const auto in = RandomInstance(rng, 5, 6);
  const auto non = SolveLsmdp(in.p, in.u, in.gamma);
  const auto priv = SolvePrivate(in.p, in.u, in.gamma, 6, ExpectedLogExact(in.p));
  EXPECT_LT(MaxPolicyDiff(priv.policy, non.policy), 1e-14);
}

TEST(SolvePrivate, TaylorUniformRowsZeroUtilityKeepsDefault) {
  const auto p = TransitionMatrix::FromRows(
      {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}});
  const auto sol = SolvePrivate(p, UtilitySchedule{Grid(4, 3)}, 2.0, 4,
                                ExpectedLogTaylor(p, 10.0));
  for (const auto& s : sol.policy.steps) {
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(s(b, a), p(b, a), 1e-15);
    }
  }
}

TEST(SolvePrivate, TaylorMatchesDisplayedPolicy) {
  const double gamma = 2.0;
  const auto p = TransitionMatrix::FromRows({{0.5, 0.5}, {0.5, 0.5}});
  UtilitySchedule u{Grid(2, 2)};
  u.values(1, 0) = gamma * std::numbers::ln2;
  const auto sol = SolvePrivate(p, u, gamma, 2, ExpectedLogTaylor(p, 49.0));
  const auto ref = oracle::TaylorPolicyDisplayed(oracle::ToDense(p), u, gamma, 49.0, nullptr);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t a = 0; a < 2; ++a) {
      EXPECT_NEAR(sol.policy.steps[0](b, a), ref[0][b][a], 1e-12);
    }
  }
}

TEST(SolvePrivate, MatchesDisplayedPoliciesOnRandomInstances) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = RandomInstance(rng, 2 + trial % 5, 2 + trial % 6);
    const double k = 10.0 + trial * 10.0;
    std::vector<std::vector<long double>> z;
    const auto ref = oracle::TaylorPolicyDisplayed(oracle::ToDense(in.p), in.u, in.gamma, k, &z);
    const auto sol = SolvePrivate(in.p, in.u, in.gamma, in.u.horizon(), ExpectedLogTaylor(in.p, k));
    for (std::size_t t = 0; t < ref.size(); ++t) {
      for (std::size_t b = 0; b < in.p.n(); ++b) {
        EXPECT_NEAR(std::exp(sol.desirability.log_z(t, b)), static_cast<double>(z[t][b]),
                    1e-10 * static_cast<double>(z[t][b]));
        for (std::size_t a = 0; a < in.p.n(); ++a) {
          EXPECT_NEAR(sol.policy.steps[t](b, a), ref[t][b][a], 1e-12);
        }
      }
    }
  }
}

TEST(SolvePrivate, RejectsSupportMismatch) {
  const auto p = TransitionMatrix::FromRows({{0.5, 0.5}, {1.0, 0.0}});
  auto e = ExpectedLogExact(p);
  e.values(1, 1) = -1.0;
  try {
    SolvePrivate(p, UtilitySchedule{Grid(2, 2)}, 1.0, 2, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("support mismatch at (1,1)"), std::string::npos);
  }
}

TEST(SolvePrivate, RowsOnSimplexWithDefaultSupport) {
  std::mt19937_64 rng(4);
  const auto in = RandomInstance(rng, 8, 7, 0.0);
  for (auto m : {ElogMethod::kTaylor, ElogMethod::kDigamma}) {
    for (double k : {0.5, 5.0, 50.0, 5000.0}) {
      const auto sol = SolvePrivate(in.p, in.u, in.gamma, 7, Elog(m, in.p, k));
      for (const auto& s : sol.policy.steps) {
        EXPECT_TRUE(s.same_support(in.p));
        for (std::size_t b = 0; b < 8; ++b) {
          double sum = 0.0;
          for (double v : s.row(b)) {
            EXPECT_GE(v, 0.0);
            sum += v;
          }
          EXPECT_NEAR(sum, 1.0, 1e-12);
        }
      }
    }
  }
}

TEST(SolvePrivate, ConvergesToNonPrivateAsKGrows) {
  std::mt19937_64 rng(5);
  const auto in = RandomInstance(rng, 6, 6);
  const auto non = SolveLsmdp(in.p, in.u, in.gamma);
  for (auto m : {ElogMethod::kTaylor, ElogMethod::kDigamma}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double k : {1e2, 1e4, 1e6}) {
      const auto sol = SolvePrivate(in.p, in.u, in.gamma, 6, Elog(m, in.p, k));
      const double d = MaxPolicyDiff(sol.policy, non.policy);
      EXPECT_LT(d, prev) << ElogMethodName(m) << " k " << k;
      prev = d;
    }
    EXPECT_LT(prev, 1e-4);
  }
}

TEST(CostOfPrivacy, ZeroWithoutPrivatization) {
  std::mt19937_64 rng(6);
  const auto in = RandomInstance(rng, 5, 6);
  const auto c = Cost(in, ExpectedLogExact(in.p));
  for (double v : c.delta_c.values()) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_NEAR(c.total, 0.0, 1e-12);
}

TEST(CostOfPrivacy, MatchesOneStepDifference) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = RandomInstance(rng, 2 + trial % 5, 2 + trial % 6);
    const double k = 20.0 + 10.0 * (trial % 7);
    for (auto m : {ElogMethod::kTaylor, ElogMethod::kDigamma}) {
      const auto elog = Elog(m, in.p, k);
      const auto c = Cost(in, elog);
      oracle::Matrix w = oracle::ToDense(in.p);
      for (std::size_t b = 0; b < in.p.n(); ++b) {
        for (std::size_t a = 0; a < in.p.n(); ++a) {
          w[b][a] = in.p.supported(b, a) ? std::exp(elog.values(b, a)) : 0.0;
        }
      }
      const auto ref = oracle::OneStepCostDifference(oracle::ToDense(in.p), w, in.u, in.gamma);
      for (std::size_t t = 0; t < ref.size(); ++t) {
        for (std::size_t b = 0; b < in.p.n(); ++b) {
          EXPECT_NEAR(c.delta_c(t, b), ref[t][b], 1e-8 * std::max(1.0, std::abs(ref[t][b])));
        }
      }
    }
  }
}

TEST(CostOfPrivacy, MatchesDisplayedClosedForms) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = RandomInstance(rng, 2 + trial % 5, 2 + trial % 6);
    const double k = 50.0;
    const auto dense = oracle::ToDense(in.p);
    const auto taylor = Cost(in, ExpectedLogTaylor(in.p, k));
    const auto taylor_ref = oracle::TaylorCostDisplayed(dense, in.u, in.gamma, k);
    const auto dig = Cost(in, ExpectedLogDigamma(in.p, k));
    const auto dig_ref = oracle::DigammaCostDisplayed(dense, in.u, in.gamma, k);
    for (std::size_t t = 0; t < taylor_ref.size(); ++t) {
      for (std::size_t b = 0; b < in.p.n(); ++b) {
        EXPECT_NEAR(taylor.delta_c(t, b), taylor_ref[t][b], 1e-10);
        EXPECT_NEAR(dig.delta_c(t, b), dig_ref[t][b], 1e-10);
      }
    }
  }
}

TEST(CostOfPrivacy, TotalIsRhoWeightedFirstStep) {
  std::mt19937_64 rng(9);
  auto in = RandomInstance(rng, 4, 5);
  in.rho0 = {0.1, 0.2, 0.3, 0.4};
  const auto c = Cost(in, ExpectedLogTaylor(in.p, 30.0));
  double s = 0.0;
  for (std::size_t b = 0; b < 4; ++b) s += in.rho0[b] * c.delta_c(0, b);
  EXPECT_NEAR(c.total, s, 1e-14);
  ASSERT_TRUE(c.realized_total.has_value());
  EXPECT_GE(*c.realized_total, -1e-12);
}

TEST(CostOfPrivacy, DecreasesWithK) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto in = RandomInstance(rng, 5, 8);
    for (auto m : {ElogMethod::kTaylor, ElogMethod::kDigamma}) {
      double prev = std::numeric_limits<double>::infinity();
      double prev_realized = prev;
      for (double k : {25.0, 50.0, 100.0, 200.0}) {
        const auto c = Cost(in, Elog(m, in.p, k));
        EXPECT_LT(c.total, prev) << ElogMethodName(m) << " k " << k;
        EXPECT_LT(*c.realized_total, prev_realized) << ElogMethodName(m) << " k " << k;
        prev = c.total;
        prev_realized = *c.realized_total;
      }
    }
  }
}

TEST(CostOfPrivacy, JsonShape) {
  std::mt19937_64 rng(11);
  const auto in = RandomInstance(rng, 3, 3);
  const auto j = CostReportToJson(Cost(in, ExpectedLogDigamma(in.p, 50.0)));
  EXPECT_EQ(j["method"], "digamma");
  EXPECT_EQ(j["k"], 50.0);
  ASSERT_EQ(j["per_state"].size(), 6u);
  EXPECT_TRUE(j["per_state"][0].contains("beta"));
  EXPECT_TRUE(j.contains("total"));
}

}  // namespace
}  // namespace privmdp
