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

#include "privmdp/dr_sim.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "privmdp/error.h"
#include "privmdp/lsmdp.h"

namespace privmdp {
namespace {

// Birth-death chain on n power levels, 10 to 30 MW.
struct Case {
  StateSpace space;
  TransitionMatrix p;
  std::vector<double> rho0;
  DrEvent event;
  std::size_t horizon = 20;
};

Case MakeCase(std::size_t n = 10) {
  Case c;
  c.space = MakeStateSpace(10.0, 30.0, n);
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t b = 0; b < n; ++b) {
    rows[b][b] = 0.5;
    if (b == 0) {
      rows[b][1] = 0.5;
    } else if (b + 1 == n) {
      rows[b][b - 1] = 0.5;
    } else {
      rows[b][b - 1] = 0.25;
      rows[b][b + 1] = 0.25;
    }
  }
  c.p = TransitionMatrix::FromRows(rows);
  c.rho0.assign(n, 0.0);
  c.rho0[n / 2] = 1.0;
  c.event.start = 6;
  c.event.end = 14;
  c.event.lead_time = 2;
  c.event.incentive = 5.0;
  c.event.tariff.assign(c.horizon, 20.0);
  return c;
}

TEST(Utility, ZeroPricesGiveZero) {
  auto c = MakeCase();
  c.event.incentive = 0.0;
  c.event.tariff.assign(c.horizon, 0.0);
  const auto u = BuildUtilitySchedule(c.space, c.event, c.horizon, 0.25, 20.0);
  for (double v : u.values.values()) EXPECT_EQ(v, 0.0);
}

TEST(Utility, TariffAndIncentiveWindows) {
  const auto c = MakeCase();
  const double baseline = 20.0;
  const auto u = BuildUtilitySchedule(c.space, c.event, c.horizon, 0.25, baseline);
  for (std::size_t t = 0; t < c.horizon; ++t) {
    for (std::size_t b = 0; b < c.space.n(); ++b) {
      const double power = c.space.representative_power[b];
      double expected = 0.0;
      if (t >= 4 && t < 14) expected -= 20.0 * power * 0.25;
      if (t >= 6 && t < 14) expected += 5.0 * std::max(0.0, baseline - power);
      EXPECT_NEAR(u.values(t, b), expected, 1e-12);
    }
    // Nonincreasing in power during the event.
    for (std::size_t b = 1; b < c.space.n(); ++b) {
      EXPECT_LE(u.values(t, b), u.values(t, b - 1));
    }
  }
}

TEST(Utility, SingleStateIsConstantAndHarmless) {
  StateSpace space;
  space.bin_edges = {10.0, 12.0};
  space.representative_power = {11.0};
  auto c = MakeCase();
  const auto u = BuildUtilitySchedule(space, c.event, c.horizon, 0.25, 11.0);
  const auto sol = SolveLsmdp(TransitionMatrix::Identity(1), u, 15.0);
  for (const auto& s : sol.policy.steps) EXPECT_EQ(s(0, 0), 1.0);
}

TEST(Utility, RejectsBadEvents) {
  auto c = MakeCase();
  c.event.lead_time = 7;
  EXPECT_THROW(BuildUtilitySchedule(c.space, c.event, c.horizon, 0.25, 20.0), Error);
  c = MakeCase();
  c.event.end = 25;
  EXPECT_THROW(BuildUtilitySchedule(c.space, c.event, c.horizon, 0.25, 20.0), Error);
  c = MakeCase();
  c.event.tariff.pop_back();
  EXPECT_THROW(BuildUtilitySchedule(c.space, c.event, c.horizon, 0.25, 20.0), Error);
  c = MakeCase();
  c.event.incentive = -1.0;
  EXPECT_THROW(BuildUtilitySchedule(c.space, c.event, c.horizon, 0.25, 20.0), Error);
}

TEST(Simulate, IdentityIsFlat) {
  const auto c = MakeCase();
  Policy pol;
  pol.steps.assign(c.horizon - 1, TransitionMatrix::Identity(c.space.n()));
  const auto traj = SimulateEvent(pol, c.rho0, c.space);
  ASSERT_EQ(traj.expected_power.size(), c.horizon);
  for (double v : traj.expected_power) {
    EXPECT_NEAR(v, c.space.representative_power[c.space.n() / 2], 1e-12);
  }
}

TEST(Simulate, DefaultPolicyIsBaseline) {
  const auto c = MakeCase();
  const auto def = DefaultPolicy(c.p, c.horizon, 15.0);
  const auto traj = SimulateEvent(def, c.rho0, c.space);
  const auto rho = oracle::DensePropagate(
      std::vector<oracle::Matrix>(c.horizon - 1, oracle::ToDense(c.p)), c.rho0);
  for (std::size_t t = 0; t < c.horizon; ++t) {
    double e = 0.0;
    for (std::size_t b = 0; b < c.space.n(); ++b) e += rho[t][b] * c.space.representative_power[b];
    EXPECT_NEAR(traj.expected_power[t], e, 1e-12);
  }
  // A policy with U = 0 coincides with the default.
  const auto zero = SolveLsmdp(c.p, UtilitySchedule{Grid(c.horizon, c.space.n())}, 15.0);
  const auto traj0 = SimulateEvent(ActivatePolicy(zero.policy, c.p, c.event), c.rho0, c.space);
  for (std::size_t t = 0; t < c.horizon; ++t) {
    EXPECT_NEAR(traj0.expected_power[t], traj.expected_power[t], 1e-12);
  }
}

TEST(Simulate, OptimizedPolicyCurtails) {
  const auto c = MakeCase();
  const auto baseline = SimulateEvent(DefaultPolicy(c.p, c.horizon, 15.0), c.rho0, c.space);
  const auto u = BuildUtilitySchedule(c.space, c.event, c.horizon, 0.25,
                                      baseline.expected_power[c.event.start]);
  const auto sol = SolveLsmdp(c.p, u, 15.0);
  const auto active = ActivatePolicy(sol.policy, c.p, c.event);
  const auto traj = SimulateEvent(active, c.rho0, c.space);
  for (std::size_t t = c.event.start; t < c.event.end; ++t) {
    EXPECT_LE(traj.expected_power[t], baseline.expected_power[t] + 1e-12) << t;
  }
  const auto m = ComputeCapacityMetrics(baseline, traj, c.event);
  EXPECT_GT(m.mean_reduction, 0.0);
  EXPECT_GE(m.peak_reduction, m.mean_reduction);
}

TEST(Activate, SwitchesOnlyInsideWindow) {
  const auto c = MakeCase();
  Policy pol;
  pol.gamma = 3.0;
  pol.steps.assign(c.horizon - 1, TransitionMatrix::Identity(c.space.n()));
  const auto a = ActivatePolicy(pol, c.p, c.event);
  ASSERT_EQ(a.steps.size(), c.horizon - 1);
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    const bool inside = t >= 4 && t < 14;
    EXPECT_EQ(a.steps[t] == pol.steps[t], inside) << t;
    EXPECT_EQ(a.steps[t] == c.p, !inside) << t;
  }
}

TEST(Capacity, Arithmetic) {
  DrEvent e;
  e.start = 2;
  e.end = 6;
  PowerTrajectory base{{5, 5, 5, 5, 5, 5, 5, 5}};
  EXPECT_EQ(ComputeCapacityMetrics(base, base, e).mean_reduction, 0.0);
  EXPECT_EQ(ComputeCapacityMetrics(base, base, e).peak_reduction, 0.0);
  PowerTrajectory ctl{{5, 5, 4, 4, 4, 4, 5, 5}};
  const auto m = ComputeCapacityMetrics(base, ctl, e);
  EXPECT_DOUBLE_EQ(m.mean_reduction, 1.0);
  EXPECT_DOUBLE_EQ(m.peak_reduction, 1.0);
  ASSERT_EQ(m.reduction.size(), 8u);
  EXPECT_EQ(m.reduction[0], 0.0);
  PowerTrajectory ref{{5, 5, 3, 3, 3, 3, 5, 5}};
  const auto r = ComputeCapacityMetrics(base, ctl, e, &ref);
  ASSERT_TRUE(r.mean_ratio.has_value());
  EXPECT_DOUBLE_EQ(*r.mean_ratio, 0.5);
  EXPECT_DOUBLE_EQ(*r.peak_ratio, 0.5);
}

TEST(Capacity, JsonNamesScenarios) {
  DrEvent e;
  e.start = 0;
  e.end = 2;
  PowerTrajectory base{{2, 2}}, ctl{{1, 2}};
  const auto j = ScenarioMetricsJson({{"taylor", ComputeCapacityMetrics(base, ctl, e)}});
  ASSERT_TRUE(j.contains("taylor"));
  EXPECT_DOUBLE_EQ(j["taylor"]["peak_reduction_mw"].get<double>(), 1.0);
}

}  // namespace
}  // namespace privmdp
