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

#include <algorithm>
#include <cmath>
#include <string>

#include "privmdp/error.h"
#include "privmdp/io.h"

namespace privmdp {

void ValidateEvent(const DrEvent& e, std::size_t horizon) {
  if (!(e.start < e.end && e.end <= horizon)) {
    ThrowInvalidArgument("event needs start < end <= horizon");
  }
  if (e.lead_time > e.start) ThrowInvalidArgument("lead time reaches before the horizon");
  if (e.tariff.size() != horizon) {
    ThrowInvalidArgument("tariff needs one value per step (" + std::to_string(horizon) + ")");
  }
  if (!(e.incentive >= 0.0)) ThrowInvalidArgument("incentive must be nonnegative");
  for (const double v : e.tariff) {
    if (!(v >= 0.0) || !std::isfinite(v)) ThrowInvalidArgument("tariff must be nonnegative");
  }
}

UtilitySchedule BuildUtilitySchedule(const StateSpace& space, const DrEvent& event,
                                     std::size_t horizon, double interval_hours,
                                     double baseline_power) {
  ValidateEvent(event, horizon);
  const std::size_t n = space.n();
  UtilitySchedule u{Grid(horizon, n)};
  for (std::size_t t = event.active_begin(); t < event.end; ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      const double power = space.representative_power[b];
      double v = -event.tariff[t] * power * interval_hours;
      if (t >= event.start) v += event.incentive * std::max(0.0, baseline_power - power);
      u.values(t, b) = v;
    }
  }
  return u;
}

Policy ActivatePolicy(const Policy& policy, const TransitionMatrix& p_bar,
                      const DrEvent& event) {
  Policy out;
  out.gamma = policy.gamma;
  for (std::size_t t = 0; t < policy.steps.size(); ++t) {
    const bool active = t >= event.active_begin() && t < event.end;
    out.steps.push_back(active ? policy.steps[t] : p_bar);
  }
  return out;
}

Policy DefaultPolicy(const TransitionMatrix& p_bar, std::size_t horizon, double gamma) {
  Policy out;
  out.gamma = gamma;
  out.steps.assign(horizon > 0 ? horizon - 1 : 0, p_bar);
  return out;
}

PowerTrajectory SimulateEvent(const Policy& policy, std::span<const double> rho0,
                              const StateSpace& space) {
  if (rho0.size() != space.n()) ThrowInvalidArgument("rho0 dimension mismatch");
  const DistributionTrajectory traj = Propagate(policy, rho0);
  PowerTrajectory out;
  for (std::size_t t = 0; t < traj.rho.rows(); ++t) {
    double p = 0.0;
    for (std::size_t b = 0; b < space.n(); ++b) {
      p += traj.rho(t, b) * space.representative_power[b];
    }
    out.expected_power.push_back(p);
  }
  return out;
}

CapacityMetrics ComputeCapacityMetrics(const PowerTrajectory& baseline,
                                       const PowerTrajectory& controlled,
                                       const DrEvent& event,
                                       const PowerTrajectory* reference) {
  const std::size_t len = baseline.expected_power.size();
  if (controlled.expected_power.size() != len ||
      (reference != nullptr && reference->expected_power.size() != len)) {
    ThrowInvalidArgument("trajectories differ in length");
  }
  if (!(event.start < event.end && event.end <= len)) {
    ThrowInvalidArgument("event window outside the trajectory");
  }
  auto summarize = [&](const PowerTrajectory& c, CapacityMetrics& m) {
    m.reduction.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
      m.reduction[t] = baseline.expected_power[t] - c.expected_power[t];
    }
    m.peak_reduction = m.reduction[event.start];
    double sum = 0.0;
    for (std::size_t t = event.start; t < event.end; ++t) {
      m.peak_reduction = std::max(m.peak_reduction, m.reduction[t]);
      sum += m.reduction[t];
    }
    m.mean_reduction = sum / static_cast<double>(event.end - event.start);
  };
  CapacityMetrics m;
  summarize(controlled, m);
  if (reference != nullptr) {
    CapacityMetrics r;
    summarize(*reference, r);
    if (r.peak_reduction != 0.0) m.peak_ratio = m.peak_reduction / r.peak_reduction;
    if (r.mean_reduction != 0.0) m.mean_ratio = m.mean_reduction / r.mean_reduction;
  }
  return m;
}

void WriteTrajectoryCsv(const PowerTrajectory& trajectory,
                        const std::filesystem::path& path) {
  CsvWriter csv({"t", "expected_power_mw"});
  for (std::size_t t = 0; t < trajectory.expected_power.size(); ++t) {
    csv.cell(t).cell(trajectory.expected_power[t]);
    csv.end_row();
  }
  csv.save(path);
}

nlohmann::ordered_json CapacityMetricsToJson(const CapacityMetrics& m) {
  nlohmann::ordered_json j;
  j["peak_reduction_mw"] = m.peak_reduction;
  j["mean_reduction_mw"] = m.mean_reduction;
  if (m.peak_ratio) j["peak_ratio"] = *m.peak_ratio;
  if (m.mean_ratio) j["mean_ratio"] = *m.mean_ratio;
  j["reduction_mw"] = m.reduction;
  return j;
}

nlohmann::ordered_json ScenarioMetricsJson(
    const std::vector<std::pair<std::string, CapacityMetrics>>& scenarios) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, m] : scenarios) j[name] = CapacityMetricsToJson(m);
  return j;
}

}  // namespace privmdp
