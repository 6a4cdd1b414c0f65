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

#ifndef PRIVMDP_DR_SIM_H_
#define PRIVMDP_DR_SIM_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "privmdp/ensemble_model.h"
#include "privmdp/lsmdp.h"

namespace privmdp {

struct DrEvent {
  std::size_t start = 0;      // first event step
  std::size_t end = 0;        // one past the last event step
  std::size_t lead_time = 0;  // steps before start at which control begins
  double incentive = 0.0;     // currency per MW of reduction, per step
  std::vector<double> tariff; // currency per MWh, one value per step

  std::size_t active_begin() const { return start - lead_time; }
};

void ValidateEvent(const DrEvent& event, std::size_t horizon);

struct PowerTrajectory {
  std::vector<double> expected_power;  // MW per step
};

// U[t][b] = -tariff[t] * power[b] * dt for t in [start - lead, end), plus
// incentive * max(0, baseline_power - power[b]) for t in [start, end).
UtilitySchedule BuildUtilitySchedule(const StateSpace& space, const DrEvent& event,
                                     std::size_t horizon, double interval_hours,
                                     double baseline_power);

// Uses `policy` on steps inside [start - lead, end) and p_bar elsewhere.
Policy ActivatePolicy(const Policy& policy, const TransitionMatrix& p_bar,
                      const DrEvent& event);

// The uncontrolled schedule: p_bar at every step.
Policy DefaultPolicy(const TransitionMatrix& p_bar, std::size_t horizon, double gamma);

PowerTrajectory SimulateEvent(const Policy& policy, std::span<const double> rho0,
                              const StateSpace& space);

struct CapacityMetrics {
  std::vector<double> reduction;  // baseline - controlled, every step
  double peak_reduction = 0.0;    // max over [start, end)
  double mean_reduction = 0.0;    // mean over [start, end)
  // controlled / reference, when a reference trajectory is supplied
  std::optional<double> peak_ratio;
  std::optional<double> mean_ratio;
};

CapacityMetrics ComputeCapacityMetrics(const PowerTrajectory& baseline,
                                       const PowerTrajectory& controlled,
                                       const DrEvent& event,
                                       const PowerTrajectory* reference = nullptr);

void WriteTrajectoryCsv(const PowerTrajectory& trajectory,
                        const std::filesystem::path& path);

nlohmann::ordered_json CapacityMetricsToJson(const CapacityMetrics& m);

nlohmann::ordered_json ScenarioMetricsJson(
    const std::vector<std::pair<std::string, CapacityMetrics>>& scenarios);

}  // namespace privmdp

#endif  // PRIVMDP_DR_SIM_H_
