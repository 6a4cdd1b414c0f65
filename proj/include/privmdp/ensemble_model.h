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

#ifndef PRIVMDP_ENSEMBLE_MODEL_H_
#define PRIVMDP_ENSEMBLE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "privmdp/transition_matrix.h"

namespace privmdp {

// One or more buildings' power readings on a shared, regular time grid.
struct ConsumptionSeries {
  std::vector<std::int64_t> timestamps;      // epoch seconds, increasing
  std::int64_t interval_length = 0;          // seconds
  std::vector<std::string> building_ids;     // one per series
  std::vector<std::vector<double>> power;    // MW, power[b][t]

  std::size_t length() const { return timestamps.size(); }
  std::size_t buildings() const { return power.size(); }
};

// Throws kData if the series violates its invariants.
void ValidateSeries(const ConsumptionSeries& series);

// Parses `timestamp,power_mw[,building_id]`. Rows of different buildings
// may be interleaved; each building must cover the same timestamps.
ConsumptionSeries LoadConsumptionCsv(const std::filesystem::path& path);
ConsumptionSeries ParseConsumptionCsv(const std::string& text);

void WriteConsumptionCsv(const ConsumptionSeries& series,
                         const std::filesystem::path& path);

// Shape of the synthetic single-building profile. The defaults give a
// medium office load of roughly 0.15-0.45 MW over a summer window.
struct BaseProfileParams {
  std::int64_t start_epoch = 1529020800;  // 2018-06-15 00:00 UTC
  int days = 60;
  std::int64_t interval_length = 900;
  double base_load_mw = 0.17;
  double occupancy_mw = 0.13;
  double cooling_mw = 0.10;
  double weekend_factor = 0.55;
  double ar_coefficient = 0.97;
  double ar_sigma_mw = 0.004;
  std::uint64_t seed = 1;
};

ConsumptionSeries SynthesizeBaseProfile(const BaseProfileParams& params);

// Each building is base*(1+g) with g ~ N(0, noise_frac/2) resampled until
// |g| <= noise_frac, drawn independently per sample.
ConsumptionSeries SynthesizeEnsemble(const ConsumptionSeries& base,
                                     std::size_t n_buildings,
                                     double noise_frac, std::uint64_t seed);

// Sum over buildings, as a single series.
ConsumptionSeries Aggregate(const ConsumptionSeries& series);

// Keeps samples with start <= timestamp < end.
ConsumptionSeries SliceByTime(const ConsumptionSeries& series,
                              std::int64_t start, std::int64_t end);

struct StateSpace {
  std::vector<double> bin_edges;             // MW, length n+1
  std::vector<double> representative_power;  // MW, bin midpoints

  std::size_t n() const { return representative_power.size(); }
  double bin_width() const { return bin_edges[1] - bin_edges[0]; }
  // Values on an interior edge go to the upper bin; values outside the
  // range are clamped to the end bins.
  std::size_t state_of(double power) const;
};

StateSpace MakeStateSpace(double lo, double hi, std::size_t n_states);

struct Discretization {
  StateSpace space;
  std::vector<std::size_t> path;
};

// Equal-width bins over [min, max] of a single-building series.
Discretization Discretize(const ConsumptionSeries& aggregate,
                          std::size_t n_states);

std::vector<std::size_t> AssignStates(const StateSpace& space,
                                      const std::vector<double>& power);

// Empirical transition frequencies; unvisited states get a self-loop.
TransitionMatrix EstimateDefaultMatrix(
    const std::vector<std::vector<std::size_t>>& paths, std::size_t n_states);

nlohmann::ordered_json MatrixToJson(const TransitionMatrix& m);
TransitionMatrix MatrixFromJson(const nlohmann::json& j);

void WriteStateSpaceCsv(const StateSpace& space,
                        const std::filesystem::path& path);

}  // namespace privmdp

#endif  // PRIVMDP_ENSEMBLE_MODEL_H_
