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

#ifndef PRIVMDP_PIPELINE_H_
#define PRIVMDP_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "privmdp/average_value.h"
#include "privmdp/dirichlet_privacy.h"
#include "privmdp/dr_sim.h"
#include "privmdp/ensemble_model.h"
#include "privmdp/lsmdp.h"
#include "privmdp/private_policies.h"

namespace privmdp {

enum class PrivateMethod { kTaylor, kDigamma, kAverage };

const char* MethodName(PrivateMethod method);
PrivateMethod ParseMethod(const std::string& name);  // throws kConfig

struct SyntheticInput {
  BaseProfileParams base;
  std::size_t n_buildings = 100;
  double noise_frac = 0.10;
};

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::optional<std::filesystem::path> consumption_csv;
  SyntheticInput synthetic;
  std::optional<std::int64_t> window_start;
  std::optional<std::int64_t> window_end;

  std::size_t n_states = 20;
  double gamma = 15.0;
  std::int64_t horizon_start = 0;  // epoch seconds of step 0
  std::size_t horizon_steps = 25;

  std::size_t event_start = 4;
  std::size_t event_end = 20;
  std::size_t lead_time = 2;
  double incentive = 10.0;
  std::vector<double> tariff;  // per step; a scalar in the file is broadcast

  double k = 50.0;
  double h = 0.03;
  std::optional<double> psi;
  std::optional<double> delta;
  PrivateMethod method = PrivateMethod::kTaylor;
  std::optional<std::size_t> n_samples;
  std::size_t delta_samples = 100000;
  AccountingOptions accounting;

  std::vector<double> sweep_k = {25.0, 50.0, 100.0, 200.0};
  std::vector<PrivateMethod> sweep_methods = {PrivateMethod::kTaylor,
                                              PrivateMethod::kDigamma,
                                              PrivateMethod::kAverage};
  std::vector<double> scatter_k = {50.0, 200.0};
  std::size_t scatter_samples = 500;

  std::optional<std::size_t> inspect_row;  // default n - 3
  std::size_t inspect_t = 11;
  std::optional<std::size_t> adjacent_from;
  std::optional<std::size_t> adjacent_to;

  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::filesystem::path output_dir = "out";
};

// Config errors name the offending field.
RunConfig ParseRunConfig(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Everything the solvers need, built deterministically from a config.
struct CaseInstance {
  ConsumptionSeries aggregate;
  Discretization discretization;
  TransitionMatrix p_bar;
  std::size_t horizon = 0;
  std::size_t horizon_index = 0;  // position of step 0 in the aggregate
  double interval_hours = 0.0;
  double gamma = 0.0;
  DrEvent event;
  std::vector<double> rho0;
  PowerTrajectory baseline;
  UtilitySchedule u;
  Solution nonprivate;
};

CaseInstance BuildInstance(const RunConfig& config);

// Stage seeds derived from the config seed.
namespace stage {
inline constexpr std::uint64_t kSynthetic = 11;
inline constexpr std::uint64_t kAccounting = 12;
inline constexpr std::uint64_t kSampling = 13;
inline constexpr std::uint64_t kScatter = 14;
}  // namespace stage

struct MethodResult {
  PrivateMethod method = PrivateMethod::kTaylor;
  double k = 0.0;
  Policy policy;                 // private policy (mean policy for average)
  std::optional<Desirability> desirability;
  CostReport cost;
  std::optional<PolicySampleSet> samples;
  std::optional<AnalyticalPolicy> analytical;
  PowerTrajectory trajectory;    // activated policy
  CapacityMetrics capacity;
};

// Solves one private method at concentration k on the instance. `p_source`
// replaces the default matrix as the mechanism input when given (used for
// adjacent-input comparisons); costs are always measured against
// instance.p_bar.
MethodResult RunMethod(const CaseInstance& instance, PrivateMethod method, double k,
                       std::size_t n_samples, std::uint64_t seed, unsigned threads,
                       bool keep_samples = false,
                       const TransitionMatrix* p_source = nullptr);

// p_bar with one row replaced by an adjacent vector.
TransitionMatrix AdjacentMatrix(const TransitionMatrix& p_bar, std::size_t row,
                                double h, std::size_t from, std::size_t to);

struct AdjacencyCheck {
  double inspected_l1 = 0.0;  // inspected row at the inspection step
  double max_l1 = 0.0;        // over every (t, state)
};

AdjacencyCheck CompareAdjacent(const CaseInstance& instance, PrivateMethod method,
                               double k, double h, std::size_t row, std::size_t from,
                               std::size_t to, std::size_t inspect_t,
                               std::size_t n_samples, std::uint64_t seed,
                               unsigned threads);

struct InspectTarget {
  std::size_t row = 0;
  std::size_t t = 0;
  std::size_t from = 0;
  std::size_t to = 0;
};

// Resolves defaults and checks indices against the instance.
InspectTarget ResolveInspect(const RunConfig& config, const CaseInstance& instance);

// Commands. Each returns a process exit code and logs a short summary.
int CmdEstimate(const RunConfig& config, std::ostream& log);
int CmdRun(const RunConfig& config, std::ostream& log);
int CmdSweep(const RunConfig& config, std::ostream& log);

// Names of the artifacts a run bundle declares in its manifest.
std::vector<std::string> RunArtifactNames();

}  // namespace privmdp

#endif  // PRIVMDP_PIPELINE_H_
