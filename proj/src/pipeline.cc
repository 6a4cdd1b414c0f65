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

#include "privmdp/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "privmdp/error.h"
#include "privmdp/io.h"
#include "privmdp/rng.h"

namespace privmdp {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- config access --------------------------------------------------------

const json* Find(const json& root, const std::string& dotted) {
  const json* node = &root;
  std::size_t pos = 0;
  while (pos <= dotted.size()) {
    const std::size_t dot = std::min(dotted.find('.', pos), dotted.size());
    const std::string key = dotted.substr(pos, dot - pos);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    pos = dot + 1;
  }
  return node;
}

[[noreturn]] void FieldError(const std::string& field, const std::string& what) {
  ThrowConfigError("field `" + field + "` " + what);
}

double GetNumber(const json& root, const std::string& field, std::optional<double> fallback) {
  const json* v = Find(root, field);
  if (v == nullptr || v->is_null()) {
    if (fallback) return *fallback;
    FieldError(field, "is required");
  }
  if (!v->is_number()) FieldError(field, "must be a number");
  return v->get<double>();
}

std::optional<double> GetOptionalNumber(const json& root, const std::string& field) {
  const json* v = Find(root, field);
  if (v == nullptr || v->is_null()) return std::nullopt;
  if (!v->is_number()) FieldError(field, "must be a number");
  return v->get<double>();
}

std::int64_t GetInteger(const json& root, const std::string& field,
                        std::optional<std::int64_t> fallback) {
  const json* v = Find(root, field);
  if (v == nullptr || v->is_null()) {
    if (fallback) return *fallback;
    FieldError(field, "is required");
  }
  if (!v->is_number_integer()) FieldError(field, "must be an integer");
  return v->get<std::int64_t>();
}

std::size_t GetCount(const json& root, const std::string& field,
                     std::optional<std::size_t> fallback) {
  const std::int64_t v = GetInteger(
      root, field,
      fallback ? std::optional<std::int64_t>(static_cast<std::int64_t>(*fallback))
               : std::nullopt);
  if (v < 0) FieldError(field, "must be nonnegative");
  return static_cast<std::size_t>(v);
}

std::optional<std::size_t> GetOptionalCount(const json& root, const std::string& field) {
  const json* v = Find(root, field);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return GetCount(root, field, std::nullopt);
}

std::vector<double> GetNumberList(const json& root, const std::string& field,
                                  const std::vector<double>& fallback) {
  const json* v = Find(root, field);
  if (v == nullptr || v->is_null()) return fallback;
  if (!v->is_array()) FieldError(field, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) FieldError(field, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::uint64_t KKey(double k) {
  return static_cast<std::uint64_t>(std::llround(k * 1000.0));
}

std::string Fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---- data stages -----------------------------------------------------------

ConsumptionSeries LoadAggregate(const RunConfig& c) {
  ConsumptionSeries series;
  if (c.consumption_csv) {
    series = LoadConsumptionCsv(*c.consumption_csv);
  } else {
    BaseProfileParams base = c.synthetic.base;
    base.seed = DeriveSeed(c.seed, stage::kSynthetic, 0);
    series = SynthesizeEnsemble(SynthesizeBaseProfile(base), c.synthetic.n_buildings,
                                c.synthetic.noise_frac,
                                DeriveSeed(c.seed, stage::kSynthetic, 1));
  }
  ValidateSeries(series);
  ConsumptionSeries agg = Aggregate(series);
  if (c.window_start || c.window_end) {
    agg = SliceByTime(agg, c.window_start.value_or(INT64_MIN),
                      c.window_end.value_or(INT64_MAX));
    if (agg.length() == 0) ThrowDataError("no samples in the selected window");
  }
  return agg;
}

struct Estimate {
  ConsumptionSeries aggregate;
  Discretization discretization;
  TransitionMatrix p_bar;
};

Estimate EstimateFromConfig(const RunConfig& c) {
  Estimate e;
  e.aggregate = LoadAggregate(c);
  e.discretization = Discretize(e.aggregate, c.n_states);
  e.p_bar = EstimateDefaultMatrix({e.discretization.path}, c.n_states);
  return e;
}

double SupportDensity(const TransitionMatrix& m) {
  std::size_t s = 0;
  for (const auto v : m.support_mask()) s += v;
  return static_cast<double>(s) / static_cast<double>(m.n() * m.n());
}

PrivacyReport Account(const RunConfig& c, const TransitionMatrix& p_bar, double k) {
  PrivacyParams params;
  params.k = k;
  params.h = c.h;
  params.psi = c.psi.value_or(0.0);
  params.delta = c.delta.value_or(0.0);
  AccountingOptions opts = c.accounting;
  opts.n_samples = c.delta_samples;
  opts.seed = DeriveSeed(c.seed, stage::kAccounting, KKey(k));
  return AccountMatrix(p_bar, params, c.psi.has_value(), opts);
}

std::uint64_t SamplingSeed(const RunConfig& c, double k) {
  return DeriveSeed(c.seed, stage::kSampling, KKey(k));
}

// ---- plot data ---------------------------------------------------------------

void WriteAggregatePlot(const CaseInstance& inst, const fs::path& path) {
  CsvWriter csv({"timestamp", "aggregate_mw", "state"});
  const auto& p = inst.aggregate.power[0];
  for (std::size_t t = 0; t < p.size(); ++t) {
    csv.cell(static_cast<long long>(inst.aggregate.timestamps[t]))
        .cell(p[t])
        .cell(inst.discretization.path[t]);
    csv.end_row();
  }
  csv.save(path);
}

void WriteMatrixPlot(const CaseInstance& inst, const fs::path& path) {
  CsvWriter csv({"from_state", "to_state", "from_mw", "to_mw", "probability"});
  const auto& rep = inst.discretization.space.representative_power;
  for (std::size_t b = 0; b < inst.p_bar.n(); ++b) {
    for (std::size_t a = 0; a < inst.p_bar.n(); ++a) {
      if (!inst.p_bar.supported(b, a)) continue;
      csv.cell(b).cell(a).cell(rep[b]).cell(rep[a]).cell(inst.p_bar(b, a));
      csv.end_row();
    }
  }
  csv.save(path);
}

void WriteScatterPlot(const RunConfig& c, const CaseInstance& inst,
                      const InspectTarget& target, const fs::path& path) {
  CsvWriter csv({"k", "input", "sample", "state", "value"});
  const SimplexVector zeta = SimplexVector::FromRow(inst.p_bar, target.row);
  const SimplexVector eta = AdjacentVector(zeta, c.h, target.from, target.to);
  for (const double k : c.scatter_k) {
    for (int which = 0; which < 2; ++which) {
      const SimplexVector& src = which == 0 ? zeta : eta;
      Engine rng = MakeEngine(DeriveSeed(c.seed, stage::kScatter, KKey(k)),
                              streams::kScatter, static_cast<std::uint64_t>(which));
      for (std::size_t s = 0; s < c.scatter_samples; ++s) {
        const SimplexVector draw = SampleMechanism(src, k, rng);
        for (std::size_t a = 0; a < draw.size(); ++a) {
          if (!src.support[a]) continue;
          csv.cell(k).cell(std::string(which == 0 ? "zeta" : "eta")).cell(s).cell(a)
              .cell(draw.entries[a]);
          csv.end_row();
        }
      }
    }
  }
  csv.save(path);
}

void AppendPolicyRow(CsvWriter& csv, const std::string& method, double k,
                     const std::string& kind, std::size_t sample,
                     const TransitionMatrix& m, std::size_t row) {
  for (std::size_t a = 0; a < m.n(); ++a) {
    if (!m.supported(row, a)) continue;
    csv.cell(method).cell(k).cell(kind).cell(sample).cell(a).cell(m(row, a));
    csv.end_row();
  }
}

void WritePolicySimplexPlot(const CaseInstance& inst, const MethodResult& r,
                            const InspectTarget& target, const fs::path& path) {
  CsvWriter csv({"method", "k", "kind", "sample", "state", "value"});
  const std::size_t t = target.t;
  AppendPolicyRow(csv, "nonprivate", 0.0, "policy", 0, inst.nonprivate.policy.steps[t],
                  target.row);
  const std::string name = MethodName(r.method);
  if (r.samples) {
    for (std::size_t j = 0; j < r.samples->samples.size(); ++j) {
      AppendPolicyRow(csv, name, r.k, "sample", j,
                      r.samples->samples[j].solution.policy.steps[t], target.row);
    }
  }
  if (r.analytical) {
    AppendPolicyRow(csv, name, r.k, "analytical", 0, r.analytical->policy.steps[t],
                    target.row);
  }
  AppendPolicyRow(csv, name, r.k, r.samples ? "mean" : "policy", 0, r.policy.steps[t],
                  target.row);
  csv.save(path);
}

void WritePowerPlot(const CaseInstance& inst, const MethodResult& r,
                    const PowerTrajectory& nonprivate, const fs::path& path) {
  CsvWriter csv({"t", "timestamp", "default_mw", "nonprivate_mw", "private_mw"});
  const std::int64_t dt = inst.aggregate.interval_length;
  const std::int64_t t0 = inst.aggregate.timestamps[inst.horizon_index];
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    csv.cell(t)
        .cell(static_cast<long long>(t0 + static_cast<std::int64_t>(t) * dt))
        .cell(inst.baseline.expected_power[t])
        .cell(nonprivate.expected_power[t])
        .cell(r.trajectory.expected_power[t]);
    csv.end_row();
  }
  csv.save(path);
}

void WriteDesirabilityPlot(const CaseInstance& inst, const MethodResult& r,
                           const fs::path& path) {
  CsvWriter csv({"solution", "t", "state", "log_z"});
  auto add = [&](const std::string& name, const Desirability& z) {
    for (std::size_t t = 0; t < z.horizon(); ++t) {
      for (std::size_t b = 0; b < z.n(); ++b) {
        csv.cell(name).cell(t).cell(b).cell(z.log_z(t, b));
        csv.end_row();
      }
    }
  };
  add("nonprivate", inst.nonprivate.desirability);
  if (r.desirability) add(MethodName(r.method), *r.desirability);
  csv.save(path);
}

std::vector<std::string> CostVsKHeader() {
  return {"method", "k", "total_cost", "realized_cost", "mean_reduction_mw",
          "peak_reduction_mw", "epsilon", "delta", "psi"};
}

void AppendCostRow(CsvWriter& csv, const MethodResult& r, const PrivacyReport& p) {
  csv.cell(std::string(MethodName(r.method)))
      .cell(r.k)
      .cell(r.cost.total)
      .cell(r.cost.realized_total.value_or(std::nan("")))
      .cell(r.capacity.mean_reduction)
      .cell(r.capacity.peak_reduction);
  if (p.epsilon) csv.cell(*p.epsilon); else csv.cell(std::string());
  csv.cell(p.delta).cell(p.psi);
  csv.end_row();
}

struct ManifestEntry {
  std::string name;
  std::vector<std::string> files;
};

void WriteManifest(const fs::path& out, const std::string& command,
                   const RunConfig& c, const std::vector<ManifestEntry>& entries) {
  ordered_json m;
  m["command"] = command;
  m["seed"] = c.seed;
  auto artifacts = ordered_json::array();
  for (const auto& e : entries) {
    ordered_json a;
    a["name"] = e.name;
    a["kind"] = e.name.back() == '/' ? "directory" : "file";
    auto files = ordered_json::array();
    for (const auto& f : e.files) {
      ordered_json fe;
      fe["path"] = f;
      fe["bytes"] = fs::file_size(out / f);
      files.push_back(std::move(fe));
    }
    a["files"] = std::move(files);
    artifacts.push_back(std::move(a));
  }
  m["artifacts"] = std::move(artifacts);
  WriteJsonFile(out / "manifest.json", m);
}

ordered_json SamplesSummary(const MethodResult& r) {
  ordered_json j;
  if (!r.samples || !r.analytical) return j;
  const ordered_json full = SampleSetSummaryJson(*r.samples, r.policy, *r.analytical);
  for (const char* key : {"k", "N", "seed", "redraws", "row_sum_diagnostics", "l1_gap"}) {
    j[key] = full[key];
  }
  return j;
}

}  // namespace

const char* MethodName(PrivateMethod method) {
  switch (method) {
    case PrivateMethod::kTaylor: return "taylor";
    case PrivateMethod::kDigamma: return "digamma";
    case PrivateMethod::kAverage: return "average";
  }
  return "unknown";
}

PrivateMethod ParseMethod(const std::string& name) {
  if (name == "taylor") return PrivateMethod::kTaylor;
  if (name == "digamma") return PrivateMethod::kDigamma;
  if (name == "average") return PrivateMethod::kAverage;
  ThrowConfigError("field `privacy.method` must be one of taylor, digamma, average");
}

RunConfig ParseRunConfig(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) ThrowConfigError("config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  auto resolve = [&](const std::string& field) -> std::optional<fs::path> {
    const json* v = Find(j, field);
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (!v->is_string()) FieldError(field, "must be a path string");
    fs::path p = v->get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    if (!fs::exists(p)) FieldError(field, "refers to a missing file: " + p.string());
    return p;
  };
  c.consumption_csv = resolve("input.consumption_csv");

  auto& syn = c.synthetic;
  syn.base.start_epoch = GetInteger(j, "input.synthetic.start_epoch", syn.base.start_epoch);
  syn.base.days = static_cast<int>(GetCount(j, "input.synthetic.days", syn.base.days));
  syn.base.interval_length =
      GetInteger(j, "input.synthetic.interval_s", syn.base.interval_length);
  syn.n_buildings = GetCount(j, "input.synthetic.n_buildings", syn.n_buildings);
  syn.noise_frac = GetNumber(j, "input.synthetic.noise_frac", syn.noise_frac);
  if (syn.base.days < 1) FieldError("input.synthetic.days", "must be at least 1");
  if (syn.base.interval_length <= 0 || 86400 % syn.base.interval_length != 0) {
    FieldError("input.synthetic.interval_s", "must divide a day");
  }
  if (syn.n_buildings < 1) FieldError("input.synthetic.n_buildings", "must be at least 1");
  if (!(syn.noise_frac >= 0.0 && syn.noise_frac < 1.0)) {
    FieldError("input.synthetic.noise_frac", "must lie in [0, 1)");
  }
  if (Find(j, "input.window.start_epoch")) {
    c.window_start = GetInteger(j, "input.window.start_epoch", std::nullopt);
  }
  if (Find(j, "input.window.end_epoch")) {
    c.window_end = GetInteger(j, "input.window.end_epoch", std::nullopt);
  }

  c.n_states = GetCount(j, "n_states", std::nullopt);
  if (c.n_states < 2) FieldError("n_states", "must be at least 2");
  c.gamma = GetNumber(j, "gamma", std::nullopt);
  if (!(c.gamma > 0.0)) FieldError("gamma", "must be positive");
  c.horizon_start = GetInteger(j, "horizon.start_epoch", std::nullopt);
  c.horizon_steps = GetCount(j, "horizon.steps", std::nullopt);
  if (c.horizon_steps < 2) FieldError("horizon.steps", "must be at least 2");

  c.event_start = GetCount(j, "event.start", std::nullopt);
  c.event_end = GetCount(j, "event.end", std::nullopt);
  c.lead_time = GetCount(j, "event.lead_time", 0);
  c.incentive = GetNumber(j, "event.incentive", 0.0);
  if (!(c.event_start < c.event_end && c.event_end <= c.horizon_steps)) {
    FieldError("event.end", "must satisfy event.start < event.end <= horizon.steps");
  }
  if (c.lead_time > c.event_start) FieldError("event.lead_time", "must not exceed event.start");
  if (!(c.incentive >= 0.0)) FieldError("event.incentive", "must be nonnegative");
  const json* tariff = Find(j, "event.tariff");
  if (tariff == nullptr || tariff->is_null()) FieldError("event.tariff", "is required");
  if (tariff->is_number()) {
    c.tariff.assign(c.horizon_steps, tariff->get<double>());
  } else {
    c.tariff = GetNumberList(j, "event.tariff", {});
    if (c.tariff.size() != c.horizon_steps) {
      FieldError("event.tariff", "must be a number or one value per horizon step");
    }
  }
  for (const double v : c.tariff) {
    if (!(v >= 0.0)) FieldError("event.tariff", "must be nonnegative");
  }

  c.k = GetNumber(j, "privacy.k", std::nullopt);
  if (!(c.k > 0.0)) FieldError("privacy.k", "must be positive");
  c.h = GetNumber(j, "privacy.h", c.h);
  if (!(c.h > 0.0 && c.h <= 1.0)) FieldError("privacy.h", "must lie in (0, 1]");
  c.psi = GetOptionalNumber(j, "privacy.psi");
  c.delta = GetOptionalNumber(j, "privacy.delta");
  if (c.psi.has_value() == c.delta.has_value()) {
    FieldError("privacy.psi", "or `privacy.delta` must be given, but not both");
  }
  if (c.psi && !(*c.psi > 0.0 && *c.psi < 1.0)) FieldError("privacy.psi", "must lie in (0, 1)");
  if (c.delta && !(*c.delta >= 0.0 && *c.delta <= 1.0)) {
    FieldError("privacy.delta", "must lie in [0, 1]");
  }
  const json* method = Find(j, "privacy.method");
  if (method == nullptr || !method->is_string()) FieldError("privacy.method", "is required");
  c.method = ParseMethod(method->get<std::string>());
  c.n_samples = GetOptionalCount(j, "privacy.n_samples");
  if (c.method == PrivateMethod::kAverage && !c.n_samples) {
    FieldError("n_samples", "is required when privacy.method is average");
  }
  if (c.n_samples && *c.n_samples < 1) FieldError("privacy.n_samples", "must be at least 1");
  c.delta_samples = GetCount(j, "privacy.delta_samples", c.delta_samples);
  if (c.delta_samples < 1000) FieldError("privacy.delta_samples", "must be at least 1000");
  if (auto v = GetOptionalNumber(j, "privacy.omega")) c.accounting.omega = *v;
  if (auto v = GetOptionalNumber(j, "privacy.omega_bar")) c.accounting.omega_bar = *v;
  if (auto v = GetOptionalCount(j, "privacy.w_size")) c.accounting.w_size = *v;

  c.sweep_k = GetNumberList(j, "sweep.k", c.sweep_k);
  for (const double k : c.sweep_k) {
    if (!(k > 0.0)) FieldError("sweep.k", "must contain positive values");
  }
  if (const json* m = Find(j, "sweep.methods")) {
    if (!m->is_array()) FieldError("sweep.methods", "must be an array of method names");
    c.sweep_methods.clear();
    for (const auto& e : *m) {
      if (!e.is_string()) FieldError("sweep.methods", "must be an array of method names");
      c.sweep_methods.push_back(ParseMethod(e.get<std::string>()));
    }
  }
  // The default method list only needs n_samples once a sweep reaches the
  // average method; an explicit list is checked here.
  const bool sweep_average =
      std::find(c.sweep_methods.begin(), c.sweep_methods.end(), PrivateMethod::kAverage) !=
      c.sweep_methods.end();
  if (Find(j, "sweep.methods") && sweep_average && !c.n_samples) {
    FieldError("n_samples", "is required when sweep.methods includes average");
  }
  c.scatter_k = GetNumberList(j, "plot.scatter_k", c.scatter_k);
  c.scatter_samples = GetCount(j, "plot.scatter_samples", c.scatter_samples);

  c.inspect_row = GetOptionalCount(j, "inspect.row");
  c.inspect_t = GetCount(j, "inspect.t", c.inspect_t);
  if (c.inspect_t + 1 >= c.horizon_steps) FieldError("inspect.t", "must be a transition step");
  c.adjacent_from = GetOptionalCount(j, "inspect.adjacent_from");
  c.adjacent_to = GetOptionalCount(j, "inspect.adjacent_to");

  c.seed = static_cast<std::uint64_t>(GetInteger(j, "seed", 0));
  c.threads = static_cast<unsigned>(GetCount(j, "threads", 0));
  if (const json* o = Find(j, "output_dir")) {
    if (!o->is_string()) FieldError("output_dir", "must be a path string");
    c.output_dir = o->get<std::string>();
  }
  if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;
  return c;
}

RunConfig LoadRunConfig(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    ThrowConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ParseRunConfig(j, path.parent_path());
}

CaseInstance BuildInstance(const RunConfig& c) {
  Estimate est = EstimateFromConfig(c);
  CaseInstance inst;
  inst.aggregate = std::move(est.aggregate);
  inst.discretization = std::move(est.discretization);
  inst.p_bar = std::move(est.p_bar);
  inst.horizon = c.horizon_steps;
  inst.gamma = c.gamma;
  const auto& ts = inst.aggregate.timestamps;
  const auto it = std::find(ts.begin(), ts.end(), c.horizon_start);
  if (it == ts.end()) {
    FieldError("horizon.start_epoch", "is not a timestamp of the data window");
  }
  inst.horizon_index = static_cast<std::size_t>(it - ts.begin());
  inst.interval_hours = static_cast<double>(inst.aggregate.interval_length) / 3600.0;
  if (!(inst.interval_hours > 0.0)) ThrowDataError("series needs at least two samples");

  inst.event.start = c.event_start;
  inst.event.end = c.event_end;
  inst.event.lead_time = c.lead_time;
  inst.event.incentive = c.incentive;
  inst.event.tariff = c.tariff;

  inst.rho0.assign(c.n_states, 0.0);
  inst.rho0[inst.discretization.path[inst.horizon_index]] = 1.0;
  inst.baseline = SimulateEvent(DefaultPolicy(inst.p_bar, inst.horizon, c.gamma),
                                inst.rho0, inst.discretization.space);
  const double baseline_power = inst.baseline.expected_power[inst.event.start];
  inst.u = BuildUtilitySchedule(inst.discretization.space, inst.event, inst.horizon,
                                inst.interval_hours, baseline_power);
  inst.nonprivate = SolveLsmdp(inst.p_bar, inst.u, inst.gamma);
  return inst;
}

MethodResult RunMethod(const CaseInstance& inst, PrivateMethod method, double k,
                       std::size_t n_samples, std::uint64_t seed, unsigned threads,
                       bool keep_samples, const TransitionMatrix* p_source) {
  const TransitionMatrix& src = p_source ? *p_source : inst.p_bar;
  MethodResult r;
  r.method = method;
  r.k = k;
  if (method == PrivateMethod::kAverage) {
    if (n_samples < 1) ThrowConfigError("field `n_samples` is required for the average method");
    PolicySampleSet set =
        SamplePrivatePolicies(src, inst.u, inst.gamma, inst.horizon, k, n_samples, seed,
                              threads);
    r.policy = MeanPolicy(set);
    const Solution nominal = p_source ? SolveLsmdp(src, inst.u, inst.gamma) : inst.nonprivate;
    r.analytical = ExpectedPolicyAnalytical(src, nominal.desirability, k, inst.gamma);
    if (!p_source) {
      r.cost = ExpectedCostAnalytical(inst.p_bar, inst.nonprivate.desirability,
                                      nominal.desirability, inst.gamma, k,
                                      r.analytical->policy, inst.rho0, &inst.nonprivate,
                                      &set);
      r.cost.realized_total =
          MeanRealizedCost(inst.p_bar, inst.u, inst.gamma, inst.nonprivate, set, inst.rho0);
    }
    if (keep_samples) r.samples = std::move(set);
  } else {
    const ExpectedLogMatrix elog = method == PrivateMethod::kTaylor
                                       ? ExpectedLogTaylor(src, k)
                                       : ExpectedLogDigamma(src, k);
    Solution sol = SolvePrivate(src, inst.u, inst.gamma, inst.horizon, elog);
    if (!p_source) {
      r.cost = CostOfPrivacyStochastic(inst.p_bar, inst.u, inst.gamma, elog, sol,
                                       inst.nonprivate, inst.rho0);
    }
    r.policy = std::move(sol.policy);
    r.desirability = std::move(sol.desirability);
  }
  r.trajectory = SimulateEvent(ActivatePolicy(r.policy, inst.p_bar, inst.event), inst.rho0,
                               inst.discretization.space);
  r.capacity = ComputeCapacityMetrics(inst.baseline, r.trajectory, inst.event);
  return r;
}

TransitionMatrix AdjacentMatrix(const TransitionMatrix& p_bar, std::size_t row, double h,
                                std::size_t from, std::size_t to) {
  if (row >= p_bar.n()) ThrowInvalidArgument("adjacent row out of range");
  const SimplexVector eta =
      AdjacentVector(SimplexVector::FromRow(p_bar, row), h, from, to);
  return p_bar.with_row(row, eta.entries);
}

AdjacencyCheck CompareAdjacent(const CaseInstance& inst, PrivateMethod method, double k,
                               double h, std::size_t row, std::size_t from,
                               std::size_t to, std::size_t inspect_t,
                               std::size_t n_samples, std::uint64_t seed,
                               unsigned threads) {
  const TransitionMatrix eta = AdjacentMatrix(inst.p_bar, row, h, from, to);
  const MethodResult a = RunMethod(inst, method, k, n_samples, seed, threads, false, &inst.p_bar);
  const MethodResult b = RunMethod(inst, method, k, n_samples, seed, threads, false, &eta);
  AdjacencyCheck out;
  out.max_l1 = MaxRowL1(a.policy, b.policy);
  for (std::size_t s = 0; s < inst.p_bar.n(); ++s) {
    out.inspected_l1 +=
        std::abs(a.policy.steps[inspect_t](row, s) - b.policy.steps[inspect_t](row, s));
  }
  return out;
}

InspectTarget ResolveInspect(const RunConfig& c, const CaseInstance& inst) {
  const std::size_t n = inst.p_bar.n();
  InspectTarget t;
  t.row = c.inspect_row.value_or(n >= 3 ? n - 3 : 0);
  t.t = c.inspect_t;
  if (t.row >= n) FieldError("inspect.row", "is not a state index");
  if (t.t + 1 >= inst.horizon) FieldError("inspect.t", "must be a transition step");
  t.from = c.adjacent_from.value_or(t.row);
  t.to = c.adjacent_to.value_or(t.row + 1 < n ? t.row + 1 : t.row - 1);
  if (t.from >= n || !inst.p_bar.supported(t.row, t.from)) {
    FieldError("inspect.adjacent_from", "must be in the support of the inspected row");
  }
  if (t.to >= n || t.to == t.from || !inst.p_bar.supported(t.row, t.to)) {
    FieldError("inspect.adjacent_to", "must be a different supported entry of the inspected row");
  }
  if (inst.p_bar(t.row, t.from) < c.h) {
    FieldError("inspect.adjacent_from", "entry is smaller than privacy.h");
  }
  return t;
}

std::vector<std::string> RunArtifactNames() {
  return {"policy_nonprivate.json", "policy_private.json", "privacy_report.json",
          "cost_report.json",       "trajectories/",       "plotdata/"};
}

int CmdEstimate(const RunConfig& c, std::ostream& log) {
  const Estimate est = EstimateFromConfig(c);
  fs::create_directories(c.output_dir);
  WriteJsonFile(c.output_dir / "default_matrix.json", MatrixToJson(est.p_bar));
  WriteStateSpaceCsv(est.discretization.space, c.output_dir / "state_space.csv");
  log << "estimated " << est.p_bar.n() << "-state default matrix from "
      << est.aggregate.length() << " samples, support density "
      << Fmt(SupportDensity(est.p_bar)) << "\n";
  return 0;
}

int CmdRun(const RunConfig& c, std::ostream& log) {
  const CaseInstance inst = BuildInstance(c);
  const InspectTarget target = ResolveInspect(c, inst);
  const fs::path out = c.output_dir;
  fs::create_directories(out / "trajectories");
  fs::create_directories(out / "plotdata");

  const std::size_t n_samples = c.n_samples.value_or(0);
  const MethodResult r = RunMethod(inst, c.method, c.k, n_samples, SamplingSeed(c, c.k),
                                   c.threads, true);
  const PrivacyReport privacy = Account(c, inst.p_bar, c.k);

  WriteJsonFile(out / "policy_nonprivate.json", PolicyToJson(inst.nonprivate.policy));
  WriteJsonFile(out / "policy_private.json", PolicyToJson(r.policy));
  WriteJsonFile(out / "privacy_report.json", PrivacyReportToJson(privacy));
  ordered_json cost = CostReportToJson(r.cost);
  if (r.samples) cost["samples"] = SamplesSummary(r);
  WriteJsonFile(out / "cost_report.json", cost);

  const PowerTrajectory nonprivate_traj =
      SimulateEvent(ActivatePolicy(inst.nonprivate.policy, inst.p_bar, inst.event),
                    inst.rho0, inst.discretization.space);
  WriteTrajectoryCsv(inst.baseline, out / "trajectories/default.csv");
  WriteTrajectoryCsv(nonprivate_traj, out / "trajectories/nonprivate.csv");
  WriteTrajectoryCsv(r.trajectory, out / "trajectories/private.csv");
  const CapacityMetrics m_default =
      ComputeCapacityMetrics(inst.baseline, inst.baseline, inst.event);
  const CapacityMetrics m_non =
      ComputeCapacityMetrics(inst.baseline, nonprivate_traj, inst.event);
  const CapacityMetrics m_priv =
      ComputeCapacityMetrics(inst.baseline, r.trajectory, inst.event, &nonprivate_traj);
  WriteJsonFile(out / "trajectories/metrics.json",
                ScenarioMetricsJson({{"default", m_default},
                                     {"nonprivate", m_non},
                                     {MethodName(r.method), m_priv}}));

  const fs::path plot = out / "plotdata";
  WriteAggregatePlot(inst, plot / "aggregate_power.csv");
  WriteMatrixPlot(inst, plot / "default_matrix.csv");
  WriteScatterPlot(c, inst, target, plot / "mechanism_scatter.csv");
  WritePolicySimplexPlot(inst, r, target, plot / "policy_simplex.csv");
  WritePowerPlot(inst, r, nonprivate_traj, plot / "power_vs_time.csv");
  WriteDesirabilityPlot(inst, r, plot / "desirability.csv");
  CsvWriter sweep(CostVsKHeader());
  for (const double k : c.sweep_k) {
    const MethodResult rk =
        k == c.k ? r : RunMethod(inst, c.method, k, n_samples, SamplingSeed(c, k), c.threads);
    AppendCostRow(sweep, rk, k == c.k ? privacy : Account(c, inst.p_bar, k));
  }
  sweep.save(plot / "cost_vs_k.csv");

  WriteManifest(out, "run", c,
                {{"policy_nonprivate.json", {"policy_nonprivate.json"}},
                 {"policy_private.json", {"policy_private.json"}},
                 {"privacy_report.json", {"privacy_report.json"}},
                 {"cost_report.json", {"cost_report.json"}},
                 {"trajectories/",
                  {"trajectories/default.csv", "trajectories/nonprivate.csv",
                   "trajectories/private.csv", "trajectories/metrics.json"}},
                 {"plotdata/",
                  {"plotdata/aggregate_power.csv", "plotdata/default_matrix.csv",
                   "plotdata/mechanism_scatter.csv", "plotdata/policy_simplex.csv",
                   "plotdata/power_vs_time.csv", "plotdata/desirability.csv",
                   "plotdata/cost_vs_k.csv"}}});

  log << MethodName(c.method) << " k=" << Fmt(c.k) << ": cost of privacy "
      << Fmt(r.cost.total) << ", epsilon "
      << (privacy.epsilon ? Fmt(*privacy.epsilon) : std::string("n/a")) << " at delta "
      << Fmt(privacy.delta) << ", event reduction " << Fmt(m_priv.mean_reduction)
      << " MW (non-private " << Fmt(m_non.mean_reduction) << " MW)\n";
  return 0;
}

int CmdSweep(const RunConfig& c, std::ostream& log) {
  const CaseInstance inst = BuildInstance(c);
  const InspectTarget target = ResolveInspect(c, inst);
  const fs::path out = c.output_dir;
  fs::create_directories(out);
  const std::size_t n_samples = c.n_samples.value_or(0);

  std::vector<PrivacyReport> privacy;
  for (const double k : c.sweep_k) privacy.push_back(Account(c, inst.p_bar, k));

  const PowerTrajectory nonprivate_traj =
      SimulateEvent(ActivatePolicy(inst.nonprivate.policy, inst.p_bar, inst.event),
                    inst.rho0, inst.discretization.space);
  const CapacityMetrics m_non =
      ComputeCapacityMetrics(inst.baseline, nonprivate_traj, inst.event);

  CsvWriter csv(CostVsKHeader());
  ordered_json report;
  report["n_states"] = inst.p_bar.n();
  report["horizon"] = inst.horizon;
  report["gamma"] = inst.gamma;
  report["rho0_state"] = inst.discretization.path[inst.horizon_index];
  report["baseline_at_event_start_mw"] = inst.baseline.expected_power[inst.event.start];
  report["inspect"] = {{"row", target.row}, {"t", target.t},
                       {"adjacent_from", target.from}, {"adjacent_to", target.to}};
  report["nonprivate"] = CapacityMetricsToJson(m_non);
  auto rows = ordered_json::array();
  for (const PrivateMethod method : c.sweep_methods) {
    for (std::size_t i = 0; i < c.sweep_k.size(); ++i) {
      const double k = c.sweep_k[i];
      const std::uint64_t seed = SamplingSeed(c, k);
      const MethodResult r = RunMethod(inst, method, k, n_samples, seed, c.threads);
      AppendCostRow(csv, r, privacy[i]);
      const AdjacencyCheck adj = CompareAdjacent(inst, method, k, c.h, target.row,
                                                 target.from, target.to, target.t,
                                                 n_samples, seed, c.threads);
      const AdjacencyCheck adj_full = CompareAdjacent(inst, method, k, 2.0 * c.h, target.row,
                                                      target.from, target.to, target.t,
                                                      n_samples, seed, c.threads);
      ordered_json e;
      e["method"] = MethodName(method);
      e["k"] = k;
      e["total_cost"] = r.cost.total;
      e["realized_cost"] = r.cost.realized_total.value_or(std::nan(""));
      e["capacity"] = CapacityMetricsToJson(
          ComputeCapacityMetrics(inst.baseline, r.trajectory, inst.event, &nonprivate_traj));
      e["epsilon"] = privacy[i].epsilon ? ordered_json(*privacy[i].epsilon) : ordered_json();
      e["delta"] = privacy[i].delta;
      e["psi"] = privacy[i].psi;
      e["adjacent_l1"] = {{"inspected", adj.inspected_l1}, {"max", adj.max_l1}};
      e["adjacent_l1_full_shift"] = {{"inspected", adj_full.inspected_l1},
                                     {"max", adj_full.max_l1}};
      if (!r.cost.extra.empty()) e["monte_carlo"] = r.cost.extra;
      rows.push_back(std::move(e));
      log << MethodName(method) << " k=" << Fmt(k) << ": cost " << Fmt(r.cost.total)
          << ", realized " << Fmt(r.cost.realized_total.value_or(std::nan("")))
          << ", reduction " << Fmt(r.capacity.mean_reduction) << " MW\n";
    }
  }
  report["results"] = std::move(rows);
  csv.save(out / "cost_vs_k.csv");
  WriteJsonFile(out / "sweep_report.json", report);
  WriteManifest(out, "sweep", c,
                {{"cost_vs_k.csv", {"cost_vs_k.csv"}},
                 {"sweep_report.json", {"sweep_report.json"}}});
  return 0;
}

}  // namespace privmdp
