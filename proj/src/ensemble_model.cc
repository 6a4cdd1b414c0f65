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

#include "privmdp/ensemble_model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string_view>

#include "privmdp/error.h"
#include "privmdp/rng.h"

namespace privmdp {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(Trim(line.substr(pos)));
      return out;
    }
    out.push_back(Trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
}

template <typename T>
bool ParseNumber(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void RowError(std::size_t row, const std::string& what) {
  ThrowDataError(what + " at row " + std::to_string(row));
}

double Clip01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void ValidateSeries(const ConsumptionSeries& s) {
  if (s.timestamps.empty()) ThrowDataError("no samples");
  if (s.power.size() != s.building_ids.size()) {
    ThrowDataError("building id count does not match series count");
  }
  for (std::size_t t = 1; t < s.timestamps.size(); ++t) {
    if (s.timestamps[t] <= s.timestamps[t - 1]) {
      ThrowDataError("non-monotone timestamp at row " + std::to_string(t + 1));
    }
    if (s.timestamps[t] - s.timestamps[t - 1] != s.interval_length) {
      ThrowDataError("irregular interval at row " + std::to_string(t + 1));
    }
  }
  for (const auto& series : s.power) {
    if (series.size() != s.timestamps.size()) {
      ThrowDataError("series length does not match timestamps");
    }
    for (std::size_t t = 0; t < series.size(); ++t) {
      if (!(series[t] >= 0.0) || !std::isfinite(series[t])) {
        ThrowDataError("negative power at row " + std::to_string(t + 1));
      }
    }
  }
}

ConsumptionSeries ParseConsumptionCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) ThrowDataError("missing header row");
  const auto header = SplitCommas(line);
  int ts_col = -1, power_col = -1, id_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "timestamp") ts_col = static_cast<int>(c);
    if (header[c] == "power_mw") power_col = static_cast<int>(c);
    if (header[c] == "building_id") id_col = static_cast<int>(c);
  }
  if (ts_col < 0) ThrowDataError("missing column timestamp");
  if (power_col < 0) ThrowDataError("missing column power_mw");
  const std::size_t needed =
      static_cast<std::size_t>(std::max({ts_col, power_col, id_col})) + 1;

  struct Building {
    std::vector<std::int64_t> ts;
    std::vector<double> power;
    std::vector<std::size_t> rows;
  };
  std::map<std::string, Building> by_id;
  std::vector<std::string> order;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    ++row;
    const auto cells = SplitCommas(line);
    if (cells.size() < needed) RowError(row, "missing columns");
    std::int64_t ts = 0;
    double p = 0.0;
    if (!ParseNumber(cells[ts_col], ts)) RowError(row, "bad timestamp");
    if (!ParseNumber(cells[power_col], p) || !std::isfinite(p)) {
      RowError(row, "bad power value");
    }
    if (p < 0.0) RowError(row, "negative power");
    const std::string id = id_col >= 0 ? std::string(cells[id_col]) : "0";
    auto [it, inserted] = by_id.try_emplace(id);
    if (inserted) order.push_back(id);
    Building& b = it->second;
    if (!b.ts.empty() && ts <= b.ts.back()) {
      RowError(row, "non-monotone timestamp");
    }
    b.ts.push_back(ts);
    b.power.push_back(p);
    b.rows.push_back(row);
  }
  if (row == 0) ThrowDataError("no samples");

  ConsumptionSeries out;
  out.timestamps = by_id.at(order.front()).ts;
  for (const auto& id : order) {
    const Building& b = by_id.at(id);
    if (b.ts != out.timestamps) {
      ThrowDataError("building " + id + " timestamps differ from building " +
                     order.front());
    }
    out.building_ids.push_back(id);
    out.power.push_back(b.power);
  }
  if (out.timestamps.size() >= 2) {
    out.interval_length = out.timestamps[1] - out.timestamps[0];
    const Building& first = by_id.at(order.front());
    for (std::size_t t = 2; t < out.timestamps.size(); ++t) {
      if (out.timestamps[t] - out.timestamps[t - 1] != out.interval_length) {
        RowError(first.rows[t], "irregular interval");
      }
    }
  }
  return out;
}

ConsumptionSeries LoadConsumptionCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowDataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseConsumptionCsv(buf.str());
}

void WriteConsumptionCsv(const ConsumptionSeries& s,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowDataError("cannot write " + path.string());
  out << "timestamp,power_mw,building_id\n";
  char buf[64];
  for (std::size_t b = 0; b < s.buildings(); ++b) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      auto r = std::to_chars(buf, buf + sizeof buf, s.power[b][t]);
      out << s.timestamps[t] << ',' << std::string_view(buf, r.ptr - buf)
          << ',' << s.building_ids[b] << '\n';
    }
  }
}

ConsumptionSeries SynthesizeBaseProfile(const BaseProfileParams& p) {
  if (p.days < 1 || p.interval_length <= 0 || 86400 % p.interval_length != 0) {
    ThrowInvalidArgument("base profile needs days >= 1 and an interval dividing a day");
  }
  Engine rng = MakeEngine(p.seed, streams::kBaseProfile);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t per_day = static_cast<std::size_t>(86400 / p.interval_length);
  const std::size_t total = per_day * static_cast<std::size_t>(p.days);

  // Daily heat index: seasonal swell plus a persistent day-to-day wobble.
  std::vector<double> heat(p.days);
  double wobble = 0.0;
  for (int d = 0; d < p.days; ++d) {
    wobble = 0.6 * wobble + 0.15 * normal(rng);
    const double season = std::sin(std::numbers::pi * (d + 15.0) / (p.days + 30.0));
    heat[d] = std::clamp(0.35 + 0.65 * season + wobble, 0.0, 1.5);
  }

  ConsumptionSeries out;
  out.interval_length = p.interval_length;
  out.building_ids = {"base"};
  out.power.assign(1, std::vector<double>(total));
  out.timestamps.resize(total);
  double ar = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const std::int64_t ts = p.start_epoch + static_cast<std::int64_t>(i) * p.interval_length;
    out.timestamps[i] = ts;
    const std::int64_t epoch_day = ts / 86400;
    const bool weekend = ((epoch_day + 3) % 7) >= 5;  // 1970-01-01 was a Thursday
    const double hod = static_cast<double>(ts % 86400) / 3600.0;
    const std::size_t d = i / per_day;
    const double occ_shape =
        (hod >= 7.0 && hod < 19.0)
            ? std::pow(std::sin(std::numbers::pi * Clip01((hod - 7.0) / 12.0)), 0.7)
            : 0.0;
    const double cool_shape = std::sin(std::numbers::pi * Clip01((hod - 9.0) / 10.0));
    ar = p.ar_coefficient * ar + p.ar_sigma_mw * normal(rng);
    const double occ = p.occupancy_mw * occ_shape * (weekend ? p.weekend_factor : 1.0);
    const double cool = p.cooling_mw * heat[d] * cool_shape;
    out.power[0][i] = std::max(p.base_load_mw + occ + cool + ar, 0.01);
  }
  return out;
}

ConsumptionSeries SynthesizeEnsemble(const ConsumptionSeries& base,
                                     std::size_t n_buildings, double noise_frac,
                                     std::uint64_t seed) {
  if (n_buildings < 1) ThrowInvalidArgument("n_buildings must be at least 1");
  if (!(noise_frac >= 0.0 && noise_frac < 1.0)) {
    ThrowInvalidArgument("noise_frac must lie in [0, 1)");
  }
  if (base.buildings() != 1) {
    ThrowInvalidArgument("ensemble base must be a single series");
  }
  ConsumptionSeries out;
  out.timestamps = base.timestamps;
  out.interval_length = base.interval_length;
  const auto& src = base.power[0];
  for (std::size_t b = 0; b < n_buildings; ++b) {
    out.building_ids.push_back("b" + std::to_string(b));
    std::vector<double> series(src.size());
    if (noise_frac == 0.0) {
      series = src;
    } else {
      Engine rng = MakeEngine(seed, streams::kBuildings, b);
      std::normal_distribution<double> noise(0.0, noise_frac / 2.0);
      for (std::size_t t = 0; t < src.size(); ++t) {
        double g = noise(rng);
        while (std::abs(g) > noise_frac) g = noise(rng);
        series[t] = src[t] * (1.0 + g);
      }
    }
    out.power.push_back(std::move(series));
  }
  return out;
}

ConsumptionSeries Aggregate(const ConsumptionSeries& s) {
  if (s.buildings() == 0) ThrowDataError("no samples");
  ConsumptionSeries out;
  out.timestamps = s.timestamps;
  out.interval_length = s.interval_length;
  out.building_ids = {"aggregate"};
  out.power.assign(1, std::vector<double>(s.length(), 0.0));
  for (const auto& series : s.power) {
    for (std::size_t t = 0; t < series.size(); ++t) out.power[0][t] += series[t];
  }
  return out;
}

ConsumptionSeries SliceByTime(const ConsumptionSeries& s, std::int64_t start,
                              std::int64_t end) {
  ConsumptionSeries out;
  out.interval_length = s.interval_length;
  out.building_ids = s.building_ids;
  out.power.resize(s.buildings());
  for (std::size_t t = 0; t < s.length(); ++t) {
    if (s.timestamps[t] < start || s.timestamps[t] >= end) continue;
    out.timestamps.push_back(s.timestamps[t]);
    for (std::size_t b = 0; b < s.buildings(); ++b) {
      out.power[b].push_back(s.power[b][t]);
    }
  }
  return out;
}

std::size_t StateSpace::state_of(double power) const {
  const std::size_t n_states = n();
  // Number of interior edges <= power.
  const auto first = bin_edges.begin() + 1;
  const auto last = bin_edges.begin() + static_cast<std::ptrdiff_t>(n_states);
  const auto idx = static_cast<std::size_t>(std::upper_bound(first, last, power) - first);
  return std::min(idx, n_states - 1);
}

StateSpace MakeStateSpace(double lo, double hi, std::size_t n_states) {
  if (n_states < 2) ThrowInvalidArgument("n_states must be at least 2");
  if (!(hi > lo)) ThrowDataError("degenerate range");
  StateSpace space;
  const double w = (hi - lo) / static_cast<double>(n_states);
  space.bin_edges.resize(n_states + 1);
  for (std::size_t i = 0; i < n_states; ++i) {
    space.bin_edges[i] = lo + static_cast<double>(i) * w;
  }
  space.bin_edges[n_states] = hi;
  for (std::size_t i = 0; i < n_states; ++i) {
    space.representative_power.push_back(
        0.5 * (space.bin_edges[i] + space.bin_edges[i + 1]));
  }
  return space;
}

std::vector<std::size_t> AssignStates(const StateSpace& space,
                                      const std::vector<double>& power) {
  std::vector<std::size_t> path(power.size());
  for (std::size_t t = 0; t < power.size(); ++t) path[t] = space.state_of(power[t]);
  return path;
}

Discretization Discretize(const ConsumptionSeries& aggregate, std::size_t n_states) {
  if (n_states < 2) ThrowInvalidArgument("n_states must be at least 2");
  if (aggregate.buildings() != 1) {
    ThrowInvalidArgument("discretize expects a single aggregate series");
  }
  const auto& power = aggregate.power[0];
  if (power.empty()) ThrowDataError("no samples");
  const auto [lo, hi] = std::minmax_element(power.begin(), power.end());
  Discretization out;
  out.space = MakeStateSpace(*lo, *hi, n_states);
  out.path = AssignStates(out.space, power);
  return out;
}

TransitionMatrix EstimateDefaultMatrix(
    const std::vector<std::vector<std::size_t>>& paths, std::size_t n_states) {
  if (n_states == 0) ThrowInvalidArgument("n_states must be positive");
  Grid counts(n_states, n_states);
  std::size_t total = 0;
  for (const auto& path : paths) {
    for (std::size_t t = 0; t < path.size(); ++t) {
      if (path[t] >= n_states) {
        ThrowInvalidArgument("state index " + std::to_string(path[t]) +
                             " out of range");
      }
      if (t + 1 < path.size()) {
        if (path[t + 1] >= n_states) {
          ThrowInvalidArgument("state index " + std::to_string(path[t + 1]) +
                               " out of range");
        }
        counts(path[t], path[t + 1]) += 1.0;
        ++total;
      }
    }
  }
  if (total == 0) ThrowDataError("no transitions to estimate from");
  Grid probs(n_states, n_states);
  std::vector<std::uint8_t> support(n_states * n_states, 0);
  for (std::size_t i = 0; i < n_states; ++i) {
    double row_total = 0.0;
    for (std::size_t j = 0; j < n_states; ++j) row_total += counts(i, j);
    if (row_total == 0.0) {
      probs(i, i) = 1.0;
      support[i * n_states + i] = 1;
      continue;
    }
    for (std::size_t j = 0; j < n_states; ++j) {
      if (counts(i, j) > 0.0) {
        probs(i, j) = counts(i, j) / row_total;
        support[i * n_states + j] = 1;
      }
    }
  }
  return TransitionMatrix::FromGrid(std::move(probs), std::move(support));
}

nlohmann::ordered_json MatrixToJson(const TransitionMatrix& m) {
  nlohmann::ordered_json j;
  j["n"] = m.n();
  auto rows = nlohmann::ordered_json::array();
  auto mask = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.n(); ++i) {
    auto r = nlohmann::ordered_json::array();
    auto s = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < m.n(); ++k) {
      r.push_back(m(i, k));
      s.push_back(m.supported(i, k));
    }
    rows.push_back(std::move(r));
    mask.push_back(std::move(s));
  }
  j["rows"] = std::move(rows);
  j["support_mask"] = std::move(mask);
  return j;
}

TransitionMatrix MatrixFromJson(const nlohmann::json& j) {
  try {
    const std::size_t n = j.at("n").get<std::size_t>();
    const auto& rows = j.at("rows");
    if (rows.size() != n) ThrowDataError("matrix rows do not match n");
    Grid probs(n, n);
    std::vector<std::uint8_t> support(n * n, 0);
    const bool has_mask = j.contains("support_mask");
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) ThrowDataError("matrix row " + std::to_string(i) + " has wrong length");
      for (std::size_t k = 0; k < n; ++k) {
        probs(i, k) = rows[i][k].get<double>();
        support[i * n + k] = has_mask ? j["support_mask"][i][k].get<bool>()
                                      : probs(i, k) > 0.0;
      }
    }
    return TransitionMatrix::FromGrid(std::move(probs), std::move(support));
  } catch (const nlohmann::json::exception& e) {
    ThrowDataError(std::string("malformed matrix JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) ThrowDataError(e.what());
    throw;
  }
}

void WriteStateSpaceCsv(const StateSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowDataError("cannot write " + path.string());
  out << "state,lower_mw,upper_mw,representative_mw\n";
  char a[32], b[32], c[32];
  for (std::size_t i = 0; i < space.n(); ++i) {
    auto ra = std::to_chars(a, a + 32, space.bin_edges[i]);
    auto rb = std::to_chars(b, b + 32, space.bin_edges[i + 1]);
    auto rc = std::to_chars(c, c + 32, space.representative_power[i]);
    out << i << ',' << std::string_view(a, ra.ptr - a) << ','
        << std::string_view(b, rb.ptr - b) << ',' << std::string_view(c, rc.ptr - c)
        << '\n';
  }
}

}  // namespace privmdp
