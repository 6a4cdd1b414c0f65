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

#include "privmdp/transition_matrix.h"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "privmdp/error.h"

namespace privmdp {
namespace {

void ValidateRows(const Grid& p, const std::vector<std::uint8_t>& support) {
  const std::size_t n = p.rows();
  if (p.cols() != n) ThrowInvalidArgument("transition matrix must be square");
  if (support.size() != n * n) {
    ThrowInvalidArgument("support mask size does not match matrix");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        ThrowInvalidArgument("transition entry (" + std::to_string(i) + "," +
                             std::to_string(j) + ") outside [0,1]");
      }
      if (support[i * n + j] == 0 && v != 0.0) {
        ThrowInvalidArgument("transition entry (" + std::to_string(i) + "," +
                             std::to_string(j) + ") is nonzero off support");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      ThrowInvalidArgument("transition row " + std::to_string(i) +
                           " does not sum to 1");
    }
  }
}

}  // namespace

TransitionMatrix::TransitionMatrix(Grid probabilities,
                                   std::vector<std::uint8_t> support)
    : n_(probabilities.rows()),
      probabilities_(std::move(probabilities)),
      support_(std::move(support)) {}

TransitionMatrix TransitionMatrix::FromRows(
    const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  Grid p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      ThrowInvalidArgument("transition matrix must be square");
    }
    for (std::size_t j = 0; j < n; ++j) p(i, j) = rows[i][j];
  }
  return FromGrid(std::move(p));
}

TransitionMatrix TransitionMatrix::FromGrid(Grid probabilities) {
  std::vector<std::uint8_t> support(probabilities.values().size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    support[i] = probabilities.values()[i] > 0.0 ? 1 : 0;
  }
  return FromGrid(std::move(probabilities), std::move(support));
}

TransitionMatrix TransitionMatrix::FromGrid(Grid probabilities,
                                            std::vector<std::uint8_t> support) {
  ValidateRows(probabilities, support);
  return TransitionMatrix(std::move(probabilities), std::move(support));
}

TransitionMatrix TransitionMatrix::Identity(std::size_t n) {
  Grid p(n, n);
  for (std::size_t i = 0; i < n; ++i) p(i, i) = 1.0;
  return FromGrid(std::move(p));
}

std::size_t TransitionMatrix::support_size(std::size_t from) const {
  std::size_t count = 0;
  for (const auto s : support_row(from)) count += s;
  return count;
}

bool TransitionMatrix::support_within(const TransitionMatrix& other) const {
  if (other.n_ != n_) return false;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (support_[i] && !other.support_[i]) return false;
  }
  return true;
}

Grid TransitionMatrix::log_probabilities() const {
  Grid out(n_, n_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (supported(i, j) && probabilities_(i, j) > 0.0) {
        out(i, j) = std::log(probabilities_(i, j));
      }
    }
  }
  return out;
}

TransitionMatrix TransitionMatrix::with_row(std::size_t from,
                                            std::span<const double> values) const {
  if (values.size() != n_) ThrowInvalidArgument("row length mismatch");
  Grid p = probabilities_;
  for (std::size_t j = 0; j < n_; ++j) p(from, j) = values[j];
  return FromGrid(std::move(p), support_);
}

}  // namespace privmdp
