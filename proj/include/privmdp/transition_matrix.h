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

#ifndef PRIVMDP_TRANSITION_MATRIX_H_
#define PRIVMDP_TRANSITION_MATRIX_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "privmdp/grid.h"

namespace privmdp {

// Tolerance on |row sum - 1| for every stored transition matrix.
inline constexpr double kRowSumTolerance = 1e-12;

// Row-stochastic n x n matrix. Row index is the source state, so entry
// (from, to) is the probability of moving from `from` to `to`. The support
// mask marks the structurally nonzero entries; anything outside it is
// exactly zero. Entries inside the support may underflow to zero.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;

  // Support is taken as the strictly positive entries.
  static TransitionMatrix FromRows(const std::vector<std::vector<double>>& rows);
  static TransitionMatrix FromGrid(Grid probabilities);
  static TransitionMatrix FromGrid(Grid probabilities,
                                   std::vector<std::uint8_t> support);
  static TransitionMatrix Identity(std::size_t n);

  std::size_t n() const { return n_; }

  double operator()(std::size_t from, std::size_t to) const {
    return probabilities_(from, to);
  }
  std::span<const double> row(std::size_t from) const {
    return probabilities_.row(from);
  }
  bool supported(std::size_t from, std::size_t to) const {
    return support_[from * n_ + to] != 0;
  }
  std::span<const std::uint8_t> support_row(std::size_t from) const {
    return {support_.data() + from * n_, n_};
  }
  std::size_t support_size(std::size_t from) const;

  const Grid& probabilities() const { return probabilities_; }
  const std::vector<std::uint8_t>& support_mask() const { return support_; }

  bool same_support(const TransitionMatrix& other) const {
    return support_ == other.support_;
  }
  // True iff support(*this) is a subset of support(other).
  bool support_within(const TransitionMatrix& other) const;

  // Natural log of every entry; -inf off the support and for zero entries.
  Grid log_probabilities() const;

  // Copy with one row replaced. The new row must respect the support.
  TransitionMatrix with_row(std::size_t from, std::span<const double> values) const;

  bool operator==(const TransitionMatrix&) const = default;

 private:
  TransitionMatrix(Grid probabilities, std::vector<std::uint8_t> support);

  std::size_t n_ = 0;
  Grid probabilities_;
  std::vector<std::uint8_t> support_;
};

}  // namespace privmdp

#endif  // PRIVMDP_TRANSITION_MATRIX_H_
