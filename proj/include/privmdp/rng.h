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

#ifndef PRIVMDP_RNG_H_
#define PRIVMDP_RNG_H_

#include <cstdint>
#include <random>

namespace privmdp {

using Engine = std::mt19937_64;

// Deterministic seed for an independent stream, derived from a base seed,
// a stream tag and an index (sample, building, chunk). Splitting the seed
// this way makes results independent of scheduling.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream,
                         std::uint64_t index = 0);

inline Engine MakeEngine(std::uint64_t base, std::uint64_t stream,
                         std::uint64_t index = 0) {
  return Engine(DeriveSeed(base, stream, index));
}

// Stream tags used across the library.
namespace streams {
inline constexpr std::uint64_t kBaseProfile = 1;
inline constexpr std::uint64_t kBuildings = 2;
inline constexpr std::uint64_t kMechanism = 3;
inline constexpr std::uint64_t kDelta = 4;
inline constexpr std::uint64_t kPolicySamples = 5;
inline constexpr std::uint64_t kScatter = 6;
}  // namespace streams

}  // namespace privmdp

#endif  // PRIVMDP_RNG_H_
