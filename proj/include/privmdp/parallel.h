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

#ifndef PRIVMDP_PARALLEL_H_
#define PRIVMDP_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace privmdp {

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Work items must write to disjoint outputs; the first
// exception thrown is rethrown after all workers stop.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn,
                 unsigned threads = 0);

}  // namespace privmdp

#endif  // PRIVMDP_PARALLEL_H_
