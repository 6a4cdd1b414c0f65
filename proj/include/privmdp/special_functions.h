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

#ifndef PRIVMDP_SPECIAL_FUNCTIONS_H_
#define PRIVMDP_SPECIAL_FUNCTIONS_H_

#include <span>

namespace privmdp {

// Digamma function, accurate to about 1e-13 absolute for x >= 1e-6.
// Throws kInvalidArgument for x <= 0.
double Digamma(double x);

// log B(a) = sum_i lgamma(a_i) - lgamma(sum_i a_i). Requires every a_i > 0.
double LogMultivariateBeta(std::span<const double> a);

// log B(a, b) for the two-argument beta function.
double LogBeta(double a, double b);

// log(sum_i exp(x_i)), ignoring -inf entries. Returns -inf when every
// entry is -inf or the span is empty.
double LogSumExp(std::span<const double> x);

}  // namespace privmdp

#endif  // PRIVMDP_SPECIAL_FUNCTIONS_H_
