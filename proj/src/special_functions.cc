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

#include "privmdp/special_functions.h"

#include <cmath>
#include <limits>
#include <string>

#include "privmdp/error.h"

namespace privmdp {

double Digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    ThrowInvalidArgument("digamma requires a positive finite argument");
  }
  double result = 0.0;
  // psi(x) = psi(x + 1) - 1/x until the asymptotic series is accurate.
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli terms B_{2k} / (2k x^{2k}), k = 1..7.
  const double series =
      inv2 * (1.0 / 12.0 -
      inv2 * (1.0 / 120.0 -
      inv2 * (1.0 / 252.0 -
      inv2 * (1.0 / 240.0 -
      inv2 * (1.0 / 132.0 -
      inv2 * (691.0 / 32760.0 -
      inv2 * (1.0 / 12.0)))))));
  return result + std::log(x) - 0.5 * inv - series;
}

double LogMultivariateBeta(std::span<const double> a) {
  if (a.empty()) ThrowInvalidArgument("multivariate beta needs at least one argument");
  double sum = 0.0;
  double acc = 0.0;
  for (const double v : a) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      ThrowInvalidArgument("multivariate beta requires positive arguments");
    }
    acc += std::lgamma(v);
    sum += v;
  }
  return acc - std::lgamma(sum);
}

double LogBeta(double a, double b) {
  const double args[2] = {a, b};
  return LogMultivariateBeta(args);
}

double LogSumExp(std::span<const double> x) {
  double hi = -std::numeric_limits<double>::infinity();
  for (const double v : x) hi = std::max(hi, v);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  if (hi == std::numeric_limits<double>::infinity()) return hi;
  double sum = 0.0;
  for (const double v : x) {
    if (v != -std::numeric_limits<double>::infinity()) sum += std::exp(v - hi);
  }
  return hi + std::log(sum);
}

}  // namespace privmdp
