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

#include "oracles.h"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace privmdp::oracle {
namespace {

using Big = boost::multiprecision::cpp_dec_float_50;
using LMatrix = std::vector<std::vector<long double>>;

Matrix FromUtility(const UtilitySchedule& u) {
  Matrix m(u.horizon(), std::vector<double>(u.n()));
  for (std::size_t t = 0; t < u.horizon(); ++t) {
    for (std::size_t b = 0; b < u.n(); ++b) m[t][b] = u.values(t, b);
  }
  return m;
}

Matrix TaylorWeights(const Matrix& p, double k) {
  Matrix w = p;
  for (auto& row : w) {
    for (double& v : row) {
      if (v > 0.0) v = v * std::exp((-1.0 + v) / (2.0 * v * (k + 1.0)));
    }
  }
  return w;
}

Matrix DigammaWeights(const Matrix& p, double k) {
  Matrix w = p;
  const double dk = boost::math::digamma(k);
  for (auto& row : w) {
    for (double& v : row) {
      if (v > 0.0) v = std::exp(boost::math::digamma(k * v) - dk);
    }
  }
  return w;
}

}  // namespace

Matrix ToDense(const TransitionMatrix& m) {
  Matrix out(m.n(), std::vector<double>(m.n()));
  for (std::size_t b = 0; b < m.n(); ++b) {
    for (std::size_t a = 0; a < m.n(); ++a) out[b][a] = m(b, a);
  }
  return out;
}

TransitionMatrix RandomMatrix(std::size_t n, double density, std::mt19937_64& rng,
                              double min_entry) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Grid g(n, n);
  for (std::size_t b = 0; b < n; ++b) {
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (a == b || unif(rng) < density) {
        g(b, a) = min_entry + unif(rng) + 1e-3;
        sum += g(b, a);
      }
    }
    for (std::size_t a = 0; a < n; ++a) g(b, a) /= sum;
    // Make the row sum exact by folding the rounding into the diagonal.
    double s2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) if (a != b) s2 += g(b, a);
    g(b, b) = 1.0 - s2;
  }
  return TransitionMatrix::FromGrid(std::move(g));
}

UtilitySchedule RandomUtility(std::size_t horizon, std::size_t n, double scale,
                              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  UtilitySchedule u{Grid(horizon, n)};
  for (double& v : u.values.values()) v = unif(rng);
  return u;
}

Policy RandomPolicy(const TransitionMatrix& p_bar, std::size_t horizon, double gamma,
                    std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = p_bar.n();
  Policy pol;
  pol.gamma = gamma;
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    Grid g(n, n);
    // Mix between near-default rows and sharply peaked rows.
    const double sharp = unif(rng) < 0.5 ? 1.0 : 4.0;
    for (std::size_t b = 0; b < n; ++b) {
      double sum = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        if (!p_bar.supported(b, a)) continue;
        g(b, a) = std::pow(expo(rng), sharp) + 1e-12;
        sum += g(b, a);
      }
      std::size_t last = n;
      for (std::size_t a = 0; a < n; ++a) {
        if (p_bar.supported(b, a)) {
          g(b, a) /= sum;
          last = a;
        }
      }
      double s2 = 0.0;
      for (std::size_t a = 0; a < n; ++a) if (a != last) s2 += g(b, a);
      g(b, last) = 1.0 - s2;
    }
    pol.steps.push_back(TransitionMatrix::FromGrid(std::move(g), p_bar.support_mask()));
  }
  return pol;
}

LMatrix LinearDesirability(const Matrix& w, const UtilitySchedule& u, double gamma) {
  const std::size_t T = u.horizon(), n = u.n();
  LMatrix z(T, std::vector<long double>(n));
  for (std::size_t b = 0; b < n; ++b) {
    z[T - 1][b] = std::exp(static_cast<long double>(u.values(T - 1, b)) / gamma);
  }
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t b = 0; b < n; ++b) {
      long double s = 0.0L;
      for (std::size_t a = 0; a < n; ++a) s += w[b][a] * z[t + 1][a];
      z[t][b] = std::exp(static_cast<long double>(u.values(t, b)) / gamma) * s;
    }
  }
  return z;
}

std::vector<Matrix> LinearPolicy(const Matrix& w, const LMatrix& z) {
  const std::size_t n = w.size();
  std::vector<Matrix> out;
  for (std::size_t t = 0; t + 1 < z.size(); ++t) {
    Matrix p(n, std::vector<double>(n));
    for (std::size_t b = 0; b < n; ++b) {
      long double s = 0.0L;
      for (std::size_t a = 0; a < n; ++a) s += w[b][a] * z[t + 1][a];
      for (std::size_t a = 0; a < n; ++a) {
        p[b][a] = static_cast<double>(w[b][a] * z[t + 1][a] / s);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

Matrix DensePropagate(const std::vector<Matrix>& steps, const std::vector<double>& rho0) {
  Matrix rho{rho0};
  for (const auto& p : steps) {
    std::vector<double> next(rho0.size());
    for (std::size_t a = 0; a < rho0.size(); ++a) {
      long double acc = 0.0L;
      for (std::size_t b = 0; b < rho0.size(); ++b) {
        acc += static_cast<long double>(rho.back()[b]) * p[b][a];
      }
      next[a] = static_cast<double>(acc);
    }
    rho.push_back(std::move(next));
  }
  return rho;
}

double Objective(const std::vector<Matrix>& steps, const Matrix& p_bar,
                 const UtilitySchedule& u, const std::vector<double>& rho0, double gamma) {
  const Matrix rho = DensePropagate(steps, rho0);
  const std::size_t n = rho0.size();
  long double j = 0.0L;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      long double kl = 0.0L;
      for (std::size_t a = 0; a < n; ++a) {
        const long double p = steps[t][b][a];
        if (p > 0.0L) kl += p * std::log(p / static_cast<long double>(p_bar[b][a]));
      }
      j += rho[t][b] * gamma * kl;
    }
    for (std::size_t a = 0; a < n; ++a) j -= rho[t + 1][a] * u.values(t + 1, a);
  }
  return static_cast<double>(j);
}

double KlHighPrecision(const std::vector<double>& p, const std::vector<double>& q) {
  Big acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const Big pi(p[i]), qi(q[i]);
    acc += pi * log(pi / qi);
  }
  return acc.convert_to<double>();
}

double EpsilonHighPrecision(double k, double h, double omega, double omega_bar,
                            double psi, double w_size) {
  const Big K(k), H(h), W(omega), WB(omega_bar), PSI(psi), WS(w_size);
  auto lbeta = [](const Big& a, const Big& b) {
    return boost::math::lgamma(a) + boost::math::lgamma(b) - boost::math::lgamma(a + b);
  };
  const Big two(2);
  const Big first = lbeta(K * W, K * (1 - WB - W)) -
                    lbeta(K * (W + H / two), K * (1 - WB - W - H / two));
  const Big second = K * H / two * log((1 - (WS - 1) * PSI) / PSI);
  return (first + second).convert_to<double>();
}

double DigammaReference(double x) {
  return static_cast<double>(boost::math::digamma(static_cast<long double>(x)));
}

double LogBetaReference(const std::vector<double>& a) {
  Big acc = 0, sum = 0;
  for (const double v : a) {
    acc += boost::math::lgamma(Big(v));
    sum += Big(v);
  }
  return (acc - boost::math::lgamma(sum)).convert_to<double>();
}

std::vector<Matrix> TaylorPolicyDisplayed(const Matrix& p_bar, const UtilitySchedule& u,
                                          double gamma, double k, LMatrix* z_out) {
  const Matrix w = TaylorWeights(p_bar, k);
  LMatrix z = LinearDesirability(w, u, gamma);
  std::vector<Matrix> pol = LinearPolicy(w, z);
  if (z_out) *z_out = std::move(z);
  return pol;
}

namespace {

// Displayed cost with weights w = exp(e) * [p or 1] and the given extra
// per-entry terms, shared by the two variants.
Matrix CostFromWeights(const Matrix& p_bar, const Matrix& w, const UtilitySchedule& u,
                       double gamma, bool digamma, double k) {
  const std::size_t n = p_bar.size(), T = u.horizon();
  const LMatrix z = LinearDesirability(p_bar, u, gamma);
  const LMatrix zt = LinearDesirability(w, u, gamma);
  const double dk = boost::math::digamma(k);
  Matrix out(T - 1, std::vector<double>(n));
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      long double denom = 0.0L, nominal = 0.0L;
      for (std::size_t a = 0; a < n; ++a) {
        denom += w[b][a] * zt[t + 1][a];
        nominal += p_bar[b][a] * z[t + 1][a];
      }
      long double first = 0.0L, log_term = 0.0L;
      for (std::size_t a = 0; a < n; ++a) {
        if (p_bar[b][a] == 0.0) continue;
        const long double share = w[b][a] * zt[t + 1][a] / denom;
        const double p = p_bar[b][a];
        if (digamma) {
          first += share * (boost::math::digamma(k * p) - dk);
          log_term += share * std::log(static_cast<long double>(p));
        } else {
          first += share * ((-1.0 + p) / (2.0 * p * (k + 1.0)));
        }
      }
      long double dc = gamma * first + gamma * std::log(nominal) - gamma * std::log(denom);
      if (digamma) dc -= gamma * log_term;
      out[t][b] = static_cast<double>(dc);
    }
  }
  return out;
}

}  // namespace

Matrix TaylorCostDisplayed(const Matrix& p_bar, const UtilitySchedule& u, double gamma,
                           double k) {
  return CostFromWeights(p_bar, TaylorWeights(p_bar, k), u, gamma, false, k);
}

Matrix DigammaCostDisplayed(const Matrix& p_bar, const UtilitySchedule& u, double gamma,
                            double k) {
  return CostFromWeights(p_bar, DigammaWeights(p_bar, k), u, gamma, true, k);
}

Matrix OneStepCostDifference(const Matrix& p_bar, const Matrix& w,
                             const UtilitySchedule& u, double gamma) {
  const std::size_t n = p_bar.size(), T = u.horizon();
  const LMatrix z = LinearDesirability(p_bar, u, gamma);
  const LMatrix zt = LinearDesirability(w, u, gamma);
  const std::vector<Matrix> pol = LinearPolicy(p_bar, z);
  const std::vector<Matrix> priv = LinearPolicy(w, zt);
  const Matrix util = FromUtility(u);
  Matrix out(T - 1, std::vector<double>(n));
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      long double phi = -util[t][b], phi_t = -util[t][b];
      for (std::size_t a = 0; a < n; ++a) {
        if (p_bar[b][a] == 0.0) continue;
        const long double lp = std::log(static_cast<long double>(p_bar[b][a]));
        const long double p = pol[t][b][a], q = priv[t][b][a];
        if (p > 0.0L) phi += p * (gamma * std::log(p) - gamma * lp - gamma * std::log(z[t + 1][a]));
        if (q > 0.0L) phi_t += q * (gamma * std::log(q) - gamma * lp - gamma * std::log(zt[t + 1][a]));
      }
      out[t][b] = static_cast<double>(phi_t - phi);
    }
  }
  return out;
}

std::vector<double> ExpectedRatioSecondOrder(const std::vector<double>& p,
                                             const std::vector<double>& z, double k) {
  const std::size_t n = p.size();
  long double s = 0.0L;
  for (std::size_t a = 0; a < n; ++a) s += static_cast<long double>(p[a]) * z[a];
  // Var(Y) numerator: sum z^2 p (1 - p) - sum_a sum_{nu != a} z_a z_nu p_a p_nu.
  long double var_y = 0.0L;
  for (std::size_t a = 0; a < n; ++a) {
    var_y += static_cast<long double>(z[a]) * z[a] * p[a] * (1.0L - p[a]);
    for (std::size_t v = 0; v < n; ++v) {
      if (v != a) var_y -= static_cast<long double>(z[a]) * z[v] * p[a] * p[v];
    }
  }
  std::vector<double> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    long double cov = static_cast<long double>(z[a]) * z[a] * p[a] * (1.0L - p[a]);
    for (std::size_t v = 0; v < n; ++v) {
      if (v != a) cov -= static_cast<long double>(z[a]) * z[v] * p[a] * p[v];
    }
    const long double ex = static_cast<long double>(p[a]) * z[a];
    out[a] = static_cast<double>(ex / s - cov / ((k + 1.0L) * s * s) +
                                 ex * var_y / ((k + 1.0L) * s * s * s));
  }
  return out;
}

MomentZ DirichletMomentZ(const std::vector<std::vector<double>>& samples,
                         const std::vector<double>& zeta, double k) {
  const std::size_t d = zeta.size();
  const double n = static_cast<double>(samples.size());
  std::vector<long double> m(d, 0.0L);
  for (const auto& x : samples) {
    for (std::size_t i = 0; i < d; ++i) m[i] += x[i];
  }
  for (auto& v : m) v /= n;
  MomentZ z;
  for (std::size_t i = 0; i < d; ++i) {
    if (zeta[i] == 0.0) continue;
    for (std::size_t j = i; j < d; ++j) {
      if (zeta[j] == 0.0) continue;
      // Products of centred coordinates; their mean estimates the
      // (co)variance and their spread gives its standard error.
      long double s1 = 0.0L, s2 = 0.0L;
      for (const auto& x : samples) {
        const long double prod = (x[i] - m[i]) * (x[j] - m[j]);
        s1 += prod;
        s2 += prod * prod;
      }
      const long double mean_prod = s1 / n;
      const long double se = std::sqrt((s2 / n - mean_prod * mean_prod) / n);
      const double theory = i == j ? zeta[i] * (1.0 - zeta[i]) / (k + 1.0)
                                   : -zeta[i] * zeta[j] / (k + 1.0);
      const double dev = static_cast<double>(std::abs(mean_prod - theory) / se);
      if (i == j) {
        z.variance = std::max(z.variance, dev);
        const double mean_se = static_cast<double>(std::sqrt(mean_prod / n));
        z.mean = std::max(z.mean, static_cast<double>(std::abs(m[i] - zeta[i])) / mean_se);
      } else {
        z.covariance = std::max(z.covariance, dev);
      }
    }
  }
  return z;
}

double CloudOverlap(const std::vector<std::vector<double>>& cloud,
                    const std::vector<std::vector<double>>& other) {
  const std::size_t d = cloud.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& x : cloud) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += x[i] / cloud.size();
  }
  auto dist = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += (x[i] - mean[i]) * (x[i] - mean[i]);
    return std::sqrt(s);
  };
  std::vector<double> r;
  for (const auto& x : cloud) r.push_back(dist(x));
  std::sort(r.begin(), r.end());
  const double radius = r[static_cast<std::size_t>(0.95 * (r.size() - 1))];
  std::size_t inside = 0;
  for (const auto& x : other) inside += dist(x) <= radius;
  return static_cast<double>(inside) / other.size();
}

}  // namespace privmdp::oracle
