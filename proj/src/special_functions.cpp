// Copyright 2026 the spc-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "special_functions.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace spc {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxSeriesIter = 500;

// Modified Lentz continued fraction for the incomplete beta.
double beta_cf(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxSeriesIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 10.0 * kEps) break;
  }
  return h;
}

// Lower incomplete gamma by series, returns P(s, x) for x < s + 1.
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double ap = s;
  for (int i = 0; i < kMaxSeriesIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Upper incomplete gamma Q(s, x) by continued fraction, for x >= s + 1.
double gamma_q_cf(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxSeriesIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 10.0 * kEps) break;
  }
  return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Safeguarded bisection-Newton inversion of a monotone CDF on the
// bracket [lo, hi], assumed to contain the solution.
double invert_cdf(const std::function<double(double)>& cdf, const std::function<double(double)>& pdf,
                  double p, double lo, double hi) {
  constexpr int kMaxIter = 200;
  constexpr double kPTol = 1e-12;
  double flo = cdf(lo) - p;
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < kMaxIter; ++i) {
    const double fx = cdf(x) - p;
    if (std::fabs(fx) <= kPTol) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double slope = pdf(x);
    double next = (slope > 0.0) ? x - fx / slope : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= kEps * (std::fabs(lo) + std::fabs(hi))) return 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_inc_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(x, a, b) / a;
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double reg_lower_gamma(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("reg_lower_gamma: s must be positive");
  if (x < 0.0) throw std::domain_error("reg_lower_gamma: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return gamma_p_series(s, x);
  return 1.0 - gamma_q_cf(s, x);
}

double chi2_cdf(double x, int df) {
  if (df <= 0) throw std::domain_error("chi2_cdf: df must be positive");
  if (x < 0.0) throw std::domain_error("chi2_cdf: x must be nonnegative");
  return reg_lower_gamma(0.5 * df, 0.5 * x);
}

double chi2_pdf(double x, int df) {
  if (df <= 0) throw std::domain_error("chi2_pdf: df must be positive");
  if (x < 0.0) return 0.0;
  const double s = 0.5 * df;
  if (x == 0.0) return df == 2 ? 0.5 : (df < 2 ? std::numeric_limits<double>::infinity() : 0.0);
  return std::exp((s - 1.0) * std::log(x) - 0.5 * x - s * std::log(2.0) - std::lgamma(s));
}

double chi2_quantile(double p, int df) {
  if (df <= 0) throw std::domain_error("chi2_quantile: df must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p must lie in (0, 1)");
  double hi = df + 10.0 * std::sqrt(2.0 * df) + 10.0;
  while (chi2_cdf(hi, df) < p && hi < 1e12) hi *= 2.0;
  return invert_cdf([df](double x) { return chi2_cdf(x, df); },
                    [df](double x) { return chi2_pdf(x, df); }, p, 0.0, hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  double lo = -1.0, hi = 1.0;
  while (normal_cdf(lo) > p && lo > -45.0) lo *= 2.0;
  while (normal_cdf(hi) < p && hi < 45.0) hi *= 2.0;
  return invert_cdf([](double z) { return normal_cdf(z); },
                    [](double z) { return normal_pdf(z); }, p, lo, hi);
}

}  // namespace spc
