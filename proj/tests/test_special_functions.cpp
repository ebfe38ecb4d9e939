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

#include <doctest.h>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "special_functions.hpp"

using namespace spc;

namespace {

// Adaptive Simpson quadrature; the independent oracle for the incomplete
// beta and the quantile checks below.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, fm, flm, 0.5 * eps, depth - 1) +
         simpson(f, m, b, fm, fb, frm, 0.5 * eps, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-13) {
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(b), f(m), eps, 48);
}

double beta_cdf_by_quadrature(double x, double a, double b) {
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const auto density = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(log_norm + (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t));
  };
  return integrate(density, 0.0, x);
}

// Plain bisection against the CDF, independent of the Newton path used
// by the library quantiles.
double bisect_quantile(const std::function<double(double)>& cdf, double p, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("special_functions") {
  TEST_CASE("incomplete beta known values") {
    CHECK(reg_inc_beta(0.5, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    // Closed form for a = b = 2: I_x = 3x^2 - 2x^3.
    const double x = 1.0 / 3.0;
    CHECK(reg_inc_beta(x, 2.0, 2.0) ==
          doctest::Approx(3.0 * x * x - 2.0 * x * x * x).epsilon(1e-12));
    CHECK(reg_inc_beta(0.0, 3.5, 2.0) == 0.0);
    CHECK(reg_inc_beta(1.0, 3.5, 2.0) == 1.0);
  }

  TEST_CASE("incomplete beta matches quadrature") {
    for (const auto& [a, b] : {std::pair{0.7, 2.3}, {3.0, 3.0}, {25.5, 25.5}, {5.0, 1.5}}) {
      for (double x : {0.05, 0.3, 0.5, 0.77, 0.95}) {
        CHECK(reg_inc_beta(x, a, b) ==
              doctest::Approx(beta_cdf_by_quadrature(x, a, b)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("incomplete beta symmetry and monotonicity") {
    for (const auto& [a, b] : {std::pair{1.5, 4.0}, {3.0, 3.0}, {12.5, 0.8}}) {
      double prev = -1.0;
      for (int i = 0; i <= 50; ++i) {
        const double x = i / 50.0;
        const double v = reg_inc_beta(x, a, b);
        CHECK(v >= prev);
        prev = v;
        CHECK(v + reg_inc_beta(1.0 - x, b, a) == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("incomplete beta domain errors") {
    CHECK_THROWS_AS((void)reg_inc_beta(-0.1, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)reg_inc_beta(1.1, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)reg_inc_beta(0.5, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)reg_inc_beta(0.5, 1.0, -2.0), std::domain_error);
  }

  TEST_CASE("chi-square cdf closed forms") {
    CHECK(chi2_cdf(0.0, 5) == 0.0);
    // df = 2 is exponential: F(x) = 1 - exp(-x/2).
    CHECK(chi2_cdf(2.0, 2) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(chi2_cdf(1e6, 3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)chi2_cdf(-1.0, 3), std::domain_error);
    CHECK_THROWS_AS((void)chi2_cdf(1.0, 0), std::domain_error);
  }

  TEST_CASE("chi-square quantile against closed form and bisection oracle") {
    CHECK(chi2_quantile(1.0 - std::exp(-1.0), 2) == doctest::Approx(2.0).epsilon(1e-10));
    const double median1 = bisect_quantile([](double x) { return chi2_cdf(x, 1); }, 0.5, 0.0, 10.0);
    CHECK(chi2_quantile(0.5, 1) == doctest::Approx(median1).epsilon(1e-9));
    CHECK(median1 == doctest::Approx(0.4549).epsilon(1e-3));
    CHECK_THROWS_AS((void)chi2_quantile(0.0, 3), std::domain_error);
    CHECK_THROWS_AS((void)chi2_quantile(1.0, 3), std::domain_error);
  }

  TEST_CASE("chi-square round trips over a probability grid") {
    for (int df : {1, 2, 4, 9, 24, 99}) {
      for (double p : {1e-6, 1e-3, 0.00135, 0.1, 0.5, 0.9, 0.99865, 1.0 - 1e-6}) {
        const double x = chi2_quantile(p, df);
        CHECK(chi2_cdf(x, df) == doctest::Approx(p).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("chi-square(1) quantile equals squared normal quantile") {
    for (double q : {0.00135, 0.1, 0.5, 0.9, 0.99865}) {
      const double z = normal_quantile(0.5 * (1.0 + q));
      CHECK(chi2_quantile(q, 1) == doctest::Approx(z * z).epsilon(1e-9));
    }
  }

  TEST_CASE("normal cdf and quantile") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    const double q75 = bisect_quantile([](double z) { return normal_cdf(z); }, 0.75, 0.0, 3.0);
    CHECK(normal_quantile(0.75) == doctest::Approx(q75).epsilon(1e-10));
    CHECK(normal_quantile(0.75) == doctest::Approx(0.674490).epsilon(1e-5));
    CHECK_THROWS_AS((void)normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS((void)normal_quantile(1.0), std::domain_error);
  }

  TEST_CASE("normal round trip over |z| <= 6") {
    for (double z = -6.0; z <= 6.0; z += 0.25) {
      CHECK(normal_quantile(normal_cdf(z)) == doctest::Approx(z).epsilon(1e-9));
    }
    for (double p : {1e-6, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-6}) {
      CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    }
  }
}
