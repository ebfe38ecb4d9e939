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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "estimators.hpp"
#include "rng.hpp"
#include "special_functions.hpp"

using namespace spc;

namespace {

std::vector<double> random_sample(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = dist(gen);
  return xs;
}

// Exhaustive pairwise oracles.
double qn_pairs_oracle(const std::vector<double>& xs, QnVariant variant) {
  std::vector<double> diffs;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      diffs.push_back(std::fabs(xs[i] - xs[j]));
  std::sort(diffs.begin(), diffs.end());
  if (variant == QnVariant::median_of_pairs) {
    const std::size_t m = diffs.size();
    return m % 2 == 1 ? diffs[m / 2] : 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]);
  }
  const std::size_t h = xs.size() / 2 + 1;
  return diffs[h * (h - 1) / 2 - 1];
}

double hl_oracle(const std::vector<double>& xs) {
  std::vector<double> walsh;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) walsh.push_back(0.5 * (xs[i] + xs[j]));
  std::sort(walsh.begin(), walsh.end());
  const std::size_t m = walsh.size();
  return m % 2 == 1 ? walsh[m / 2] : 0.5 * (walsh[m / 2 - 1] + walsh[m / 2]);
}

// Direct weighted-order-statistic evaluation with incomplete beta weights.
double hd_oracle(const std::vector<double>& xs) {
  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(xs.size());
  const double a = 0.5 * (n + 1.0);
  double est = 0.0;
  for (std::size_t i = 1; i <= xs.size(); ++i) {
    const double w = reg_inc_beta(i / n, a, a) - reg_inc_beta((i - 1) / n, a, a);
    est += w * sorted[i - 1];
  }
  return est;
}

double huber_objective(const std::vector<double>& xs, double t, double sigma, double c) {
  double sum = 0.0;
  for (double x : xs) sum += std::clamp((x - t) / sigma, -c, c);
  return sum;
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("mean and median basics") {
    CHECK(mean(std::vector<double>{1, 2, 3}) == 2.0);
    CHECK(mean(std::vector<double>{-5, 5}) == 0.0);
    CHECK(mean(std::vector<double>{4, 4, 4, 4}) == 4.0);
    CHECK(median(std::vector<double>{3, 1, 2}) == 2.0);
    CHECK(median(std::vector<double>{1, 2, 3, 4}) == 2.5);
    CHECK(median(std::vector<double>{7}) == 7.0);
    CHECK_THROWS_AS((void)mean(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS((void)median(std::vector<double>{}), std::invalid_argument);
  }

  TEST_CASE("sample sd") {
    CHECK(sample_sd(std::vector<double>{1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sample_sd(std::vector<double>{5, 5, 5, 5}) == 0.0);
    // Two-pass result against the direct definition.
    const std::vector<double> xs{0, 0, 0, 0, 12};
    const double m = 12.0 / 5.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    CHECK(sample_sd(xs) == doctest::Approx(std::sqrt(ss / 4.0)).epsilon(1e-12));
    CHECK_THROWS_AS((void)sample_sd(std::vector<double>{1}), std::invalid_argument);
  }

  TEST_CASE("raw MAD") {
    CHECK(mad_raw(std::vector<double>{1, 2, 3, 4, 5}) == 1.0);
    CHECK(mad_raw(std::vector<double>{2, 2, 2}) == 0.0);
    // A single extreme point cannot move the MAD at n = 4.
    CHECK(mad_raw(std::vector<double>{0, 0, 0, 1e6}) == 0.0);
  }

  TEST_CASE("raw qn, both variants") {
    const std::vector<double> xs{1, 3, 6};
    CHECK(qn_raw(xs, QnVariant::median_of_pairs) == 3.0);  // diffs {2, 5, 3}
    CHECK(qn_raw(xs, QnVariant::order_statistic) == 2.0);  // h = 2, k = 1
    CHECK(qn_raw(std::vector<double>{4, 4, 4, 4}, QnVariant::median_of_pairs) == 0.0);
    CHECK(qn_raw(std::vector<double>{4, 4, 4, 4}, QnVariant::order_statistic) == 0.0);
  }

  TEST_CASE("qn and hodges-lehmann match exhaustive enumeration for n <= 8") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 2 + trial % 7;
      const std::vector<double> xs = random_sample(gen, n);
      CHECK(qn_raw(xs, QnVariant::median_of_pairs) == qn_pairs_oracle(xs, QnVariant::median_of_pairs));
      CHECK(qn_raw(xs, QnVariant::order_statistic) == qn_pairs_oracle(xs, QnVariant::order_statistic));
      CHECK(hodges_lehmann(xs) == hl_oracle(xs));
    }
  }

  TEST_CASE("hodges-lehmann basics") {
    CHECK(hodges_lehmann(std::vector<double>{1, 2, 3}) == 2.0);  // walsh {1.5, 2, 2.5}
    CHECK(hodges_lehmann(std::vector<double>{0, 10}) == 5.0);
    CHECK(hodges_lehmann(std::vector<double>{42}) == 42.0);
    // Symmetric sample centers exactly.
    CHECK(hodges_lehmann(std::vector<double>{-3, -1, 1, 3}) == 0.0);
  }

  TEST_CASE("harrell-davis median") {
    // n = 3 weights have the closed form (7/27, 13/27, 7/27).
    CHECK(harrell_davis_median(std::vector<double>{1, 2, 3}) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(harrell_davis_median(std::vector<double>{9, 9, 9, 9}) ==
          doctest::Approx(9.0).epsilon(1e-12));
    const double direct =
        (7.0 / 27.0) * 10.0 + (13.0 / 27.0) * 20.0 + (7.0 / 27.0) * 40.0;
    CHECK(harrell_davis_median(std::vector<double>{20, 10, 40}) ==
          doctest::Approx(direct).epsilon(1e-12));

    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
      const std::vector<double> xs = random_sample(gen, 2 + trial % 7);
      CHECK(harrell_davis_median(xs) == doctest::Approx(hd_oracle(xs)).epsilon(1e-10));
    }
  }

  TEST_CASE("mslog closed form and degeneracy") {
    // For {-1, 1} the center is 0 and the equation reduces to
    // tanh(1/(2 sigma^2)) = kappa, so sigma = 1/sqrt(ln 3) at kappa = 0.5.
    const MslogResult r = mslog_raw(std::vector<double>{-1.0, 1.0}, 0.5);
    CHECK_FALSE(r.degenerate);
    CHECK(r.sigma == doctest::Approx(1.0 / std::sqrt(std::log(3.0))).epsilon(1e-9));

    const MslogResult c = mslog_raw(std::vector<double>{4, 4, 4}, 0.5);
    CHECK(c.degenerate);
    CHECK(c.sigma == 0.0);
    CHECK_THROWS_AS((void)mslog_raw(std::vector<double>{1, 2}, 1.5), std::invalid_argument);
  }

  TEST_CASE("mslog scale equivariance and bisection cross-check") {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 50; ++trial) {
      const std::vector<double> xs = random_sample(gen, 5 + trial % 10);
      const double sigma = mslog_raw(xs, 0.5).sigma;
      std::vector<double> scaled(xs);
      for (auto& x : scaled) x *= 3.5;
      CHECK(mslog_raw(scaled, 0.5).sigma == doctest::Approx(3.5 * sigma).epsilon(1e-8));

      // Plain bisection oracle on the defining equation.
      const double center = median(xs);
      const auto g = [&](double s) {
        double sum = 0.0;
        for (double x : xs) {
          const double u = (x - center) / s;
          sum += std::tanh(0.5 * u * u);
        }
        return sum / xs.size() - 0.5;
      };
      double lo = 1e-6, hi = 1e6;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      CHECK(sigma == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-8));
    }
  }

  TEST_CASE("huber m-estimator") {
    LocationSpec spec;
    spec.kind = LocationKind::huber;

    // All residuals inside the linear zone: equals the mean.
    const std::vector<double> tight{0.9, 1.0, 1.1, 1.05, 0.95};
    const HuberResult linear = huber_m(tight, spec);
    CHECK(linear.converged);
    CHECK(linear.value == doctest::Approx(mean(tight)).epsilon(1e-9));

    // Zero auxiliary scale falls back to the median.
    const HuberResult flat = huber_m(std::vector<double>{0, 0, 0, 0, 0}, spec);
    CHECK(flat.converged);
    CHECK(flat.value == 0.0);

    // Root of the defining equation, found independently by bisection on t.
    const std::vector<double> xs{-1, 0, 1, 8};
    spec.huber_mad_correction = kMadAsymptoticFactor;
    const double sigma_aux = spec.huber_mad_correction * mad_raw(xs);
    double lo = -1.0, hi = 8.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (huber_objective(xs, mid, sigma_aux, spec.huber_c) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    const HuberResult r = huber_m(xs, spec);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-7));
    CHECK(r.value > 0.0);
    CHECK(r.value < mean(xs));
  }

  TEST_CASE("location equivariance under affine maps") {
    std::mt19937_64 gen(37);
    LocationSpec spec;
    for (const LocationKind kind :
         {LocationKind::mean, LocationKind::huber, LocationKind::hd, LocationKind::hl}) {
      spec.kind = kind;
      for (int trial = 0; trial < 30; ++trial) {
        const std::vector<double> xs = random_sample(gen, 5 + trial % 12);
        const double base = locate(xs, spec).value;
        const double aa = 2.5, bb = -7.0;
        std::vector<double> mapped(xs);
        for (auto& x : mapped) x = aa * x + bb;
        CHECK(locate(mapped, spec).value == doctest::Approx(aa * base + bb).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("scale equivariance and translation invariance, negative multipliers too") {
    std::mt19937_64 gen(41);
    for (const char* name : {"sd", "mad", "qn", "qn-rc", "mslog"}) {
      ScaleSpec spec = parse_scale_name(name);
      for (int trial = 0; trial < 30; ++trial) {
        const std::vector<double> xs = random_sample(gen, 5 + trial % 12);
        const double base = scale_estimate(xs, spec).value;
        for (const double aa : {3.0, -2.0}) {
          std::vector<double> mapped(xs);
          for (auto& x : mapped) x = aa * x + 11.0;
          CHECK(scale_estimate(mapped, spec).value ==
                doctest::Approx(std::fabs(aa) * base).epsilon(1e-8));
        }
      }
    }
  }

  TEST_CASE("permutation invariance") {
    std::mt19937_64 gen(43);
    const std::vector<double> xs = random_sample(gen, 17);
    std::vector<double> shuffled(xs);
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    for (const char* name : {"sd", "mad", "qn", "qn-rc", "mslog"}) {
      const ScaleSpec spec = parse_scale_name(name);
      CHECK(scale_estimate(shuffled, spec).value ==
            doctest::Approx(scale_estimate(xs, spec).value).epsilon(1e-12));
    }
    LocationSpec loc;
    for (const LocationKind kind :
         {LocationKind::mean, LocationKind::huber, LocationKind::hd, LocationKind::hl}) {
      loc.kind = kind;
      CHECK(locate(shuffled, loc).value ==
            doctest::Approx(locate(xs, loc).value).epsilon(1e-12));
    }
  }

  TEST_CASE("breakdown probes at n = 20") {
    std::mt19937_64 gen(47);
    const std::vector<double> clean = random_sample(gen, 20);
    const double big = 1e12;

    const auto contaminate = [&](int m) {
      std::vector<double> xs(clean);
      for (int i = 0; i < m; ++i) xs[static_cast<std::size_t>(i)] = big;
      return xs;
    };

    // Mean and SD blow up with a single replaced point.
    CHECK(std::fabs(mean(contaminate(1))) > 1e8);
    CHECK(sample_sd(contaminate(1)) > 1e8);

    LocationSpec huber_spec;
    huber_spec.kind = LocationKind::huber;
    const auto bounded = [&](double contaminated_value, double clean_value) {
      return std::fabs(contaminated_value) <= 10.0 * std::max(std::fabs(clean_value), 1.0);
    };

    // 45% replacement: the high-breakdown estimators stay put.
    const std::vector<double> at9 = contaminate(9);
    CHECK(bounded(mad_raw(at9), mad_raw(clean)));
    CHECK(bounded(qn_raw(at9, QnVariant::order_statistic),
                  qn_raw(clean, QnVariant::order_statistic)));
    CHECK(bounded(mslog_raw(at9, 0.5).sigma, mslog_raw(clean, 0.5).sigma));
    CHECK(bounded(locate(at9, huber_spec).value, locate(clean, huber_spec).value));

    // The median-of-pairs form of qn gives up earlier: at 45% replacement
    // fewer than half of the pairwise differences stay clean-vs-clean or
    // outlier-vs-outlier, so its median escapes. 35% is still safe.
    CHECK_FALSE(bounded(qn_raw(at9, QnVariant::median_of_pairs),
                        qn_raw(clean, QnVariant::median_of_pairs)));
    CHECK(bounded(qn_raw(contaminate(7), QnVariant::median_of_pairs),
                  qn_raw(clean, QnVariant::median_of_pairs)));

    // Hodges-Lehmann: bounded at 25%, gone at 45%.
    CHECK(bounded(hodges_lehmann(contaminate(5)), hodges_lehmann(clean)));
    CHECK_FALSE(bounded(hodges_lehmann(at9), hodges_lehmann(clean)));
  }

  TEST_CASE("correction factor definitions and asymptotics") {
    const std::uint64_t cal_seed = 555;
    ScaleSpec mad_spec = parse_scale_name("mad");
    // Asymptotic MAD consistency factor at n = 1000.
    const double f_mad = correction_factor(mad_spec, 1000, 20000, cal_seed, 2);
    CHECK(f_mad == doctest::Approx(kMadAsymptoticFactor).epsilon(0.01));

    const double f_sd = correction_factor(parse_scale_name("sd"), 1000, 20000, cal_seed, 2);
    CHECK(f_sd == doctest::Approx(1.0).epsilon(0.005));

    // Definitional identity on the calibration sample itself.
    const int reps = 2000;
    const double f = correction_factor(mad_spec, 5, reps, cal_seed, 1);
    double sum = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream s(cal_seed, static_cast<std::uint64_t>(rep), StreamRole::calibration);
      std::vector<double> xs(5);
      for (auto& x : xs) x = s.normal();
      sum += mad_raw(xs);
    }
    CHECK(f * (sum / reps) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)correction_factor(mad_spec, 5, 50, 1, 1), std::invalid_argument);
  }

  TEST_CASE("corrected estimates are unbiased and variant corrections differ") {
    const std::uint64_t seed = 99;
    ScaleSpec qn_mp = parse_scale_name("qn");
    ScaleSpec qn_rc = parse_scale_name("qn-rc");
    const double f_mp = correction_factor(qn_mp, 5, 200000, seed, 2);
    const double f_rc = correction_factor(qn_rc, 5, 200000, seed, 2);
    CHECK(f_mp != doctest::Approx(f_rc).epsilon(0.01));

    // Fresh draws: corrected MAD mean within 1% of 1.
    ScaleSpec mad_spec = parse_scale_name("mad");
    mad_spec.correction = correction_factor(mad_spec, 5, 200000, seed, 2);
    double sum = 0.0;
    const int reps = 100000;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream s(4242, static_cast<std::uint64_t>(rep), StreamRole::phase1_data);
      std::vector<double> xs(5);
      for (auto& x : xs) x = s.normal();
      sum += scale_estimate(xs, mad_spec).value;
    }
    CHECK(sum / reps == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("locate dispatch") {
    LocationSpec spec;
    spec.kind = LocationKind::mean;
    CHECK(locate(std::vector<double>{1, 2, 3}, spec).value == 2.0);
    spec.kind = LocationKind::hd;
    CHECK(locate(std::vector<double>{-2, 0, 2}, spec).value == doctest::Approx(0.0));
    spec.kind = LocationKind::hl;
    CHECK(locate(std::vector<double>{1, 2, 3}, spec).value == 2.0);
    CHECK_THROWS_AS((void)locate(std::vector<double>{}, spec), std::invalid_argument);
  }

  TEST_CASE("estimator names round trip") {
    for (const char* name : {"sd", "mad", "qn", "qn-rc", "mslog"})
      CHECK(scale_name(parse_scale_name(name)) == name);
    for (const char* name : {"mean", "huber", "hd", "hl"})
      CHECK(location_name(parse_location_name(name)) == name);
    CHECK_THROWS_AS((void)parse_scale_name("iqr"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_location_name("mode"), std::invalid_argument);
  }
}
