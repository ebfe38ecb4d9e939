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

#pragma once

#include <cstdint>
#include <span>

#include "contamination.hpp"
#include "estimators.hpp"

namespace spc {

inline constexpr double kDefaultTargetArl0 = 370.4;
inline constexpr std::int64_t kDefaultAlphaReplicates = 20'000;

// Everything that determines a chart: Phase I dimensions, the estimator
// pair (with corrections already resolved for n and k), and the in-control
// ARL the limits are calibrated to. The Phase II statistic is the plain
// sample standard deviation of each incoming subgroup.
struct ChartConfig {
  int n = 5;
  int k = 50;
  ScaleSpec scale;
  LocationSpec location;
  double target_arl0 = kDefaultTargetArl0;
};

struct ControlLimits {
  double center = 0.0;  // Phase I sigma-hat
  double lcl = 0.0;
  double ucl = 0.0;
  double l_factor = 0.0;  // lcl = l_factor * center
  double u_factor = 0.0;
  double alpha = 0.0;  // two-sided tail mass the factors encode
};

struct SigmaHat {
  double value = 0.0;
  bool ok = false;  // positive and the location step converged
  int degenerate_subgroups = 0;
};

// Per-subgroup corrected scale estimates located across subgroups.
// Throws only if every subgroup is degenerate.
SigmaHat phase1_sigma_hat(const Phase1Data& data, const ScaleSpec& scale,
                          const LocationSpec& location);

// Equal-tailed probability limits for the sample SD of n in-control
// observations: l = sqrt(chi2_quantile(alpha/2, n-1)/(n-1)) and the
// mirror image for u; the limits absorb all constants and the Phase II
// statistic is used uncorrected.
ControlLimits limits_for_alpha(double sigma_hat, int n, double alpha);

// Exact probability that the sample SD of n independent N(mu, (phi*sigma)^2)
// observations falls outside [lcl, ucl].
double signal_probability(double lcl, double ucl, double sigma_true, double phi, int n);
double signal_probability(const ControlLimits& limits, double sigma_true, double phi, int n);

struct AlphaCalibration {
  double alpha_star = 0.0;
  double achieved_arl0 = 0.0;  // on the calibration sample
  std::int64_t used = 0;
  std::int64_t excluded = 0;
};

// Bisection on log(alpha) over [1e-6, 0.2] against the common-random-
// numbers objective mean_i 1/p_i(alpha), which is deterministic and
// monotone decreasing in alpha. sigma_hats are in-control Phase I
// estimates with the true scale normalized to 1.
AlphaCalibration calibrate_alpha_for_sigma_hats(std::span<const double> sigma_hats, int n,
                                                double target_arl0, int threads);

// Draws `replicates` clean Phase I datasets (seed, replicate id) and
// calibrates alpha so the unconditional in-control ARL hits the target.
AlphaCalibration calibrate_alpha(const ChartConfig& config, std::int64_t replicates,
                                 std::uint64_t seed, int threads);

struct ArlEstimate {
  double arl = 0.0;
  double std_error = 0.0;
  std::int64_t used = 0;
  std::int64_t excluded = 0;
  bool valid = false;  // false when exclusions exceed 1%
};

// Unconditional ARL at disturbance phi: mean of conditional run lengths
// 1/p_i over fresh Phase I replicates drawn from `model`, with limits
// built from alpha_star. Degenerate replicates are excluded and counted.
ArlEstimate unconditional_arl(const ChartConfig& config, double alpha_star,
                              const OutlierModel& model, double phi, std::int64_t replicates,
                              std::uint64_t seed, int threads);

}  // namespace spc
