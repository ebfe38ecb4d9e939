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
#include <string>

namespace spc {

enum class ScaleKind { sd, mad, qn, mslog };

// Two published forms of the pairwise-difference scale: the median of
// all n(n-1)/2 absolute differences, and the C(h,2)-th order statistic
// of the same multiset with h = n/2 + 1 (the higher-efficiency form).
enum class QnVariant { median_of_pairs, order_statistic };

enum class LocationKind { mean, huber, hd, hl };

// Asymptotic consistency factor of the MAD, 1 / Phi^-1(3/4).
inline constexpr double kMadAsymptoticFactor = 1.4826022185056018;

struct ScaleSpec {
  ScaleKind kind = ScaleKind::sd;
  QnVariant qn_variant = QnVariant::median_of_pairs;
  // M-scale target in (0, 1); 0.5 gives the maximal 50% breakdown point.
  double kappa = 0.5;
  // Multiplicative finite-sample unbiasing factor for the sample size the
  // spec will be applied to (see correction_factor).
  double correction = 1.0;
};

struct LocationSpec {
  LocationKind kind = LocationKind::mean;
  double huber_c = 1.5;
  double huber_tol = 1e-10;
  int huber_max_iter = 100;
  // Factor applied to the raw MAD that forms Huber's auxiliary scale;
  // callers that know the list length substitute the n-specific factor.
  double huber_mad_correction = kMadAsymptoticFactor;
};

double mean(std::span<const double> xs);
// Midpoint convention for even sizes.
double median(std::span<const double> xs);

// sqrt(sum (x - mean)^2 / (n - 1)); n >= 2. Two-pass.
double sample_sd(std::span<const double> xs);

// med_j |x_j - med(x)|, before any correction factor; n >= 2.
double mad_raw(std::span<const double> xs);

// Pairwise absolute-difference scale, before any correction; n >= 2.
double qn_raw(std::span<const double> xs, QnVariant variant);

struct MslogResult {
  double sigma = 0.0;
  bool degenerate = false;  // no positive root: all mass at the center
};

// Logistic M-scale: the sigma > 0 solving
//   (1/n) sum rho((x_i - med(x)) / sigma) = kappa,
// with rho(u) = psi(u^2), psi(x) = (e^x - 1)/(e^x + 1) = tanh(x/2).
// rho is even, bounded by 1 and strictly increasing in |u|, so the left
// side is strictly decreasing in sigma and the root is found by a
// guarded bisection-Newton iteration to 1e-10 relative tolerance.
MslogResult mslog_raw(std::span<const double> xs, double kappa);

struct HuberResult {
  double value = 0.0;
  bool converged = true;
};

// Huber location M-estimate with psi(x) = min(c, max(x, -c)) and the
// corrected MAD of the same sample as auxiliary scale, solved by
// iteratively reweighted means from the median. A zero auxiliary scale
// falls back to the median.
HuberResult huber_m(std::span<const double> xs, const LocationSpec& spec);

// Weighted average of all order statistics with beta(a, a) weights,
// a = (n+1)/2 (the median case).
double harrell_davis_median(std::span<const double> xs);

// Median of the n(n-1)/2 pairwise averages (x_i + x_j)/2, i < j.
double hodges_lehmann(std::span<const double> xs);

struct ScaleEstimate {
  double value = 0.0;
  bool degenerate = false;
};

// correction * raw estimate of the configured kind. Zero-spread samples
// yield value 0 with the degenerate flag set.
ScaleEstimate scale_estimate(std::span<const double> xs, const ScaleSpec& spec);

struct LocateResult {
  double value = 0.0;
  bool ok = true;  // false only on Huber non-convergence
};

LocateResult locate(std::span<const double> values, const LocationSpec& spec);

inline constexpr std::int64_t kDefaultCorrectionReplicates = 1'000'000;

// Monte Carlo unbiasing factor: 1 / E[raw estimate] over `replicates`
// N(0,1) samples of size n, so that E[f * raw] = 1. Deterministic for a
// given seed at any thread count. replicates >= 100.
double correction_factor(const ScaleSpec& spec, int n, std::int64_t replicates,
                         std::uint64_t seed, int threads = 1);

// Names used on the CLI, in config files and in calibration-store keys:
// sd | mad | qn | qn-rc | mslog and mean | huber | hd | hl.
std::string scale_name(const ScaleSpec& spec);
std::string location_name(LocationKind kind);
ScaleSpec parse_scale_name(const std::string& name);
LocationKind parse_location_name(const std::string& name);

}  // namespace spc
