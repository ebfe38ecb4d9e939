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

#include "chart.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "special_functions.hpp"

namespace spc {
namespace {

constexpr double kAlphaBracketLo = 1e-6;
constexpr double kAlphaBracketHi = 0.2;
constexpr double kMinSignalProbability = 1e-300;

// Conditional ARLs averaged in replicate order; exclusions flagged out
// of band with p <= 0 sentinels.
struct ReplicateOutcome {
  double sigma_hat = 0.0;
  bool ok = false;
};

double mean_inverse_p(std::span<const double> sigma_hats, double l, double u, int n,
                      int threads) {
  const std::int64_t count = static_cast<std::int64_t>(sigma_hats.size());
  std::vector<double> inv(sigma_hats.size());
  parallel_for(count, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const double s = sigma_hats[static_cast<std::size_t>(i)];
      const double p = signal_probability(l * s, u * s, 1.0, 1.0, n);
      inv[static_cast<std::size_t>(i)] = 1.0 / std::max(p, kMinSignalProbability);
    }
  });
  double sum = 0.0;
  for (double v : inv) sum += v;
  return sum / static_cast<double>(count);
}

}  // namespace

SigmaHat phase1_sigma_hat(const Phase1Data& data, const ScaleSpec& scale,
                          const LocationSpec& location) {
  std::vector<double> scales(static_cast<std::size_t>(data.k));
  int degenerate = 0;
  for (int i = 0; i < data.k; ++i) {
    const ScaleEstimate est = scale_estimate(data.subgroup(i), scale);
    scales[static_cast<std::size_t>(i)] = est.value;
    if (est.degenerate) ++degenerate;
  }
  SigmaHat result;
  result.degenerate_subgroups = degenerate;
  if (degenerate == data.k) return result;  // flagged, value 0
  const LocateResult loc = locate(scales, location);
  result.value = loc.value;
  result.ok = loc.ok && loc.value > 0.0;
  return result;
}

ControlLimits limits_for_alpha(double sigma_hat, int n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("limits_for_alpha: alpha must lie in (0, 1)");
  if (n < 2) throw std::invalid_argument("limits_for_alpha: n must be >= 2");
  if (!(sigma_hat > 0.0)) throw std::invalid_argument("limits_for_alpha: sigma_hat must be positive");
  const int nu = n - 1;
  ControlLimits limits;
  limits.center = sigma_hat;
  limits.alpha = alpha;
  limits.l_factor = std::sqrt(chi2_quantile(0.5 * alpha, nu) / nu);
  limits.u_factor = std::sqrt(chi2_quantile(1.0 - 0.5 * alpha, nu) / nu);
  limits.lcl = limits.l_factor * sigma_hat;
  limits.ucl = limits.u_factor * sigma_hat;
  return limits;
}

double signal_probability(double lcl, double ucl, double sigma_true, double phi, int n) {
  if (!(phi > 0.0) || !(sigma_true > 0.0))
    throw std::invalid_argument("signal_probability: phi and sigma_true must be positive");
  if (n < 2) throw std::invalid_argument("signal_probability: n must be >= 2");
  if (lcl < 0.0 || ucl <= lcl) throw std::invalid_argument("signal_probability: need 0 <= lcl < ucl");
  const int nu = n - 1;
  const double scale = phi * sigma_true;
  const double lo = lcl / scale;
  const double hi = ucl / scale;
  // (n-1) s^2 / (phi sigma)^2 is chi-square with n-1 degrees of freedom.
  const double inside = chi2_cdf(nu * hi * hi, nu) - chi2_cdf(nu * lo * lo, nu);
  return 1.0 - inside;
}

double signal_probability(const ControlLimits& limits, double sigma_true, double phi, int n) {
  return signal_probability(limits.lcl, limits.ucl, sigma_true, phi, n);
}

AlphaCalibration calibrate_alpha_for_sigma_hats(std::span<const double> sigma_hats, int n,
                                                double target_arl0, int threads) {
  if (sigma_hats.empty()) throw CalibrationError("calibrate_alpha: no usable replicates");
  if (!(target_arl0 > 1.0)) throw std::invalid_argument("calibrate_alpha: target must exceed 1");

  const auto arl_at = [&](double alpha) {
    const int nu = n - 1;
    const double l = std::sqrt(chi2_quantile(0.5 * alpha, nu) / nu);
    const double u = std::sqrt(chi2_quantile(1.0 - 0.5 * alpha, nu) / nu);
    return mean_inverse_p(sigma_hats, l, u, n, threads);
  };

  double lo = std::log(kAlphaBracketLo);
  double hi = std::log(kAlphaBracketHi);
  const double arl_lo = arl_at(kAlphaBracketLo);
  const double arl_hi = arl_at(kAlphaBracketHi);
  if (arl_lo < target_arl0 || arl_hi > target_arl0)
    throw CalibrationError("calibrate_alpha: target ARL0 " + std::to_string(target_arl0) +
                           " outside the achievable range [" + std::to_string(arl_hi) + ", " +
                           std::to_string(arl_lo) + "] for alpha in [1e-6, 0.2]");

  AlphaCalibration out;
  out.used = static_cast<std::int64_t>(sigma_hats.size());
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double arl = arl_at(std::exp(mid));
    out.alpha_star = std::exp(mid);
    out.achieved_arl0 = arl;
    if (std::fabs(arl - target_arl0) <= 1e-7 * target_arl0) break;
    if (arl > target_arl0)
      lo = mid;  // ARL too high: tighten the limits
    else
      hi = mid;
    if (hi - lo < 1e-14) break;
  }
  return out;
}

AlphaCalibration calibrate_alpha(const ChartConfig& config, std::int64_t replicates,
                                 std::uint64_t seed, int threads) {
  if (replicates < 100) throw std::invalid_argument("calibrate_alpha: needs >= 100 replicates");
  const OutlierModel clean{};
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t rep = begin; rep < end; ++rep) {
      const Phase1Data data =
          sample_phase1(clean, config.k, config.n, seed, static_cast<std::uint64_t>(rep));
      const SigmaHat sh = phase1_sigma_hat(data, config.scale, config.location);
      outcomes[static_cast<std::size_t>(rep)] = {sh.value, sh.ok};
    }
  });

  std::vector<double> sigma_hats;
  sigma_hats.reserve(outcomes.size());
  std::int64_t excluded = 0;
  for (const auto& o : outcomes) {
    if (o.ok)
      sigma_hats.push_back(o.sigma_hat);
    else
      ++excluded;
  }
  AlphaCalibration out =
      calibrate_alpha_for_sigma_hats(sigma_hats, config.n, config.target_arl0, threads);
  out.excluded = excluded;
  return out;
}

ArlEstimate unconditional_arl(const ChartConfig& config, double alpha_star,
                              const OutlierModel& model, double phi, std::int64_t replicates,
                              std::uint64_t seed, int threads) {
  if (replicates < 2) throw std::invalid_argument("unconditional_arl: needs >= 2 replicates");
  const int nu = config.n - 1;
  const double l = std::sqrt(chi2_quantile(0.5 * alpha_star, nu) / nu);
  const double u = std::sqrt(chi2_quantile(1.0 - 0.5 * alpha_star, nu) / nu);

  std::vector<double> run_lengths(static_cast<std::size_t>(replicates));
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(replicates), 0);
  parallel_for(replicates, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t rep = begin; rep < end; ++rep) {
      const Phase1Data data =
          sample_phase1(model, config.k, config.n, seed, static_cast<std::uint64_t>(rep));
      const SigmaHat sh = phase1_sigma_hat(data, config.scale, config.location);
      if (!sh.ok) continue;
      const double p = signal_probability(l * sh.value, u * sh.value, 1.0, phi, config.n);
      if (!(p > kMinSignalProbability)) continue;
      run_lengths[static_cast<std::size_t>(rep)] = 1.0 / p;
      keep[static_cast<std::size_t>(rep)] = 1;
    }
  });

  double sum = 0.0;
  std::int64_t used = 0;
  for (std::size_t i = 0; i < run_lengths.size(); ++i) {
    if (!keep[i]) continue;
    sum += run_lengths[i];
    ++used;
  }
  ArlEstimate est;
  est.used = used;
  est.excluded = replicates - used;
  if (used == 0) return est;
  est.arl = sum / static_cast<double>(used);
  double ss = 0.0;
  for (std::size_t i = 0; i < run_lengths.size(); ++i) {
    if (!keep[i]) continue;
    const double d = run_lengths[i] - est.arl;
    ss += d * d;
  }
  est.std_error = used > 1 ? std::sqrt(ss / (static_cast<double>(used - 1) * used)) : 0.0;
  est.valid = est.excluded * 100 <= replicates;
  return est;
}

}  // namespace spc
