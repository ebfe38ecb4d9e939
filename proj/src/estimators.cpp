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

#include "estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "parallel.hpp"
#include "rng.hpp"
#include "special_functions.hpp"

namespace spc {
namespace {

void require_nonempty(std::span<const double> xs, const char* who) {
  if (xs.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
}

void require_at_least_two(std::span<const double> xs, const char* who) {
  if (xs.size() < 2) throw std::invalid_argument(std::string(who) + ": needs n >= 2");
}

// Median of a scratch buffer, destructive.
double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t m = n / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  if (n % 2 == 1) return v[m];
  const double upper = v[m];
  const double lower = *std::max_element(v.begin(), v.begin() + m);
  return 0.5 * (lower + upper);
}

// k-th smallest (1-indexed), destructive.
double kth_inplace(std::vector<double>& v, std::size_t k) {
  std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
  return v[k - 1];
}

std::vector<double> pairwise_abs_diffs(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<double> diffs;
  diffs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) diffs.push_back(std::fabs(xs[i] - xs[j]));
  return diffs;
}

// rho(u) = psi(u^2) with psi(x) = (e^x - 1)/(e^x + 1) = tanh(x/2).
inline double mslog_rho(double u) { return std::tanh(0.5 * u * u); }

// d rho(u)/du = u * sech^2(u^2 / 2)
inline double mslog_rho_prime(double u) {
  const double c = std::cosh(0.5 * u * u);
  return u / (c * c);
}

// Cache of Harrell-Davis weight vectors per sample size. Values are
// never erased, so returned references stay valid.
const std::vector<double>& hd_weights(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const double a = 0.5 * (static_cast<double>(n) + 1.0);
  std::vector<double> w(n);
  double prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double next = (i == n) ? 1.0 : reg_inc_beta(static_cast<double>(i) / n, a, a);
    w[i - 1] = next - prev;
    prev = next;
  }
  return cache.emplace(n, std::move(w)).first->second;
}

}  // namespace

double mean(std::span<const double> xs) {
  require_nonempty(xs, "mean");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double median(std::span<const double> xs) {
  require_nonempty(xs, "median");
  std::vector<double> v(xs.begin(), xs.end());
  return median_inplace(v);
}

double sample_sd(std::span<const double> xs) {
  require_at_least_two(xs, "sample_sd");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - m;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mad_raw(std::span<const double> xs) {
  require_at_least_two(xs, "mad_raw");
  const double m = median(xs);
  std::vector<double> dev(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = std::fabs(xs[i] - m);
  return median_inplace(dev);
}

double qn_raw(std::span<const double> xs, QnVariant variant) {
  require_at_least_two(xs, "qn_raw");
  std::vector<double> diffs = pairwise_abs_diffs(xs);
  if (variant == QnVariant::median_of_pairs) return median_inplace(diffs);
  const std::size_t h = xs.size() / 2 + 1;
  const std::size_t k = h * (h - 1) / 2;
  return kth_inplace(diffs, k);
}

MslogResult mslog_raw(std::span<const double> xs, double kappa) {
  require_at_least_two(xs, "mslog_raw");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("mslog_raw: kappa must lie in (0, 1)");
  const std::size_t n = xs.size();
  const double center = median(xs);
  std::vector<double> dev(n);
  double max_dev = 0.0;
  std::size_t off_center = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = std::fabs(xs[i] - center);
    if (dev[i] > 0.0) ++off_center;
    max_dev = std::max(max_dev, dev[i]);
  }
  // As sigma -> 0 the objective tends to off_center/n; if that does not
  // exceed kappa there is no positive root and the scale collapses.
  if (max_dev == 0.0 || static_cast<double>(off_center) / n <= kappa) return {0.0, true};

  const auto objective = [&](double sigma) {
    double sum = 0.0;
    for (double d : dev) sum += mslog_rho(d / sigma);
    return sum / static_cast<double>(n) - kappa;
  };
  const auto derivative = [&](double sigma) {
    // d/dsigma (1/n) sum rho(d/sigma) = -(1/(n sigma)) sum (d/sigma) rho'(d/sigma)
    double sum = 0.0;
    for (double d : dev) {
      const double u = d / sigma;
      sum += u * mslog_rho_prime(u);
    }
    return -sum / (static_cast<double>(n) * sigma);
  };

  // Bracket the root; the objective is strictly decreasing in sigma.
  double lo = max_dev;
  while (objective(lo) < 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) return {0.0, true};
  }
  double hi = std::max(max_dev, lo * 2.0);
  int guard = 0;
  while (objective(hi) > 0.0) {
    hi *= 2.0;
    if (++guard > 2100) throw std::runtime_error("mslog_raw: failed to bracket the scale");
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = objective(x);
    if (f > 0.0)
      lo = x;
    else
      hi = x;
    if (hi - lo <= 1e-10 * hi) break;
    const double fp = derivative(x);
    double next = (fp < 0.0) ? x - f / fp : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return {0.5 * (lo + hi), false};
}

HuberResult huber_m(std::span<const double> xs, const LocationSpec& spec) {
  require_nonempty(xs, "huber_m");
  if (!(spec.huber_c > 0.0)) throw std::invalid_argument("huber_m: c must be positive");
  if (xs.size() == 1) return {xs[0], true};

  const double sigma_aux = spec.huber_mad_correction * mad_raw(xs);
  double t = median(xs);
  if (sigma_aux == 0.0) return {t, true};

  const double c = spec.huber_c;
  const std::size_t n = xs.size();
  for (int iter = 0; iter < spec.huber_max_iter; ++iter) {
    double wsum = 0.0, wxsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (xs[i] - t) / sigma_aux;
      const double w = (std::fabs(u) <= c) ? 1.0 : c / std::fabs(u);
      wsum += w;
      wxsum += w * xs[i];
    }
    const double next = wxsum / wsum;
    const double step = std::fabs(next - t);
    t = next;
    if (step <= spec.huber_tol * sigma_aux) return {t, true};
  }
  return {t, false};
}

double harrell_davis_median(std::span<const double> xs) {
  require_nonempty(xs, "harrell_davis_median");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double>& w = hd_weights(sorted.size());
  double est = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) est += w[i] * sorted[i];
  return est;
}

double hodges_lehmann(std::span<const double> xs) {
  require_nonempty(xs, "hodges_lehmann");
  const std::size_t n = xs.size();
  if (n == 1) return xs[0];
  std::vector<double> walsh;
  walsh.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) walsh.push_back(0.5 * (xs[i] + xs[j]));
  return median_inplace(walsh);
}

ScaleEstimate scale_estimate(std::span<const double> xs, const ScaleSpec& spec) {
  if (!(spec.correction > 0.0))
    throw std::invalid_argument("scale_estimate: correction must be positive");
  double raw = 0.0;
  bool degenerate = false;
  switch (spec.kind) {
    case ScaleKind::sd:
      raw = sample_sd(xs);
      break;
    case ScaleKind::mad:
      raw = mad_raw(xs);
      break;
    case ScaleKind::qn:
      raw = qn_raw(xs, spec.qn_variant);
      break;
    case ScaleKind::mslog: {
      const MslogResult r = mslog_raw(xs, spec.kappa);
      raw = r.sigma;
      degenerate = r.degenerate;
      break;
    }
  }
  if (raw <= 0.0) degenerate = true;
  return {spec.correction * raw, degenerate};
}

LocateResult locate(std::span<const double> values, const LocationSpec& spec) {
  require_nonempty(values, "locate");
  switch (spec.kind) {
    case LocationKind::mean:
      return {mean(values), true};
    case LocationKind::huber: {
      const HuberResult r = huber_m(values, spec);
      return {r.value, r.converged};
    }
    case LocationKind::hd:
      return {harrell_davis_median(values), true};
    case LocationKind::hl:
      return {hodges_lehmann(values), true};
  }
  throw std::logic_error("locate: unknown location kind");
}

double correction_factor(const ScaleSpec& spec, int n, std::int64_t replicates,
                         std::uint64_t seed, int threads) {
  if (n < 2) throw std::invalid_argument("correction_factor: n must be >= 2");
  if (replicates < 100)
    throw std::invalid_argument("correction_factor: needs at least 100 replicates");

  ScaleSpec raw_spec = spec;
  raw_spec.correction = 1.0;
  std::vector<double> estimates(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> sample(static_cast<std::size_t>(n));
    for (std::int64_t rep = begin; rep < end; ++rep) {
      RngStream stream(seed, static_cast<std::uint64_t>(rep), StreamRole::calibration);
      for (int i = 0; i < n; ++i) sample[static_cast<std::size_t>(i)] = stream.normal();
      estimates[static_cast<std::size_t>(rep)] = scale_estimate(sample, raw_spec).value;
    }
  });
  double sum = 0.0;
  for (double e : estimates) sum += e;
  const double mean_raw = sum / static_cast<double>(replicates);
  if (!(mean_raw > 0.0)) throw std::runtime_error("correction_factor: degenerate calibration");
  return 1.0 / mean_raw;
}

std::string scale_name(const ScaleSpec& spec) {
  switch (spec.kind) {
    case ScaleKind::sd:
      return "sd";
    case ScaleKind::mad:
      return "mad";
    case ScaleKind::qn:
      return spec.qn_variant == QnVariant::order_statistic ? "qn-rc" : "qn";
    case ScaleKind::mslog:
      return "mslog";
  }
  return "?";
}

std::string location_name(LocationKind kind) {
  switch (kind) {
    case LocationKind::mean:
      return "mean";
    case LocationKind::huber:
      return "huber";
    case LocationKind::hd:
      return "hd";
    case LocationKind::hl:
      return "hl";
  }
  return "?";
}

ScaleSpec parse_scale_name(const std::string& name) {
  ScaleSpec spec;
  if (name == "sd")
    spec.kind = ScaleKind::sd;
  else if (name == "mad")
    spec.kind = ScaleKind::mad;
  else if (name == "qn")
    spec.kind = ScaleKind::qn;
  else if (name == "qn-rc") {
    spec.kind = ScaleKind::qn;
    spec.qn_variant = QnVariant::order_statistic;
  } else if (name == "mslog")
    spec.kind = ScaleKind::mslog;
  else
    throw std::invalid_argument("unknown scale estimator '" + name +
                                "' (expected sd|mad|qn|qn-rc|mslog)");
  return spec;
}

LocationKind parse_location_name(const std::string& name) {
  if (name == "mean") return LocationKind::mean;
  if (name == "huber") return LocationKind::huber;
  if (name == "hd") return LocationKind::hd;
  if (name == "hl") return LocationKind::hl;
  throw std::invalid_argument("unknown location estimator '" + name +
                              "' (expected mean|huber|hd|hl)");
}

}  // namespace spc
