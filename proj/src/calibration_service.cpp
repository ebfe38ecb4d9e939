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

#include "calibration_service.hpp"

#include <algorithm>

namespace spc {

CalibrationService::CalibrationService(CalibrationStore* store, int threads)
    : store_(store), threads_(threads) {}

std::string CalibrationService::correction_key(const ScaleSpec& spec, int n,
                                               std::int64_t replicates) {
  std::string key = "kind=correction est=" + scale_name(spec);
  if (spec.kind == ScaleKind::mslog) key += " kappa=" + format_double(spec.kappa);
  key += " n=" + std::to_string(n) + " replicates=" + std::to_string(replicates) +
         " policy=" + kSeedPolicy;
  return key;
}

std::string CalibrationService::alpha_key(const ChartConfig& config, std::int64_t replicates,
                                          std::int64_t correction_replicates) {
  std::string key = "kind=alpha_star scale=" + scale_name(config.scale);
  if (config.scale.kind == ScaleKind::mslog)
    key += " kappa=" + format_double(config.scale.kappa);
  key += " loc=" + location_name(config.location.kind);
  if (config.location.kind == LocationKind::huber)
    key += " c=" + format_double(config.location.huber_c);
  key += " n=" + std::to_string(config.n) + " k=" + std::to_string(config.k) +
         " target=" + format_double(config.target_arl0) +
         " replicates=" + std::to_string(replicates) + " policy=" + kSeedPolicy;
  if (correction_replicates != kDefaultCorrectionReplicates)
    key += " corr_replicates=" + std::to_string(correction_replicates);
  return key;
}

double CalibrationService::resolve(const std::string& key,
                                   const std::function<double()>& calibrate) {
  const double value = store_ ? store_->get_or_calibrate(key, calibrate) : calibrate();
  std::lock_guard<std::mutex> lock(mutex_);
  const auto seen = std::find_if(used_.begin(), used_.end(),
                                 [&](const auto& r) { return r.first == key; });
  if (seen == used_.end()) used_.emplace_back(key, value);
  return value;
}

double CalibrationService::correction(const ScaleSpec& spec, int n, std::int64_t replicates) {
  return resolve(correction_key(spec, n, replicates), [&, spec, n, replicates] {
    return correction_factor(spec, n, replicates, kCalibrationSeed, threads_);
  });
}

ScaleSpec CalibrationService::corrected_scale(ScaleSpec spec, int n, std::int64_t replicates) {
  spec.correction = correction(spec, n, replicates);
  return spec;
}

LocationSpec CalibrationService::location_spec(LocationKind kind, int list_size) {
  LocationSpec spec;
  spec.kind = kind;
  if (kind == LocationKind::huber && list_size >= 2) {
    ScaleSpec mad_spec;
    mad_spec.kind = ScaleKind::mad;
    spec.huber_mad_correction = correction(mad_spec, list_size);
  }
  return spec;
}

double CalibrationService::alpha_star(const ChartConfig& config, std::int64_t replicates,
                                      std::int64_t correction_replicates) {
  return resolve(alpha_key(config, replicates, correction_replicates), [&, config, replicates] {
    return calibrate_alpha(config, replicates, kCalibrationSeed, threads_).alpha_star;
  });
}

std::vector<std::pair<std::string, double>> CalibrationService::used_records() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return used_;
}

}  // namespace spc
