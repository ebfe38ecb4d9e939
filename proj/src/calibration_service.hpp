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
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "calibration_store.hpp"
#include "chart.hpp"
#include "estimators.hpp"

namespace spc {

// Calibration draws use a fixed internal seed rather than the run seed,
// so records keyed by "policy=v1" are shared between runs regardless of
// --seed. Bumping the policy string invalidates every record.
inline constexpr std::uint64_t kCalibrationSeed = 0x5350432d43414c31ULL;
inline constexpr const char* kSeedPolicy = "v1";

// Resolves correction factors and calibrated alpha values through a
// CalibrationStore, remembers which records a run touched (for output
// headers), and carries the worker-thread budget.
class CalibrationService {
 public:
  CalibrationService(CalibrationStore* store, int threads);

  int threads() const { return threads_; }

  double correction(const ScaleSpec& spec, int n,
                    std::int64_t replicates = kDefaultCorrectionReplicates);

  // Copy of `spec` with the unbiasing factor for sample size n filled in.
  ScaleSpec corrected_scale(ScaleSpec spec, int n,
                            std::int64_t replicates = kDefaultCorrectionReplicates);

  // Location spec for lists of `list_size` values; Huber's auxiliary MAD
  // factor is the list-size-specific correction.
  LocationSpec location_spec(LocationKind kind, int list_size);

  // correction_replicates only extends the record key when it differs
  // from the default (the calibrated alpha depends on the corrections
  // baked into the config).
  double alpha_star(const ChartConfig& config,
                    std::int64_t replicates = kDefaultAlphaReplicates,
                    std::int64_t correction_replicates = kDefaultCorrectionReplicates);

  // Records this service resolved, in first-use order without duplicates.
  std::vector<std::pair<std::string, double>> used_records() const;

  static std::string correction_key(const ScaleSpec& spec, int n, std::int64_t replicates);
  static std::string alpha_key(const ChartConfig& config, std::int64_t replicates,
                               std::int64_t correction_replicates = kDefaultCorrectionReplicates);

 private:
  double resolve(const std::string& key, const std::function<double()>& calibrate);

  CalibrationStore* store_;  // may be null: compute without persistence
  int threads_;
  mutable std::mutex mutex_;
  std::vector<std::pair<std::string, double>> used_;
};

}  // namespace spc
