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
#include <vector>

namespace spc {

enum class ModelKind { clean, diffuse_symmetric, diffuse_asymmetric, localized };

// One Phase I contamination mechanism. For the diffuse models each
// observation is contaminated independently with probability epsilon;
// the localized model contaminates exactly round(epsilon * k) whole
// subgroups. `a` scales the outlier standard deviation (M1/M3) or sets
// the chi-square degrees of freedom (M2, integer).
struct OutlierModel {
  ModelKind kind = ModelKind::clean;
  double a = 1.0;
  double epsilon = 0.20;
};

// k subgroups of n observations, row major, with a per-observation
// contamination mask kept for diagnostics.
struct Phase1Data {
  int k = 0;
  int n = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> contaminated;

  std::span<const double> subgroup(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)};
  }
};

// Draw one Phase I dataset. Deterministic in (model, k, n, root_seed,
// replicate_id); the localized model's subgroup choice comes from a
// dedicated substream so the data draws stay aligned across models.
Phase1Data sample_phase1(const OutlierModel& model, int k, int n, std::uint64_t root_seed,
                         std::uint64_t replicate_id);

void validate_model(const OutlierModel& model);

std::string model_name(ModelKind kind);
ModelKind parse_model_name(const std::string& name);

}  // namespace spc
