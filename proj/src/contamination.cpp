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

#include "contamination.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rng.hpp"

namespace spc {

void validate_model(const OutlierModel& model) {
  if (model.kind == ModelKind::clean) return;
  if (!(model.a >= 1.0)) throw std::invalid_argument("outlier model: a must be >= 1");
  if (model.kind == ModelKind::diffuse_asymmetric && model.a != std::floor(model.a))
    throw std::invalid_argument(
        "outlier model m2: a is a chi-square degrees of freedom and must be an integer");
}

Phase1Data sample_phase1(const OutlierModel& model, int k, int n, std::uint64_t root_seed,
                         std::uint64_t replicate_id) {
  if (k < 2 || n < 2) throw std::invalid_argument("sample_phase1: needs k >= 2 and n >= 2");
  validate_model(model);

  Phase1Data data;
  data.k = k;
  data.n = n;
  const std::size_t total = static_cast<std::size_t>(k) * n;
  data.values.resize(total);
  data.contaminated.assign(total, 0);

  RngStream stream(root_seed, replicate_id, StreamRole::phase1_data);

  switch (model.kind) {
    case ModelKind::clean: {
      for (std::size_t i = 0; i < total; ++i) data.values[i] = stream.normal();
      break;
    }
    case ModelKind::diffuse_symmetric: {
      for (std::size_t i = 0; i < total; ++i) {
        const bool out = stream.uniform() < model.epsilon;
        const double z = stream.normal();
        data.values[i] = out ? model.a * z : z;
        data.contaminated[i] = out;
      }
      break;
    }
    case ModelKind::diffuse_asymmetric: {
      const int df = static_cast<int>(model.a);
      for (std::size_t i = 0; i < total; ++i) {
        const bool out = stream.uniform() < model.epsilon;
        if (out) {
          data.values[i] = stream.chi_square(df);
          data.contaminated[i] = 1;
        } else {
          data.values[i] = stream.normal();
        }
      }
      break;
    }
    case ModelKind::localized: {
      // Exactly round(epsilon * k) subgroups, chosen uniformly via a
      // partial Fisher-Yates shuffle on a dedicated substream.
      const int m = static_cast<int>(std::lround(model.epsilon * k));
      std::vector<int> index(static_cast<std::size_t>(k));
      std::iota(index.begin(), index.end(), 0);
      RngStream pick(root_seed, replicate_id, StreamRole::subgroup_selection);
      for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(pick.uniform() * (k - i));
        std::swap(index[static_cast<std::size_t>(i)], index[static_cast<std::size_t>(j)]);
      }
      std::vector<std::uint8_t> is_out(static_cast<std::size_t>(k), 0);
      for (int i = 0; i < m; ++i) is_out[static_cast<std::size_t>(index[i])] = 1;

      for (int g = 0; g < k; ++g) {
        const double sigma = is_out[static_cast<std::size_t>(g)] ? model.a : 1.0;
        for (int j = 0; j < n; ++j) {
          const std::size_t at = static_cast<std::size_t>(g) * n + j;
          data.values[at] = sigma * stream.normal();
          data.contaminated[at] = is_out[static_cast<std::size_t>(g)];
        }
      }
      break;
    }
  }
  return data;
}

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::clean:
      return "clean";
    case ModelKind::diffuse_symmetric:
      return "m1";
    case ModelKind::diffuse_asymmetric:
      return "m2";
    case ModelKind::localized:
      return "m3";
  }
  return "?";
}

ModelKind parse_model_name(const std::string& name) {
  if (name == "clean") return ModelKind::clean;
  if (name == "m1") return ModelKind::diffuse_symmetric;
  if (name == "m2") return ModelKind::diffuse_asymmetric;
  if (name == "m3") return ModelKind::localized;
  throw std::invalid_argument("unknown outlier model '" + name + "' (expected clean|m1|m2|m3)");
}

}  // namespace spc
