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

namespace spc {

// Purpose tag baked into a stream's key. Streams differing in any of
// (root seed, replicate id, role) are decorrelated by construction.
enum class StreamRole : std::uint32_t {
  phase1_data = 0,
  subgroup_selection = 1,
  calibration = 2,
};

// Counter-based pseudo-random stream. The state is a 64-bit key derived
// by mixing the (root_seed, replicate_id, role) triple; draws are the
// SplitMix64 finalizer applied to key + counter * gamma. Value-like and
// cheap to construct, so every Monte Carlo replicate owns its own stream
// and results do not depend on scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint64_t replicate_id, StreamRole role);

  std::uint64_t next_u64();
  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform();
  // Standard normal via the inverse-CDF map of one uniform.
  double normal();
  double normal(double mu, double sigma);
  // Chi-square with df degrees of freedom as a sum of squared normals.
  double chi_square(int df);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stateless 64-bit finalizer used for key derivation.
std::uint64_t mix64(std::uint64_t z);

// Derive a sub-seed from a root seed and up to two salts; used to give
// every study cell its own stream family.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t salt_a, std::uint64_t salt_b = 0);

// Inverse standard-normal CDF by rational approximation (|error| well
// below 1e-12); the sampler's per-draw path. Requires p in (0, 1).
double inverse_normal_cdf(double p);

}  // namespace spc
