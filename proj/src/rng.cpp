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

#include "rng.hpp"

#include <cmath>
#include <stdexcept>

namespace spc {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// Wichura's PPND16 rational approximations for the normal quantile.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                             6.7265770927008700853e4) * r +
                            4.5921953931549871457e4) * r +
                           1.3731693765509461125e4) * r +
                          1.9715909503065514427e3) * r +
                         1.3314166789178437745e2) * r +
                        3.3871328727963666080e0);
    const double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                             3.9307895800092710610e4) * r +
                            2.1213794301586595867e4) * r +
                           5.3941960214247511077e3) * r +
                          6.8718700749205790830e2) * r +
                         4.2313330701600911252e1) * r +
                        1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                             2.41780725177450611770e-1) * r +
                            1.27045825245236838258e0) * r +
                           3.64784832476320460504e0) * r +
                          5.76949722146069140550e0) * r +
                         4.63033784615654529590e0) * r +
                        1.42343711074968357734e0);
    const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                             1.51986665636164571966e-2) * r +
                            1.48103976427480074590e-1) * r +
                           6.89767334985100004550e-1) * r +
                          1.67638483018380384940e0) * r +
                         2.05319162663775882187e0) * r +
                        1.0);
    z = num / den;
  } else {
    r -= 5.0;
    const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                             1.24266094738807843860e-3) * r +
                            2.65321895265761230930e-2) * r +
                           2.96560571828504891230e-1) * r +
                          1.78482653991729133580e0) * r +
                         5.46378491116411436990e0) * r +
                        6.65790464350110377720e0);
    const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                             1.84631831751005468180e-5) * r +
                            7.86869131145613259100e-4) * r +
                           1.48753612908506148525e-2) * r +
                          1.36929880922735805310e-1) * r +
                         5.99832206555887937690e-1) * r +
                        1.0);
    z = num / den;
  }
  return (q < 0.0) ? -z : z;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t salt_a, std::uint64_t salt_b) {
  std::uint64_t h = mix64(root + kGamma);
  h = mix64(h ^ (salt_a + 0xD1B54A32D192ED03ULL));
  h = mix64(h ^ (salt_b + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t replicate_id, StreamRole role)
    : key_(derive_seed(root_seed, replicate_id,
                       static_cast<std::uint64_t>(role) + 0x2545F4914F6CDD1DULL)) {}

std::uint64_t RngStream::next_u64() {
  counter_ += 1;
  return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform() {
  // 53 significant bits, offset by half an ulp so 0 and 1 are excluded.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return ppnd16(uniform()); }

double RngStream::normal(double mu, double sigma) {
  if (sigma < 0.0) throw std::domain_error("RngStream::normal: sigma must be nonnegative");
  if (sigma == 0.0) return mu;
  return mu + sigma * normal();
}

double RngStream::chi_square(int df) {
  if (df <= 0) throw std::domain_error("RngStream::chi_square: df must be positive");
  double sum = 0.0;
  for (int i = 0; i < df; ++i) {
    const double z = normal();
    sum += z * z;
  }
  return sum;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("inverse_normal_cdf: p must lie in (0, 1)");
  return ppnd16(p);
}

}  // namespace spc
