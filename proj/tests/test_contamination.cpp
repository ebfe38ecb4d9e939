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

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "contamination.hpp"

using namespace spc;

TEST_SUITE("contamination") {
  TEST_CASE("dimension and parameter validation") {
    CHECK_THROWS_AS((void)sample_phase1({ModelKind::clean, 1.0}, 1, 5, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)sample_phase1({ModelKind::clean, 1.0}, 5, 1, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)sample_phase1({ModelKind::diffuse_asymmetric, 2.5}, 5, 5, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)sample_phase1({ModelKind::diffuse_symmetric, 0.5}, 5, 5, 1, 0),
                    std::invalid_argument);
  }

  TEST_CASE("determinism in the stream triple") {
    const OutlierModel model{ModelKind::diffuse_symmetric, 3.0};
    const Phase1Data a = sample_phase1(model, 10, 5, 77, 3);
    const Phase1Data b = sample_phase1(model, 10, 5, 77, 3);
    CHECK(a.values == b.values);
    CHECK(a.contaminated == b.contaminated);
    const Phase1Data c = sample_phase1(model, 10, 5, 77, 4);
    CHECK(a.values != c.values);
  }

  TEST_CASE("localized model contaminates exactly round(0.2 k) subgroups") {
    const OutlierModel model{ModelKind::localized, 4.0};
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      const Phase1Data data = sample_phase1(model, 10, 5, 123, rep);
      int contaminated_subgroups = 0;
      for (int g = 0; g < data.k; ++g) {
        bool any = false, all = true;
        for (int j = 0; j < data.n; ++j) {
          const bool c = data.contaminated[static_cast<std::size_t>(g) * data.n + j] != 0;
          any |= c;
          all &= c;
        }
        CHECK(any == all);  // whole subgroups only
        if (any) ++contaminated_subgroups;
      }
      CHECK(contaminated_subgroups == 2);
    }
    // round() applies: k = 13 -> 3 contaminated subgroups.
    const Phase1Data data13 = sample_phase1(model, 13, 5, 123, 0);
    int count = 0;
    for (int g = 0; g < 13; ++g)
      if (data13.contaminated[static_cast<std::size_t>(g) * 5] != 0) ++count;
    CHECK(count == 3);
  }

  TEST_CASE("diffuse contamination frequency is 0.20 within binomial bounds") {
    for (const ModelKind kind : {ModelKind::diffuse_symmetric, ModelKind::diffuse_asymmetric}) {
      const OutlierModel model{kind, 3.0};
      std::int64_t flagged = 0, total = 0;
      for (std::uint64_t rep = 0; rep < 200; ++rep) {
        const Phase1Data data = sample_phase1(model, 20, 25, 2026, rep);
        for (const auto c : data.contaminated) flagged += c;
        total += static_cast<std::int64_t>(data.contaminated.size());
      }
      const double rate = static_cast<double>(flagged) / static_cast<double>(total);
      const double bound = 3.0 * std::sqrt(0.2 * 0.8 / static_cast<double>(total));
      CHECK(std::fabs(rate - 0.2) < bound);
    }
  }

  TEST_CASE("mixture second moment for the symmetric model") {
    const OutlierModel model{ModelKind::diffuse_symmetric, 4.0};
    double sq = 0.0;
    std::int64_t total = 0;
    for (std::uint64_t rep = 0; rep < 1000; ++rep) {
      const Phase1Data data = sample_phase1(model, 20, 50, 31, rep);
      for (double v : data.values) sq += v * v;
      total += static_cast<std::int64_t>(data.values.size());
    }
    // E[X^2] = 0.8 + 0.2 a^2 = 4.0 at a = 4.
    CHECK(sq / static_cast<double>(total) == doctest::Approx(4.0).epsilon(0.02 / 4.0));
  }

  TEST_CASE("a = 1 severity matches the clean distribution") {
    // Same second and fourth moments within Monte Carlo bounds.
    const OutlierModel one{ModelKind::diffuse_symmetric, 1.0};
    const OutlierModel clean{ModelKind::clean, 1.0};
    double sq_one = 0, sq_clean = 0, q4_one = 0, q4_clean = 0;
    std::int64_t total = 0;
    for (std::uint64_t rep = 0; rep < 500; ++rep) {
      const Phase1Data a = sample_phase1(one, 20, 50, 55, rep);
      const Phase1Data b = sample_phase1(clean, 20, 50, 56, rep);
      for (double v : a.values) {
        sq_one += v * v;
        q4_one += v * v * v * v;
      }
      for (double v : b.values) {
        sq_clean += v * v;
        q4_clean += v * v * v * v;
      }
      total += static_cast<std::int64_t>(a.values.size());
    }
    const double n = static_cast<double>(total);
    CHECK(sq_one / n == doctest::Approx(sq_clean / n).epsilon(0.01));
    CHECK(q4_one / n == doctest::Approx(q4_clean / n).epsilon(0.05));
  }

  TEST_CASE("asymmetric model draws are chi-square distributed") {
    const OutlierModel model{ModelKind::diffuse_asymmetric, 4.0};
    double contaminated_sum = 0.0;
    std::int64_t contaminated_count = 0;
    int negative_contaminated = 0;
    for (std::uint64_t rep = 0; rep < 500; ++rep) {
      const Phase1Data data = sample_phase1(model, 20, 25, 61, rep);
      for (std::size_t i = 0; i < data.values.size(); ++i) {
        if (!data.contaminated[i]) continue;
        contaminated_sum += data.values[i];
        ++contaminated_count;
        if (data.values[i] < 0.0) ++negative_contaminated;
      }
    }
    CHECK(negative_contaminated == 0);  // chi-square support
    // E[chi2_4] = 4; the draws are uncentered by design.
    CHECK(contaminated_sum / static_cast<double>(contaminated_count) ==
          doctest::Approx(4.0).epsilon(0.02));
  }

  TEST_CASE("model names round trip") {
    for (const char* name : {"clean", "m1", "m2", "m3"})
      CHECK(model_name(parse_model_name(name)) == name);
    CHECK_THROWS_AS((void)parse_model_name("m4"), std::invalid_argument);
  }
}
