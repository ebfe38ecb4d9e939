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

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>
#include <vector>

#include "calibration_store.hpp"
#include "errors.hpp"

using namespace spc;

namespace {

std::filesystem::path fresh_dir(const char* tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("spc-store-test-") + tag + "-" +
                    std::to_string(counter.fetch_add(1)) + "-" +
                    std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("calibration_store") {
  TEST_CASE("cache semantics: one calibration per key") {
    const auto dir = fresh_dir("cache");
    CalibrationStore store(dir);
    int calls = 0;
    const auto calibrate = [&] {
      ++calls;
      return 1.25;
    };
    CHECK(store.get_or_calibrate("kind=correction est=mad n=5", calibrate) == 1.25);
    CHECK(store.get_or_calibrate("kind=correction est=mad n=5", calibrate) == 1.25);
    CHECK(calls == 1);
    // A key differing in any field calibrates separately.
    CHECK(store.get_or_calibrate("kind=correction est=mad n=10", calibrate) == 1.25);
    CHECK(calls == 2);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("persistence round trip is exact") {
    const auto dir = fresh_dir("roundtrip");
    const double awkward = 1.0 / 3.0;
    const double tiny = 5e-324;  // smallest subnormal
    {
      CalibrationStore store(dir);
      store.get_or_calibrate("key-a", [&] { return awkward; });
      store.get_or_calibrate("key-b", [&] { return tiny; });
      store.get_or_calibrate("key-c", [&] { return 370.4; });
    }
    CalibrationStore reloaded(dir);
    CHECK(reloaded.lookup("key-a").value() == awkward);
    CHECK(reloaded.lookup("key-b").value() == tiny);
    CHECK(reloaded.lookup("key-c").value() == 370.4);
    CHECK_FALSE(reloaded.lookup("key-d").has_value());
    CHECK(reloaded.records().size() == 3);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("deleting the cache reproduces the same value for a deterministic calibrator") {
    const auto dir = fresh_dir("redo");
    const auto deterministic = [] { return 0.271828182845904523; };
    double first = 0.0;
    {
      CalibrationStore store(dir);
      first = store.get_or_calibrate("det-key", deterministic);
    }
    std::filesystem::remove_all(dir);
    CalibrationStore store(dir);
    CHECK(store.get_or_calibrate("det-key", deterministic) == first);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("conflicting records are rejected at load") {
    const auto dir = fresh_dir("conflict");
    std::filesystem::create_directories(dir);
    {
      std::ofstream out(dir / "calibrations.txt");
      out << "kind=correction est=sd n=5 value=1.0 version=0.1.0 created=x\n";
      out << "kind=correction est=sd n=5 value=2.0 version=0.1.0 created=y\n";
    }
    CHECK_THROWS_AS(CalibrationStore{dir}, CalibrationError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("concurrent callers observe a single calibration") {
    const auto dir = fresh_dir("concurrent");
    CalibrationStore store(dir);
    std::atomic<int> calls{0};
    const auto slow = [&] {
      calls.fetch_add(1);
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      return 7.5;
    };
    std::vector<std::thread> threads;
    std::vector<double> results(8, 0.0);
    for (int i = 0; i < 8; ++i)
      threads.emplace_back([&, i] { results[static_cast<std::size_t>(i)] =
                                        store.get_or_calibrate("shared", slow); });
    for (auto& t : threads) t.join();
    CHECK(calls.load() == 1);
    for (double r : results) CHECK(r == 7.5);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("double formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 370.4, 1.4826022185056018, 1e-12, 123456789.123456789}) {
      CHECK(parse_double(format_double(v)) == v);
    }
    CHECK_THROWS_AS((void)parse_double("12x"), DataError);
    CHECK_THROWS_AS((void)parse_double(""), DataError);
  }
}
