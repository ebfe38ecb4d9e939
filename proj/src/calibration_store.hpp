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

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spc {

// Persistent cache of calibration constants (correction factors and
// calibrated alpha values), keyed by everything that determines them.
// Records live in a single human-readable text file, one per line:
//
//   <key fields...> value=<v> version=<v> created=<timestamp>
//
// Records are immutable: rewriting a key with a different value is an
// error. Values round-trip exactly (shortest representation that parses
// back to the same double).
class CalibrationStore {
 public:
  explicit CalibrationStore(std::filesystem::path dir);

  // Returns the cached value for `key`, or runs `calibrate`, persists the
  // result and returns it. Concurrent callers for the same key observe a
  // single calibration.
  double get_or_calibrate(const std::string& key, const std::function<double()>& calibrate);

  std::optional<double> lookup(const std::string& key) const;

  // All records currently known, sorted by key.
  std::vector<std::pair<std::string, double>> records() const;

  const std::filesystem::path& directory() const { return dir_; }

  // Cache directory resolution: explicit path if nonempty, else the
  // SPC_CACHE_DIR environment variable, else ./.spc-cache.
  static std::filesystem::path resolve_cache_dir(const std::string& explicit_dir);

 private:
  void load();
  void append_record(const std::string& key, double value);

  std::filesystem::path dir_;
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::map<std::string, double> values_;
  std::map<std::string, std::shared_future<double>> in_flight_;
};

// Full-precision text form of a double (shortest string that parses back
// to the identical value) and its strict parser.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace spc
