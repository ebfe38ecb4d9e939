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

#include "calibration_store.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include "errors.hpp"
#include "version.hpp"

namespace spc {

namespace {
constexpr const char* kStoreFileName = "calibrations.txt";

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}
}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw DataError("not a number: '" + text + "'");
  return value;
}

std::filesystem::path CalibrationStore::resolve_cache_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("SPC_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  return ".spc-cache";
}

CalibrationStore::CalibrationStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec)
    throw CalibrationError("cannot create cache directory " + dir_.string() + ": " + ec.message());
  file_ = dir_ / kStoreFileName;
  load();
}

void CalibrationStore::load() {
  std::ifstream in(file_);
  if (!in.is_open()) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    // The key is everything before " value="; provenance fields follow.
    const std::string marker = " value=";
    const auto pos = line.find(marker);
    if (pos == std::string::npos)
      throw CalibrationError(file_.string() + ":" + std::to_string(line_no) + ": malformed record");
    const std::string key = line.substr(0, pos);
    std::string rest = line.substr(pos + marker.size());
    if (const auto space = rest.find(' '); space != std::string::npos) rest.resize(space);
    const double value = parse_double(rest);
    const auto it = values_.find(key);
    if (it != values_.end() && it->second != value)
      throw CalibrationError("conflicting records for key '" + key + "' in " + file_.string());
    values_.emplace(key, value);
  }
}

void CalibrationStore::append_record(const std::string& key, double value) {
  std::ofstream out(file_, std::ios::app);
  if (!out.is_open()) throw CalibrationError("cannot write calibration store " + file_.string());
  out << key << " value=" << format_double(value) << " version=" << kVersion
      << " created=" << timestamp_utc() << '\n';
  out.flush();
  if (!out) throw CalibrationError("failed writing calibration store " + file_.string());
}

std::optional<double> CalibrationStore::lookup(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, double>> CalibrationStore::records() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return {values_.begin(), values_.end()};
}

double CalibrationStore::get_or_calibrate(const std::string& key,
                                          const std::function<double()>& calibrate) {
  bool runner = false;
  std::promise<double> promise;
  std::shared_future<double> pending;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (const auto hit = values_.find(key); hit != values_.end()) return hit->second;
    if (const auto running = in_flight_.find(key); running != in_flight_.end()) {
      pending = running->second;
    } else {
      pending = promise.get_future().share();
      in_flight_.emplace(key, pending);
      runner = true;
    }
  }
  if (!runner) return pending.get();

  double value = 0.0;
  try {
    value = calibrate();
    std::lock_guard<std::mutex> lock(mutex_);
    append_record(key, value);
    values_.emplace(key, value);
    in_flight_.erase(key);
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      in_flight_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
  promise.set_value(value);
  return value;
}

}  // namespace spc
