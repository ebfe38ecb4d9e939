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

#include "csv.hpp"

#include <fstream>

#include "calibration_store.hpp"
#include "errors.hpp"

namespace spc {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(current);
  // Trim plain spaces around fields.
  for (auto& f : fields) {
    const auto first = f.find_first_not_of(' ');
    const auto last = f.find_last_not_of(' ');
    f = (first == std::string::npos) ? std::string() : f.substr(first, last - first + 1);
  }
  return fields;
}

SubgroupData read_subgroup_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open " + path.string());

  SubgroupData data;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (!header_seen) {
      data.column_names = fields;
      data.n = static_cast<int>(fields.size());
      header_seen = true;
      continue;
    }
    if (static_cast<int>(fields.size()) != data.n)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(data.n) + " fields, found " + std::to_string(fields.size()));
    for (const auto& f : fields) {
      try {
        data.values.push_back(parse_double(f));
      } catch (const DataError&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field '" +
                        f + "'");
      }
    }
    ++data.k;
  }
  if (!header_seen) throw DataError(path.string() + ": missing mandatory header row");
  if (data.k == 0) throw DataError(path.string() + ": no data rows");
  return data;
}

}  // namespace spc
