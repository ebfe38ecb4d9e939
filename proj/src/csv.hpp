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
#include <string>
#include <vector>

namespace spc {

// Subgroup data file: comma separated, '.' decimal, mandatory header row,
// then one subgroup per row. '#' lines are comments.
struct SubgroupData {
  std::vector<std::string> column_names;
  int k = 0;
  int n = 0;
  std::vector<double> values;  // row major, k x n
};

SubgroupData read_subgroup_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace spc
