// Copyright 2026 The qvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration: a flat key=value text file with command-line
// overrides. Lists are comma separated; '#' starts a comment.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace qvlab {

struct ExperimentConfig {
  std::uint64_t seed = 20260101;
  std::vector<std::size_t> n = {10000};
  int K = 4;
  std::size_t reps = 1000;
  std::vector<double> grid = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::string cost = "unit";
  std::string scheme = "hoare";
  std::string out = "qvlab-out";
  std::string suite = "all";

  // Throws std::invalid_argument naming the offending key.
  void validate() const;

  // Applies one key=value assignment. Unknown keys throw.
  void set(const std::string& key, const std::string& value);

  // Canonical text; parse(to_text()) reproduces the config exactly.
  std::string to_text() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& file);

  // FNV-1a of the canonical text without `out`, as 16 hex digits, so moving
  // the output directory leaves the embedded hash unchanged.
  std::string hash() const;
  nlohmann::json to_json() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

}  // namespace qvlab
