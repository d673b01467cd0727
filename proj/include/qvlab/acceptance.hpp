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

// Acceptance suite: one check per documented criterion, at full or reduced
// scale, with a printable verdict line each.

#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvlab/parallel.hpp"

namespace qvlab {

struct AcceptanceOptions {
  std::uint64_t seed = 20260101;
  // Multiplies every replicate count; 1 is the documented scale.
  double scale = 1.0;
  Execution execution = Execution::parallel;
  // Criterion ids to run; empty runs all of them.
  std::set<int> only;
};

struct CriterionResult {
  int id = 0;  // 0 for auxiliary diagnostics
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  nlohmann::json data;

  std::string line() const;
};

// Number of criteria in the suite.
inline constexpr int kCriterionCount = 16;

// Runs the selected criteria in id order, followed by the auxiliary
// diagnostics when no selection is given. `on_result` sees each result as
// soon as it is available.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// Suite names accepted by the command line, mapped to criterion ids.
std::set<int> suite_criteria(const std::string& name);

}  // namespace qvlab
