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

// QuickVal and FIND with instrumented costs. Sublist pivots follow the
// first-arrival rule: the key of smallest original index in a sublist is
// its pivot, so runs on prefixes of one key sequence share their trees.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvlab/cost_model.hpp"
#include "qvlab/path.hpp"

namespace qvlab {

enum class PartitionScheme { hoare, lomuto, none };

std::optional<PartitionScheme> scheme_from_name(const std::string& name);
std::string to_string(PartitionScheme s);

// A key tagged with its 1-based position in the input sequence.
struct Keyed {
  double key;
  std::size_t index;
};

// Where the two sublists ended up inside the partitioned span.
struct PartitionResult {
  std::size_t below_first = 0;
  std::size_t below_count = 0;
  std::size_t above_first = 0;
  std::size_t above_count = 0;
  std::size_t swaps = 0;
};

// Two-index scan: from the left skip keys below the pivot, from the right
// skip keys at or above it, exchange the two offenders, repeat until the
// indices cross. The pivot stays at position 0; below = [1, 1+m).
PartitionResult hoare_partition(std::span<Keyed> a);

// Classic single-index scheme with the pivot at position 0. Every key below
// the pivot is swapped into the growing left block (also when it is already
// in place) and the pivot is swapped into its final slot, so the swap count
// is always (number below) + 1.
PartitionResult lomuto_partition(std::span<Keyed> a);

// Stable split with no swaps counted; below = [1, 1+m).
PartitionResult stable_split(std::span<Keyed> a);

PartitionResult partition(std::span<Keyed> a, PartitionScheme scheme);

struct LevelCost {
  std::size_t comparisons = 0;
  std::size_t swaps = 0;
  double beta_cost = 0.0;
};

struct CostProfile {
  std::size_t n = 0;
  double alpha = 0.0;
  std::vector<LevelCost> per_level;  // one entry per visited node
  std::vector<Path> pivot_path;
  std::size_t comparisons = 0;
  std::size_t swaps = 0;
  double beta_cost = 0.0;
  // For each level, the original indices of the keys compared with the
  // pivot, in array order at the moment of partitioning.
  std::vector<std::vector<std::size_t>> compared;

  // Level-k entry, zero past the end of the recursion.
  LevelCost level(std::size_t k) const { return k < per_level.size() ? per_level[k] : LevelCost{}; }

  nlohmann::json to_json() const;
};

struct QuickValOptions {
  PartitionScheme scheme = PartitionScheme::hoare;
  bool record_compared = false;
};

// Descends towards alpha: left when alpha < pivot, right otherwise.
CostProfile quickval(std::span<const double> keys, double alpha, const CostModel& cost,
                     const QuickValOptions& options = {});

// Cost of FIND for rank k in 0..n+1. Rank 0 descends left as long as the
// below-list is nonempty; n+1 is read as n.
double find_rank(std::span<const double> keys, std::size_t rank, const CostModel& cost);

// Piecewise-linear map through (k/(n+1), U_(k)) for k = 0..n+1 with
// U_(0) = 0 and U_(n+1) = 1, and its inverse.
class QuantileTransform {
 public:
  explicit QuantileTransform(std::span<const double> keys);

  std::size_t size() const { return sorted_.size() - 2; }
  double forward(double x) const;
  double inverse(double alpha) const;
  // (n+1) * inverse(alpha), assembled as integer part plus fraction so
  // that its floor is exactly count_le(alpha) for alpha in [0,1).
  double scaled_inverse(double alpha) const;
  std::size_t count_le(double alpha) const;
  // Largest |inverse(alpha) - alpha| over [0,1]; attained at a knot.
  double sup_deviation() const;

 private:
  std::vector<double> sorted_;
};

}  // namespace qvlab
