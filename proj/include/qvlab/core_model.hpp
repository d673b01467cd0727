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

// The interval process generated by the pivot sequence, truncated at a fixed
// depth K, and the deterministic limit functionals read off from it.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvlab/cost_model.hpp"
#include "qvlab/path.hpp"
#include "qvlab/rng.hpp"

namespace qvlab {

struct IntervalNode {
  double L = 0.0;
  double R = 1.0;
  std::optional<std::size_t> tau;  // 1-based index of the pivot key
  std::optional<double> pivot;

  double length() const { return R - L; }
};

// Junction depth of two paths. When the paths agree through the truncation
// depth, `at_least` is set and `depth` equals that depth.
struct Junction {
  int depth = 0;
  bool at_least = false;
};

enum class HoareReading {
  // Per level I_{phi0} I_{phi1} / I_phi, the mean of the hypergeometric
  // swap count divided by n.
  hypergeometric_mean,
  // I_{a,k+1} (I_a - I_{a,k}) / I_{a,k} with I_a read as I_{a,k+1}.
  literal,
};

enum class Quadrature { midpoint, monte_carlo, exact_dyadic };

struct QuadratureSpec {
  Quadrature method = Quadrature::midpoint;
  std::size_t points = 1 << 16;
  std::uint64_t seed = 0;  // monte_carlo only
};

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

class IntervalTree {
 public:
  enum class Source { keys, fixture, stick_breaking };

  static constexpr int kMaxDepth = 24;

  // Inserts `keys` (U_1, U_2, ...) and records every node up to `depth`.
  // Throws DuplicateKey.
  static IntervalTree build(std::span<const double> keys, int depth);

  // Deterministic tree from pivots in level order (heap_index); NaN marks a
  // node without pivot. Entries for nodes whose parent has no pivot are
  // ignored.
  static IntervalTree from_pivots(int depth, std::span<const double> pivots);

  // Stick-breaking realisation: every pivot uniform on its interval.
  static IntervalTree sample(int depth, Rng& rng);

  // Draws the missing pivots at depths < K uniformly on their intervals.
  // These are the pivots of keys that arrive after the ones supplied to
  // build(), so the completed tree has the law of F_infinity given the keys.
  void complete(Rng& rng);

  int depth() const { return depth_; }
  Source source() const { return source_; }
  std::size_t key_count() const { return key_count_; }

  bool contains(const Path& p) const;
  IntervalNode node(const Path& p) const;

  // Raw level-order storage. Absent nodes have NaN bounds.
  std::span<const double> lefts() const { return L_; }
  std::span<const double> rights() const { return R_; }
  std::span<const double> pivots() const { return pivot_; }
  std::span<const std::uint64_t> taus() const { return tau_; }  // 0 = absent

  bool has_pivot(std::size_t heap) const { return !std::isnan(pivot_[heap]); }
  bool present(std::size_t heap) const { return !std::isnan(L_[heap]); }
  double length(std::size_t heap) const { return R_[heap] - L_[heap]; }

  // phi(alpha, k). Throws InsufficientDepth.
  Path path_of(double alpha, int k) const;
  // Lengths I_{alpha,0..k}.
  std::vector<double> lengths_along(double alpha, int k) const;

  Junction junction(double alpha, double beta) const;

  // Sum_{k=0}^{K} I_{alpha,k}.
  double limit_comparisons(double alpha) const;
  // Sum_{k=0}^{K-1} of the chosen per-level mean swap term.
  double limit_swaps_hoare(double alpha, HoareReading reading = HoareReading::hypergeometric_mean) const;
  // Sum_{k=0}^{K-1} I_{phi(alpha,k)0}.
  double limit_swaps_lomuto(double alpha) const;
  // Sum_{k=0}^{K} of the integral of cost(U_tau, v) over I_{alpha,k}.
  Estimate limit_beta(double alpha, const CostModel& cost, const QuadratureSpec& quad = {}) const;

  // Sum_{|phi|=k} I_phi^2; requires level k to be fully present.
  double interval_decay_stat(int k) const;
  // Compensated sum of the lengths at level k (1 for full levels).
  double level_sum(int k) const;
  bool level_full(int k) const;

  // Largest interval at depth K: a realised bound on what truncation drops
  // at the next level.
  double max_length_at_depth() const;

  nlohmann::json to_json() const;
  static IntervalTree from_json(const nlohmann::json& j);
  // FNV-1a of the serialised form, as 16 hex digits.
  std::string hash() const;

 private:
  IntervalTree(int depth, Source source);
  void derive_intervals();

  int depth_ = 0;
  Source source_ = Source::fixture;
  std::size_t key_count_ = 0;
  std::vector<double> L_;
  std::vector<double> R_;
  std::vector<double> pivot_;
  std::vector<std::uint64_t> tau_;
};

// Integral of cost(u, v) dv over [lo, hi).
Estimate integrate_cost(const CostModel& cost, double u, double lo, double hi,
                        const QuadratureSpec& quad);

// Exact integral of bit_cost(u, v) dv over [lo, hi): the sum over j of the
// overlap of [lo, hi) with the level-j dyadic interval containing u.
double integrate_bit_cost(double u, double lo, double hi);

}  // namespace qvlab
