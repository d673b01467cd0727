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

// The random metrics d2 and d_G and Hölder violation checks for sampled paths.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvlab/cadlag.hpp"
#include "qvlab/core_model.hpp"
#include "qvlab/rng.hpp"

namespace qvlab {

struct MetricValue {
  double value = 0.0;
  // d2: the junction reached the truncation depth, so value is an upper
  // bound. dG: the truncated square was negative and clipped to 0.
  bool flagged = false;
};

// 2^-J(alpha, beta); 0 for alpha == beta.
MetricValue d2(const IntervalTree& tree, double alpha, double beta);

// Square root of
//   sum_{k=J+1}^{K} (2(k-J)-1)(I_{a,k} + I_{b,k}) - (sum_{k=J+1}^{K} (I_{a,k} - I_{b,k}))^2.
MetricValue dG(const IntervalTree& tree, double alpha, double beta, int K);
MetricValue dG(const IntervalTree& tree, double alpha, double beta);

// sum_{k=J+1}^{K} 2(2(k-J)-1) min(I_{a,k}, I_{b,k}), a lower bound for dG^2.
double dG_lower_bound(const IntervalTree& tree, double alpha, double beta, int K);

enum class Metric { d2, dG };

std::string to_string(Metric m);

struct PairSample {
  double alpha;
  double beta;
  int J;  // junction depth, < K
};

// Pairs at mixed scales: alpha uniform, beta = alpha +- U 2^-s with s
// uniform in 0..K. Pairs in the same depth-K interval are dropped.
std::vector<PairSample> sample_pairs(const IntervalTree& tree, std::size_t count, Rng& rng);

struct HolderReport {
  Metric metric = Metric::d2;
  double exponent = 0.0;
  int fit_max_J = 0;  // C is fitted on pairs with J <= fit_max_J
  double C = 0.0;
  std::size_t fit_pairs = 0;
  std::size_t test_pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // largest |df| / (C m^gamma) among test pairs
  bool degenerate = false;   // all increments zero
  std::vector<double> max_ratio_by_J;  // largest |df| / (C m^gamma), indexed by junction depth

  nlohmann::json to_json() const;
};

// Fits C as the largest |f(a) - f(b)| / m(a,b)^gamma over coarse pairs and
// counts fine pairs (J > fit_max_J) exceeding C m^gamma.
HolderReport holder_violations(const StepFunction& path, const IntervalTree& tree, std::span<const PairSample> pairs,
                               Metric metric, double exponent, int fit_max_J);

// Least-squares slope of log|df| on log m over pairs with df != 0, and a
// percentile bootstrap band.
struct SlopeEstimate {
  double slope = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t pairs = 0;
  bool degenerate = false;
};

SlopeEstimate holder_slope(const StepFunction& path, const IntervalTree& tree, std::span<const PairSample> pairs,
                           Metric metric, std::size_t bootstrap, Rng& rng);

// The exponent thresholds: 1/4 log2(3/2) for d2 and 1 for dG.
inline constexpr double kD2HolderBound = 0.14624062518028905;  // 0.25 * log2(1.5)
inline constexpr double kDGHolderBound = 1.0;

}  // namespace qvlab
