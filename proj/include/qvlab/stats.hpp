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

// Goodness-of-fit and covariance primitives used by the validation suites.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvlab/core_model.hpp"

namespace qvlab {

struct TestReport {
  std::string name;
  std::string statistic_name;
  double statistic = 0.0;
  // Either a p-value compared with `threshold` from below, or a distance in
  // standard errors compared with it from above.
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double se_distance = std::numeric_limits<double>::quiet_NaN();
  std::size_t sample_size = 0;
  double threshold = 1e-3;
  bool pass = false;
  std::string note;

  nlohmann::json to_json() const;
};

// P(sup |B| > x) for a Brownian bridge B: 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2).
double kolmogorov_sf(double x);

// One-sample KS test with exact D_n and the asymptotic p-value of
// sqrt(n) D_n (with the usual small-sample correction). Needs >= 10 samples.
TestReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                   double threshold = 1e-3, std::string name = "ks");

// Pearson chi-square against a pmf on the integers lo..hi; neighbouring
// cells are merged until each expects at least 5 observations.
TestReport chi2_discrete(std::span<const std::int64_t> samples, const std::function<double(std::int64_t)>& pmf,
                         std::int64_t lo, std::int64_t hi, double threshold = 1e-3, std::string name = "chi2");

double chi2_sf(double x, double dof);
double normal_cdf(double x);

// Draws `draws` from a population of `population` with `successes` marked
// items; probability of k successes.
double hypergeometric_pmf(std::int64_t k, std::int64_t population, std::int64_t successes, std::int64_t draws);
double binomial_pmf(std::int64_t k, std::int64_t n, double p);

// Sample covariance (n - 1 denominator) with its jackknife standard error.
// Needs >= 30 pairs.
Estimate cov_with_se(std::span<const double> x, std::span<const double> y);
Estimate mean_with_se(std::span<const double> x);

// |estimate - target| / se, or 0 when both the gap and se vanish.
double se_distance(double estimate, double target, double se);

// Streaming mean and covariance matrix of fixed-length vectors.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t dim);
  void add(std::span<const double> x);
  std::size_t count() const { return n_; }
  std::vector<double> mean() const { return mean_; }
  // Unbiased covariance, row-major.
  std::vector<double> covariance() const;

 private:
  std::size_t dim_;
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace qvlab
