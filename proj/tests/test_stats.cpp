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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "qvlab/errors.hpp"
#include "qvlab/rng.hpp"
#include "qvlab/stats.hpp"

namespace qvlab {
namespace {

TEST(KsTest, PValuesAreCalibrated) {
  std::vector<double> p;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed, 1);
    std::normal_distribution<double> normal;
    std::vector<double> x(10000);
    for (double& v : x) v = normal(rng);
    p.push_back(ks_test(x, normal_cdf).p_value);
  }
  EXPECT_GT(ks_test(p, [](double u) { return std::clamp(u, 0.0, 1.0); }).p_value, 1e-3);
}

TEST(KsTest, DegenerateAndSmallInputs) {
  const std::vector<double> same(100, 0.5);
  EXPECT_LT(ks_test(same, [](double u) { return u; }).p_value, 1e-10);
  const std::vector<double> few(5, 0.5);
  EXPECT_THROW(ks_test(few, [](double u) { return u; }), StatisticsError);
}

TEST(KsTest, StatisticShrinksLikeRootN) {
  Rng rng(1, 0);
  for (std::size_t n : {1000u, 100000u}) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform();
    EXPECT_LT(ks_test(x, [](double u) { return u; }).statistic, 2.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST(KsTest, KolmogorovTail) {
  EXPECT_NEAR(kolmogorov_sf(1.3580986393225505), 0.05, 1e-6);
  EXPECT_NEAR(kolmogorov_sf(1.6276236115189504), 0.01, 1e-6);
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
}

TEST(Chi2Test, CalibratedOnFairCoins) {
  std::vector<double> p;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed, 2);
    std::binomial_distribution<std::int64_t> bin(60, 0.5);
    std::vector<std::int64_t> x(2000);
    for (auto& v : x) v = bin(rng);
    p.push_back(chi2_discrete(x, [](std::int64_t k) { return binomial_pmf(k, 60, 0.5); }, 0, 60).p_value);
  }
  EXPECT_GT(ks_test(p, [](double u) { return std::clamp(u, 0.0, 1.0); }).p_value, 1e-3);
}

TEST(Chi2Test, DeterministicSamplesFail) {
  const std::vector<std::int64_t> x(2000, 30);
  EXPECT_LT(chi2_discrete(x, [](std::int64_t k) { return binomial_pmf(k, 60, 0.5); }, 0, 60).p_value, 1e-10);
}

TEST(Chi2Test, MassOutsideTheRangeIsTested) {
  // Samples from Bin(20, 1/2) tested against a pmf truncated to 0..10.
  Rng rng(3, 0);
  std::binomial_distribution<std::int64_t> bin(20, 0.5);
  std::vector<std::int64_t> x(5000);
  for (auto& v : x) v = bin(rng);
  const auto pmf = [](std::int64_t k) { return binomial_pmf(k, 20, 0.5); };
  EXPECT_GT(chi2_discrete(x, pmf, 0, 10).p_value, 1e-3);
  EXPECT_LT(chi2_discrete(x, [](std::int64_t k) { return binomial_pmf(k, 20, 0.3); }, 0, 10).p_value, 1e-10);
}

TEST(PmfTest, HypergeometricMatchesEnumeration) {
  // Draw `draws` of `population` items with the first `successes` marked.
  for (int N = 1; N <= 12; ++N) {
    for (int K = 0; K <= N; ++K) {
      for (int m = 0; m <= N; ++m) {
        std::vector<double> count(m + 1, 0.0);
        double total = 0.0;
        for (unsigned mask = 0; mask < (1u << N); ++mask) {
          if (std::popcount(mask) != m) continue;
          ++count[std::popcount(mask & ((1u << K) - 1))];
          ++total;
        }
        for (int k = 0; k <= m; ++k) EXPECT_NEAR(hypergeometric_pmf(k, N, K, m), count[k] / total, 1e-12);
      }
    }
  }
  EXPECT_EQ(hypergeometric_pmf(-1, 10, 5, 5), 0.0);
  EXPECT_EQ(hypergeometric_pmf(6, 10, 5, 6), 0.0);
}

TEST(PmfTest, BinomialSumsToOne) {
  double s = 0.0;
  for (int k = 0; k <= 1000; ++k) s += binomial_pmf(k, 1000, 0.37);
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NEAR(binomial_pmf(2, 4, 0.5), 0.375, 1e-15);
  EXPECT_EQ(binomial_pmf(0, 5, 0.0), 1.0);
}

TEST(CovarianceTest, Identities) {
  Rng rng(4, 0);
  std::vector<double> x(500), y(500), neg(500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform();
    y[i] = rng.uniform();
    neg[i] = -x[i];
  }
  const Estimate v = cov_with_se(x, x);
  EXPECT_NEAR(cov_with_se(x, neg).value, -v.value, 1e-15);
  const Estimate c = cov_with_se(x, y);
  EXPECT_LT(std::abs(c.value), 4.0 * c.standard_error);
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / 500.0, ss = 0.0;
  for (double a : x) ss += (a - mean) * (a - mean);
  EXPECT_NEAR(v.value, ss / 499.0, 1e-14);
  const std::vector<double> few(10, 1.0);
  EXPECT_THROW(cov_with_se(few, few), StatisticsError);
}

TEST(CovarianceTest, JackknifeMatchesBruteForce) {
  Rng rng(5, 0);
  const std::size_t n = 60;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform();
    y[i] = x[i] * x[i] + 0.3 * rng.uniform();
  }
  auto cov = [](const std::vector<double>& a, const std::vector<double>& b) {
    const double m = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / m;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / m;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / (m - 1.0);
  };
  std::vector<double> loo;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a, b;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      a.push_back(x[j]);
      b.push_back(y[j]);
    }
    loo.push_back(cov(a, b));
  }
  const double mloo = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double s = 0.0;
  for (double v : loo) s += (v - mloo) * (v - mloo);
  const double se = std::sqrt((n - 1.0) / n * s);
  const Estimate e = cov_with_se(x, y);
  EXPECT_NEAR(e.value, cov(x, y), 1e-14);
  EXPECT_NEAR(e.standard_error, se, 1e-12);
}

TEST(CovarianceTest, AccumulatorMatchesPairwise) {
  Rng rng(6, 0);
  CovarianceAccumulator acc(3);
  std::vector<std::vector<double>> cols(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    const std::vector<double> row = {a, a + b, a - 2 * b};
    acc.add(row);
    for (int c = 0; c < 3; ++c) cols[c].push_back(row[c]);
  }
  const auto cov = acc.covariance();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(cov[3 * i + j], cov_with_se(cols[i], cols[j]).value, 1e-12);
  }
  EXPECT_EQ(acc.count(), 1000u);
}

TEST(ReportTest, JsonAndDistance) {
  TestReport r;
  r.name = "x";
  r.statistic = 1.5;
  r.pass = true;
  const auto j = r.to_json();
  EXPECT_TRUE(j["p_value"].is_null());
  EXPECT_EQ(j["statistic"], 1.5);
  EXPECT_DOUBLE_EQ(se_distance(1.3, 1.0, 0.1), 3.0);
}

}  // namespace
}  // namespace qvlab
