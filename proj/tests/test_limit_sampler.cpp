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

#include <cmath>
#include <vector>

#include "qvlab/errors.hpp"
#include "qvlab/limit_sampler.hpp"
#include "qvlab/stats.hpp"

namespace qvlab {
namespace {

const std::vector<double> kFix1 = {0.5, 0.25, 0.75};

// Within `z` standard errors of `target`.
void expect_close(const Estimate& e, double target, double z = 4.0) {
  EXPECT_LT(std::abs(e.value - target), z * e.standard_error + 1e-12)
      << "estimate " << e.value << " se " << e.standard_error << " target " << target;
}

TEST(GaussianFamilyTest, BridgeIsPinnedAndLevelsTelescope) {
  Rng rng(1, 0);
  const auto tree = IntervalTree::sample(6, rng);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = sample_family(tree, rng);
    EXPECT_EQ(f.z(Path()), 0.0);
    for (int k = 1; k <= 6; ++k) {
      double s = 0.0;
      for (std::uint64_t b = 0; b < (1u << k); ++b) s += f.z(Path::from_bits(b, k));
      EXPECT_NEAR(s, 0.0, 1e-10);
    }
  }
}

TEST(GaussianFamilyTest, CovarianceIsBridgeIncrementCovariance) {
  Rng rng(2, 0);
  const auto tree = IntervalTree::sample(2, rng);
  const std::vector<Path> nodes = {Path::from_string("0"), Path::from_string("1"), Path::from_string("01"),
                                   Path::from_string("10")};
  const int reps = 40000;
  std::vector<std::vector<double>> z(nodes.size(), std::vector<double>(reps));
  std::vector<double> y(reps), y2(reps);
  for (int r = 0; r < reps; ++r) {
    const auto f = sample_family(tree, rng);
    for (std::size_t i = 0; i < nodes.size(); ++i) z[i][r] = f.z(nodes[i]);
    y[r] = f.y(Path::from_string("0"));
    y2[r] = f.y(Path::from_string("1"));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i; j < nodes.size(); ++j) {
      const auto a = tree.node(nodes[i]), b = tree.node(nodes[j]);
      const double overlap = std::max(0.0, std::min(a.R, b.R) - std::max(a.L, b.L));
      expect_close(cov_with_se(z[i], z[j]), overlap - a.length() * b.length());
      EXPECT_DOUBLE_EQ(z_covariance(tree, nodes[i], nodes[j]), overlap - a.length() * b.length());
    }
  }
  expect_close(cov_with_se(y, y), 1.0);
  expect_close(cov_with_se(y, y2), 0.0);
  expect_close(cov_with_se(y, z[0]), 0.0);
}

TEST(LimitPathTest, GInfIsSumAlongThePath) {
  Rng rng(3, 0);
  const auto tree = IntervalTree::sample(5, rng);
  const auto f = sample_family(tree, rng);
  const auto g = sample_G_inf(f);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform();
    const Path p = tree.path_of(a, 5);
    double s = 0.0;
    for (int k = 0; k <= 5; ++k) s += f.z(p.prefix(k));
    EXPECT_NEAR(g(a), s, 1e-12);
  }
  const auto t0 = IntervalTree::sample(0, rng);
  EXPECT_EQ(sample_G_inf(sample_family(t0, rng)), StepFunction(0.0));
}

TEST(LimitPathTest, SwapAndLomutoOnFixture) {
  const auto tree = IntervalTree::build(kFix1, 1);
  Rng rng(4, 0);
  const auto f = sample_family(tree, rng);
  const Path e, l = Path::from_string("0"), r = Path::from_string("1");
  EXPECT_NEAR(sample_G_swap(f)(0.3), f.y(e) * 0.25 + f.z(l) * 0.5 + f.z(r) * 0.5, 1e-12);
  EXPECT_NEAR(sample_G_lomuto(f)(0.3), f.z(l), 1e-12);
  EXPECT_NEAR(sample_G_lomuto(f)(0.8), f.z(l), 1e-12);
}

TEST(LimitPathTest, VariancesMatchClosedForms) {
  Rng rng(5, 0);
  const auto tree = IntervalTree::sample(4, rng);
  const std::vector<double> alphas = {0.1, 0.45, 0.8};
  const int reps = 30000;
  std::vector<std::vector<double>> g(3), s(3), l(3);
  for (int r = 0; r < reps; ++r) {
    const auto f = sample_family(tree, rng);
    const auto gi = sample_G_inf(f), gs = sample_G_swap(f), gl = sample_G_lomuto(f);
    for (std::size_t a = 0; a < 3; ++a) {
      g[a].push_back(gi(alphas[a]));
      s[a].push_back(gs(alphas[a]));
      l[a].push_back(gl(alphas[a]));
    }
  }
  for (std::size_t a = 0; a < 3; ++a) {
    expect_close(cov_with_se(g[a], g[a]), sigma_inf(tree, alphas[a], alphas[a]));
    expect_close(cov_with_se(s[a], s[a]), swap_variance(tree, alphas[a]));
    expect_close(cov_with_se(l[a], l[a]), lomuto_variance(tree, alphas[a]));
    for (std::size_t b = a + 1; b < 3; ++b) {
      expect_close(cov_with_se(g[a], g[b]), sigma_inf(tree, alphas[a], alphas[b]));
    }
  }
}

TEST(SigmaTest, FixtureValues) {
  const auto tree = IntervalTree::build(kFix1, 2);
  EXPECT_DOUBLE_EQ(sigma_inf(tree, 0.3, 0.3, 2), 0.6875);
  EXPECT_DOUBLE_EQ(sigma_inf(tree, 0.3, 0.6, 2), -0.5625);
}

TEST(SigmaTest, SymmetricOnRandomTrees) {
  Rng rng(6, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto tree = IntervalTree::sample(7, rng);
    const double a = rng.uniform(), b = rng.uniform();
    EXPECT_NEAR(sigma_inf(tree, a, b), sigma_inf(tree, b, a), 1e-12);
  }
}

TEST(SigmaTest, JunctionRepresentation) {
  Rng rng(7, 0);
  for (int rep = 0; rep < 4; ++rep) {
    const auto tree = IntervalTree::sample(6, rng);
    const double a = rng.uniform(), b = rng.uniform();
    expect_close(sigma_via_J(tree, a, b, 6, 200000, rng), sigma_inf(tree, a, b, 6));
    expect_close(sigma_via_J(tree, a, a, 6, 200000, rng), sigma_inf(tree, a, a, 6));
  }
  const auto tree = IntervalTree::sample(3, rng);
  EXPECT_EQ(sigma_via_J(tree, 0.2, 0.7, 0, 100, rng).value, 0.0);
}

TEST(BetaCovarianceTest, UnitCostReducesToSigma) {
  Rng rng(8, 0);
  const auto tree = IntervalTree::sample(4, rng);
  const std::vector<double> grid = {0.1, 0.3, 0.5, 0.7, 0.9};
  const auto bc = beta_cov_matrix(tree, grid, CostModel::unit(), 200000, rng);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    EXPECT_GE(bc.cov(a, a), 0.0);
    for (std::size_t b = 0; b < grid.size(); ++b) {
      expect_close({bc.cov(a, b), bc.se(a, b)}, sigma_inf(tree, grid[a], grid[b]));
    }
  }
}

TEST(BetaCovarianceTest, BitCostRootVariance) {
  // bit_cost(1/2, V) is geometric with parameter 1/2: variance 2.
  const auto tree = IntervalTree::build(kFix1, 0);
  Rng rng(9, 0);
  const std::vector<double> grid = {0.4};
  const auto bc = beta_cov_matrix(tree, grid, CostModel::bit_comparisons(), 400000, rng);
  expect_close({bc.cov(0, 0), bc.se(0, 0)}, 2.0);
}

TEST(BetaCovarianceTest, RefusesUntamedCosts) {
  Rng rng(10, 0);
  const auto tree = IntervalTree::sample(2, rng);
  const auto wild = CostModel::custom("wild", [](double, double) { return 1.0; }, std::nullopt);
  const auto heavy = CostModel::custom("heavy", [](double, double) { return 1.0; }, Tameness{1.0, 0.3, false});
  const std::vector<double> grid = {0.5};
  EXPECT_THROW(beta_cov_matrix(tree, grid, wild, 100, rng), std::invalid_argument);
  EXPECT_THROW(beta_cov_matrix(tree, grid, heavy, 100, rng), std::invalid_argument);
}

TEST(GaussianSamplerTest, ZeroMatrixGivesZero) {
  Rng rng(11, 0);
  const GaussianSampler s(Eigen::MatrixXd::Zero(3, 3));
  EXPECT_EQ(s.draw(rng).norm(), 0.0);
  const std::vector<double> grid = {0.0, 0.5, 0.75};
  EXPECT_EQ(sample_G_beta(s, grid, rng), StepFunction(0.0));
}

TEST(GaussianSamplerTest, RejectsIndefiniteAndReproducesMarginals) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(GaussianSampler{bad}, StatisticsError);
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 0.5;
  const GaussianSampler s(cov);
  Rng rng(12, 0);
  std::vector<double> x, y;
  for (int i = 0; i < 10000; ++i) {
    const auto v = s.draw(rng);
    x.push_back(v[0] / std::sqrt(2.0));
    y.push_back(v[1]);
  }
  EXPECT_GT(ks_test(x, normal_cdf).p_value, 1e-3);
  expect_close(cov_with_se(x, y), 0.6 / std::sqrt(2.0));
}

TEST(GaussianSamplerTest, UnitCostMatrixMatchesGInfVariance) {
  Rng rng(13, 0);
  const auto tree = IntervalTree::sample(3, rng);
  const auto grid = leaf_grid(tree);
  const auto bc = beta_cov_matrix(tree, grid, CostModel::unit(), 100000, rng);
  const GaussianSampler s(bc.cov);
  std::vector<double> x;
  for (int i = 0; i < 20000; ++i) x.push_back(sample_G_beta(s, grid, rng)(grid[2]));
  const double target = sigma_inf(tree, grid[2], grid[2]);
  const Estimate v = cov_with_se(x, x);
  EXPECT_LT(std::abs(v.value - target), 4.0 * v.standard_error + 5.0 * bc.se(2, 2));
}

TEST(GaussianFamilyTest, SmallIncrementsBound) {
  // Fraction of nodes at depth 5..10 with |Z| >= 2 sqrt(|phi| I) stays
  // below 3 * 2 exp(-2 |phi|).
  Rng rng(14, 0);
  const auto tree = IntervalTree::sample(10, rng);
  for (int rep = 0; rep < 20; ++rep) {
    const auto f = sample_family(tree, rng);
    for (int d = 5; d <= 10; ++d) {
      std::size_t bad = 0;
      for (std::uint64_t b = 0; b < (1u << d); ++b) {
        const Path p = Path::from_bits(b, d);
        bad += std::abs(f.z(p)) >= 2.0 * std::sqrt(d * tree.node(p).length());
      }
      EXPECT_LE(static_cast<double>(bad) / (1u << d), 3.0 * 2.0 * std::exp(-2.0 * d) + 2.0 / (1u << d));
    }
  }
}

}  // namespace
}  // namespace qvlab
