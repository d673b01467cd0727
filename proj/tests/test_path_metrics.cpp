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

#include "qvlab/limit_sampler.hpp"
#include "qvlab/path_metrics.hpp"

namespace qvlab {
namespace {

const std::vector<double> kFix1 = {0.5, 0.25, 0.75};

TEST(MetricTest, FixtureValues) {
  const auto tree = IntervalTree::build(kFix1, 2);
  EXPECT_EQ(d2(tree, 0.3, 0.6).value, 1.0);
  EXPECT_FALSE(d2(tree, 0.3, 0.6).flagged);
  EXPECT_EQ(d2(tree, 0.3, 0.3).value, 0.0);
  EXPECT_TRUE(d2(tree, 0.3, 0.35).flagged);
  EXPECT_DOUBLE_EQ(dG(tree, 0.3, 0.6).value, std::sqrt(2.5));
  EXPECT_EQ(dG(tree, 0.3, 0.3).value, 0.0);
}

TEST(MetricTest, DGIsTheIncrementStandardDeviation) {
  Rng rng(1, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto tree = IntervalTree::sample(8, rng);
    const double a = rng.uniform(), b = rng.uniform();
    const double var = sigma_inf(tree, a, a) + sigma_inf(tree, b, b) - 2.0 * sigma_inf(tree, a, b);
    const auto m = dG(tree, a, b);
    EXPECT_NEAR(m.value * m.value, std::max(var, 0.0), 1e-10);
    EXPECT_EQ(m.value, dG(tree, b, a).value);
    EXPECT_LE(dG_lower_bound(tree, a, b, 8), m.value * m.value + 1e-12);
  }
}

TEST(MetricTest, D2IsUltrametric) {
  Rng rng(2, 0);
  const auto tree = IntervalTree::sample(12, rng);
  for (int rep = 0; rep < 5000; ++rep) {
    const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    const double ab = d2(tree, a, b).value, bc = d2(tree, b, c).value, ac = d2(tree, a, c).value;
    EXPECT_LE(ac, std::max(ab, bc));
    EXPECT_LE(ab, std::max(ac, bc));
    EXPECT_LE(bc, std::max(ab, ac));
  }
}

TEST(PairSampleTest, CoversScalesAndExcludesTruncatedJunctions) {
  Rng rng(3, 0);
  const auto tree = IntervalTree::sample(10, rng);
  const auto pairs = sample_pairs(tree, 20000, rng);
  std::vector<int> seen(10, 0);
  for (const auto& p : pairs) {
    ASSERT_LT(p.J, 10);
    EXPECT_EQ(p.J, tree.junction(p.alpha, p.beta).depth);
    ++seen[p.J];
  }
  for (int j = 0; j < 6; ++j) EXPECT_GT(seen[j], 100) << j;
}

TEST(HolderTest, ConstantPathIsDegenerate) {
  Rng rng(4, 0);
  const auto tree = IntervalTree::sample(6, rng);
  const auto pairs = sample_pairs(tree, 1000, rng);
  EXPECT_TRUE(holder_violations(StepFunction(2.0), tree, pairs, Metric::d2, 0.1, 2).degenerate);
  EXPECT_TRUE(holder_slope(StepFunction(2.0), tree, pairs, Metric::dG, 10, rng).degenerate);
}

TEST(HolderTest, FitsOnCoarsePairsAndCountsFineViolations) {
  Rng rng(5, 0);
  const auto tree = IntervalTree::sample(8, rng);
  const auto pairs = sample_pairs(tree, 5000, rng);
  // A jump of size 10 at a depth-7 pivot breaks any constant fitted on
  // coarse pairs, while the same path is smooth in d2 at exponent 0.
  const double p = tree.pivots()[Path::from_bits(5, 7).heap_index()];
  const auto f = StepFunction::indicator(0.3) + StepFunction::indicator(p, 10.0);
  const auto r = holder_violations(f, tree, pairs, Metric::d2, 1.0, 1);
  EXPECT_GT(r.fit_pairs, 0u);
  EXPECT_EQ(r.fit_pairs + r.test_pairs, pairs.size());
  EXPECT_GT(r.violations, 0u);
  EXPECT_GT(r.worst_ratio, 1.0);
  const auto j = r.to_json();
  EXPECT_EQ(j["metric"], "d2");
}

TEST(HolderTest, GInfPathsRespectTheFittedBound) {
  Rng rng(6, 0);
  const auto tree = IntervalTree::sample(10, rng);
  const auto pairs = sample_pairs(tree, 20000, rng);
  for (int rep = 0; rep < 5; ++rep) {
    const auto g = sample_G_inf(sample_family(tree, rng));
    const auto r = holder_violations(g, tree, pairs, Metric::d2, 0.9 * kD2HolderBound, 2);
    EXPECT_FALSE(r.degenerate);
    EXPECT_GT(r.test_pairs, 0u);
    const auto s = holder_slope(g, tree, pairs, Metric::dG, 50, rng);
    EXPECT_LE(s.lo, s.slope);
    EXPECT_GE(s.hi, s.slope);
    EXPECT_GT(s.slope, 0.0);
  }
}

}  // namespace
}  // namespace qvlab
