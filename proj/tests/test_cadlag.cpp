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
#include <limits>
#include <vector>

#include "qvlab/cadlag.hpp"
#include "qvlab/rng.hpp"

namespace qvlab {
namespace {

StepFunction random_step(Rng& rng, int max_jumps, int lattice = 0) {
  const int m = static_cast<int>(rng() % (max_jumps + 1));
  std::vector<double> jumps, values;
  for (int i = 0; i < m; ++i) {
    jumps.push_back(lattice > 0 ? static_cast<double>(1 + rng() % lattice) / lattice : rng.uniform());
  }
  std::sort(jumps.begin(), jumps.end());
  jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    values.push_back(lattice > 0 ? static_cast<double>(rng() % 5) : 4.0 * rng.uniform() - 2.0);
  }
  return StepFunction(lattice > 0 ? static_cast<double>(rng() % 5) : rng.uniform(), jumps, values);
}

TEST(StepFunctionTest, EvaluationIsRightContinuous) {
  const StepFunction f(0.0, {0.3, 0.6}, {1.0, -2.0});
  EXPECT_EQ(f(0.0), 0.0);
  EXPECT_EQ(f(0.2999), 0.0);
  EXPECT_EQ(f(0.3), 1.0);
  EXPECT_EQ(f(0.6), -2.0);
  EXPECT_EQ(f(1.0), -2.0);
}

TEST(StepFunctionTest, NormalizationMergesEqualPieces) {
  const StepFunction f(1.0, {0.2, 0.5}, {1.0, 2.0});
  EXPECT_EQ(f.jump_count(), 1u);
  EXPECT_EQ(f.jumps()[0], 0.5);
  const StepFunction g = StepFunction::indicator(0.3) - StepFunction::indicator(0.3);
  EXPECT_EQ(g, StepFunction(0.0));
}

TEST(StepFunctionTest, ArithmeticIsPointwise) {
  Rng rng(1, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = random_step(rng, 6), g = random_step(rng, 6);
    const auto s = f + g, d = f - g, c = f * 2.5;
    for (int i = 0; i < 50; ++i) {
      const double t = rng.uniform();
      EXPECT_DOUBLE_EQ(s(t), f(t) + g(t));
      EXPECT_DOUBLE_EQ(d(t), f(t) - g(t));
      EXPECT_DOUBLE_EQ(c(t), 2.5 * f(t));
    }
  }
}

TEST(StepFunctionTest, FromGridAndCsv) {
  const std::vector<double> grid = {0.0, 0.25, 0.5}, vals = {1.0, 1.0, 3.0};
  const auto f = StepFunction::from_grid(grid, vals);
  EXPECT_EQ(f(0.3), 1.0);
  EXPECT_EQ(f(0.5), 3.0);
  EXPECT_EQ(f.to_csv(), "location,value\n0,1\n0.5,3\n");
  const std::vector<double> bad = {0.1, 0.2};
  EXPECT_THROW(StepFunction::from_grid(bad, bad), std::invalid_argument);
}

TEST(StepFunctionTest, JsonRoundTrip) {
  Rng rng(2, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto f = random_step(rng, 8);
    EXPECT_EQ(StepFunction::from_json(nlohmann::json::parse(f.to_json().dump())), f);
  }
}

TEST(SupDistTest, Examples) {
  const auto f = StepFunction::indicator(0.5);
  EXPECT_EQ(sup_dist(f, f), 0.0);
  EXPECT_EQ(sup_dist(f, StepFunction(0.0)), 1.0);
  EXPECT_EQ(sup_dist(StepFunction::indicator(0.3), StepFunction::indicator(0.35)), 1.0);
  EXPECT_EQ(sup_norm(StepFunction(0.0, {0.5}, {-3.0})), 3.0);
}

TEST(SkorokhodTest, Examples) {
  const auto a = StepFunction::indicator(0.3);
  EXPECT_EQ(skorokhod_dist(a, a), 0.0);
  EXPECT_NEAR(skorokhod_dist(a, StepFunction::indicator(0.35)), 0.05, 1e-9);
  EXPECT_NEAR(skorokhod_dist(a, StepFunction::indicator(0.3, 2.0)), 1.0, 1e-9);
  EXPECT_NEAR(skorokhod_dist(a, StepFunction::indicator(0.9)), 0.6, 1e-9);
  EXPECT_NEAR(skorokhod_dist(StepFunction::indicator(0.3, 0.1), StepFunction::indicator(0.9, 0.1)), 0.1, 1e-9);
  const auto two = StepFunction::indicator(0.3) + StepFunction::indicator(0.6);
  EXPECT_NEAR(skorokhod_dist(two, StepFunction::indicator(0.45, 2.0)), 1.0, 1e-9);
  // Two jumps matched to two shifted jumps.
  const auto moved = StepFunction::indicator(0.32) + StepFunction::indicator(0.57);
  EXPECT_NEAR(skorokhod_dist(two, moved), 0.03, 1e-9);
}

TEST(SkorokhodTest, EndpointsAreFixed) {
  // A jump at 1 cannot be matched with an interior one, and the value at 0
  // cannot be changed by any time change.
  EXPECT_NEAR(skorokhod_dist(StepFunction(0.0, {1.0}, {1.0}), StepFunction(0.0, {0.99}, {1.0})), 1.0, 1e-9);
  EXPECT_NEAR(skorokhod_dist(StepFunction(0.0, {1.0}, {0.2}), StepFunction(0.0, {0.99}, {0.2})), 0.2, 1e-9);
  EXPECT_NEAR(skorokhod_dist(StepFunction(1.0), StepFunction(0.0, {0.01}, {1.0})), 1.0, 1e-9);
}

TEST(SkorokhodTest, MetricProperties) {
  Rng rng(3, 0);
  for (int rep = 0; rep < 500; ++rep) {
    const auto f = random_step(rng, 5), g = random_step(rng, 5), h = random_step(rng, 5);
    const double fg = skorokhod_dist(f, g), gf = skorokhod_dist(g, f);
    EXPECT_NEAR(fg, gf, 3e-9);
    EXPECT_LE(fg, sup_dist(f, g) + 1e-9);
    EXPECT_GE(fg + 1e-9, std::abs(sup_norm(f) - sup_norm(g)));
    EXPECT_GE(fg + 1e-9, std::abs(f(0.0) - g(0.0)));
    EXPECT_LE(fg, skorokhod_dist(f, h) + skorokhod_dist(h, g) + 3e-9);
  }
}

TEST(SkorokhodTest, WarpedCopyIsClose) {
  // Moving every jump by at most e, order preserved, costs at most e.
  Rng rng(4, 0);
  for (int rep = 0; rep < 300; ++rep) {
    const auto f = random_step(rng, 6);
    const double e = 0.02 * rng.uniform();
    std::vector<double> jumps = f.jumps();
    double moved = 0.0;
    for (std::size_t i = 0; i < jumps.size(); ++i) {
      const double lo = i == 0 ? 0.0 : jumps[i - 1];
      const double t = std::clamp(jumps[i] + e * (2.0 * rng.uniform() - 1.0), lo + 1e-12, 1.0);
      moved = std::max(moved, std::abs(t - jumps[i]));
      jumps[i] = t;
    }
    if (!std::is_sorted(jumps.begin(), jumps.end())) continue;
    const StepFunction g(f.value0(), jumps, f.values());
    EXPECT_LE(skorokhod_dist(f, g), moved + 1e-9);
  }
}

TEST(SkorokhodTest, FeasibilityIsMonotone) {
  Rng rng(5, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = random_step(rng, 4), g = random_step(rng, 4);
    const double d = skorokhod_dist(f, g);
    EXPECT_TRUE(skorokhod_feasible(f, g, d + 1e-8));
    if (d > 1e-6) EXPECT_FALSE(skorokhod_feasible(f, g, d - 1e-6));
  }
}

// Best delta-sparse partition with cuts restricted to a grid of step h,
// cells longer than `gap`. Cut positions on the grid bound the exact value
// from above when gap = delta and from below when gap = delta - h, provided
// every jump lies on the grid.
double grid_modulus(const StepFunction& f, double gap, int m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> piece(m);
  for (int i = 0; i < m; ++i) piece[i] = f((i + 0.5) / m);
  std::vector<double> best(m + 1, inf);
  best[0] = 0.0;
  for (int j = 0; j < m; ++j) {
    if (best[j] == inf) continue;
    double lo = piece[j], hi = piece[j];
    for (int i = j + 1; i <= m; ++i) {
      lo = std::min(lo, piece[i - 1]);
      hi = std::max(hi, piece[i - 1]);
      if (static_cast<double>(i - j) / m > gap) best[i] = std::min(best[i], std::max(best[j], hi - lo));
    }
  }
  return best[m];
}

TEST(ModulusTest, Examples) {
  EXPECT_EQ(modulus(StepFunction::indicator(0.5), 0.3), 0.0);
  const StepFunction two(0.0, {0.4, 0.45}, {1.0, 2.0});
  EXPECT_EQ(modulus(two, 0.1), 1.0);
  EXPECT_EQ(modulus(StepFunction(3.0), 0.7), 0.0);
  // Needs an interior cut: no grid of jump points alone is sparse enough.
  const StepFunction three(0.0, {0.3, 0.7}, {1.0, 2.0});
  EXPECT_EQ(modulus(three, 0.45), 1.0);
  // A jump at 1 is never inside a cell.
  EXPECT_EQ(modulus(StepFunction(0.0, {1.0}, {5.0}), 0.5), 0.0);
}

TEST(ModulusTest, MatchesGridOracle) {
  Rng rng(6, 0);
  const int m = 400;
  for (int rep = 0; rep < 300; ++rep) {
    const auto f = random_step(rng, 6, 20);
    const double delta = static_cast<double>(1 + rng() % 30) / 40.0 + 1.0 / 800.0;
    if (delta >= 1.0) continue;
    const double w = modulus(f, delta);
    EXPECT_LE(w, grid_modulus(f, delta, m) + 1e-12);
    EXPECT_GE(w, grid_modulus(f, delta - 1.0 / m, m) - 1e-12);
  }
}

TEST(ModulusTest, NonincreasingAsDeltaShrinks) {
  Rng rng(7, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = random_step(rng, 8);
    double prev = modulus(f, 0.9);
    for (double d = 0.8; d > 0.001; d *= 0.7) {
      const double w = modulus(f, d);
      EXPECT_LE(w, prev);
      prev = w;
    }
    double gap = 1.0, last = 0.0;
    for (double x : f.jumps()) {
      gap = std::min(gap, x - last);
      last = x;
    }
    gap = std::min(gap, 1.0 - last);
    if (gap > 2e-3) EXPECT_EQ(modulus(f, gap * 0.999), 0.0);
  }
}

}  // namespace
}  // namespace qvlab
