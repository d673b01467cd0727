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
#include <map>
#include <numeric>
#include <vector>

#include "qvlab/algorithms.hpp"
#include "qvlab/core_model.hpp"
#include "qvlab/errors.hpp"
#include "qvlab/rng.hpp"
#include "qvlab/stats.hpp"

namespace qvlab {
namespace {

std::vector<Keyed> keyed(std::initializer_list<double> keys) {
  std::vector<Keyed> out;
  std::size_t i = 0;
  for (double k : keys) out.push_back({k, ++i});
  return out;
}

std::vector<double> sorted_keys(std::span<const Keyed> a) {
  std::vector<double> out;
  for (const auto& x : a) out.push_back(x.key);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(QuickValTest, HandTraces) {
  const std::vector<double> keys = {0.5, 0.25, 0.75};
  const auto prof = quickval(keys, 0.3, CostModel::unit());
  ASSERT_GE(prof.per_level.size(), 2u);
  EXPECT_EQ(prof.level(0).comparisons, 2u);
  EXPECT_EQ(prof.level(1).comparisons, 0u);
  EXPECT_EQ(prof.comparisons, 2u);
  EXPECT_EQ(quickval(std::vector<double>{0.4}, 0.9, CostModel::unit()).comparisons, 0u);

  const auto h = quickval(std::vector<double>{0.5, 0.8, 0.2}, 0.9, CostModel::unit());
  EXPECT_EQ(h.level(0).swaps, 1u);
}

TEST(QuickValTest, RejectsDuplicatesAndBadAlpha) {
  EXPECT_THROW(quickval(std::vector<double>{0.1, 0.2, 0.1}, 0.5, CostModel::unit()), DuplicateKey);
  EXPECT_THROW(quickval(std::vector<double>{0.1}, 1.5, CostModel::unit()), std::invalid_argument);
}

TEST(QuickValTest, TotalsAreSumsOfLevels) {
  Rng rng(1, 0);
  std::vector<double> keys(500);
  for (double& k : keys) k = rng.uniform();
  for (auto scheme : {PartitionScheme::hoare, PartitionScheme::lomuto, PartitionScheme::none}) {
    const auto p = quickval(keys, 0.42, CostModel::bit_comparisons(), {scheme});
    std::size_t c = 0, s = 0;
    double b = 0.0;
    for (const auto& l : p.per_level) {
      c += l.comparisons;
      s += l.swaps;
      b += l.beta_cost;
    }
    EXPECT_EQ(c, p.comparisons);
    EXPECT_EQ(s, p.swaps);
    EXPECT_NEAR(b, p.beta_cost, 1e-9);
  }
}

TEST(QuickValTest, LevelCountsMatchIntervalTree) {
  // Keys strictly inside the level-k interval with index past tau.
  Rng rng(2, 0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> keys(200);
    for (double& k : keys) k = rng.uniform();
    const double alpha = rng.uniform();
    const auto prof = quickval(keys, alpha, CostModel::unit(), {PartitionScheme::hoare});
    const int depth = std::min<int>(static_cast<int>(prof.per_level.size()), IntervalTree::kMaxDepth);
    const auto tree = IntervalTree::build(keys, depth);
    for (int k = 0; k < depth; ++k) {
      const auto node = tree.node(tree.path_of(alpha, k));
      std::size_t count = 0;
      for (std::size_t i = *node.tau; i < keys.size(); ++i) {
        if (keys[i] > node.L && keys[i] < node.R) ++count;
      }
      EXPECT_EQ(prof.level(k).comparisons, count);
      EXPECT_EQ(prof.pivot_path[k], tree.path_of(alpha, k));
    }
  }
}

TEST(QuickValTest, SchemesAgreeOnComparisons) {
  Rng rng(3, 0);
  std::vector<double> keys(300);
  for (double& k : keys) k = rng.uniform();
  const auto h = quickval(keys, 0.6, CostModel::unit(), {PartitionScheme::hoare});
  const auto l = quickval(keys, 0.6, CostModel::unit(), {PartitionScheme::lomuto});
  const auto n = quickval(keys, 0.6, CostModel::unit(), {PartitionScheme::none});
  ASSERT_EQ(h.per_level.size(), l.per_level.size());
  ASSERT_EQ(h.per_level.size(), n.per_level.size());
  for (std::size_t k = 0; k < h.per_level.size(); ++k) {
    EXPECT_EQ(h.level(k).comparisons, l.level(k).comparisons);
    EXPECT_EQ(h.level(k).comparisons, n.level(k).comparisons);
  }
}

TEST(QuickValTest, BetaCostUsesPivotAndComparedKeys) {
  const std::vector<double> keys = {0.5, 0.25, 0.75};
  const auto p = quickval(keys, 0.3, CostModel::bit_comparisons());
  EXPECT_DOUBLE_EQ(p.level(0).beta_cost, bit_cost(0.5, 0.25) + bit_cost(0.5, 0.75));
  EXPECT_DOUBLE_EQ(p.beta_cost, 3.0);
}

TEST(QuickValTest, JsonCarriesTotals) {
  const auto p = quickval(std::vector<double>{0.5, 0.25, 0.75}, 0.3, CostModel::unit());
  const auto j = p.to_json();
  EXPECT_EQ(j["totals"]["comparisons"], 2);
  EXPECT_EQ(j["per_level"][0]["path"], "");
}

TEST(HoarePartitionTest, HandTraces) {
  auto a = keyed({0.5, 0.8, 0.2});
  EXPECT_EQ(hoare_partition(a).swaps, 1u);
  auto b = keyed({0.5, 0.2, 0.8});
  EXPECT_EQ(hoare_partition(b).swaps, 0u);
}

TEST(HoarePartitionTest, SplitsAndPreservesMultiset) {
  Rng rng(4, 0);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<Keyed> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = {rng.uniform(), i + 1};
    const auto before = sorted_keys(a);
    const double p = a[0].key;
    const auto r = hoare_partition(a);
    EXPECT_EQ(sorted_keys(a), before);
    EXPECT_EQ(a[0].key, p);
    EXPECT_EQ(r.below_count + r.above_count + 1, n);
    for (std::size_t i = 0; i < r.below_count; ++i) EXPECT_LT(a[r.below_first + i].key, p);
    for (std::size_t i = 0; i < r.above_count; ++i) EXPECT_GT(a[r.above_first + i].key, p);
  }
}

// Counts swaps over every ordering of the non-pivot keys and compares with
// the hypergeometric law for "larges among the first m slots".
TEST(HoarePartitionTest, SwapLawByEnumeration) {
  for (std::size_t n = 2; n <= 8; ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      std::vector<int> rest(n - 1);
      std::iota(rest.begin(), rest.end(), 0);  // ranks below m are small
      std::map<std::size_t, double> freq;
      double total = 0;
      do {
        std::vector<Keyed> a(n);
        a[0] = {(m + 0.5) / n, 1};
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const int r = rest[i];
          a[i + 1] = {(r < static_cast<int>(m) ? r : r + 1) / static_cast<double>(n), i + 2};
        }
        ++freq[hoare_partition(a).swaps];
        ++total;
      } while (std::next_permutation(rest.begin(), rest.end()));
      for (std::size_t s = 0; s <= m; ++s) {
        const double want = hypergeometric_pmf(static_cast<long>(s), static_cast<long>(n - 1),
                                               static_cast<long>(n - 1 - m), static_cast<long>(m));
        EXPECT_NEAR(freq[s] / total, want, 1e-12) << "n=" << n << " m=" << m << " s=" << s;
      }
    }
  }
}

TEST(LomutoPartitionTest, HandTraces) {
  auto a = keyed({0.5, 0.8, 0.2});
  EXPECT_EQ(lomuto_partition(a).swaps, 2u);
  auto b = keyed({0.5, 0.8, 0.9});
  EXPECT_EQ(lomuto_partition(b).swaps, 1u);
  auto c = keyed({0.5});
  EXPECT_EQ(lomuto_partition(c).swaps, 1u);
}

TEST(LomutoPartitionTest, SwapIdentityAndMultiset) {
  Rng rng(5, 0);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<Keyed> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = {rng.uniform(), i + 1};
    const auto before = sorted_keys(a);
    const double p = a[0].key;
    const auto r = lomuto_partition(a);
    EXPECT_EQ(r.swaps, r.below_count + 1);
    EXPECT_EQ(sorted_keys(a), before);
    EXPECT_EQ(a[r.below_count].key, p);
    for (std::size_t i = 0; i < r.below_count; ++i) EXPECT_LT(a[r.below_first + i].key, p);
    for (std::size_t i = 0; i < r.above_count; ++i) EXPECT_GT(a[r.above_first + i].key, p);
  }
}

TEST(StableSplitTest, KeepsRelativeOrder) {
  auto a = keyed({0.5, 0.9, 0.1, 0.7, 0.3});
  const auto r = stable_split(a);
  EXPECT_EQ(r.below_count, 2u);
  EXPECT_EQ(a[1].index, 3u);
  EXPECT_EQ(a[2].index, 5u);
  EXPECT_EQ(a[3].index, 2u);
  EXPECT_EQ(a[4].index, 4u);
}

TEST(FindRankTest, HandTraces) {
  const std::vector<double> keys = {0.5, 0.25, 0.75};
  EXPECT_EQ(find_rank(keys, 2, CostModel::unit()), 2.0);
  EXPECT_EQ(find_rank(std::vector<double>{0.3}, 1, CostModel::unit()), 0.0);
  EXPECT_EQ(find_rank(keys, 0, CostModel::unit()), find_rank(keys, 1, CostModel::unit()));
  EXPECT_EQ(find_rank(keys, 4, CostModel::unit()), find_rank(keys, 3, CostModel::unit()));
  EXPECT_THROW(find_rank(keys, 5, CostModel::unit()), std::out_of_range);
}

// Every ordering of n <= 6 keys: FIND at the rank of alpha and QuickVal at
// alpha make the same comparisons.
TEST(FindRankTest, NaturalCouplingByEnumeration) {
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<double> keys(n);
    for (std::size_t i = 0; i < n; ++i) keys[i] = (i + 1.0) / (n + 1.0);
    for (int g = 1; g <= 9; ++g) {
      const double alpha = g / 10.0;
      std::size_t rank = 0;
      for (double k : keys) rank += k <= alpha;
      std::vector<double> perm = keys;
      std::map<std::size_t, int> find_law, val_law;
      do {
        const auto c = static_cast<std::size_t>(find_rank(perm, rank, CostModel::unit()));
        const auto s = quickval(perm, alpha, CostModel::unit()).comparisons;
        EXPECT_EQ(c, s);
        ++find_law[c];
        ++val_law[s];
      } while (std::next_permutation(perm.begin(), perm.end()));
      EXPECT_EQ(find_law, val_law);
    }
  }
}

TEST(BitCostTest, Examples) {
  EXPECT_EQ(bit_cost(0.5, 0.25), 1);
  EXPECT_EQ(bit_cost(0.75, 0.625), 2);
  EXPECT_EQ(bit_cost(0.25, 0.375), 3);
  EXPECT_THROW(bit_cost(0.3, 0.3), std::invalid_argument);
}

TEST(BitCostTest, SymmetricAndMatchesBinaryDigits) {
  Rng rng(6, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform(), v = rng.uniform();
    if (u == v) continue;
    // Oracle: double both numbers until the integer parts differ.
    double x = u, y = v;
    int digits = 0;
    while (true) {
      ++digits;
      x *= 2;
      y *= 2;
      const int bx = x >= 1.0, by = y >= 1.0;
      if (bx != by) break;
      x -= bx;
      y -= by;
    }
    EXPECT_EQ(bit_cost(u, v), digits);
    EXPECT_EQ(bit_cost(v, u), digits);
  }
}

TEST(BitCostTest, TailBound) {
  Rng rng(7, 0);
  const int m = 200000;
  std::vector<int> hist(70, 0);
  for (int i = 0; i < m; ++i) ++hist[bit_cost(rng.uniform(), rng.uniform())];
  int tail = m;
  for (int x = 1; x <= 12; ++x) {
    const double p = static_cast<double>(tail) / m;
    const double se = std::sqrt(std::pow(2.0, 1 - x) / m);
    EXPECT_LE(p, std::pow(2.0, 1 - x) + 4.0 * se) << x;
    tail -= hist[x];
  }
}

TEST(CostModelTest, NamesAndTameness) {
  EXPECT_EQ(CostModel::from_name("bit")->kind(), CostModel::Kind::bit_comparisons);
  EXPECT_EQ(CostModel::from_name("unit")->kind(), CostModel::Kind::unit);
  EXPECT_FALSE(CostModel::from_name("nope").has_value());
  EXPECT_TRUE(CostModel::bit_comparisons().tame_below_quarter());
  const auto wild = CostModel::custom("wild", [](double, double) { return 1.0; }, std::nullopt);
  EXPECT_FALSE(wild.tame_below_quarter());
  const auto bad = CostModel::custom("nan", [](double, double) { return std::nan(""); }, std::nullopt);
  EXPECT_THROW(bad(0.1, 0.2), NonFiniteCost);
}

TEST(QuantileTransformTest, Knots) {
  const QuantileTransform q(std::vector<double>{0.5, 0.25, 0.75});
  EXPECT_DOUBLE_EQ(q.forward(0.25), 0.25);
  EXPECT_DOUBLE_EQ(q.forward(0.5), 0.5);
  EXPECT_DOUBLE_EQ(q.forward(0.75), 0.75);
  EXPECT_DOUBLE_EQ(QuantileTransform(std::vector<double>{0.3}).forward(0.5), 0.3);
}

TEST(QuantileTransformTest, FloorOfScaledInverseCountsKeys) {
  Rng rng(8, 0);
  std::vector<double> keys(1000);
  for (double& k : keys) k = rng.uniform();
  const QuantileTransform q(keys);
  std::vector<double> probes;
  for (int i = 0; i < 20000; ++i) probes.push_back(rng.uniform());
  for (double k : keys) {
    probes.push_back(k);
    probes.push_back(std::nextafter(k, 0.0));
    probes.push_back(std::nextafter(k, 1.0));
  }
  probes.push_back(0.0);
  for (double a : probes) {
    if (a >= 1.0) continue;
    EXPECT_EQ(static_cast<std::size_t>(std::floor(q.scaled_inverse(a))), q.count_le(a)) << a;
    EXPECT_NEAR(q.forward(q.inverse(a)), a, 1e-12);
  }
}

TEST(QuantileTransformTest, DeviationShrinks) {
  Rng rng(9, 0);
  double prev = 1.0;
  for (std::size_t n : {100u, 1000u, 10000u, 100000u}) {
    std::vector<double> keys(n);
    for (double& k : keys) k = rng.uniform();
    const double d = QuantileTransform(keys).sup_deviation();
    EXPECT_LT(d, 2.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_LT(d, prev * 1.5);
    prev = d;
  }
}

}  // namespace
}  // namespace qvlab
