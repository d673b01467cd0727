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

#include "qvlab/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "qvlab/errors.hpp"

namespace qvlab {

std::optional<PartitionScheme> scheme_from_name(const std::string& name) {
  if (name == "hoare") return PartitionScheme::hoare;
  if (name == "lomuto") return PartitionScheme::lomuto;
  if (name == "none") return PartitionScheme::none;
  return std::nullopt;
}

std::string to_string(PartitionScheme s) {
  switch (s) {
    case PartitionScheme::hoare:
      return "hoare";
    case PartitionScheme::lomuto:
      return "lomuto";
    case PartitionScheme::none:
      return "none";
  }
  return "?";
}

PartitionResult hoare_partition(std::span<Keyed> a) {
  PartitionResult r;
  if (a.empty()) return r;
  const double p = a[0].key;
  std::size_t i = 1;
  std::size_t j = a.size() - 1;
  while (true) {
    while (i <= j && a[i].key < p) ++i;
    while (i <= j && a[j].key >= p) --j;
    if (i >= j) break;
    std::swap(a[i], a[j]);
    ++r.swaps;
    ++i;
    --j;
  }
  r.below_first = 1;
  r.below_count = i - 1;
  r.above_first = i;
  r.above_count = a.size() - i;
  return r;
}

PartitionResult lomuto_partition(std::span<Keyed> a) {
  PartitionResult r;
  if (a.empty()) return r;
  const double p = a[0].key;
  std::size_t i = 0;
  for (std::size_t j = 1; j < a.size(); ++j) {
    if (a[j].key < p) {
      ++i;
      std::swap(a[i], a[j]);
      ++r.swaps;
    }
  }
  std::swap(a[0], a[i]);
  ++r.swaps;
  r.below_first = 0;
  r.below_count = i;
  r.above_first = i + 1;
  r.above_count = a.size() - i - 1;
  return r;
}

PartitionResult stable_split(std::span<Keyed> a) {
  PartitionResult r;
  if (a.empty()) return r;
  const double p = a[0].key;
  auto mid = std::stable_partition(a.begin() + 1, a.end(), [p](const Keyed& x) { return x.key < p; });
  r.below_first = 1;
  r.below_count = static_cast<std::size_t>(mid - a.begin()) - 1;
  r.above_first = r.below_count + 1;
  r.above_count = a.size() - r.above_first;
  return r;
}

PartitionResult partition(std::span<Keyed> a, PartitionScheme scheme) {
  switch (scheme) {
    case PartitionScheme::hoare:
      return hoare_partition(a);
    case PartitionScheme::lomuto:
      return lomuto_partition(a);
    case PartitionScheme::none:
      return stable_split(a);
  }
  return {};
}

namespace {

std::vector<Keyed> tag(std::span<const double> keys) {
  std::vector<Keyed> w(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) w[i] = {keys[i], i + 1};
  std::vector<Keyed> sorted = w;
  std::sort(sorted.begin(), sorted.end(), [](const Keyed& x, const Keyed& y) {
    return x.key < y.key || (x.key == y.key && x.index < y.index);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].key == sorted[i - 1].key) throw DuplicateKey(sorted[i - 1].index, sorted[i].index);
  }
  return w;
}

// Moves the earliest-arrived key of [first, last) to the front without
// disturbing the order of the others.
void bring_pivot_forward(std::vector<Keyed>& w, std::size_t first, std::size_t last) {
  auto it = std::min_element(w.begin() + first, w.begin() + last,
                             [](const Keyed& x, const Keyed& y) { return x.index < y.index; });
  std::rotate(w.begin() + first, it, it + 1);
}

}  // namespace

CostProfile quickval(std::span<const double> keys, double alpha, const CostModel& cost,
                     const QuickValOptions& options) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  std::vector<Keyed> w = tag(keys);
  CostProfile prof;
  prof.n = keys.size();
  prof.alpha = alpha;
  const bool beta = cost.kind() != CostModel::Kind::unit;
  std::size_t lo = 0, hi = w.size();
  Path node;
  while (lo < hi) {
    bring_pivot_forward(w, lo, hi);
    const double p = w[lo].key;
    LevelCost lc;
    lc.comparisons = hi - lo - 1;
    if (beta) {
      for (std::size_t i = lo + 1; i < hi; ++i) lc.beta_cost += cost(p, w[i].key);
    } else {
      lc.beta_cost = static_cast<double>(lc.comparisons);
    }
    if (options.record_compared) {
      std::vector<std::size_t> idx;
      idx.reserve(hi - lo - 1);
      for (std::size_t i = lo + 1; i < hi; ++i) idx.push_back(w[i].index);
      prof.compared.push_back(std::move(idx));
    }
    const PartitionResult r =
        partition(std::span<Keyed>(w).subspan(lo, hi - lo), options.scheme);
    lc.swaps = r.swaps;
    prof.per_level.push_back(lc);
    prof.pivot_path.push_back(node);
    prof.comparisons += lc.comparisons;
    prof.swaps += lc.swaps;
    prof.beta_cost += lc.beta_cost;
    if (alpha < p) {
      if (r.below_count == 0) break;
      hi = lo + r.below_first + r.below_count;
      lo = lo + r.below_first;
      node = node.child(0);
    } else {
      if (r.above_count == 0) break;
      hi = lo + r.above_first + r.above_count;
      lo = lo + r.above_first;
      node = node.child(1);
    }
  }
  return prof;
}

double find_rank(std::span<const double> keys, std::size_t rank, const CostModel& cost) {
  const std::size_t n = keys.size();
  if (rank > n + 1) {
    throw std::out_of_range("rank " + std::to_string(rank) + " outside 0.." + std::to_string(n + 1));
  }
  if (rank == n + 1) rank = n;
  std::vector<Keyed> list = tag(keys);
  std::vector<Keyed> below, above;
  double total = 0.0;
  while (list.size() > 1) {
    const double p = list[0].key;
    below.clear();
    above.clear();
    for (std::size_t i = 1; i < list.size(); ++i) {
      total += cost(p, list[i].key);
      (list[i].key < p ? below : above).push_back(list[i]);
    }
    const std::size_t m = below.size();
    if (rank == 0) {
      list.swap(below);
    } else if (rank <= m) {
      list.swap(below);
    } else if (rank == m + 1) {
      list.swap(above);
      rank = 0;
    } else {
      list.swap(above);
      rank -= m + 1;
    }
  }
  return total;
}

nlohmann::json CostProfile::to_json() const {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t k = 0; k < per_level.size(); ++k) {
    levels.push_back({{"level", k},
                      {"path", pivot_path[k].to_string()},
                      {"comparisons", per_level[k].comparisons},
                      {"swaps", per_level[k].swaps},
                      {"beta_cost", per_level[k].beta_cost}});
  }
  return {{"n", n},
          {"alpha", alpha},
          {"per_level", std::move(levels)},
          {"totals", {{"comparisons", comparisons}, {"swaps", swaps}, {"beta_cost", beta_cost}}}};
}

QuantileTransform::QuantileTransform(std::span<const double> keys) {
  sorted_.reserve(keys.size() + 2);
  sorted_.push_back(0.0);
  sorted_.insert(sorted_.end(), keys.begin(), keys.end());
  sorted_.push_back(1.0);
  std::sort(sorted_.begin() + 1, sorted_.end() - 1);
  for (std::size_t i = 1; i < sorted_.size(); ++i) {
    if (!(sorted_[i] > sorted_[i - 1])) {
      throw std::invalid_argument("quantile transform needs distinct keys in (0,1)");
    }
  }
}

double QuantileTransform::forward(double x) const {
  const double m = static_cast<double>(sorted_.size() - 1);  // n + 1
  const double s = std::clamp(x, 0.0, 1.0) * m;
  const std::size_t k = std::min(static_cast<std::size_t>(s), sorted_.size() - 2);
  return sorted_[k] + (s - static_cast<double>(k)) * (sorted_[k + 1] - sorted_[k]);
}

std::size_t QuantileTransform::count_le(double alpha) const {
  return static_cast<std::size_t>(std::upper_bound(sorted_.begin() + 1, sorted_.end() - 1, alpha) -
                                  (sorted_.begin() + 1));
}

double QuantileTransform::scaled_inverse(double alpha) const {
  if (alpha >= 1.0) return static_cast<double>(sorted_.size() - 1);
  if (alpha <= 0.0) return 0.0;
  const std::size_t k = count_le(alpha);
  double frac = (alpha - sorted_[k]) / (sorted_[k + 1] - sorted_[k]);
  const double top = static_cast<double>(k + 1);
  return std::min(static_cast<double>(k) + frac, std::nextafter(top, 0.0));
}

double QuantileTransform::inverse(double alpha) const {
  return scaled_inverse(alpha) / static_cast<double>(sorted_.size() - 1);
}

double QuantileTransform::sup_deviation() const {
  const double m = static_cast<double>(sorted_.size() - 1);
  double d = 0.0;
  for (std::size_t k = 0; k < sorted_.size(); ++k) {
    d = std::max(d, std::abs(static_cast<double>(k) / m - sorted_[k]));
  }
  return d;
}

}  // namespace qvlab
