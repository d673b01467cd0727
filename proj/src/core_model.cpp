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

#include "qvlab/core_model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "qvlab/errors.hpp"
#include "qvlab/numeric.hpp"

namespace qvlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t node_count(int depth) { return (std::size_t{2} << depth) - 1; }

void check_distinct(std::span<const double> keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return keys[a] < keys[b] || (keys[a] == keys[b] && a < b); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (keys[order[i]] == keys[order[i - 1]]) throw DuplicateKey(order[i - 1] + 1, order[i] + 1);
  }
}

[[noreturn]] void insufficient(double alpha, int level, int wanted) {
  throw InsufficientDepth("path of alpha=" + format_double(alpha) + " has no pivot at depth " +
                          std::to_string(level) + " (needed depth " + std::to_string(wanted) + ")");
}

}  // namespace

IntervalTree::IntervalTree(int depth, Source source) : depth_(depth), source_(source) {
  if (depth < 0 || depth > kMaxDepth) {
    throw std::invalid_argument("tree depth must lie in [0, " + std::to_string(kMaxDepth) + "]");
  }
  const std::size_t n = node_count(depth);
  L_.assign(n, kNaN);
  R_.assign(n, kNaN);
  pivot_.assign(n, kNaN);
  tau_.assign(n, 0);
}

void IntervalTree::derive_intervals() {
  std::fill(L_.begin(), L_.end(), kNaN);
  std::fill(R_.begin(), R_.end(), kNaN);
  L_[0] = 0.0;
  R_[0] = 1.0;
  const std::size_t inner = node_count(depth_) >> 1;  // nodes above depth K
  for (std::size_t i = 0; i < L_.size(); ++i) {
    if (!present(i)) {
      pivot_[i] = kNaN;
      tau_[i] = 0;
      continue;
    }
    if (!has_pivot(i)) continue;
    if (!(pivot_[i] > L_[i] && pivot_[i] < R_[i])) {
      throw std::invalid_argument("pivot " + format_double(pivot_[i]) + " outside its interval at node " +
                                  Path::from_heap_index(i).to_string());
    }
    if (i < inner) {
      L_[2 * i + 1] = L_[i];
      R_[2 * i + 1] = pivot_[i];
      L_[2 * i + 2] = pivot_[i];
      R_[2 * i + 2] = R_[i];
    }
  }
}

IntervalTree IntervalTree::build(std::span<const double> keys, int depth) {
  check_distinct(keys);
  IntervalTree t(depth, Source::keys);
  t.key_count_ = keys.size();
  const std::size_t count = node_count(depth);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double u = keys[i];
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("keys must lie in (0,1), got " + format_double(u));
    std::size_t node = 0;
    while (node < count && t.has_pivot(node)) node = 2 * node + (u < t.pivot_[node] ? 1 : 2);
    if (node < count) {
      t.pivot_[node] = u;
      t.tau_[node] = i + 1;
    }
  }
  t.derive_intervals();
  return t;
}

IntervalTree IntervalTree::from_pivots(int depth, std::span<const double> pivots) {
  IntervalTree t(depth, Source::fixture);
  const std::size_t n = std::min(pivots.size(), node_count(depth));
  std::copy_n(pivots.begin(), n, t.pivot_.begin());
  t.derive_intervals();
  return t;
}

IntervalTree IntervalTree::sample(int depth, Rng& rng) {
  IntervalTree t(depth, Source::stick_breaking);
  t.complete(rng);
  return t;
}

void IntervalTree::complete(Rng& rng) {
  L_[0] = 0.0;
  R_[0] = 1.0;
  const std::size_t inner = node_count(depth_) >> 1;
  for (std::size_t i = 0; i < L_.size(); ++i) {
    if (!present(i)) continue;
    if (!has_pivot(i)) {
      double p;
      do {
        p = L_[i] + (R_[i] - L_[i]) * rng.uniform();
      } while (!(p > L_[i] && p < R_[i]));
      pivot_[i] = p;
    }
    if (i < inner) {
      L_[2 * i + 1] = L_[i];
      R_[2 * i + 1] = pivot_[i];
      L_[2 * i + 2] = pivot_[i];
      R_[2 * i + 2] = R_[i];
    }
  }
}

bool IntervalTree::contains(const Path& p) const {
  return p.depth() <= depth_ && present(p.heap_index());
}

IntervalNode IntervalTree::node(const Path& p) const {
  if (!contains(p)) throw InsufficientDepth("node '" + p.to_string() + "' is not part of the tree");
  const std::size_t i = p.heap_index();
  IntervalNode n{L_[i], R_[i], std::nullopt, std::nullopt};
  if (tau_[i] != 0) n.tau = tau_[i];
  if (has_pivot(i)) n.pivot = pivot_[i];
  return n;
}

Path IntervalTree::path_of(double alpha, int k) const {
  if (k < 0 || k > depth_) {
    throw InsufficientDepth("level " + std::to_string(k) + " exceeds tree depth " + std::to_string(depth_));
  }
  std::uint64_t bits = 0;
  std::size_t node = 0;
  for (int d = 0; d < k; ++d) {
    if (!has_pivot(node)) insufficient(alpha, d, k);
    const int b = alpha < pivot_[node] ? 0 : 1;
    bits = (bits << 1) | static_cast<std::uint64_t>(b);
    node = 2 * node + 1 + static_cast<std::size_t>(b);
  }
  return Path::from_bits(bits, k);
}

std::vector<double> IntervalTree::lengths_along(double alpha, int k) const {
  const Path p = path_of(alpha, k);
  std::vector<double> out(static_cast<std::size_t>(k) + 1);
  for (int d = 0; d <= k; ++d) out[d] = length(p.prefix(d).heap_index());
  return out;
}

Junction IntervalTree::junction(double alpha, double beta) const {
  std::size_t node = 0;
  for (int d = 0; d < depth_; ++d) {
    if (!has_pivot(node)) {
      throw InsufficientDepth("junction of " + format_double(alpha) + " and " + format_double(beta) +
                              " unresolved: no pivot at depth " + std::to_string(d));
    }
    const bool a = alpha < pivot_[node];
    const bool b = beta < pivot_[node];
    if (a != b) return {d, false};
    node = 2 * node + (a ? 1 : 2);
  }
  return {depth_, true};
}

double IntervalTree::limit_comparisons(double alpha) const {
  const auto len = lengths_along(alpha, depth_);
  return compensated_sum(len);
}

double IntervalTree::limit_swaps_hoare(double alpha, HoareReading reading) const {
  const Path p = path_of(alpha, depth_);
  CompensatedSum s;
  for (int k = 0; k < depth_; ++k) {
    const std::size_t i = p.prefix(k).heap_index();
    const double I = length(i);
    if (reading == HoareReading::hypergeometric_mean) {
      s += length(2 * i + 1) * length(2 * i + 2) / I;
    } else {
      const double next = length(p.prefix(k + 1).heap_index());
      s += next * (next - I) / I;
    }
  }
  return s.value();
}

double IntervalTree::limit_swaps_lomuto(double alpha) const {
  const Path p = path_of(alpha, depth_);
  CompensatedSum s;
  for (int k = 0; k < depth_; ++k) s += length(2 * p.prefix(k).heap_index() + 1);
  return s.value();
}

Estimate IntervalTree::limit_beta(double alpha, const CostModel& cost, const QuadratureSpec& quad) const {
  CompensatedSum value;
  double var = 0.0;
  std::size_t i = 0;
  for (int k = 0; k <= depth_; ++k) {
    if (!has_pivot(i)) break;  // no key has reached this node yet
    QuadratureSpec q = quad;
    q.seed = quad.seed + static_cast<std::uint64_t>(k);
    const Estimate e = integrate_cost(cost, pivot_[i], L_[i], R_[i], q);
    value += e.value;
    var += e.standard_error * e.standard_error;
    i = 2 * i + (alpha < pivot_[i] ? 1 : 2);
  }
  return {value.value(), std::sqrt(var)};
}

double IntervalTree::interval_decay_stat(int k) const {
  if (k < 0 || k > depth_) throw InsufficientDepth("level " + std::to_string(k) + " exceeds tree depth");
  CompensatedSum s;
  const std::size_t first = (std::size_t{1} << k) - 1;
  for (std::size_t i = first; i < 2 * first + 1; ++i) {
    if (present(i)) s += length(i) * length(i);
  }
  return s.value();
}

double IntervalTree::level_sum(int k) const {
  if (k < 0 || k > depth_) throw InsufficientDepth("level " + std::to_string(k) + " exceeds tree depth");
  CompensatedSum s;
  const std::size_t first = (std::size_t{1} << k) - 1;
  for (std::size_t i = first; i < 2 * first + 1; ++i) {
    if (present(i)) s += length(i);
  }
  return s.value();
}

bool IntervalTree::level_full(int k) const {
  if (k < 0 || k > depth_) return false;
  const std::size_t first = (std::size_t{1} << k) - 1;
  for (std::size_t i = first; i < 2 * first + 1; ++i) {
    if (!present(i)) return false;
  }
  return true;
}

double IntervalTree::max_length_at_depth() const {
  double m = 0.0;
  const std::size_t first = (std::size_t{1} << depth_) - 1;
  for (std::size_t i = first; i < L_.size(); ++i) {
    if (present(i)) m = std::max(m, length(i));
  }
  return m;
}

nlohmann::json IntervalTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < L_.size(); ++i) {
    if (!present(i)) continue;
    nlohmann::json n;
    n["path"] = Path::from_heap_index(i).to_string();
    n["L"] = L_[i];
    n["R"] = R_[i];
    n["tau"] = tau_[i] != 0 ? nlohmann::json(tau_[i]) : nlohmann::json(nullptr);
    n["pivot"] = has_pivot(i) ? nlohmann::json(pivot_[i]) : nlohmann::json(nullptr);
    nodes.push_back(std::move(n));
  }
  return {{"depth", depth_}, {"nodes", std::move(nodes)}};
}

IntervalTree IntervalTree::from_json(const nlohmann::json& j) {
  IntervalTree t(j.at("depth").get<int>(), Source::fixture);
  for (const auto& n : j.at("nodes")) {
    const Path p = Path::from_string(n.at("path").get<std::string>());
    if (p.depth() > t.depth_) throw std::invalid_argument("node deeper than tree depth");
    const std::size_t i = p.heap_index();
    if (!n.at("pivot").is_null()) t.pivot_[i] = n.at("pivot").get<double>();
    if (!n.at("tau").is_null()) {
      t.tau_[i] = n.at("tau").get<std::uint64_t>();
      t.source_ = Source::keys;
    }
  }
  const auto taus = t.tau_;
  t.derive_intervals();
  t.tau_ = taus;
  for (const auto& n : j.at("nodes")) {
    const std::size_t i = Path::from_string(n.at("path").get<std::string>()).heap_index();
    if (!t.present(i) || t.L_[i] != n.at("L").get<double>() || t.R_[i] != n.at("R").get<double>()) {
      throw std::invalid_argument("tree JSON: interval of node '" + n.at("path").get<std::string>() +
                                  "' does not match its ancestors' pivots");
    }
  }
  for (std::size_t i = 0; i < t.tau_.size(); ++i) {
    if (!t.present(i)) t.tau_[i] = 0;
    t.key_count_ = std::max<std::size_t>(t.key_count_, t.tau_[i]);
  }
  return t;
}

std::string IntervalTree::hash() const { return hex64(fnv1a(to_json().dump())); }

double integrate_bit_cost(double u, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  CompensatedSum s;
  for (int j = 0; j < 64; ++j) {
    const double w = std::ldexp(1.0, -j);
    const double a = std::floor(u / w) * w;  // exact: scaling by powers of two
    const double overlap = std::min(hi, a + w) - std::max(lo, a);
    if (overlap <= 0.0) break;  // deeper dyadic cells are nested inside this one
    s += overlap;
  }
  return s.value();
}

Estimate integrate_cost(const CostModel& cost, double u, double lo, double hi, const QuadratureSpec& quad) {
  const double width = hi - lo;
  if (!(width > 0.0)) return {0.0, 0.0};
  switch (quad.method) {
    case Quadrature::exact_dyadic:
      if (cost.kind() == CostModel::Kind::unit) return {width, 0.0};
      if (cost.kind() != CostModel::Kind::bit_comparisons) {
        throw std::invalid_argument("exact_dyadic quadrature is defined for unit and bit costs only");
      }
      return {integrate_bit_cost(u, lo, hi), 0.0};
    case Quadrature::midpoint: {
      const std::size_t m = std::max<std::size_t>(quad.points, 1);
      CompensatedSum s;
      for (std::size_t i = 0; i < m; ++i) {
        const double v = lo + width * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        if (v != u) s += cost(u, v);
      }
      return {s.value() * width / static_cast<double>(m), 0.0};
    }
    case Quadrature::monte_carlo: {
      const std::size_t m = std::max<std::size_t>(quad.points, 2);
      Rng rng(quad.seed, 0x51ull);
      double mean = 0.0, m2 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double v = lo + width * rng.uniform();
        const double c = v == u ? 0.0 : cost(u, v);
        const double d = c - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (c - mean);
      }
      const double var = m2 / static_cast<double>(m - 1);
      return {mean * width, width * std::sqrt(var / static_cast<double>(m))};
    }
  }
  return {0.0, 0.0};
}

}  // namespace qvlab
