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

#include "qvlab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "qvlab/errors.hpp"
#include "qvlab/numeric.hpp"

namespace qvlab {

ExtendedTree::ExtendedTree(Rng rng) : rng_(rng) { add_node(0.0, 1.0, 0); }

ExtendedTree::ExtendedTree(std::span<const double> keys, Rng rng) : ExtendedTree(rng) {
  nodes_.reserve(2 * keys.size() + 1);
  for (double k : keys) insert_key(k);
}

ExtendedTree ExtendedTree::given(const IntervalTree& top, Rng rng) {
  ExtendedTree t(rng);
  // Breadth-first copy so that node i of `top` maps to a known slot.
  std::vector<std::uint32_t> slot(top.pivots().size(), kNone);
  slot[0] = 0;
  for (std::size_t i = 0; i < slot.size(); ++i) {
    if (slot[i] == kNone || !top.has_pivot(i)) continue;
    Node& nd = t.nodes_[slot[i]];
    nd.pivot = top.pivots()[i];
    nd.has_pivot = true;
    if (2 * i + 2 < slot.size()) {
      slot[2 * i + 1] = t.child(slot[i], 0);
      slot[2 * i + 2] = t.child(slot[i], 1);
    }
  }
  return t;
}

std::uint32_t ExtendedTree::add_node(double L, double R, int depth) {
  Node nd;
  nd.L = L;
  nd.R = R;
  nd.depth = depth;
  nodes_.push_back(nd);
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

double ExtendedTree::pivot(std::uint32_t i) {
  Node& nd = nodes_[i];
  if (!nd.has_pivot) {
    double p;
    do {
      p = nd.L + (nd.R - nd.L) * rng_.uniform();
    } while (!(p > nd.L && p < nd.R));
    nd.pivot = p;
    nd.has_pivot = true;
  }
  return nd.pivot;
}

std::uint32_t ExtendedTree::child(std::uint32_t i, int bit) {
  if (nodes_[i].child[bit] == kNone) {
    const double p = pivot(i);
    const Node& nd = nodes_[i];
    const std::uint32_t c = bit == 0 ? add_node(nd.L, p, nd.depth + 1) : add_node(p, nd.R, nd.depth + 1);
    nodes_[i].child[bit] = c;
  }
  return nodes_[i].child[bit];
}

std::uint32_t ExtendedTree::insert_key(double key) {
  if (!(key > 0.0 && key < 1.0)) throw std::invalid_argument("keys must lie in (0,1)");
  const std::size_t index = ++keys_;
  std::uint32_t i = 0;
  while (nodes_[i].occupant != 0) {
    ++nodes_[i].size;
    if (key == nodes_[i].pivot) throw DuplicateKey(nodes_[i].occupant, index);
    i = child(i, key < nodes_[i].pivot ? 0 : 1);
  }
  Node& nd = nodes_[i];
  if (nd.has_pivot && nd.pivot != key) {
    throw std::logic_error("insert_key: free node already carries an extension pivot");
  }
  nd.pivot = key;
  nd.has_pivot = true;
  nd.occupant = index;
  nd.size = 1;
  return i;
}

std::uint32_t ExtendedTree::insert_uniform(double u) {
  const std::size_t index = ++keys_;
  std::uint32_t i = 0;
  while (nodes_[i].occupant != 0) {
    ++nodes_[i].size;
    i = child(i, u < nodes_[i].pivot ? 0 : 1);
  }
  pivot(i);
  nodes_[i].occupant = index;
  nodes_[i].size = 1;
  return i;
}

PerturbedSample perturb(std::span<const double> keys, std::span<const double> aux) {
  if (keys.size() != aux.size()) {
    throw std::invalid_argument("perturb: " + std::to_string(keys.size()) + " keys but " +
                                std::to_string(aux.size()) + " auxiliary uniforms");
  }
  PerturbedSample s;
  s.keys.assign(keys.begin(), keys.end());
  s.aux.assign(aux.begin(), aux.end());
  const std::size_t n = keys.size();
  s.perturbed.resize(n);
  s.lower.resize(n);
  s.upper.resize(n);
  s.depth.resize(n);
  ExtendedTree bst(Rng(0, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nd = bst.node(bst.insert_key(keys[i]));
    s.lower[i] = nd.L;
    s.upper[i] = nd.R;
    s.depth[i] = nd.depth;
    s.perturbed[i] = nd.L + (nd.R - nd.L) * aux[i];
  }
  return s;
}

namespace {

NodeCounts empty_counts(const IntervalTree& tree, std::size_t n) {
  NodeCounts c;
  c.depth = tree.depth();
  c.n = n;
  c.S.assign(tree.pivots().size(), 0);
  c.S_tilde.assign(tree.pivots().size(), 0);
  return c;
}

}  // namespace

NodeCounts count_levels(const IntervalTree& tree, std::span<const double> keys,
                        std::span<const double> perturbed, std::size_t n) {
  if (n > keys.size() || n > perturbed.size()) throw std::invalid_argument("count_levels: n exceeds the sample");
  NodeCounts c = empty_counts(tree, n);
  const auto piv = tree.pivots();
  const auto tau = tree.taus();
  const std::size_t inner = piv.size() >> 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = keys[i - 1];
    for (std::size_t node = 0;;) {
      if (tau[node] == i) break;
      if (tau[node] == 0 || tau[node] > i) {
        throw std::invalid_argument("count_levels: tree was not built from these keys");
      }
      ++c.S[node];
      if (node >= inner) break;
      node = 2 * node + (u < piv[node] ? 1 : 2);
    }
    const double w = perturbed[i - 1];
    for (std::size_t node = 0;;) {
      ++c.S_tilde[node];
      if (node >= inner || !tree.has_pivot(node)) break;
      node = 2 * node + (w < piv[node] ? 1 : 2);
    }
  }
  return c;
}

NodeCounts sample_counts_given_tree(const IntervalTree& tree, std::size_t n, Rng& rng, bool fast_path) {
  const int K = tree.depth();
  for (int k = 0; k < K; ++k) {
    if (!tree.level_full(k + 1)) throw InsufficientDepth("conditional sampler needs pivots above depth K");
  }
  NodeCounts c = empty_counts(tree, n);
  const auto piv = tree.pivots();
  const std::size_t total = piv.size();
  const std::size_t inner = total >> 1;
  std::vector<char> occupied(total, 0);
  std::size_t free_nodes = total;
  std::size_t i = 0;
  for (; i < n && !(fast_path && free_nodes == 0); ++i) {
    const double u = rng.uniform();
    bool placed = false;
    for (std::size_t node = 0;;) {
      ++c.S_tilde[node];
      if (!placed) {
        if (occupied[node]) {
          ++c.S[node];
        } else {
          occupied[node] = 1;
          --free_nodes;
          placed = true;
        }
      }
      if (node >= inner) break;
      node = 2 * node + (u < piv[node] ? 1 : 2);
    }
  }
  if (i < n) {
    // Split the remaining arrivals down the tree with binomial draws.
    std::vector<std::uint64_t> m(total, 0);
    m[0] = n - i;
    for (std::size_t node = 0; node < total; ++node) {
      c.S[node] += m[node];
      c.S_tilde[node] += m[node];
      if (node < inner && m[node] > 0) {
        const double p = tree.length(2 * node + 1) / tree.length(node);
        std::binomial_distribution<std::uint64_t> bin(m[node], std::clamp(p, 0.0, 1.0));
        m[2 * node + 1] = bin(rng);
        m[2 * node + 2] = m[node] - m[2 * node + 1];
      }
    }
  }
  return c;
}

std::vector<double> sample_keys_given_tree(const IntervalTree& tree, std::size_t n, Rng& rng) {
  ExtendedTree t = ExtendedTree::given(tree, Rng(rng(), rng()));
  std::vector<double> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = t.node(t.insert_uniform(rng.uniform())).pivot;
  return keys;
}

LevelCounts level_counts(const IntervalTree& tree, std::span<const double> keys,
                         std::span<const double> perturbed, double alpha, int k, std::size_t n) {
  const IntervalNode nd = tree.node(tree.path_of(alpha, k));
  LevelCounts out;
  const std::size_t tau = nd.tau.value_or(keys.size() + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = keys[i - 1];
    if (i > tau && u > nd.L && u < nd.R) ++out.S;
    const double w = perturbed[i - 1];
    if (w >= nd.L && w < nd.R) ++out.S_tilde;
  }
  return out;
}

bool sandwich_holds(std::uint64_t S, std::uint64_t S_tilde, int depth) {
  const std::uint64_t mid = S_tilde > 0 ? S_tilde - 1 : 0;
  return S <= mid && mid <= S + static_cast<std::uint64_t>(depth);
}

std::uint64_t swap_count_perturbed(std::span<const double> perturbed, std::span<const std::size_t> compared,
                                   const IntervalNode& node, std::size_t n) {
  if (!node.pivot) return 0;
  const double p = *node.pivot;
  std::vector<char> seen(n + 1, 0);
  std::vector<std::size_t> order;
  order.reserve(compared.size() + 8);
  for (std::size_t idx : compared) {
    if (idx <= n) {
      order.push_back(idx);
      seen[idx] = 1;
    }
  }
  std::uint64_t left = 0;  // S~ of the left child
  for (std::size_t i = 1; i <= n; ++i) {
    const double w = perturbed[i - 1];
    if (w >= node.L && w < p) ++left;
    if (!seen[i] && w >= node.L && w < node.R) order.push_back(i);
  }
  std::uint64_t k = 0;
  for (std::size_t j = 0; j < order.size() && j < left; ++j) {
    if (perturbed[order[j] - 1] > p) ++k;
  }
  return k;
}

ResidualProcess residual_process(const IntervalTree& tree, const NodeCounts& counts) {
  const int K = tree.depth();
  for (int k = 1; k <= K; ++k) {
    if (!tree.level_full(k)) throw InsufficientDepth("residual process needs every node down to depth K");
  }
  ResidualProcess r;
  r.n = counts.n;
  r.depth = K;
  const double n = static_cast<double>(counts.n);
  const double root_n = std::sqrt(n);
  const std::size_t first_leaf = (std::size_t{1} << K) - 1;
  const std::size_t leaves = std::size_t{1} << K;
  std::vector<double> grid(leaves), g(leaves), w(leaves);
  std::vector<std::vector<double>> level(K + 1, std::vector<double>(leaves, 0.0));
  for (std::size_t b = 0; b < leaves; ++b) {
    const std::size_t leaf = first_leaf + b;
    grid[b] = tree.lefts()[leaf];
    CompensatedSum gs, ws;
    std::size_t node = leaf;
    for (int k = K; k >= 0; --k) {
      const double nI = n * tree.length(node);
      const double gk = (static_cast<double>(counts.S[node]) - nI) / root_n;
      level[k][b] = gk;
      gs += gk;
      ws += (static_cast<double>(counts.S_tilde[node]) - nI) / root_n;
      node = (node - 1) / 2;
    }
    g[b] = gs.value();
    w[b] = ws.value();
  }
  grid[0] = 0.0;
  for (int k = 0; k <= K; ++k) r.G_level.push_back(StepFunction::from_grid(grid, level[k]));
  r.G_le = StepFunction::from_grid(grid, g);
  r.W_le = StepFunction::from_grid(grid, w);
  return r;
}

GridResidual grid_residual(ExtendedTree& tree, std::size_t n, std::span<const double> grid,
                           std::span<const int> depths, double cutoff) {
  GridResidual out;
  out.grid.assign(grid.begin(), grid.end());
  out.depths.assign(depths.begin(), depths.end());
  out.G.resize(grid.size());
  out.G_le.assign(depths.size(), std::vector<double>(grid.size(), 0.0));
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const double alpha = grid[a];
    CompensatedSum total;
    std::uint32_t i = 0;
    for (;;) {
      const auto& node = tree.node(i);
      const double I = node.R - node.L;
      const double S = node.occupant != 0 ? static_cast<double>(node.size - 1) : 0.0;
      total += (S - nd * I) / root_n;
      for (std::size_t d = 0; d < depths.size(); ++d) {
        if (node.depth == depths[d]) out.G_le[d][a] = total.value();
      }
      if (node.occupant == 0 && root_n * I < cutoff) break;
      i = tree.child(i, alpha < tree.pivot(i) ? 0 : 1);
    }
    out.G[a] = total.value();
    for (std::size_t d = 0; d < depths.size(); ++d) {
      if (tree.node(i).depth < depths[d]) out.G_le[d][a] = total.value();
    }
  }
  return out;
}

}  // namespace qvlab
