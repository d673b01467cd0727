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

// Perturbation coupling and residual processes of the comparison count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qvlab/cadlag.hpp"
#include "qvlab/core_model.hpp"
#include "qvlab/rng.hpp"

namespace qvlab {

// Unbounded binary search tree of a key sequence, extended below keyless
// nodes by stick-breaking drawn on first use. The extension has the law of
// the pivots of keys that have not arrived yet.
class ExtendedTree {
 public:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  struct Node {
    double L = 0.0;
    double R = 1.0;
    double pivot = 0.0;
    std::size_t occupant = 0;  // 1-based key index, 0 if no key yet
    std::size_t size = 0;      // keys in the subtree, this one included
    std::uint32_t child[2] = {kNone, kNone};
    int depth = 0;
    bool has_pivot = false;
  };

  // Empty tree; extension draws come from rng.
  explicit ExtendedTree(Rng rng);
  // Inserts keys[0..n) in order.
  ExtendedTree(std::span<const double> keys, Rng rng);
  // Pivots above depth K+1 copied from `top`; no node occupied yet.
  static ExtendedTree given(const IntervalTree& top, Rng rng);

  // Inserts a key and returns its node. Throws DuplicateKey.
  std::uint32_t insert_key(double key);
  // Walks u through the occupied nodes and occupies the first free node on
  // its way; the new key is that node's pivot. Returns the node.
  std::uint32_t insert_uniform(double u);

  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t key_count() const { return keys_; }

  double pivot(std::uint32_t i);
  std::uint32_t child(std::uint32_t i, int bit);

 private:
  std::uint32_t add_node(double L, double R, int depth);

  Rng rng_;
  std::vector<Node> nodes_;
  std::size_t keys_ = 0;
};

struct PerturbedSample {
  std::vector<double> keys;       // U_i
  std::vector<double> aux;        // V_i
  std::vector<double> perturbed;  // L_i + (R_i - L_i) V_i
  std::vector<double> lower;      // L of the insertion interval
  std::vector<double> upper;      // R of the insertion interval
  std::vector<int> depth;         // depth of the insertion node
};

// Throws std::invalid_argument on length mismatch, DuplicateKey on ties.
PerturbedSample perturb(std::span<const double> keys, std::span<const double> aux);

// Per-node counts on a depth-K tree, indexed like IntervalTree storage.
struct NodeCounts {
  int depth = 0;
  std::size_t n = 0;
  std::vector<std::uint64_t> S;        // keys i <= n compared with the node's pivot
  std::vector<std::uint64_t> S_tilde;  // perturbed keys i <= n inside [L, R)
};

// Counts for the first n keys. `tree` must be built from (a prefix-extension
// of) the same keys.
NodeCounts count_levels(const IntervalTree& tree, std::span<const double> keys,
                        std::span<const double> perturbed, std::size_t n);

// Counts for n keys drawn from their conditional law given the depth-K
// tree: each arrival walks a fresh uniform through the occupied nodes and
// occupies the first free one. Once every node is occupied the remaining
// arrivals are distributed with one multinomial draw when fast_path is set.
NodeCounts sample_counts_given_tree(const IntervalTree& tree, std::size_t n, Rng& rng,
                                    bool fast_path = true);

// n keys from their conditional law given the top of the tree; deeper
// pivots are drawn by stick-breaking on the way.
std::vector<double> sample_keys_given_tree(const IntervalTree& tree, std::size_t n, Rng& rng);

struct LevelCounts {
  std::uint64_t S = 0;
  std::uint64_t S_tilde = 0;
};

// Direct count at phi(alpha, k): S over i in (tau, n] with U_i strictly
// inside the interval, S~ over all i <= n with the perturbed key in [L, R).
LevelCounts level_counts(const IntervalTree& tree, std::span<const double> keys,
                         std::span<const double> perturbed, double alpha, int k, std::size_t n);

// S <= (S~ - 1)^+ <= S + depth.
bool sandwich_holds(std::uint64_t S, std::uint64_t S_tilde, int depth);

// Perturbed Hoare swap count at a node: among the first S~_{phi0} entries
// of (compared indices in partition order, then the remaining indices with
// perturbed key in the node, ascending), those whose perturbed key exceeds
// the pivot.
std::uint64_t swap_count_perturbed(std::span<const double> perturbed, std::span<const std::size_t> compared,
                                   const IntervalNode& node, std::size_t n);

struct ResidualProcess {
  std::size_t n = 0;
  int depth = 0;
  std::vector<StepFunction> G_level;  // G_{.,k,n}, k = 0..K
  StepFunction G_le;                  // sum over k <= K
  StepFunction W_le;                  // same with S~ in place of S
};

// Exact step-function form; all nodes above depth K need pivots.
ResidualProcess residual_process(const IntervalTree& tree, const NodeCounts& counts);

// G_n and its level prefixes on a grid, walking each grid point down the
// extended tree until sqrt(n) * I drops below `cutoff`.
struct GridResidual {
  std::vector<double> grid;
  std::vector<double> G;                // G_{alpha,n}
  std::vector<std::vector<double>> G_le;  // [depth index][grid index]
  std::vector<int> depths;
};

GridResidual grid_residual(ExtendedTree& tree, std::size_t n, std::span<const double> grid,
                           std::span<const int> depths, double cutoff = 1e-12);

// sum over k <= K of (k + 1): the largest possible |G^{<=K} - W^{<=K}| * sqrt(n).
inline double coupling_gap_bound(int K) { return 0.5 * (K + 1.0) * (K + 2.0); }

}  // namespace qvlab
