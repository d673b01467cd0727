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

// Limit families {Z_phi}, {Y_phi} and the mixed Gaussian limit processes.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "qvlab/cadlag.hpp"
#include "qvlab/core_model.hpp"
#include "qvlab/cost_model.hpp"
#include "qvlab/rng.hpp"

namespace qvlab {

// One joint draw of Z_phi = B(R_phi) - B(L_phi) for a standard Brownian
// bridge B, and i.i.d. standard normal Y_phi, on every node of the tree.
// Entries are heap-indexed; absent nodes hold NaN.
struct GaussianFamily {
  const IntervalTree* tree = nullptr;
  std::vector<double> points;  // sorted interval endpoints
  std::vector<double> bridge;  // B at those points
  std::vector<double> Z;
  std::vector<double> Y;

  double z(const Path& p) const { return Z[p.heap_index()]; }
  double y(const Path& p) const { return Y[p.heap_index()]; }
};

// The tree must outlive the family.
GaussianFamily sample_family(const IntervalTree& tree, Rng& rng);

// Sum over |phi| <= K of Z_phi on [L_phi, R_phi).
StepFunction sample_G_inf(const GaussianFamily& f);
// Hoare swap limit: per node with both children,
//   Y I0 I1 / I^(3/2) + Z0 I1 / I + Z1 I0 / I - Z I0 I1 / I^2, summed over |phi| < K.
StepFunction sample_G_swap(const GaussianFamily& f);
// Lomuto swap limit: sum over |phi| < K of Z_{phi0} on [L_phi, R_phi).
StepFunction sample_G_lomuto(const GaussianFamily& f);

// Cov(Z_phi, Z_psi) = |I_phi cap I_psi| - I_phi I_psi.
double z_covariance(const IntervalTree& tree, const Path& a, const Path& b);

// Conditional variances of the swap limits at alpha given the tree.
double swap_variance(const IntervalTree& tree, double alpha);
double lomuto_variance(const IntervalTree& tree, double alpha);

// Conditional covariance of G^{<=K} at (alpha, beta), K = min(K, depth).
double sigma_inf(const IntervalTree& tree, double alpha, double beta, int K);
double sigma_inf(const IntervalTree& tree, double alpha, double beta);

// Monte Carlo over uniform V of Cov(J(V,alpha) ^ K, J(V,beta) ^ K).
Estimate sigma_via_J(const IntervalTree& tree, double alpha, double beta, int K, std::size_t samples, Rng& rng);

struct BetaCovariance {
  std::vector<double> grid;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd se;
  double min_eigenvalue = 0.0;
  double clip_threshold = 0.0;  // -1e-8 * trace
  int clipped = 0;              // eigenvalues set to 0
};

// Monte Carlo over V of the covariance of x_alpha = sum over k <= J(V,alpha) ^ K
// of cost(pivot_k, V). Refuses costs without an eps < 1/4 tail declaration.
BetaCovariance beta_cov_matrix(const IntervalTree& tree, std::span<const double> grid, const CostModel& cost,
                               std::size_t samples, Rng& rng);

// Symmetric square root of a PSD matrix: eigenvalues below -1e-8 trace are
// an error, the remaining negative ones are clipped to 0.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Eigen::MatrixXd& cov);
  Eigen::VectorXd draw(Rng& rng) const;
  int clipped() const { return clipped_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  Eigen::MatrixXd root_;
  int clipped_ = 0;
  double min_eigenvalue_ = 0.0;
};

// One draw of G^beta on the grid, held constant up to the next grid point
// (and from 0 to the first one).
StepFunction sample_G_beta(const GaussianSampler& sampler, std::span<const double> grid, Rng& rng);

// Pivots of all nodes above depth K together with the dyadics j / 2^10.
std::vector<double> default_beta_grid(const IntervalTree& tree);

// Left endpoints of the depth-K intervals; the limit processes are constant
// on each of them.
std::vector<double> leaf_grid(const IntervalTree& tree);

}  // namespace qvlab
