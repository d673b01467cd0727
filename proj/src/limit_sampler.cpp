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

#include "qvlab/limit_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qvlab/errors.hpp"
#include "qvlab/numeric.hpp"
#include "qvlab/stats.hpp"

namespace qvlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_leaf(const IntervalTree& t, std::size_t i) {
  const std::size_t c = 2 * i + 1;
  return c >= t.lefts().size() || !t.present(c);
}

// Leaves of the truncated tree from left to right.
std::vector<std::size_t> leaves(const IntervalTree& t) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (is_leaf(t, i)) {
      out.push_back(i);
    } else {
      stack.push_back(2 * i + 2);
      stack.push_back(2 * i + 1);
    }
  }
  return out;
}

// Step function taking value(leaf) on each leaf interval.
template <class F>
StepFunction leafwise(const IntervalTree& t, F value) {
  const auto lv = leaves(t);
  std::vector<double> grid(lv.size()), vals(lv.size());
  for (std::size_t b = 0; b < lv.size(); ++b) {
    grid[b] = t.lefts()[lv[b]];
    vals[b] = value(lv[b]);
  }
  return StepFunction::from_grid(grid, vals);
}

double overlap(const IntervalTree& t, std::size_t a, std::size_t b) {
  return std::max(0.0, std::min(t.rights()[a], t.rights()[b]) - std::max(t.lefts()[a], t.lefts()[b]));
}

double zcov(const IntervalTree& t, std::size_t a, std::size_t b) {
  return overlap(t, a, b) - t.length(a) * t.length(b);
}

double quadratic_form(const IntervalTree& t, const std::map<std::size_t, double>& coef) {
  CompensatedSum s;
  for (const auto& [a, ca] : coef) {
    for (const auto& [b, cb] : coef) s += ca * cb * zcov(t, a, b);
  }
  return s.value();
}

}  // namespace

GaussianFamily sample_family(const IntervalTree& tree, Rng& rng) {
  GaussianFamily f;
  f.tree = &tree;
  const std::size_t N = tree.lefts().size();
  for (std::size_t i = 0; i < N; ++i) {
    if (!tree.present(i)) continue;
    f.points.push_back(tree.lefts()[i]);
    f.points.push_back(tree.rights()[i]);
  }
  std::sort(f.points.begin(), f.points.end());
  f.points.erase(std::unique(f.points.begin(), f.points.end()), f.points.end());
  std::normal_distribution<double> normal;
  std::vector<double> w(f.points.size(), 0.0);
  for (std::size_t i = 1; i < w.size(); ++i) {
    w[i] = w[i - 1] + std::sqrt(f.points[i] - f.points[i - 1]) * normal(rng);
  }
  const double w1 = w.back();
  f.bridge.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) f.bridge[i] = w[i] - f.points[i] * w1;
  f.bridge.front() = 0.0;
  f.bridge.back() = 0.0;
  auto B = [&](double x) {
    const auto it = std::lower_bound(f.points.begin(), f.points.end(), x);
    return f.bridge[static_cast<std::size_t>(it - f.points.begin())];
  };
  f.Z.assign(N, kNaN);
  f.Y.assign(N, kNaN);
  for (std::size_t i = 0; i < N; ++i) {
    if (!tree.present(i)) continue;
    f.Z[i] = B(tree.rights()[i]) - B(tree.lefts()[i]);
    f.Y[i] = normal(rng);
  }
  return f;
}

StepFunction sample_G_inf(const GaussianFamily& f) {
  const IntervalTree& t = *f.tree;
  return leafwise(t, [&](std::size_t leaf) {
    CompensatedSum s;
    for (std::size_t i = leaf;; i = (i - 1) / 2) {
      s += f.Z[i];
      if (i == 0) break;
    }
    return s.value();
  });
}

StepFunction sample_G_swap(const GaussianFamily& f) {
  const IntervalTree& t = *f.tree;
  return leafwise(t, [&](std::size_t leaf) {
    CompensatedSum s;
    for (std::size_t i = leaf; i != 0;) {
      i = (i - 1) / 2;
      const double I = t.length(i), I0 = t.length(2 * i + 1), I1 = t.length(2 * i + 2);
      s += f.Y[i] * I0 * I1 / (I * std::sqrt(I)) + f.Z[2 * i + 1] * I1 / I + f.Z[2 * i + 2] * I0 / I -
           f.Z[i] * I0 * I1 / (I * I);
    }
    return s.value();
  });
}

StepFunction sample_G_lomuto(const GaussianFamily& f) {
  const IntervalTree& t = *f.tree;
  return leafwise(t, [&](std::size_t leaf) {
    CompensatedSum s;
    for (std::size_t i = leaf; i != 0;) {
      i = (i - 1) / 2;
      s += f.Z[2 * i + 1];
    }
    return s.value();
  });
}

double z_covariance(const IntervalTree& tree, const Path& a, const Path& b) {
  if (!tree.contains(a) || !tree.contains(b)) throw InsufficientDepth("z_covariance: node outside the tree");
  return zcov(tree, a.heap_index(), b.heap_index());
}

double swap_variance(const IntervalTree& tree, double alpha) {
  const int K = tree.depth();
  const Path p = tree.path_of(alpha, K);
  std::map<std::size_t, double> coef;
  CompensatedSum y;
  for (int k = 0; k < K; ++k) {
    const std::size_t i = p.prefix(k).heap_index();
    const double I = tree.length(i), I0 = tree.length(2 * i + 1), I1 = tree.length(2 * i + 2);
    const double a = I0 * I1 / (I * std::sqrt(I));
    y += a * a;
    coef[2 * i + 1] += I1 / I;
    coef[2 * i + 2] += I0 / I;
    coef[i] -= I0 * I1 / (I * I);
  }
  return y.value() + quadratic_form(tree, coef);
}

double lomuto_variance(const IntervalTree& tree, double alpha) {
  const int K = tree.depth();
  const Path p = tree.path_of(alpha, K);
  std::map<std::size_t, double> coef;
  for (int k = 0; k < K; ++k) coef[2 * p.prefix(k).heap_index() + 1] += 1.0;
  return quadratic_form(tree, coef);
}

double sigma_inf(const IntervalTree& tree, double alpha, double beta, int K) {
  if (K < 0 || K > tree.depth()) throw InsufficientDepth("sigma_inf: K exceeds tree depth");
  const auto a = tree.lengths_along(alpha, K);
  const auto b = tree.lengths_along(beta, K);
  const Junction jn = tree.junction(alpha, beta);
  const int J = std::min(jn.depth, K);
  CompensatedSum first;
  for (int k = 0; k <= J; ++k) {
    for (int j = 0; j <= K; ++j) first += a[std::max(j, k)];
  }
  CompensatedSum tail;
  for (int j = J + 1; j <= K; ++j) tail += b[j];
  const double Sa = compensated_sum(a), Sb = compensated_sum(b);
  return first.value() + (1.0 + J) * tail.value() - Sa * Sb;
}

double sigma_inf(const IntervalTree& tree, double alpha, double beta) {
  return sigma_inf(tree, alpha, beta, tree.depth());
}

Estimate sigma_via_J(const IntervalTree& tree, double alpha, double beta, int K, std::size_t samples, Rng& rng) {
  if (K < 0 || K > tree.depth()) throw InsufficientDepth("sigma_via_J: K exceeds tree depth");
  if (K == 0) return {0.0, 0.0};
  const Path pa = tree.path_of(alpha, K);
  const Path pb = tree.path_of(beta, K);
  std::vector<double> ja(samples), jb(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const Path pv = tree.path_of(rng.uniform(), K);
    ja[s] = common_prefix(pv, pa);
    jb[s] = common_prefix(pv, pb);
  }
  return cov_with_se(ja, jb);
}

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& cov) {
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigendecomposition failed for a " << cov.rows() << "x" << cov.cols() << " matrix, trace "
       << sym.trace();
    throw StatisticsError(os.str());
  }
  const Eigen::VectorXd lambda = es.eigenvalues();
  const double trace = sym.trace();
  min_eigenvalue_ = lambda.size() > 0 ? lambda.minCoeff() : 0.0;
  if (min_eigenvalue_ < -1e-8 * std::abs(trace)) {
    std::ostringstream os;
    os << "covariance matrix is not positive semidefinite: smallest eigenvalue " << min_eigenvalue_
       << ", largest " << (lambda.size() > 0 ? lambda.maxCoeff() : 0.0) << ", trace " << trace;
    throw StatisticsError(os.str());
  }
  Eigen::VectorXd root(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < 0.0) ++clipped_;
    root[i] = std::sqrt(std::max(lambda[i], 0.0));
  }
  root_ = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd GaussianSampler::draw(Rng& rng) const {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(root_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return root_ * z;
}

BetaCovariance beta_cov_matrix(const IntervalTree& tree, std::span<const double> grid, const CostModel& cost,
                               std::size_t samples, Rng& rng) {
  if (!cost.tame_below_quarter()) {
    throw std::invalid_argument("beta_cov_matrix: cost '" + cost.name() +
                                "' has no eps-tameness declaration with eps < 1/4");
  }
  const int K = tree.depth();
  const std::size_t d = grid.size();
  std::vector<Path> paths;
  for (double a : grid) paths.push_back(tree.path_of(a, K));
  std::vector<std::vector<double>> x(d, std::vector<double>(samples));
  std::vector<double> prefix(static_cast<std::size_t>(K) + 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const double v = rng.uniform();
    const Path pv = tree.path_of(v, K);
    double acc = 0.0;
    for (int k = 0; k <= K; ++k) {
      const std::size_t i = pv.prefix(k).heap_index();
      if (tree.has_pivot(i) && tree.pivots()[i] != v) acc += cost(tree.pivots()[i], v);
      prefix[k] = acc;
    }
    for (std::size_t a = 0; a < d; ++a) x[a][s] = prefix[common_prefix(pv, paths[a])];
  }
  BetaCovariance out;
  out.grid.assign(grid.begin(), grid.end());
  out.cov.resize(d, d);
  out.se.resize(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      const Estimate e = cov_with_se(x[a], x[b]);
      out.cov(a, b) = out.cov(b, a) = e.value;
      out.se(a, b) = out.se(b, a) = e.standard_error;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.cov);
  Eigen::VectorXd lambda = es.eigenvalues();
  const double trace = out.cov.trace();
  out.clip_threshold = -1e-8 * std::abs(trace);
  out.min_eigenvalue = d > 0 ? lambda.minCoeff() : 0.0;
  if (out.min_eigenvalue < out.clip_threshold) {
    throw StatisticsError("beta covariance estimate has eigenvalue " + format_double(out.min_eigenvalue) +
                          " below the clip threshold " + format_double(out.clip_threshold));
  }
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < 0.0) {
      lambda[i] = 0.0;
      ++out.clipped;
    }
  }
  if (out.clipped > 0) out.cov = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

StepFunction sample_G_beta(const GaussianSampler& sampler, std::span<const double> grid, Rng& rng) {
  const Eigen::VectorXd z = sampler.draw(rng);
  if (static_cast<std::size_t>(z.size()) != grid.size()) throw std::invalid_argument("sample_G_beta: grid size");
  std::vector<double> g(grid.begin(), grid.end());
  std::vector<double> v(z.data(), z.data() + z.size());
  if (g.empty()) return StepFunction();
  if (g.front() > 0.0) {
    g.insert(g.begin(), 0.0);
    v.insert(v.begin(), v.front());
  }
  return StepFunction::from_grid(g, v);
}

std::vector<double> default_beta_grid(const IntervalTree& tree) {
  std::vector<double> g;
  for (int j = 0; j < 1024; ++j) g.push_back(std::ldexp(static_cast<double>(j), -10));
  const std::size_t inner = tree.pivots().size() >> 1;
  for (std::size_t i = 0; i < inner; ++i) {
    if (tree.has_pivot(i)) g.push_back(tree.pivots()[i]);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

std::vector<double> leaf_grid(const IntervalTree& tree) {
  std::vector<double> g;
  for (std::size_t i : leaves(tree)) g.push_back(tree.lefts()[i]);
  return g;
}

}  // namespace qvlab
