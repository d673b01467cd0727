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

#include "qvlab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "qvlab/errors.hpp"
#include "qvlab/numeric.hpp"

namespace qvlab {

nlohmann::json TestReport::to_json() const {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"name", name},         {"statistic_name", statistic_name}, {"statistic", num(statistic)},
          {"p_value", num(p_value)}, {"se_distance", num(se_distance)}, {"sample_size", sample_size},
          {"threshold", threshold}, {"pass", pass},                      {"note", note}};
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // the series converges slowly here and the value is 1 to double precision
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf, double threshold,
                   std::string name) {
  if (samples.size() < 10) throw StatisticsError("ks_test needs at least 10 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double root_n = std::sqrt(n);
  TestReport r;
  r.name = std::move(name);
  r.statistic_name = "D";
  r.statistic = d;
  r.p_value = kolmogorov_sf((root_n + 0.12 + 0.11 / root_n) * d);
  r.sample_size = x.size();
  r.threshold = threshold;
  r.pass = r.p_value > threshold;
  return r;
}

double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

TestReport chi2_discrete(std::span<const std::int64_t> samples, const std::function<double(std::int64_t)>& pmf,
                         std::int64_t lo, std::int64_t hi, double threshold, std::string name) {
  if (samples.empty()) throw StatisticsError("chi2_discrete needs samples");
  if (hi < lo) throw StatisticsError("chi2_discrete: empty support");
  const double n = static_cast<double>(samples.size());
  const std::size_t cells = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> expected(cells), observed(cells, 0.0);
  CompensatedSum mass;
  for (std::size_t c = 0; c < cells; ++c) {
    const double p = pmf(lo + static_cast<std::int64_t>(c));
    expected[c] = n * p;
    mass += p;
  }
  double outside_obs = 0.0;
  for (std::int64_t s : samples) {
    if (s < lo || s > hi) {
      outside_obs += 1.0;
    } else {
      observed[static_cast<std::size_t>(s - lo)] += 1.0;
    }
  }
  const double outside_exp = n * std::max(0.0, 1.0 - mass.value());
  // Merge left to right until each cell expects >= 5; a short tail joins
  // the last full cell.
  std::vector<double> e, o;
  double acc_e = 0.0, acc_o = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    acc_e += expected[c];
    acc_o += observed[c];
    if (acc_e >= 5.0) {
      e.push_back(acc_e);
      o.push_back(acc_o);
      acc_e = acc_o = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (e.empty()) {
      e.push_back(acc_e);
      o.push_back(acc_o);
    } else {
      e.back() += acc_e;
      o.back() += acc_o;
    }
  }
  if (outside_exp >= 1e-9 * n || outside_obs > 0.0) {
    if (outside_exp >= 5.0) {
      e.push_back(outside_exp);
      o.push_back(outside_obs);
    } else if (outside_obs > 0.0 && outside_exp < 1e-12) {
      e.push_back(0.0);
      o.push_back(outside_obs);
    } else {
      e.back() += outside_exp;
      o.back() += outside_obs;
    }
  }
  double stat = 0.0;
  for (std::size_t c = 0; c < e.size(); ++c) {
    if (e[c] <= 0.0) {
      stat = o[c] > 0.0 ? std::numeric_limits<double>::infinity() : stat;
      continue;
    }
    const double d = o[c] - e[c];
    stat += d * d / e[c];
  }
  TestReport r;
  r.name = std::move(name);
  r.statistic_name = "chi2";
  r.statistic = stat;
  const double dof = static_cast<double>(e.size()) - 1.0;
  r.p_value = dof >= 1.0 ? chi2_sf(stat, dof) : (stat == 0.0 ? 1.0 : 0.0);
  r.sample_size = samples.size();
  r.threshold = threshold;
  r.pass = r.p_value > threshold;
  r.note = "cells=" + std::to_string(e.size());
  return r;
}

namespace {

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double hypergeometric_pmf(std::int64_t k, std::int64_t population, std::int64_t successes, std::int64_t draws) {
  if (population < 0 || successes < 0 || draws < 0 || successes > population || draws > population) {
    throw StatisticsError("hypergeometric_pmf: invalid parameters");
  }
  if (k < std::max<std::int64_t>(0, draws + successes - population) || k > std::min(draws, successes)) return 0.0;
  return std::exp(log_choose(successes, k) + log_choose(population - successes, draws - k) -
                  log_choose(population, draws));
}

double binomial_pmf(std::int64_t k, std::int64_t n, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(log_choose(n, k) + static_cast<double>(k) * std::log(p) +
                  static_cast<double>(n - k) * std::log1p(-p));
}

Estimate cov_with_se(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatisticsError("cov_with_se: unequal lengths");
  if (x.size() < 30) throw StatisticsError("cov_with_se needs at least 30 pairs");
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx.value() / nd, my = sy.value() / nd;
  CompensatedSum sxy;
  for (std::size_t i = 0; i < n; ++i) sxy += (x[i] - mx) * (y[i] - my);
  const double S = sxy.value();
  const double cov = S / (nd - 1.0);
  // Leave-one-out covariance: (S - n/(n-1) dx_i dy_i) / (n - 2).
  CompensatedSum sj;
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    loo[i] = (S - nd / (nd - 1.0) * (x[i] - mx) * (y[i] - my)) / (nd - 2.0);
    sj += loo[i];
  }
  const double mj = sj.value() / nd;
  CompensatedSum ss;
  for (double c : loo) ss += (c - mj) * (c - mj);
  return {cov, std::sqrt((nd - 1.0) / nd * ss.value())};
}

Estimate mean_with_se(std::span<const double> x) {
  if (x.size() < 2) throw StatisticsError("mean_with_se needs at least 2 samples");
  const double nd = static_cast<double>(x.size());
  CompensatedSum s;
  for (double v : x) s += v;
  const double m = s.value() / nd;
  CompensatedSum ss;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss.value() / (nd - 1.0) / nd)};
}

double se_distance(double estimate, double target, double se) {
  const double gap = std::abs(estimate - target);
  if (gap == 0.0) return 0.0;
  if (se <= 0.0) return std::numeric_limits<double>::infinity();
  return gap / se;
}

CovarianceAccumulator::CovarianceAccumulator(std::size_t dim)
    : dim_(dim), mean_(dim, 0.0), m2_(dim * dim, 0.0) {}

void CovarianceAccumulator::add(std::span<const double> x) {
  if (x.size() != dim_) throw StatisticsError("CovarianceAccumulator: wrong dimension");
  ++n_;
  const double inv = 1.0 / static_cast<double>(n_);
  std::vector<double> before(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    before[i] = x[i] - mean_[i];
    mean_[i] += before[i] * inv;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    const double after = x[i] - mean_[i];
    for (std::size_t j = 0; j < dim_; ++j) m2_[i * dim_ + j] += after * before[j];
  }
}

std::vector<double> CovarianceAccumulator::covariance() const {
  std::vector<double> c(m2_);
  if (n_ < 2) return std::vector<double>(dim_ * dim_, 0.0);
  for (double& v : c) v /= static_cast<double>(n_ - 1);
  return c;
}

}  // namespace qvlab
