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

#include "qvlab/path_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qvlab/numeric.hpp"

namespace qvlab {

MetricValue d2(const IntervalTree& tree, double alpha, double beta) {
  if (alpha == beta) return {0.0, false};
  const Junction j = tree.junction(alpha, beta);
  return {std::ldexp(1.0, -j.depth), j.at_least};
}

MetricValue dG(const IntervalTree& tree, double alpha, double beta, int K) {
  if (alpha == beta) return {0.0, false};
  const auto a = tree.lengths_along(alpha, K);
  const auto b = tree.lengths_along(beta, K);
  const int J = std::min(tree.junction(alpha, beta).depth, K);
  CompensatedSum first, diff;
  for (int k = J + 1; k <= K; ++k) {
    first += (2.0 * (k - J) - 1.0) * (a[k] + b[k]);
    diff += a[k] - b[k];
  }
  const double sq = first.value() - diff.value() * diff.value();
  if (sq < 0.0) return {0.0, true};
  return {std::sqrt(sq), false};
}

MetricValue dG(const IntervalTree& tree, double alpha, double beta) { return dG(tree, alpha, beta, tree.depth()); }

double dG_lower_bound(const IntervalTree& tree, double alpha, double beta, int K) {
  if (alpha == beta) return 0.0;
  const auto a = tree.lengths_along(alpha, K);
  const auto b = tree.lengths_along(beta, K);
  const int J = std::min(tree.junction(alpha, beta).depth, K);
  CompensatedSum s;
  for (int k = J + 1; k <= K; ++k) s += 2.0 * (2.0 * (k - J) - 1.0) * std::min(a[k], b[k]);
  return s.value();
}

std::string to_string(Metric m) { return m == Metric::d2 ? "d2" : "dG"; }

std::vector<PairSample> sample_pairs(const IntervalTree& tree, std::size_t count, Rng& rng) {
  const int K = tree.depth();
  std::vector<PairSample> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 100 * count + 1000) throw std::runtime_error("sample_pairs: too many rejected pairs");
    const double a = rng.uniform();
    const int s = static_cast<int>(rng() % static_cast<std::uint64_t>(K + 1));
    const double step = (2.0 * rng.uniform() - 1.0) * std::ldexp(1.0, -s);
    const double b = std::clamp(a + step, 0.0, 1.0);
    const Junction j = tree.junction(a, b);
    if (j.at_least) continue;
    out.push_back({a, b, j.depth});
  }
  return out;
}

namespace {

double metric_value(const IntervalTree& tree, const PairSample& p, Metric m) {
  return m == Metric::d2 ? std::ldexp(1.0, -p.J) : dG(tree, p.alpha, p.beta).value;
}

}  // namespace

nlohmann::json HolderReport::to_json() const {
  return {{"metric", to_string(metric)}, {"exponent", exponent},     {"fit_max_J", fit_max_J},
          {"C", C},                      {"fit_pairs", fit_pairs},   {"test_pairs", test_pairs},
          {"violations", violations},    {"worst_ratio", worst_ratio}, {"degenerate", degenerate},
          {"max_ratio_by_J", max_ratio_by_J}};
}

HolderReport holder_violations(const StepFunction& path, const IntervalTree& tree, std::span<const PairSample> pairs,
                               Metric metric, double exponent, int fit_max_J) {
  HolderReport r;
  r.metric = metric;
  r.exponent = exponent;
  r.fit_max_J = fit_max_J;
  std::vector<double> ratio(pairs.size());
  bool any = false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double df = std::abs(path(pairs[i].alpha) - path(pairs[i].beta));
    const double m = metric_value(tree, pairs[i], metric);
    any = any || df > 0.0;
    ratio[i] = m > 0.0 ? df / std::pow(m, exponent) : (df > 0.0 ? INFINITY : 0.0);
    if (pairs[i].J <= fit_max_J) {
      r.C = std::max(r.C, ratio[i]);
      ++r.fit_pairs;
    }
  }
  r.degenerate = !any;
  if (r.degenerate) return r;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto j = static_cast<std::size_t>(pairs[i].J);
    if (r.max_ratio_by_J.size() <= j) r.max_ratio_by_J.resize(j + 1, 0.0);
    if (r.C > 0.0) r.max_ratio_by_J[j] = std::max(r.max_ratio_by_J[j], ratio[i] / r.C);
    if (pairs[i].J <= fit_max_J) continue;
    ++r.test_pairs;
    const double q = r.C > 0.0 ? ratio[i] / r.C : (ratio[i] > 0.0 ? INFINITY : 0.0);
    r.worst_ratio = std::max(r.worst_ratio, q);
    if (q > 1.0) ++r.violations;
  }
  return r;
}

SlopeEstimate holder_slope(const StepFunction& path, const IntervalTree& tree, std::span<const PairSample> pairs,
                           Metric metric, std::size_t bootstrap, Rng& rng) {
  std::vector<double> xs, ys;
  for (const auto& p : pairs) {
    const double df = std::abs(path(p.alpha) - path(p.beta));
    const double m = metric_value(tree, p, metric);
    if (df > 0.0 && m > 0.0) {
      xs.push_back(std::log(m));
      ys.push_back(std::log(df));
    }
  }
  SlopeEstimate e;
  e.pairs = xs.size();
  if (xs.size() < 3) {
    e.degenerate = true;
    return e;
  }
  auto fit = [&](const std::vector<std::size_t>& idx) {
    double mx = 0, my = 0;
    for (std::size_t i : idx) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(idx.size());
    my /= static_cast<double>(idx.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i : idx) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
  };
  std::vector<std::size_t> all(xs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  e.slope = fit(all);
  std::vector<double> boot;
  std::vector<std::size_t> idx(xs.size());
  for (std::size_t b = 0; b < bootstrap; ++b) {
    for (auto& i : idx) i = static_cast<std::size_t>(rng() % xs.size());
    boot.push_back(fit(idx));
  }
  if (!boot.empty()) {
    std::sort(boot.begin(), boot.end());
    e.lo = boot[static_cast<std::size_t>(0.025 * static_cast<double>(boot.size() - 1))];
    e.hi = boot[static_cast<std::size_t>(0.975 * static_cast<double>(boot.size() - 1))];
  } else {
    e.lo = e.hi = e.slope;
  }
  return e;
}

}  // namespace qvlab
