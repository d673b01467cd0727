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

#include "qvlab/cadlag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qvlab/numeric.hpp"

namespace qvlab {

StepFunction::StepFunction(double value0, std::vector<double> jumps, std::vector<double> values)
    : value0_(value0), jumps_(std::move(jumps)), values_(std::move(values)) {
  if (jumps_.size() != values_.size()) throw std::invalid_argument("step function: jumps/values size mismatch");
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    if (!(jumps_[i] > 0.0 && jumps_[i] <= 1.0) || (i > 0 && !(jumps_[i] > jumps_[i - 1]))) {
      throw std::invalid_argument("step function: jump locations must increase strictly within (0,1]");
    }
  }
  normalize();
}

void StepFunction::normalize() {
  std::size_t out = 0;
  double prev = value0_;
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    if (values_[i] == prev) continue;
    jumps_[out] = jumps_[i];
    values_[out] = values_[i];
    prev = values_[i];
    ++out;
  }
  jumps_.resize(out);
  values_.resize(out);
}

StepFunction StepFunction::from_grid(std::span<const double> grid, std::span<const double> values) {
  if (grid.empty() || grid.size() != values.size() || grid[0] != 0.0) {
    throw std::invalid_argument("from_grid: need matching sizes and grid[0] = 0");
  }
  return StepFunction(values[0], std::vector<double>(grid.begin() + 1, grid.end()),
                      std::vector<double>(values.begin() + 1, values.end()));
}

StepFunction StepFunction::indicator(double a, double height) {
  if (a <= 0.0) return StepFunction(height);
  return StepFunction(0.0, {a}, {height});
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t);
  if (it == jumps_.begin()) return value0_;
  return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

std::vector<double> StepFunction::breakpoints() const {
  std::vector<double> x{0.0};
  x.insert(x.end(), jumps_.begin(), jumps_.end());
  return x;
}

std::vector<double> StepFunction::piece_values() const {
  std::vector<double> v{value0_};
  v.insert(v.end(), values_.begin(), values_.end());
  return v;
}

template <class Op>
StepFunction StepFunction::combine(const StepFunction& g, Op op) const {
  std::vector<double> jumps;
  std::merge(jumps_.begin(), jumps_.end(), g.jumps_.begin(), g.jumps_.end(), std::back_inserter(jumps));
  jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
  std::vector<double> values(jumps.size());
  for (std::size_t i = 0; i < jumps.size(); ++i) values[i] = op((*this)(jumps[i]), g(jumps[i]));
  return StepFunction(op(value0_, g.value0_), std::move(jumps), std::move(values));
}

StepFunction StepFunction::operator+(const StepFunction& g) const {
  return combine(g, [](double a, double b) { return a + b; });
}

StepFunction StepFunction::operator-(const StepFunction& g) const {
  return combine(g, [](double a, double b) { return a - b; });
}

StepFunction StepFunction::operator*(double c) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= c;
  return StepFunction(value0_ * c, jumps_, std::move(v));
}

std::string StepFunction::to_csv() const {
  std::ostringstream os;
  os << "location,value\n0," << format_double(value0_) << '\n';
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    os << format_double(jumps_[i]) << ',' << format_double(values_[i]) << '\n';
  }
  return os.str();
}

nlohmann::json StepFunction::to_json() const {
  return {{"value0", value0_}, {"jumps", jumps_}, {"values", values_}};
}

StepFunction StepFunction::from_json(const nlohmann::json& j) {
  return StepFunction(j.at("value0").get<double>(), j.at("jumps").get<std::vector<double>>(),
                      j.at("values").get<std::vector<double>>());
}

double sup_norm(const StepFunction& f) {
  double m = std::abs(f.value0());
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double sup_dist(const StepFunction& f, const StepFunction& g) { return sup_norm(f - g); }

bool skorokhod_feasible(const StepFunction& f, const StepFunction& g, double eps) {
  if (eps < 0.0) return false;
  // s: breakpoints of f (s[0] = 0), t: those of g; a, b: piece values.
  const std::vector<double> s = f.breakpoints();
  const std::vector<double> t = g.breakpoints();
  const std::vector<double> a = f.piece_values();
  const std::vector<double> b = g.piece_values();
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  auto s_next = [&](std::size_t i) { return i + 1 < m ? s[i + 1] : 1.0; };
  auto t_next = [&](std::size_t j) { return j + 1 < n ? t[j + 1] : 1.0; };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // pos[i][j]: earliest current time with f in piece i and g in piece j.
  std::vector<double> pos(m * n, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return pos[i * n + j]; };
  if (std::abs(a[0] - b[0]) > eps) return false;
  at(0, 0) = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = at(i, j);
      if (c == kInf) continue;
      const bool more_f = i + 1 < m;
      const bool more_g = j + 1 < n;
      // Move f's next jump to x inside g's current piece.
      if (more_f && std::abs(a[i + 1] - b[j]) <= eps) {
        const double sj = s_next(i);
        double lo = std::max({sj - eps, c, t[j]});
        double hi = std::min(sj + eps, t_next(j));
        if (sj == 1.0) lo = std::max(lo, 1.0);  // a jump at 1 stays at 1
        if (lo <= hi) at(i + 1, j) = std::min(at(i + 1, j), lo);
      }
      // g jumps while f stays in piece i.
      if (more_g && std::abs(a[i] - b[j + 1]) <= eps) {
        const double tj = t_next(j);
        // A jump of g at 1 can only be passed once f has no jumps left.
        if (tj >= c && (tj < 1.0 || !more_f) && (!more_f || tj <= s_next(i) + eps)) {
          at(i, j + 1) = std::min(at(i, j + 1), tj);
        }
      }
      // Both jump together.
      if (more_f && more_g && std::abs(a[i + 1] - b[j + 1]) <= eps) {
        const double tj = t_next(j);
        const double sj = s_next(i);
        if (tj >= c && std::abs(tj - sj) <= eps && (sj != 1.0 || tj == 1.0)) {
          at(i + 1, j + 1) = std::min(at(i + 1, j + 1), tj);
        }
      }
    }
  }
  return at(m - 1, n - 1) <= 1.0;
}

double skorokhod_dist(const StepFunction& f, const StepFunction& g, double tol) {
  double hi = sup_dist(f, g);
  if (hi == 0.0) return 0.0;
  double lo = 0.0;
  if (skorokhod_feasible(f, g, 0.0)) return 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (skorokhod_feasible(f, g, mid) ? hi : lo) = mid;
  }
  return hi;
}

namespace {

// Can [0,1) be cut into cells longer than delta, each with oscillation <= w?
bool modulus_feasible(const std::vector<double>& x, const std::vector<double>& v, double delta, double w) {
  const std::size_t M = v.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto next = [&](std::size_t m) { return m + 1 < M ? x[m + 1] : 1.0; };
  // earliest[m]: earliest start of a cell whose first piece is m.
  std::vector<double> earliest(M, kInf);
  earliest[0] = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double u = earliest[m];
    if (u == kInf) continue;
    double lo = v[m], hi = v[m];
    for (std::size_t m2 = m; m2 < M; ++m2) {
      lo = std::min(lo, v[m2]);
      hi = std::max(hi, v[m2]);
      if (hi - lo > w) break;
      const double end = next(m2);
      if (m2 + 1 == M) {
        if (end - u > delta) return true;
        break;
      }
      // End exactly at the jump into piece m2+1.
      if (end - u > delta) earliest[m2 + 1] = std::min(earliest[m2 + 1], end);
      // End inside piece m2; the next cell then starts in m2.
      if (m2 > m) {
        const double cut = std::max(x[m2], u + delta);
        if (cut < end) earliest[m2] = std::min(earliest[m2], cut);
      }
    }
  }
  return false;
}

}  // namespace

double modulus(const StepFunction& f, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("modulus: delta must lie in (0,1)");
  std::vector<double> x = f.breakpoints();
  std::vector<double> v = f.piece_values();
  // The value at t = 1 alone never enters a cell [t_{i-1}, t_i).
  if (x.size() > 1 && x.back() == 1.0) {
    x.pop_back();
    v.pop_back();
  }
  std::vector<double> cand;
  cand.reserve(v.size() * (v.size() + 1) / 2);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i; j < v.size(); ++j) cand.push_back(std::abs(v[i] - v[j]));
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t lo = 0, hi = cand.size() - 1;  // the largest candidate is always feasible
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (modulus_feasible(x, v, delta, cand[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return cand[lo];
}

}  // namespace qvlab
