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

// Right-continuous step functions on [0,1] and the metrics of D[0,1].

#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace qvlab {

// f(t) = value0 for t < jumps[0], values[i] on [jumps[i], jumps[i+1]) and
// values.back() on [jumps.back(), 1]. Jump locations lie in (0,1] and are
// strictly increasing; equal neighbouring values are merged away.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(double value0) : value0_(value0) {}
  StepFunction(double value0, std::vector<double> jumps, std::vector<double> values);

  // Piecewise-constant interpolation of samples: value[i] on [grid[i], grid[i+1]).
  // grid[0] must be 0.
  static StepFunction from_grid(std::span<const double> grid, std::span<const double> values);
  // height * 1_{[a,1]}
  static StepFunction indicator(double a, double height = 1.0);

  double operator()(double t) const;

  double value0() const { return value0_; }
  const std::vector<double>& jumps() const { return jumps_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t jump_count() const { return jumps_.size(); }

  // Breakpoints 0 = x_0 < x_1 < ... and the value of each piece.
  std::vector<double> breakpoints() const;
  std::vector<double> piece_values() const;

  StepFunction operator+(const StepFunction& g) const;
  StepFunction operator-(const StepFunction& g) const;
  StepFunction operator*(double c) const;

  std::string to_csv() const;
  nlohmann::json to_json() const;
  static StepFunction from_json(const nlohmann::json& j);

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  template <class Op>
  StepFunction combine(const StepFunction& g, Op op) const;
  void normalize();

  double value0_ = 0.0;
  std::vector<double> jumps_;
  std::vector<double> values_;
};

double sup_norm(const StepFunction& f);
double sup_dist(const StepFunction& f, const StepFunction& g);

// Whether some increasing bijection lambda with |lambda - id| <= eps makes
// |f o lambda - g| <= eps everywhere (as an infimum, so boundary cases count).
bool skorokhod_feasible(const StepFunction& f, const StepFunction& g, double eps);

// Skorokhod J1 distance to within tol, by bisection on eps.
double skorokhod_dist(const StepFunction& f, const StepFunction& g, double tol = 1e-9);

// w'_f(delta): the least over grids 0 = t_0 < ... < t_r = 1 with gaps
// greater than delta of the largest oscillation of f on a cell [t_{i-1}, t_i).
double modulus(const StepFunction& f, double delta);

}  // namespace qvlab
