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

#pragma once

#include <functional>
#include <optional>
#include <string>

namespace qvlab {

// Number of bit comparisons needed to tell u from v by their binary
// expansions: one more than the length of the shared prefix. Read from the
// exact 64-bit fixed-point expansion; capped at 64.
int bit_cost(double u, double v);

// Number of times bit_cost has hit its cap since program start.
long bit_cost_cap_events();

// Polynomial tail bound P(beta(u,V) >= x) <= c * x^(-1/eps).
struct Tameness {
  double c = 1.0;
  double eps = 0.0;
  // The bound holds with some c for every eps > 0 (eps is then only the
  // value used where a concrete exponent is needed).
  bool every_eps = false;
};

// Comparison cost beta(u, v) charged when key v is compared with pivot u.
class CostModel {
 public:
  enum class Kind { unit, bit_comparisons, custom };

  static CostModel unit();
  static CostModel bit_comparisons();
  static CostModel custom(std::string name, std::function<double(double, double)> fn,
                          std::optional<Tameness> tameness);

  // Throws NonFiniteCost for negative or non-finite values.
  double operator()(double u, double v) const;

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::optional<Tameness>& tameness() const { return tameness_; }
  // True when the declared tail admits eps < 1/4.
  bool tame_below_quarter() const;

  static std::optional<CostModel> from_name(const std::string& name);

 private:
  CostModel(Kind kind, std::string name, std::function<double(double, double)> fn,
            std::optional<Tameness> tameness)
      : kind_(kind), name_(std::move(name)), fn_(std::move(fn)), tameness_(tameness) {}

  Kind kind_;
  std::string name_;
  std::function<double(double, double)> fn_;
  std::optional<Tameness> tameness_;
};

}  // namespace qvlab
