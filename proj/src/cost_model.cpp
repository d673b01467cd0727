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

#include "qvlab/cost_model.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>

#include "qvlab/errors.hpp"
#include "qvlab/numeric.hpp"

namespace qvlab {

NonFiniteCost::NonFiniteCost(double u, double v, double value)
    : std::domain_error("cost(" + format_double(u) + ", " + format_double(v) +
                        ") = " + format_double(value) + " is not a finite nonnegative number"),
      u_(u),
      v_(v) {}

namespace {

std::atomic<long> g_cap_events{0};

std::uint64_t fixed_point(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("bit_cost: key outside [0,1): " + format_double(x));
  // Exact: x * 2^64 is representable and below 2^64.
  return static_cast<std::uint64_t>(std::floor(std::ldexp(x, 64)));
}

}  // namespace

int bit_cost(double u, double v) {
  if (u == v) throw std::invalid_argument("bit_cost: keys must differ, got " + format_double(u));
  const std::uint64_t x = fixed_point(u) ^ fixed_point(v);
  if (x == 0) {
    if (g_cap_events.fetch_add(1, std::memory_order_relaxed) < 10) {
      std::cerr << "qvlab: bit_cost(" << format_double(u) << ", " << format_double(v)
                << ") shares 64 leading bits; capped at 64\n";
    }
    return 64;
  }
  return 1 + std::countl_zero(x);
}

long bit_cost_cap_events() { return g_cap_events.load(); }

CostModel CostModel::unit() {
  return CostModel(Kind::unit, "unit", [](double, double) { return 1.0; },
                   Tameness{1.0, 0.0, true});
}

CostModel CostModel::bit_comparisons() {
  // P(bit_cost(u,V) >= x) <= 2^(1-x), which is below c * x^(-1/eps) for
  // every eps once c is large enough.
  return CostModel(Kind::bit_comparisons, "bit",
                   [](double u, double v) { return static_cast<double>(bit_cost(u, v)); },
                   Tameness{2.0, 0.2, true});
}

CostModel CostModel::custom(std::string name, std::function<double(double, double)> fn,
                            std::optional<Tameness> tameness) {
  return CostModel(Kind::custom, std::move(name), std::move(fn), tameness);
}

double CostModel::operator()(double u, double v) const {
  const double c = fn_(u, v);
  if (!std::isfinite(c) || c < 0.0) throw NonFiniteCost(u, v, c);
  return c;
}

bool CostModel::tame_below_quarter() const {
  return tameness_ && (tameness_->every_eps || tameness_->eps < 0.25);
}

std::optional<CostModel> CostModel::from_name(const std::string& name) {
  if (name == "unit") return unit();
  if (name == "bit" || name == "bit_comparisons") return bit_comparisons();
  return std::nullopt;
}

}  // namespace qvlab
