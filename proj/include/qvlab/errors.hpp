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

#include <stdexcept>
#include <string>

namespace qvlab {

// A path could not be followed to the requested level because a node on it
// carries no pivot.
class InsufficientDepth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateKey : public std::invalid_argument {
 public:
  DuplicateKey(std::size_t first, std::size_t second)
      : std::invalid_argument("duplicate key at indices " + std::to_string(first) + " and " +
                              std::to_string(second)),
        first_(first),
        second_(second) {}
  std::size_t first() const { return first_; }
  std::size_t second() const { return second_; }

 private:
  std::size_t first_;
  std::size_t second_;
};

class NonFiniteCost : public std::domain_error {
 public:
  NonFiniteCost(double u, double v, double value);
  double u() const { return u_; }
  double v() const { return v_; }

 private:
  double u_;
  double v_;
};

class StatisticsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qvlab
