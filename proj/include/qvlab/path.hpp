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

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace qvlab {

// A node of the infinite binary tree, written as a word over {0,1}. The first
// step is stored in the most significant of the `depth` low bits, so for
// words of equal length the integer order of `bits` is left-to-right order of
// the corresponding intervals.
class Path {
 public:
  static constexpr int kMaxDepth = 62;

  constexpr Path() = default;

  static Path from_string(std::string_view word);
  static constexpr Path from_bits(std::uint64_t bits, int depth) { return Path(bits, depth); }
  // Inverse of heap_index().
  static Path from_heap_index(std::size_t index);

  constexpr int depth() const { return depth_; }
  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return depth_ == 0; }

  // Step i (0-based from the root).
  constexpr int step(int i) const { return static_cast<int>((bits_ >> (depth_ - 1 - i)) & 1u); }

  Path child(int bit) const;
  constexpr Path prefix(int k) const { return Path(bits_ >> (depth_ - k), k); }
  constexpr Path parent() const { return prefix(depth_ - 1); }

  // Position in a level-order array: root 0, children of i at 2i+1, 2i+2.
  constexpr std::size_t heap_index() const {
    return ((std::size_t{1} << depth_) - 1) + static_cast<std::size_t>(bits_);
  }

  // Length of the longest common prefix.
  friend int common_prefix(const Path& a, const Path& b);

  std::string to_string() const;

  friend constexpr bool operator==(const Path&, const Path&) = default;
  // Lexicographic order on words; a proper prefix sorts first.
  friend std::strong_ordering operator<=>(const Path& a, const Path& b);

 private:
  constexpr Path(std::uint64_t bits, int depth) : bits_(bits), depth_(depth) {}

  std::uint64_t bits_ = 0;
  int depth_ = 0;
};

}  // namespace qvlab
