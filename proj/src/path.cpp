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

#include "qvlab/path.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "qvlab/numeric.hpp"

namespace qvlab {

Path Path::from_string(std::string_view word) {
  if (word.size() > static_cast<std::size_t>(kMaxDepth)) {
    throw std::invalid_argument("path longer than " + std::to_string(kMaxDepth));
  }
  std::uint64_t bits = 0;
  for (char c : word) {
    if (c != '0' && c != '1') throw std::invalid_argument("path must be a word over {0,1}");
    bits = (bits << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return Path(bits, static_cast<int>(word.size()));
}

Path Path::from_heap_index(std::size_t index) {
  int depth = std::bit_width(index + 1) - 1;
  if (depth > kMaxDepth) throw std::invalid_argument("heap index too large");
  return Path(index + 1 - (std::size_t{1} << depth), depth);
}

Path Path::child(int bit) const {
  if (depth_ >= kMaxDepth) throw std::length_error("path depth limit reached");
  return Path((bits_ << 1) | static_cast<std::uint64_t>(bit & 1), depth_ + 1);
}

int common_prefix(const Path& a, const Path& b) {
  const int d = std::min(a.depth_, b.depth_);
  const std::uint64_t x = a.prefix(d).bits_ ^ b.prefix(d).bits_;
  if (x == 0) return d;
  return d - std::bit_width(x);
}

std::string Path::to_string() const {
  std::string s(static_cast<std::size_t>(depth_), '0');
  for (int i = 0; i < depth_; ++i) s[i] = static_cast<char>('0' + step(i));
  return s;
}

std::strong_ordering operator<=>(const Path& a, const Path& b) {
  const int c = common_prefix(a, b);
  if (c == a.depth_ || c == b.depth_) return a.depth_ <=> b.depth_;
  return a.step(c) <=> b.step(c);
}

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace qvlab
