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

// Counter-based random streams. A stream is identified by (seed, stream id);
// its n-th output depends only on those two values and n, so replicate r can
// be regenerated independently of how replicates are scheduled.

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qvlab {

// Philox4x32-10 (Salmon et al., SC'11). The 64-bit seed is the key, the
// stream id fills the upper half of the counter, the block index the lower.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t seed, std::uint64_t stream) { reset(seed, stream); }

  void reset(std::uint64_t seed, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    pos_ = 4;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t lo = next32();
    const std::uint64_t hi = next32();
    return (hi << 32) | lo;
  }

  // Uniform on the open interval (0,1) with 53 random bits.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Skip to block `block` of the stream; used to give sub-tasks their own
  // disjoint ranges without a second stream id.
  void seek_block(std::uint64_t block) {
    ctr_[0] = static_cast<std::uint32_t>(block);
    ctr_[1] = static_cast<std::uint32_t>(block >> 32);
    pos_ = 4;
  }

 private:
  std::uint32_t next32() {
    if (pos_ == 4) {
      out_ = block(ctr_, key_);
      increment();
      pos_ = 0;
    }
    return out_[pos_++];
  }

  void increment() {
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> c,
                                            std::array<std::uint32_t, 2> k) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kW0;
      k[1] += kW1;
    }
    return c;
  }

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 4> out_{};
  int pos_ = 4;
};

using Rng = Philox;

// Well-separated stream ids for nested fan-out (experiment, replicate).
constexpr std::uint64_t stream_id(std::uint64_t experiment, std::uint64_t replicate) {
  return (experiment << 40) ^ replicate;
}

}  // namespace qvlab
