//
// Copyright 2026 The dpaudit Authors
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
//

// Counter-based random number generation.
//
// All randomness in this project is produced by the Philox4x32-10 block
// cipher (multipliers 0xD2511F53 / 0xCD9E8D57, Weyl constants 0x9E3779B9 /
// 0xBB67AE85, ten rounds).  A draw is a pure function of
// (seed, stream, index), which gives three properties the simulators rely
// on:
//
//   * transcripts are bit-identical across runs and platforms for a fixed
//     seed (IEEE-754 doubles, no rejection sampling anywhere downstream);
//   * every coordinate of a simulated mechanism owns an independent
//     substream, so work can be split across threads in any order and
//     still produce exactly the sequential output;
//   * skipping ahead is O(1).
//
// The generator identity and constants above are pinned: changing any of
// them is a breaking change to transcript reproducibility and must bump
// the transcript version.  The golden outputs in the test suite freeze
// this implementation's output permanently.

#ifndef DPAUDIT_PHILOX_H_
#define DPAUDIT_PHILOX_H_

#include <array>
#include <cstdint>

namespace dpaudit {

class Philox4x32 {
 public:
  using Counter = std::array<uint32_t, 4>;
  using Key = std::array<uint32_t, 2>;

  static Counter Block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t product0 = uint64_t{kMul0} * ctr[0];
      const uint64_t product1 = uint64_t{kMul1} * ctr[2];
      const uint32_t lo0 = static_cast<uint32_t>(product0);
      const uint32_t hi0 = static_cast<uint32_t>(product0 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(product1);
      const uint32_t hi1 = static_cast<uint32_t>(product1 >> 32);
      ctr = Counter{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;
};

// Convenience facade: 64-bit words and (0, 1) doubles addressed by
// (stream, index).  Each (stream, index) pair yields one fixed value.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  uint64_t Word(uint64_t stream, uint64_t index) const {
    const Philox4x32::Counter ctr = {
        static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
        static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
    const Philox4x32::Key key = {static_cast<uint32_t>(seed_),
                                 static_cast<uint32_t>(seed_ >> 32)};
    const Philox4x32::Counter out = Philox4x32::Block(ctr, key);
    return (uint64_t{out[1]} << 32) | out[0];
  }

  // Uniform double strictly inside (0, 1): 53 significant bits, offset by
  // half an ulp so 0 and 1 are unreachable.  Safe to feed to inverse CDFs.
  double Uniform(uint64_t stream, uint64_t index) const {
    const uint64_t bits = Word(stream, index) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
};

}  // namespace dpaudit

#endif  // DPAUDIT_PHILOX_H_
