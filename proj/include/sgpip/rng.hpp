// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "sgpip/types.hpp"

namespace sgpip {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). Reproducible across languages:
//
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (block & 0xffffffff, block >> 32,
//              stream & 0xffffffff, stream >> 32)
//
// Each block yields four 32-bit words consumed in order x0..x3; the block
// index starts at 0 and increments after every four words. Independent
// streams of one master seed differ only in the stream id, so any trial of
// an experiment can be regenerated in isolation.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  // Raw bijection, exposed for known-answer tests.
  static Block bijection(Block counter, Key key);

  result_type operator()();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

// Variate generation on top of Philox4x32. The recipes are fixed so that
// streams are reproducible without relying on <random> distributions,
// whose algorithms are implementation defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  // Uniform on [0, 1) with 53 random bits: two words a, b give
  // ((a >> 5) * 2^26 + (b >> 6)) / 2^53.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal N(0, 1) by Box-Muller on two uniforms (u1, u2):
  // sqrt(-2 ln(1 - u1)) * cos(2 pi u2). Consumes two uniforms per draw.
  double normal();

  // Circularly symmetric CN(0, 1): Box-Muller radius and angle from two
  // uniforms, r = sqrt(-ln(1 - u1)), z = r * exp(j 2 pi u2).
  cdouble complex_normal();
  CVec complex_normal(Eigen::Index n);

  Philox4x32& engine() { return engine_; }

 private:
  Philox4x32 engine_;
};

}  // namespace sgpip
