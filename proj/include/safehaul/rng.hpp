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

#include <cstdint>
#include <random>

namespace safehaul {

using Rng = std::mt19937_64;

/// Independent random streams of one run. Each subsystem draws from its own
/// stream so that adding draws in one place never perturbs another.
enum class Stream : std::uint32_t {
    topology = 1,
    channel = 2,
    blockage = 3,
    traffic = 4,
    consensus = 5,
    agent = 100,      // + node index
    reservoir = 10000 // + node index
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint32_t offset = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream) + offset, 0x5afeu};
    return Rng{seq};
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform index in [0, n). Requires n > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace safehaul
