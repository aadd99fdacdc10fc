// Copyright 2026 The dhda Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DHDA_RNG_HPP_
#define DHDA_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace dhda {

// splitmix64 generator. Used instead of std:: distributions so that seeded
// runs reproduce bit-for-bit across standard library implementations.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n); n must be > 0
    std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bool() { return (next_u64() & 1ULL) != 0; }

    // standard normal, Box-Muller
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // derive an independent stream for a sub-component
    std::uint64_t fork(std::uint64_t salt) {
        SplitMix64 g(next_u64() ^ (salt * 0xff51afd7ed558ccdULL + 1));
        return g.next_u64();
    }

  private:
    std::uint64_t state_;
};

// stateless seed derivation for (base seed, component tag) pairs
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
    SplitMix64 g(base ^ (tag + 0x9e3779b97f4a7c15ULL) * 0xc2b2ae3d27d4eb4fULL);
    g.next_u64();
    return g.next_u64();
}

} // namespace dhda

#endif // DHDA_RNG_HPP_
