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

#ifndef DHDA_HASHING_HPP_
#define DHDA_HASHING_HPP_

#include <cstdint>
#include <cstring>
#include <string_view>

namespace dhda {

// FNV-1a accumulator for stable state fingerprints (test assertions and
// change tracking, not cryptography).
class Fingerprint {
  public:
    void add_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= static_cast<std::uint64_t>(p[i]);
            hash_ *= 0x100000001b3ULL;
        }
    }

    void add(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        add(bits);
    }

    void add(std::uint64_t v) { add_bytes(&v, sizeof v); }
    void add(std::int64_t v) { add_bytes(&v, sizeof v); }
    void add(int v) { add(static_cast<std::int64_t>(v)); }
    void add(std::size_t v) { add(static_cast<std::uint64_t>(v)); }
    void add(bool v) { add(static_cast<std::int64_t>(v ? 1 : 0)); }
    void add(std::string_view s) {
        add(s.size());
        add_bytes(s.data(), s.size());
    }

    std::uint64_t value() const { return hash_; }

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

} // namespace dhda

#endif // DHDA_HASHING_HPP_
