/*
   Copyright 2026 The Cropcast Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace cropcast {

// SplitMix64 (Steele, Lea & Flood 2014). Every random decision in the
// project draws from this generator so splits, forests and simulators are
// reproducible bit-for-bit on any platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Index in [0, bound) via the 128-bit multiply-shift reduction.
    std::size_t below(std::size_t bound) noexcept
    {
        auto const wide = static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
        return static_cast<std::size_t>(wide >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

// Fisher-Yates, walking from the back.
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) noexcept
{
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t const j = rng.below(i);
        std::swap(items[i - 1], items[j]);
    }
}

// Derives an independent stream seed from (seed, stream) without consuming
// state from a shared generator.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    SplitMix64 g(seed ^ (stream * 0xd1342543de82ef95ULL));
    g.next();
    return g.next();
}

} // namespace cropcast
