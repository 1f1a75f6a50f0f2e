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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cropcast {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<std::uint8_t const>;

using Hash256 = std::array<std::uint8_t, 32>;
using Address = std::array<std::uint8_t, 20>;

inline ByteView as_bytes(std::string_view s) noexcept
{
    return {reinterpret_cast<std::uint8_t const*>(s.data()), s.size()};
}

// Lowercase hex with a 0x prefix.
std::string to_hex(ByteView bytes);

// Accepts an optional 0x prefix and either case; nullopt on odd length or a
// non-hex digit.
std::optional<Bytes> from_hex(std::string_view hex);

template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> fixed_from_hex(std::string_view hex)
{
    auto bytes = from_hex(hex);
    if (!bytes || bytes->size() != N) {
        return std::nullopt;
    }
    std::array<std::uint8_t, N> out{};
    std::copy(bytes->begin(), bytes->end(), out.begin());
    return out;
}

// Big-endian fixed-width integer helpers.
void put_be(Bytes& out, std::uint64_t value, std::size_t width);
std::uint64_t get_be(ByteView in, std::size_t offset, std::size_t width);

} // namespace cropcast
