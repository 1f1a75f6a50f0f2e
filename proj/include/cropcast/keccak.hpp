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
#include <string_view>

#include "cropcast/bytes.hpp"

namespace cropcast {

// Keccak-256 as used by Ethereum: rate 136 bytes, original 0x01 padding
// (not the FIPS-202 SHA3 0x06 domain byte).
class Keccak256 {
public:
    Keccak256() noexcept = default;

    Keccak256& update(ByteView data) noexcept;
    Keccak256& update(std::string_view data) noexcept { return update(as_bytes(data)); }

    // Finalizes; the hasher must not be updated afterwards.
    Hash256 final() noexcept;

private:
    static constexpr std::size_t kRate = 136;

    void absorb_block() noexcept;

    std::array<std::uint64_t, 25> state_{};
    std::array<std::uint8_t, kRate> buffer_{};
    std::size_t buffered_{0};
};

Hash256 keccak256(ByteView data) noexcept;
Hash256 keccak256(std::string_view data) noexcept;

// Applies the Keccak-f[1600] permutation in place.
void keccak_f1600(std::array<std::uint64_t, 25>& state) noexcept;

} // namespace cropcast
