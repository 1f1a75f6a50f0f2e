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

#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <string>

#include "cropcast/bytes.hpp"
#include "cropcast/keccak.hpp"
#include "cropcast/rng.hpp"

using namespace cropcast;

namespace {

// Digests frozen from tests/oracles/keccak_vectors.py (pycryptodome).
std::map<std::string, std::string> frozen_vectors()
{
    std::ifstream in(std::string(CROPCAST_SOURCE_DIR) + "/tests/oracles/keccak_vectors.txt");
    REQUIRE(in.good());
    std::map<std::string, std::string> out;
    std::string name, digest;
    while (in >> name >> digest) out[name] = "0x" + digest;
    return out;
}

std::string hex_of(std::string_view s) { return to_hex(keccak256(s)); }

} // namespace

TEST_CASE("hex encoding round-trips and rejects malformed input")
{
    Bytes const b{0x00, 0x01, 0xab, 0xff};
    CHECK(to_hex(b) == "0x0001abff");
    CHECK(from_hex("0x0001abff") == b);
    CHECK(from_hex("0001ABFF") == b);
    CHECK(from_hex("0x") == Bytes{});
    CHECK_FALSE(from_hex("0x123").has_value());
    CHECK_FALSE(from_hex("0xzz").has_value());
    CHECK_FALSE(fixed_from_hex<2>("0x0001ab").has_value());
    CHECK(fixed_from_hex<2>("0x01ab") == std::array<std::uint8_t, 2>{0x01, 0xab});
}

TEST_CASE("big-endian helpers")
{
    Bytes out;
    put_be(out, 0x0102030405060708ULL, 8);
    put_be(out, 650, 2);
    CHECK(out == Bytes{1, 2, 3, 4, 5, 6, 7, 8, 0x02, 0x8a});
    CHECK(get_be(out, 0, 8) == 0x0102030405060708ULL);
    CHECK(get_be(out, 8, 2) == 650);
}

TEST_CASE("keccak-256 matches the frozen reference digests")
{
    auto const v = frozen_vectors();
    CHECK(hex_of("") == v.at("empty"));
    CHECK(hex_of("abc") == v.at("abc"));
    CHECK(hex_of(std::string(135, 'a')) == v.at("a*135"));
    CHECK(hex_of(std::string(136, 'a')) == v.at("a*136"));
    CHECK(hex_of(std::string(137, 'a')) == v.at("a*137"));
    CHECK(hex_of(std::string(200, '\xa3')) == v.at("0xa3*200"));
    CHECK(hex_of("addPrediction(string,uint256,uint256,uint256,uint256,uint256,uint256,uint256)") ==
          v.at("addPrediction"));
    CHECK(hex_of("getPrediction(uint256)") == v.at("getPrediction"));
    CHECK(hex_of("CropPrediction") == v.at("CropPrediction"));
}

TEST_CASE("keccak-256 incremental updates equal one-shot hashing")
{
    std::string msg;
    for (int i = 0; i < 700; ++i) msg.push_back(static_cast<char>(i * 31 + 7));
    auto const whole = keccak256(msg);
    for (std::size_t chunk : {1u, 7u, 135u, 136u, 137u, 300u}) {
        Keccak256 h;
        for (std::size_t at = 0; at < msg.size(); at += chunk) h.update(std::string_view(msg).substr(at, chunk));
        CHECK(h.final() == whole);
    }
}

TEST_CASE("splitmix64 is deterministic and bounded")
{
    SplitMix64 a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    SplitMix64 r(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        auto const x = r.below(10);
        CHECK(x < 10);
        seen.insert(x);
        double const u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(seen.size() == 10);
    CHECK(mix_seed(42, 0) != mix_seed(42, 1));
    CHECK(mix_seed(42, 5) == mix_seed(42, 5));
}
