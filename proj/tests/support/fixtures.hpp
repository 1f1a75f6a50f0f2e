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

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "cropcast/dataset.hpp"
#include "cropcast/ledger.hpp"
#include "cropcast/rng.hpp"

namespace cropcast::testing {

// Random labeled fixture: `classes` labels named c0, c1, ..., each with at
// least two samples, features drawn around per-class centers so that the
// classes overlap a little.
inline Dataset random_fixture(std::uint64_t seed, std::size_t samples, std::size_t classes)
{
    SplitMix64 rng(seed);
    std::vector<FeatureVector> centers(classes);
    for (auto& c : centers) {
        for (auto& v : c) v = rng.uniform(0.0, 100.0);
    }
    std::vector<LabeledSample> rows;
    for (std::size_t i = 0; i < samples; ++i) {
        std::size_t const c = i < 2 * classes ? i % classes : rng.below(classes);
        FeatureVector v{};
        for (std::size_t f = 0; f < kFeatureCount; ++f) v[f] = centers[c][f] + rng.uniform(-30.0, 30.0);
        v[5] = rng.uniform(0.0, 14.0);    // ph
        v[4] = rng.uniform(0.0, 100.0);   // humidity
        for (auto& x : v) x = std::max(x, 0.0);
        rows.push_back({SensorReading::from_array(v), "c" + std::to_string(c)});
    }
    return Dataset(std::move(rows));
}

inline PredictionRecord random_record(SplitMix64& rng)
{
    PredictionRecord rec;
    std::size_t const len = 1 + rng.below(rng.below(4) == 0 ? 300 : 24);
    // Mix of ASCII and multi-byte code points, always valid UTF-8.
    static constexpr char const* pieces[] = {"a", "z", "Q", "7", " ", "-", "\xc3\xa9", "\xe0\xa4\x95", "\xf0\x9f\x8c\xbe"};
    while (rec.crop_name.size() < len) rec.crop_name += pieces[rng.below(std::size(pieces))];
    for (std::uint64_t* f : {&rec.n, &rec.p, &rec.k, &rec.ph, &rec.rain, &rec.temp, &rec.hum}) {
        switch (rng.below(4)) {
        case 0: *f = rng.below(30001); break;
        case 1: *f = rng.next(); break;
        case 2: *f = rng.below(2) == 0 ? 0 : ~std::uint64_t{0}; break;
        default: *f = rng.below(1u << 20); break;
        }
    }
    return rec;
}

} // namespace cropcast::testing
