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

#include "surrogate.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string_view>

#include "cropcast/rng.hpp"

#ifndef CROPCAST_SOURCE_DIR
#define CROPCAST_SOURCE_DIR "."
#endif

namespace cropcast::testing {

namespace {

struct Envelope {
    std::string_view crop;
    std::array<double, 14> bounds; // (lo, hi) for N, P, K, temperature, humidity, ph, rainfall
};

// Per-crop feature envelopes of the public dataset, as reported by common
// exploratory summaries of it.
constexpr std::array<Envelope, 22> kEnvelopes{{
    {"rice", {60, 99, 35, 60, 35, 45, 20.05, 26.93, 80.12, 84.97, 5.01, 7.87, 182.56, 298.56}},
    {"maize", {60, 100, 35, 60, 15, 25, 18.04, 26.55, 55.28, 74.83, 5.51, 7.00, 60.65, 109.75}},
    {"chickpea", {20, 60, 55, 80, 75, 85, 17.02, 21.00, 14.26, 19.97, 5.99, 8.87, 65.11, 94.78}},
    {"kidneybeans", {0, 40, 55, 80, 15, 25, 15.33, 24.92, 18.09, 24.97, 5.50, 6.00, 60.28, 149.74}},
    {"pigeonpeas", {0, 40, 55, 80, 15, 25, 18.32, 36.98, 30.40, 69.69, 4.55, 7.45, 90.05, 198.83}},
    {"mothbeans", {0, 40, 35, 60, 15, 25, 24.02, 31.99, 40.01, 64.96, 3.50, 9.94, 30.92, 74.44}},
    {"mungbean", {0, 40, 35, 60, 15, 25, 27.01, 29.91, 80.03, 89.99, 6.22, 7.20, 36.12, 59.87}},
    {"blackgram", {20, 60, 55, 80, 15, 25, 25.10, 34.95, 60.07, 69.96, 6.50, 7.78, 60.42, 74.92}},
    {"lentil", {0, 40, 55, 80, 15, 25, 18.06, 29.94, 60.09, 69.92, 5.92, 7.84, 35.03, 54.94}},
    {"pomegranate", {0, 40, 5, 30, 35, 45, 18.07, 24.96, 85.13, 94.99, 5.56, 7.20, 102.52, 112.48}},
    {"banana", {80, 120, 70, 95, 45, 55, 25.01, 29.91, 75.03, 84.98, 5.51, 6.49, 90.11, 119.85}},
    {"mango", {0, 40, 15, 40, 25, 35, 27.00, 35.99, 45.02, 54.96, 4.51, 6.97, 89.29, 100.81}},
    {"grapes", {0, 40, 120, 145, 195, 205, 8.83, 41.95, 80.02, 83.98, 5.51, 6.50, 65.01, 74.92}},
    {"watermelon", {80, 120, 5, 30, 45, 55, 24.04, 26.99, 80.03, 89.98, 6.00, 6.96, 40.13, 59.76}},
    {"muskmelon", {80, 120, 5, 30, 45, 55, 27.02, 29.94, 90.02, 94.96, 6.00, 6.78, 20.21, 29.87}},
    {"apple", {0, 40, 120, 145, 195, 205, 21.04, 23.99, 90.03, 94.92, 5.51, 6.50, 100.12, 124.98}},
    {"orange", {0, 40, 5, 30, 5, 15, 10.01, 34.91, 90.01, 94.96, 6.01, 8.00, 100.17, 119.69}},
    {"papaya", {31, 70, 46, 70, 45, 55, 23.01, 43.68, 90.04, 94.94, 6.50, 6.99, 40.35, 248.86}},
    {"coconut", {0, 40, 5, 30, 25, 35, 25.01, 29.87, 90.02, 99.98, 5.50, 6.47, 131.09, 225.63}},
    {"cotton", {100, 140, 35, 60, 15, 25, 22.00, 25.99, 75.01, 84.88, 5.80, 7.99, 60.65, 99.93}},
    {"jute", {60, 100, 35, 60, 35, 45, 23.09, 26.99, 70.88, 89.89, 6.00, 7.49, 150.24, 199.84}},
    {"coffee", {80, 120, 15, 40, 25, 35, 23.06, 27.92, 50.05, 69.95, 6.02, 7.49, 115.16, 199.47}},
}};

constexpr int kRowsPerCrop = 100;

} // namespace

std::string surrogate_crop_csv(std::uint64_t seed)
{
    SplitMix64 rng(seed);
    std::string out = "N,P,K,temperature,humidity,ph,rainfall,label\n";
    char line[256];
    for (auto const& env : kEnvelopes) {
        for (int row = 0; row < kRowsPerCrop; ++row) {
            if (env.crop == "rice" && row == 0) {
                out += "90,42,43,20.87974371,82.00274423,6.502985292,202.9355362,rice\n";
                continue;
            }
            std::array<double, 7> v{};
            for (std::size_t f = 0; f < 7; ++f) {
                double const lo = env.bounds[2 * f];
                double const hi = env.bounds[2 * f + 1];
                v[f] = f < 3 ? lo + static_cast<double>(rng.below(static_cast<std::size_t>(hi - lo) + 1))
                             : rng.uniform(lo, hi);
            }
            std::snprintf(line, sizeof line, "%.0f,%.0f,%.0f,%.8f,%.8f,%.9f,%.7f,%s\n", v[0], v[1], v[2], v[3], v[4],
                          v[5], v[6], std::string(env.crop).c_str());
            out += line;
        }
    }
    return out;
}

std::filesystem::path write_surrogate_crop_csv(std::filesystem::path const& path, std::uint64_t seed)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary | std::ios::trunc) << surrogate_crop_csv(seed);
    return path;
}

std::filesystem::path find_public_crop_csv()
{
    if (char const* env = std::getenv("CROPCAST_PUBLIC_CSV"); env != nullptr && *env != '\0') {
        std::filesystem::path p(env);
        return std::filesystem::exists(p) ? p : std::filesystem::path{};
    }
    std::filesystem::path p = std::filesystem::path(CROPCAST_SOURCE_DIR) / "data" / "Crop_recommendation.csv";
    return std::filesystem::exists(p) ? p : std::filesystem::path{};
}

} // namespace cropcast::testing
