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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cropcast/dataset.hpp"

namespace cropcast {

class TelemetryError : public std::runtime_error {
public:
    enum class Code { Config, EmptyWindow, Window, Parse };

    TelemetryError(Code code, std::string const& what) : std::runtime_error(what), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

// One composite reading from a field station.
struct SensorMessage {
    std::string device_id;
    std::uint64_t timestamp{0};
    SensorReading reading;

    friend bool operator==(SensorMessage const&, SensorMessage const&) = default;
};

// {device_id, timestamp, n, p, k, temperature, humidity, ph, rainfall}.
// Non-finite values are written as null.
std::string to_json_text(SensorMessage const& msg);

// Missing or mistyped fields throw TelemetryError{Parse}. A null feature is
// read as NaN so that validation reports it as NON_FINITE.
SensorMessage parse_sensor_message(std::string_view text);

enum class SimMode { Replay, Synthetic };

struct SimConfig {
    SimMode mode{SimMode::Replay};
    double rate{1.0};              // messages per second
    std::uint64_t seed{42};
    std::size_t devices{1};
    std::uint64_t start_timestamp{1'710'970'112};
    Dataset const* source{nullptr};
};

// Per-crop [min, max] envelopes precomputed from the source dataset.
class Simulator {
public:
    explicit Simulator(SimConfig config);

    SimConfig const& config() const noexcept { return config_; }

    // Replay emits source rows in order, cycling. Synthetic draws a crop
    // uniformly, then each feature uniformly inside that crop's observed
    // range, from a generator seeded by mix_seed(seed, step).
    SensorMessage generate(std::uint64_t step) const;

private:
    SimConfig config_;
    std::vector<FeatureVector> crop_min_;
    std::vector<FeatureVector> crop_max_;
};

SensorMessage generate_message(SimConfig const& cfg, std::uint64_t step);

struct Interval {
    double lo;
    double hi;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

// Intervals in kFeatureNames order.
struct ValidationRule {
    std::array<Interval, kFeatureCount> bounds{{
        {0.0, 300.0},    // N
        {0.0, 300.0},    // P
        {0.0, 300.0},    // K
        {-20.0, 60.0},   // temperature
        {0.0, 100.0},    // humidity
        {0.0, 14.0},     // ph
        {0.0, 1000.0},   // rainfall
    }};
};

// N_RANGE, P_RANGE, K_RANGE, TEMPERATURE_RANGE, HUMIDITY_RANGE, PH_RANGE,
// RAINFALL_RANGE for feature index 0..6.
std::string_view range_code(std::size_t feature) noexcept;
inline constexpr std::string_view kNonFiniteCode = "NON_FINITE";

struct FieldRejection {
    std::string field;
    std::string code;

    friend bool operator==(FieldRejection const&, FieldRejection const&) = default;
};

struct ValidationOutcome {
    std::optional<SensorReading> reading;
    std::vector<FieldRejection> rejections; // in feature order

    bool accepted() const noexcept { return reading.has_value(); }
};

ValidationOutcome validate_reading(SensorReading const& r, ValidationRule const& rules = {});
ValidationOutcome validate_message(SensorMessage const& msg, ValidationRule const& rules = {});

// Mean of the last w readings per feature.
FeatureVector aggregate_window(std::span<SensorReading const> readings, std::size_t w);

} // namespace cropcast
