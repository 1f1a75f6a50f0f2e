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

#include "cropcast/telemetry.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "cropcast/rng.hpp"

namespace cropcast {

using json = nlohmann::json;

namespace {

// Message field names in kFeatureNames order.
constexpr std::array<char const*, kFeatureCount> kMessageFields{"n",        "p",  "k",       "temperature",
                                                                "humidity", "ph", "rainfall"};

} // namespace

std::string to_json_text(SensorMessage const& msg)
{
    json j{{"device_id", msg.device_id}, {"timestamp", msg.timestamp}};
    auto const values = msg.reading.to_array();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        j[kMessageFields[f]] = std::isfinite(values[f]) ? json(values[f]) : json(nullptr);
    }
    return j.dump();
}

SensorMessage parse_sensor_message(std::string_view text)
{
    json j = json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw TelemetryError(TelemetryError::Code::Parse, "sensor message is not a JSON object");
    }
    SensorMessage msg;
    auto const id = j.find("device_id");
    if (id == j.end() || !id->is_string() || id->get_ref<std::string const&>().empty()) {
        throw TelemetryError(TelemetryError::Code::Parse, "device_id must be a non-empty string");
    }
    msg.device_id = id->get<std::string>();
    auto const ts = j.find("timestamp");
    if (ts == j.end() || !ts->is_number_unsigned() || ts->get<std::uint64_t>() == 0) {
        throw TelemetryError(TelemetryError::Code::Parse, "timestamp must be a positive integer");
    }
    msg.timestamp = ts->get<std::uint64_t>();
    FeatureVector values{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        auto const it = j.find(kMessageFields[f]);
        if (it == j.end()) {
            throw TelemetryError(TelemetryError::Code::Parse, std::string("missing field ") + kMessageFields[f]);
        }
        if (it->is_null()) {
            values[f] = std::numeric_limits<double>::quiet_NaN();
        } else if (it->is_number()) {
            values[f] = it->get<double>();
        } else {
            throw TelemetryError(TelemetryError::Code::Parse, std::string("field ") + kMessageFields[f] +
                                                                  " is not a number");
        }
    }
    msg.reading = SensorReading::from_array(values);
    return msg;
}

Simulator::Simulator(SimConfig config) : config_(config)
{
    if (!(config_.rate > 0.0) || !std::isfinite(config_.rate)) {
        throw TelemetryError(TelemetryError::Code::Config, "rate must be positive");
    }
    if (config_.devices == 0) throw TelemetryError(TelemetryError::Code::Config, "device count must be at least 1");
    if (config_.source == nullptr || config_.source->empty()) {
        throw TelemetryError(TelemetryError::Code::Config, "simulator needs a non-empty source dataset");
    }
    auto const& data = *config_.source;
    auto const n_labels = data.labels().size();
    crop_min_.assign(n_labels, FeatureVector{});
    crop_max_.assign(n_labels, FeatureVector{});
    std::vector<bool> seen(n_labels, false);
    for (auto const& s : data.samples()) {
        auto const c = *data.label_index(s.label);
        auto const v = s.reading.to_array();
        if (!seen[c]) {
            crop_min_[c] = v;
            crop_max_[c] = v;
            seen[c] = true;
            continue;
        }
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            crop_min_[c][f] = std::min(crop_min_[c][f], v[f]);
            crop_max_[c][f] = std::max(crop_max_[c][f], v[f]);
        }
    }
}

SensorMessage Simulator::generate(std::uint64_t step) const
{
    SensorMessage msg;
    msg.device_id = "sensor-" + std::to_string(step % config_.devices);
    msg.timestamp = config_.start_timestamp + static_cast<std::uint64_t>(static_cast<double>(step) / config_.rate);
    if (msg.timestamp == 0) msg.timestamp = 1;

    auto const& data = *config_.source;
    if (config_.mode == SimMode::Replay) {
        msg.reading = data[step % data.size()].reading;
        return msg;
    }
    SplitMix64 rng(mix_seed(config_.seed, step));
    auto const crop = rng.below(crop_min_.size());
    FeatureVector v{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double const lo = crop_min_[crop][f];
        double const hi = crop_max_[crop][f];
        v[f] = lo == hi ? lo : std::min(rng.uniform(lo, hi), hi);
    }
    msg.reading = SensorReading::from_array(v);
    return msg;
}

SensorMessage generate_message(SimConfig const& cfg, std::uint64_t step) { return Simulator(cfg).generate(step); }

std::string_view range_code(std::size_t feature) noexcept
{
    static constexpr std::array<std::string_view, kFeatureCount> codes{
        "N_RANGE", "P_RANGE", "K_RANGE", "TEMPERATURE_RANGE", "HUMIDITY_RANGE", "PH_RANGE", "RAINFALL_RANGE"};
    return feature < kFeatureCount ? codes[feature] : std::string_view{};
}

ValidationOutcome validate_reading(SensorReading const& r, ValidationRule const& rules)
{
    ValidationOutcome out;
    auto const v = r.to_array();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (!std::isfinite(v[f])) {
            out.rejections.push_back({kMessageFields[f], std::string(kNonFiniteCode)});
        } else if (!rules.bounds[f].contains(v[f])) {
            out.rejections.push_back({kMessageFields[f], std::string(range_code(f))});
        }
    }
    if (out.rejections.empty()) out.reading = r;
    return out;
}

ValidationOutcome validate_message(SensorMessage const& msg, ValidationRule const& rules)
{
    return validate_reading(msg.reading, rules);
}

FeatureVector aggregate_window(std::span<SensorReading const> readings, std::size_t w)
{
    if (readings.empty()) throw TelemetryError(TelemetryError::Code::EmptyWindow, "no readings to aggregate");
    if (w == 0 || w > readings.size()) {
        throw TelemetryError(TelemetryError::Code::Window, "window " + std::to_string(w) + " outside [1, " +
                                                               std::to_string(readings.size()) + "]");
    }
    if (w == 1) return readings.back().to_array();
    FeatureVector sum{};
    for (auto const& r : readings.last(w)) {
        auto const v = r.to_array();
        for (std::size_t f = 0; f < kFeatureCount; ++f) sum[f] += v[f];
    }
    for (auto& s : sum) s /= static_cast<double>(w);
    return sum;
}

} // namespace cropcast
