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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cropcast {

inline constexpr std::size_t kFeatureCount = 7;

// Canonical column order used everywhere a reading is flattened.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "N", "P", "K", "temperature", "humidity", "ph", "rainfall"};

using FeatureVector = std::array<double, kFeatureCount>;

struct SensorReading {
    double n{};
    double p{};
    double k{};
    double temperature{};   // degrees Celsius
    double humidity{};      // percent relative humidity
    double ph{};
    double rainfall{};      // millimeters

    FeatureVector to_array() const noexcept { return {n, p, k, temperature, humidity, ph, rainfall}; }
    static SensorReading from_array(FeatureVector const& v) noexcept
    {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }

    bool all_finite() const noexcept;

    friend bool operator==(SensorReading const&, SensorReading const&) = default;
};

struct LabeledSample {
    SensorReading reading;
    std::string label;

    friend bool operator==(LabeledSample const&, LabeledSample const&) = default;
};

class DatasetError : public std::runtime_error {
public:
    enum class Code { Io, Schema, Parse, Range, Empty, Stratification, InvalidSplit };

    DatasetError(Code code, std::string const& what, std::optional<std::size_t> row = std::nullopt)
        : std::runtime_error(what), code_(code), row_(row)
    {
    }

    Code code() const noexcept { return code_; }
    // 0-based data row (header excluded) for parse and range errors.
    std::optional<std::size_t> row() const noexcept { return row_; }

private:
    Code code_;
    std::optional<std::size_t> row_;
};

// Immutable collection of labeled samples. The label set is kept sorted so
// every component agrees on class indices and lexicographic tie-breaking.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<LabeledSample> samples, std::string fingerprint = {});

    std::vector<LabeledSample> const& samples() const noexcept { return samples_; }
    std::vector<std::string> const& labels() const noexcept { return labels_; }
    std::string const& fingerprint() const noexcept { return fingerprint_; }

    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    LabeledSample const& operator[](std::size_t i) const { return samples_[i]; }

    // Index of `label` in labels(), or nullopt.
    std::optional<std::size_t> label_index(std::string_view label) const;

    std::vector<FeatureVector> feature_rows() const;

    // Subset in the given index order, keeping this dataset's label set.
    Dataset subset(std::vector<std::size_t> const& indices) const;

private:
    std::vector<LabeledSample> samples_;
    std::vector<std::string> labels_;
    std::string fingerprint_;
};

Dataset load_dataset(std::istream& in);
Dataset load_dataset(std::filesystem::path const& path);
Dataset parse_dataset(std::string_view csv_text);

struct SplitSpec {
    double test_fraction{0.25};
    std::uint64_t seed{42};
    bool stratified{true};
};

struct SplitResult {
    Dataset train;
    Dataset test;
    // Indices into the source dataset, ascending.
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

// Per label (in sorted label order) the label's sample indices are shuffled
// with one SplitMix64 stream seeded by spec.seed; the first
// round(test_fraction * count) go to the test side.
SplitResult stratified_split(Dataset const& data, SplitSpec const& spec);

class MinMaxScaler {
public:
    MinMaxScaler() = default;
    MinMaxScaler(FeatureVector min, FeatureVector max);

    // Fixed point of the transform: min 0, max 1 on every feature.
    static MinMaxScaler identity() noexcept;

    FeatureVector const& min() const noexcept { return min_; }
    FeatureVector const& max() const noexcept { return max_; }

    // (x - min) / (max - min) per feature; 0 when max == min. No clamping.
    FeatureVector apply(FeatureVector const& x) const noexcept;
    FeatureVector apply(SensorReading const& r) const noexcept { return apply(r.to_array()); }

    friend bool operator==(MinMaxScaler const&, MinMaxScaler const&) = default;

private:
    FeatureVector min_{};
    FeatureVector max_{};
};

MinMaxScaler fit_scaler(Dataset const& train);

inline FeatureVector apply_scaler(MinMaxScaler const& s, SensorReading const& r) noexcept { return s.apply(r); }

} // namespace cropcast
