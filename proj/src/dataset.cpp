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

#include "cropcast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "cropcast/keccak.hpp"
#include "cropcast/rng.hpp"

namespace cropcast {

bool SensorReading::all_finite() const noexcept
{
    auto const v = to_array();
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Dataset::Dataset(std::vector<LabeledSample> samples, std::string fingerprint)
    : samples_(std::move(samples)), fingerprint_(std::move(fingerprint))
{
    std::set<std::string> distinct;
    for (auto const& s : samples_) {
        distinct.insert(s.label);
    }
    labels_.assign(distinct.begin(), distinct.end());
}

std::optional<std::size_t> Dataset::label_index(std::string_view label) const
{
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<FeatureVector> Dataset::feature_rows() const
{
    std::vector<FeatureVector> rows;
    rows.reserve(samples_.size());
    for (auto const& s : samples_) {
        rows.push_back(s.reading.to_array());
    }
    return rows;
}

Dataset Dataset::subset(std::vector<std::size_t> const& indices) const
{
    Dataset out;
    out.samples_.reserve(indices.size());
    for (std::size_t i : indices) {
        out.samples_.push_back(samples_.at(i));
    }
    out.labels_ = labels_;
    out.fingerprint_ = fingerprint_;
    return out;
}

namespace {

std::string_view trim(std::string_view s) noexcept
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t const comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

constexpr std::size_t kLabelColumn = kFeatureCount;

// Maps a header cell to its canonical slot: 0..6 for features, 7 for label.
std::optional<std::size_t> resolve_column(std::string_view header)
{
    std::string const h = lower(header);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (h == lower(kFeatureNames[i])) return i;
    }
    if (h == "label") return kLabelColumn;
    return std::nullopt;
}

struct RangeCheck {
    std::size_t feature;
    double lo;
    double hi;
};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::array<RangeCheck, 6> kReadingRanges{{
    {0, 0.0, kInf}, {1, 0.0, kInf}, {2, 0.0, kInf}, {4, 0.0, 100.0}, {5, 0.0, 14.0}, {6, 0.0, kInf}}};

Dataset parse_lines(std::string_view text, std::string fingerprint)
{
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t const nl = text.find('\n', pos);
        line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        return true;
    };

    std::string_view line;
    // Skip a UTF-8 byte order mark and leading blank lines.
    if (text.starts_with("\xEF\xBB\xBF")) pos = 3;
    bool have_header = false;
    while (next_line(line)) {
        if (!trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) {
        throw DatasetError(DatasetError::Code::Empty, "dataset is empty: no header row");
    }

    auto const headers = split_fields(line);
    std::vector<std::size_t> slot_of_column(headers.size());
    std::array<bool, kFeatureCount + 1> seen{};
    for (std::size_t c = 0; c < headers.size(); ++c) {
        auto slot = resolve_column(headers[c]);
        if (!slot) {
            throw DatasetError(DatasetError::Code::Schema, "unexpected column '" + std::string(headers[c]) + "'");
        }
        if (seen[*slot]) {
            throw DatasetError(DatasetError::Code::Schema, "duplicate column '" + std::string(headers[c]) + "'");
        }
        seen[*slot] = true;
        slot_of_column[c] = *slot;
    }
    for (std::size_t s = 0; s < seen.size(); ++s) {
        if (!seen[s]) {
            std::string const name = s == kLabelColumn ? "label" : std::string(kFeatureNames[s]);
            throw DatasetError(DatasetError::Code::Schema, "missing column '" + name + "'");
        }
    }

    std::vector<LabeledSample> samples;
    std::size_t row = 0;
    while (next_line(line)) {
        if (trim(line).empty()) continue;
        auto const cells = split_fields(line);
        if (cells.size() != headers.size()) {
            throw DatasetError(DatasetError::Code::Parse,
                               "row " + std::to_string(row) + ": expected " + std::to_string(headers.size()) +
                                   " cells, found " + std::to_string(cells.size()),
                               row);
        }
        FeatureVector values{};
        std::string label;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::size_t const slot = slot_of_column[c];
            if (slot == kLabelColumn) {
                if (cells[c].empty()) {
                    throw DatasetError(DatasetError::Code::Parse, "row " + std::to_string(row) + ": empty label", row);
                }
                label = std::string(cells[c]);
                continue;
            }
            auto const cell = cells[c];
            double v{};
            auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || end != cell.data() + cell.size() || !std::isfinite(v)) {
                throw DatasetError(DatasetError::Code::Parse,
                                   "row " + std::to_string(row) + ": column '" + std::string(headers[c]) +
                                       "' is not a number: '" + std::string(cell) + "'",
                                   row);
            }
            values[slot] = v;
        }
        for (auto const& rc : kReadingRanges) {
            if (values[rc.feature] < rc.lo || values[rc.feature] > rc.hi) {
                throw DatasetError(DatasetError::Code::Range,
                                   "row " + std::to_string(row) + ": " + std::string(kFeatureNames[rc.feature]) +
                                       " out of range",
                                   row);
            }
        }
        samples.push_back({SensorReading::from_array(values), std::move(label)});
        ++row;
    }
    if (samples.empty()) {
        throw DatasetError(DatasetError::Code::Empty, "dataset has a header but no data rows");
    }
    return Dataset(std::move(samples), std::move(fingerprint));
}

} // namespace

Dataset parse_dataset(std::string_view csv_text)
{
    return parse_lines(csv_text, to_hex(keccak256(csv_text)));
}

Dataset load_dataset(std::istream& in)
{
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_dataset(text);
}

Dataset load_dataset(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError(DatasetError::Code::Io, "cannot open dataset '" + path.string() + "'");
    }
    return load_dataset(in);
}

SplitResult stratified_split(Dataset const& data, SplitSpec const& spec)
{
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw DatasetError(DatasetError::Code::InvalidSplit, "test fraction must lie strictly between 0 and 1");
    }
    if (data.empty()) {
        throw DatasetError(DatasetError::Code::Empty, "cannot split an empty dataset");
    }

    SplitMix64 rng(spec.seed);
    std::vector<std::size_t> test;

    auto take = [&](std::vector<std::size_t>& group) {
        shuffle(std::span<std::size_t>(group), rng);
        auto const n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(group.size())));
        test.insert(test.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_test));
    };

    if (spec.stratified) {
        std::vector<std::vector<std::size_t>> by_label(data.labels().size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            by_label[*data.label_index(data[i].label)].push_back(i);
        }
        for (std::size_t l = 0; l < by_label.size(); ++l) {
            if (by_label[l].size() < 2) {
                throw DatasetError(DatasetError::Code::Stratification,
                                   "label '" + data.labels()[l] + "' has fewer than 2 samples; cannot stratify");
            }
        }
        for (auto& group : by_label) {
            take(group);
        }
    } else {
        std::vector<std::size_t> all(data.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(all);
    }

    std::sort(test.begin(), test.end());
    std::vector<std::size_t> train;
    train.reserve(data.size() - test.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (t < test.size() && test[t] == i) {
            ++t;
        } else {
            train.push_back(i);
        }
    }

    SplitResult out;
    out.train = data.subset(train);
    out.test = data.subset(test);
    out.train_indices = std::move(train);
    out.test_indices = std::move(test);
    return out;
}

MinMaxScaler::MinMaxScaler(FeatureVector min, FeatureVector max) : min_(min), max_(max) {}

MinMaxScaler MinMaxScaler::identity() noexcept
{
    FeatureVector zeros{};
    FeatureVector ones{};
    ones.fill(1.0);
    return MinMaxScaler(zeros, ones);
}

FeatureVector MinMaxScaler::apply(FeatureVector const& x) const noexcept
{
    FeatureVector out{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        double const range = max_[i] - min_[i];
        out[i] = range > 0.0 ? (x[i] - min_[i]) / range : 0.0;
    }
    return out;
}

MinMaxScaler fit_scaler(Dataset const& train)
{
    if (train.empty()) {
        throw DatasetError(DatasetError::Code::Empty, "cannot fit a scaler on an empty dataset");
    }
    FeatureVector lo = train[0].reading.to_array();
    FeatureVector hi = lo;
    for (auto const& s : train.samples()) {
        auto const v = s.reading.to_array();
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            lo[i] = std::min(lo[i], v[i]);
            hi[i] = std::max(hi[i], v[i]);
        }
    }
    return MinMaxScaler(lo, hi);
}

} // namespace cropcast
