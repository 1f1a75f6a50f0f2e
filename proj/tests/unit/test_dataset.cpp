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

#include <algorithm>
#include <set>
#include <sstream>

#include "cropcast/dataset.hpp"
#include "support/surrogate.hpp"

using namespace cropcast;

namespace {

constexpr char const* kHeader = "N,P,K,temperature,humidity,ph,rainfall,label\n";

DatasetError::Code error_code(std::string const& csv)
{
    try {
        parse_dataset(csv);
    } catch (DatasetError const& e) {
        return e.code();
    }
    FAIL("expected a DatasetError");
    return DatasetError::Code::Io;
}

} // namespace

TEST_CASE("three-row fixture loads with two labels in sorted order")
{
    auto const d = parse_dataset(std::string(kHeader) +
                                 "90,42,43,20.88,82.00,6.50,202.94,rice\n"
                                 "71,54,16,22.61,63.69,5.75,87.76,maize\n"
                                 "85,58,41,21.77,80.32,7.04,226.66,rice\n");
    CHECK(d.size() == 3);
    CHECK(d.labels() == std::vector<std::string>{"maize", "rice"});
    CHECK(d[0].reading.n == 90);
    CHECK(d[1].label == "maize");
    CHECK(d[2].reading.rainfall == doctest::Approx(226.66));
    CHECK(d.label_index("rice") == 1);
    CHECK_FALSE(d.label_index("wheat").has_value());
    CHECK_FALSE(d.fingerprint().empty());
}

TEST_CASE("columns resolve by header in any order and any case")
{
    auto const d = parse_dataset("label,Rainfall,PH,Humidity,Temperature,k,p,n\n"
                                 "rice,202.94,6.5,82,20.88,43,42,90\n");
    CHECK(d[0].reading == SensorReading{90, 42, 43, 20.88, 82, 6.5, 202.94});
}

TEST_CASE("schema errors name the offending column")
{
    try {
        parse_dataset("N,P,K,temperature,humidity,ph,label\n1,2,3,4,5,6,rice\n");
        FAIL("missing column accepted");
    } catch (DatasetError const& e) {
        CHECK(e.code() == DatasetError::Code::Schema);
        CHECK(std::string(e.what()).find("rainfall") != std::string::npos);
    }
    try {
        parse_dataset("N,P,K,temperature,humidity,ph,rainfall,label,moisture\n1,2,3,4,5,6,7,rice,1\n");
        FAIL("extra column accepted");
    } catch (DatasetError const& e) {
        CHECK(e.code() == DatasetError::Code::Schema);
        CHECK(std::string(e.what()).find("moisture") != std::string::npos);
    }
}

TEST_CASE("bad cells report their row")
{
    try {
        parse_dataset(std::string(kHeader) + "1,2,3,4,5,6,7,rice\n1,2,x,4,5,6,7,rice\n");
        FAIL("non-numeric cell accepted");
    } catch (DatasetError const& e) {
        CHECK(e.code() == DatasetError::Code::Parse);
        CHECK(e.row() == 1);
    }
    CHECK(error_code(std::string(kHeader) + "1,2,,4,5,6,7,rice\n") == DatasetError::Code::Parse);
    CHECK(error_code(std::string(kHeader) + "1,2,3,4,5,6,7\n") == DatasetError::Code::Parse);
    CHECK(error_code(std::string(kHeader) + "1,2,3,4,5,15,7,rice\n") == DatasetError::Code::Range);
    CHECK(error_code(std::string(kHeader) + "1,2,3,4,101,6,7,rice\n") == DatasetError::Code::Range);
    CHECK(error_code(std::string(kHeader) + "-1,2,3,4,5,6,7,rice\n") == DatasetError::Code::Range);
}

TEST_CASE("header-only and empty inputs are empty-dataset errors")
{
    CHECK(error_code(kHeader) == DatasetError::Code::Empty);
    CHECK(error_code("") == DatasetError::Code::Empty);
}

TEST_CASE("surrogate fixture has the public file's shape")
{
    auto const d = parse_dataset(testing::surrogate_crop_csv());
    CHECK(d.size() == 2200);
    CHECK(d.labels().size() == 22);
    CHECK(d[0].label == "rice");
    CHECK(d[0].reading == SensorReading{90, 42, 43, 20.87974371, 82.00274423, 6.502985292, 202.9355362});
}

TEST_CASE("balanced 75/25 stratified split")
{
    auto const d = parse_dataset(testing::surrogate_crop_csv());
    auto const s = stratified_split(d, SplitSpec{});
    CHECK(s.train.size() == 1650);
    CHECK(s.test.size() == 550);
    for (auto const& label : d.labels()) {
        auto const count = std::count_if(s.test.samples().begin(), s.test.samples().end(),
                                         [&](LabeledSample const& x) { return x.label == label; });
        CHECK(count == 25);
    }
    std::vector<std::size_t> all = s.train_indices;
    all.insert(all.end(), s.test_indices.begin(), s.test_indices.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);
    CHECK(std::is_sorted(s.test_indices.begin(), s.test_indices.end()));

    auto const again = stratified_split(d, SplitSpec{});
    CHECK(again.test_indices == s.test_indices);
    CHECK(again.train_indices == s.train_indices);
    CHECK(stratified_split(d, SplitSpec{0.25, 43, true}).test_indices != s.test_indices);
}

TEST_CASE("4-sample fixture: every seed yields one of the four admissible splits")
{
    auto const d = parse_dataset(std::string(kHeader) +
                                 "1,1,1,1,1,1,1,a\n2,2,2,2,2,2,2,b\n3,3,3,3,3,3,3,a\n4,4,4,4,4,4,4,b\n");
    // Enumeration: one test row from {0, 2} and one from {1, 3}.
    std::set<std::vector<std::size_t>> const admissible{{0, 1}, {0, 3}, {1, 2}, {2, 3}};
    std::set<std::vector<std::size_t>> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto const s = stratified_split(d, SplitSpec{0.5, seed, true});
        REQUIRE(admissible.count(s.test_indices) == 1);
        seen.insert(s.test_indices);
    }
    CHECK(seen == admissible);
}

TEST_CASE("stratification needs two samples per label")
{
    auto const d = parse_dataset(std::string(kHeader) + "1,1,1,1,1,1,1,a\n2,2,2,2,2,2,2,a\n3,3,3,3,3,3,3,b\n");
    CHECK_THROWS_AS(stratified_split(d, SplitSpec{0.5, 1, true}), DatasetError);
    CHECK_NOTHROW(stratified_split(d, SplitSpec{0.5, 1, false}));
    CHECK_THROWS_AS(stratified_split(d, SplitSpec{0.0, 1, false}), DatasetError);
    CHECK_THROWS_AS(stratified_split(d, SplitSpec{1.0, 1, false}), DatasetError);
}

TEST_CASE("min-max scaler")
{
    auto const d = parse_dataset(std::string(kHeader) +
                                 "10,5,0,1,1,1,1,a\n30,5,200,1,1,1,1,a\n20,5,100,1,1,1,1,b\n");
    auto const s = fit_scaler(d);
    CHECK(s.min()[0] == 10);
    CHECK(s.max()[0] == 30);
    CHECK(s.min()[1] == 5);
    CHECK(s.max()[1] == 5);
    auto const y = s.apply(FeatureVector{10, 123, 50, 1, 1, 1, 1});
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 0.0); // constant feature
    CHECK(y[2] == doctest::Approx(0.25));
    CHECK(s.apply(FeatureVector{30, 5, 200, 1, 1, 1, 1})[0] == 1.0);
    CHECK(s.apply(FeatureVector{40, 5, 400, 1, 1, 1, 1})[2] == doctest::Approx(2.0)); // no clamping
}

TEST_CASE("scaler extrema equal a brute-force column scan of the training split")
{
    auto const d = parse_dataset(testing::surrogate_crop_csv());
    auto const train = stratified_split(d, SplitSpec{}).train;
    auto const s = fit_scaler(train);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double lo = 1e300, hi = -1e300;
        for (auto const& x : train.samples()) {
            lo = std::min(lo, x.reading.to_array()[f]);
            hi = std::max(hi, x.reading.to_array()[f]);
        }
        CHECK(s.min()[f] == lo);
        CHECK(s.max()[f] == hi);
    }
    for (auto const& x : train.samples()) {
        for (double v : s.apply(x.reading)) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
    }
}
