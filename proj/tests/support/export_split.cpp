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

// Writes the surrogate CSV and its default seed-42 stratified split so the
// Python reference script can fit on exactly the same rows.
//   export_split <dir>

#include <fstream>
#include <iostream>

#include "cropcast/dataset.hpp"
#include "support/surrogate.hpp"

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: export_split <dir>\n";
        return 2;
    }
    std::filesystem::path const dir = argv[1];
    auto const csv = cropcast::testing::write_surrogate_crop_csv(dir / "surrogate.csv");
    auto const data = cropcast::load_dataset(csv);
    auto const split = cropcast::stratified_split(data, cropcast::SplitSpec{});
    for (auto const& [name, rows] : {std::pair{"train_idx.txt", split.train_indices}, {"test_idx.txt", split.test_indices}}) {
        std::ofstream out(dir / name);
        for (auto i : rows) out << i << "\n";
    }
    return 0;
}
