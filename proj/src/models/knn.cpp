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

#include <algorithm>
#include <cmath>

#include "cropcast/classifiers.hpp"

namespace cropcast {

std::vector<Neighbor> KnnModel::nearest(FeatureVector const& x) const
{
    std::vector<Neighbor> all(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        double sq = 0.0;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            double const d = points[i][f] - x[f];
            sq += d * d;
        }
        all[i] = {std::sqrt(sq), static_cast<std::uint32_t>(i)};
    }
    std::size_t const take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                      [](Neighbor const& a, Neighbor const& b) {
                          return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
                      });
    all.resize(take);
    return all;
}

KnnModel fit_knn(TrainingMatrix const& data, std::size_t k)
{
    KnnModel m;
    m.k = k;
    m.n_classes = data.n_classes;
    m.points.assign(data.features.begin(), data.features.end());
    m.targets.assign(data.targets.begin(), data.targets.end());
    return m;
}

} // namespace cropcast
