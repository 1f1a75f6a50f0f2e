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
#include <numbers>

#include "cropcast/classifiers.hpp"

namespace cropcast {

std::vector<double> NaiveBayesModel::log_joint(FeatureVector const& x) const
{
    std::vector<double> out(log_prior.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
        double acc = log_prior[c];
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            double const var = variance[c][f];
            double const d = x[f] - mean[c][f];
            acc += -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
        }
        out[c] = acc;
    }
    return out;
}

NaiveBayesModel fit_naive_bayes(TrainingMatrix const& data, double var_smoothing)
{
    std::size_t const n = data.rows();
    std::size_t const classes = data.n_classes;

    std::vector<std::size_t> count(classes, 0);
    std::vector<FeatureVector> sum(classes, FeatureVector{});
    FeatureVector total{};
    for (std::size_t i = 0; i < n; ++i) {
        auto const c = data.targets[i];
        ++count[c];
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            sum[c][f] += data.features[i][f];
            total[f] += data.features[i][f];
        }
    }

    NaiveBayesModel m;
    m.log_prior.resize(classes);
    m.mean.assign(classes, FeatureVector{});
    m.variance.assign(classes, FeatureVector{});
    for (std::size_t c = 0; c < classes; ++c) {
        m.log_prior[c] = count[c] > 0 ? std::log(static_cast<double>(count[c]) / static_cast<double>(n))
                                      : -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            m.mean[c][f] = count[c] > 0 ? sum[c][f] / static_cast<double>(count[c]) : 0.0;
        }
    }

    // Population variances, two-pass.
    FeatureVector overall_mean{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) overall_mean[f] = total[f] / static_cast<double>(n);
    FeatureVector overall_var{};
    for (std::size_t i = 0; i < n; ++i) {
        auto const c = data.targets[i];
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            double const d = data.features[i][f] - m.mean[c][f];
            m.variance[c][f] += d * d;
            double const g = data.features[i][f] - overall_mean[f];
            overall_var[f] += g * g;
        }
    }
    double max_var = 0.0;
    for (double v : overall_var) max_var = std::max(max_var, v / static_cast<double>(n));
    // Fully constant data would leave every variance at zero.
    double const epsilon = max_var > 0.0 ? var_smoothing * max_var : var_smoothing;

    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            double const v = count[c] > 0 ? m.variance[c][f] / static_cast<double>(count[c]) : 0.0;
            m.variance[c][f] = v + epsilon;
        }
    }
    return m;
}

} // namespace cropcast
