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
#include <numeric>

#include "cropcast/classifiers.hpp"
#include "parallel.hpp"

namespace cropcast {

namespace {

double dot_with_bias(WeightRow const& w, FeatureVector const& x) noexcept
{
    double acc = w[kFeatureCount];
    for (std::size_t f = 0; f < kFeatureCount; ++f) acc += w[f] * x[f];
    return acc;
}

} // namespace

std::vector<double> softmax(std::span<double const> logits)
{
    std::vector<double> out(logits.begin(), logits.end());
    if (out.empty()) return out;
    double const top = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double& v : out) {
        v = std::exp(v - top);
        sum += v;
    }
    for (double& v : out) v /= sum;
    return out;
}

std::vector<double> LinearModel::margins(FeatureVector const& x) const
{
    std::vector<double> out(weights.size());
    for (std::size_t c = 0; c < weights.size(); ++c) out[c] = dot_with_bias(weights[c], x);
    return out;
}

SvmModel fit_linear_svm(TrainingMatrix const& data, double lambda, std::size_t epochs, std::uint64_t seed)
{
    std::size_t const n = data.rows();
    SvmModel model;
    model.weights.assign(data.n_classes, WeightRow{});

    detail::parallel_for(data.n_classes, [&](std::size_t cls) {
        // Every class replays the same visiting order.
        SplitMix64 rng(seed);
        std::vector<std::size_t> order(n);
        WeightRow w{};
        std::uint64_t t = 0;
        for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            shuffle(std::span<std::size_t>(order), rng);
            for (std::size_t i : order) {
                ++t;
                double const eta = 1.0 / (lambda * static_cast<double>(t));
                double const y = data.targets[i] == cls ? 1.0 : -1.0;
                double const margin = y * dot_with_bias(w, data.features[i]);
                double const shrink = 1.0 - eta * lambda;
                for (double& v : w) v *= shrink;
                if (margin < 1.0) {
                    for (std::size_t f = 0; f < kFeatureCount; ++f) w[f] += eta * y * data.features[i][f];
                    w[kFeatureCount] += eta * y;
                }
            }
        }
        model.weights[cls] = w;
    });
    return model;
}

LogisticModel fit_logistic(TrainingMatrix const& data, double learning_rate, std::size_t epochs, double l2,
                           std::vector<double>* loss_history)
{
    std::size_t const n = data.rows();
    std::size_t const classes = data.n_classes;
    LogisticModel model;
    model.weights.assign(classes, WeightRow{});

    std::vector<WeightRow> grad(classes);
    std::vector<double> logits(classes);

    auto step = [&](bool apply) {
        for (auto& g : grad) g.fill(0.0);
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto const& x = data.features[i];
            for (std::size_t c = 0; c < classes; ++c) logits[c] = dot_with_bias(model.weights[c], x);
            auto const p = softmax(logits);
            loss -= std::log(std::max(p[data.targets[i]], 1e-300));
            for (std::size_t c = 0; c < classes; ++c) {
                double const r = p[c] - (data.targets[i] == c ? 1.0 : 0.0);
                for (std::size_t f = 0; f < kFeatureCount; ++f) grad[c][f] += r * x[f];
                grad[c][kFeatureCount] += r;
            }
        }
        double penalty = 0.0;
        for (auto const& w : model.weights) {
            for (std::size_t f = 0; f < kFeatureCount; ++f) penalty += w[f] * w[f];
        }
        loss = loss / static_cast<double>(n) + 0.5 * l2 * penalty;
        if (loss_history != nullptr) loss_history->push_back(loss);
        if (!apply) return;
        double const inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t c = 0; c < classes; ++c) {
            auto& w = model.weights[c];
            for (std::size_t f = 0; f < kFeatureCount; ++f) w[f] -= learning_rate * (grad[c][f] * inv_n + l2 * w[f]);
            w[kFeatureCount] -= learning_rate * grad[c][kFeatureCount] * inv_n;
        }
    };

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) step(true);
    if (loss_history != nullptr) step(false);
    return model;
}

} // namespace cropcast
