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

namespace cropcast {

std::vector<double> MlpModel::logits(FeatureVector const& x) const
{
    std::vector<double> h(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
        double acc = b1[j];
        for (std::size_t f = 0; f < kFeatureCount; ++f) acc += w1[j * kFeatureCount + f] * x[f];
        h[j] = std::max(acc, 0.0);
    }
    std::vector<double> out(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        double acc = b2[c];
        for (std::size_t j = 0; j < hidden; ++j) acc += w2[c * hidden + j] * h[j];
        out[c] = acc;
    }
    return out;
}

namespace {

// Adam state for one flat parameter block.
struct AdamSlot {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamSlot(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    void step(std::vector<double>& params, std::vector<double> const& grad, double lr, std::uint64_t t)
    {
        constexpr double kBeta1 = 0.9;
        constexpr double kBeta2 = 0.999;
        constexpr double kEps = 1e-8;
        double const c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
        double const c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
        }
    }
};

} // namespace

MlpModel fit_mlp(TrainingMatrix const& data, MlpTraining const& training, std::uint64_t seed,
                 std::vector<double>* loss_history)
{
    std::size_t const n = data.rows();
    std::size_t const classes = data.n_classes;
    std::size_t const hidden = training.hidden;
    std::size_t const batch = training.batch_size == 0 ? n : std::min(training.batch_size, n);

    MlpModel m;
    m.hidden = hidden;
    m.n_classes = classes;
    m.w1.resize(hidden * kFeatureCount);
    m.b1.assign(hidden, 0.0);
    m.w2.resize(classes * hidden);
    m.b2.assign(classes, 0.0);

    SplitMix64 rng(seed);
    double const limit1 = std::sqrt(6.0 / static_cast<double>(kFeatureCount + hidden));
    for (double& w : m.w1) w = rng.uniform(-limit1, limit1);
    double const limit2 = std::sqrt(6.0 / static_cast<double>(hidden + classes));
    for (double& w : m.w2) w = rng.uniform(-limit2, limit2);

    std::vector<double> gw1(m.w1.size());
    std::vector<double> gb1(hidden);
    std::vector<double> gw2(m.w2.size());
    std::vector<double> gb2(classes);
    std::vector<double> h(hidden);
    std::vector<double> z(classes);
    std::vector<double> dh(hidden);

    AdamSlot aw1(m.w1.size()), ab1(hidden), aw2(m.w2.size()), ab2(classes);
    std::uint64_t t = 0;

    // Accumulates summed loss and gradients over `rows`.
    auto accumulate = [&](std::span<std::size_t const> rows) {
        std::fill(gw1.begin(), gw1.end(), 0.0);
        std::fill(gb1.begin(), gb1.end(), 0.0);
        std::fill(gw2.begin(), gw2.end(), 0.0);
        std::fill(gb2.begin(), gb2.end(), 0.0);
        double loss = 0.0;
        for (std::size_t i : rows) {
            auto const& x = data.features[i];
            for (std::size_t j = 0; j < hidden; ++j) {
                double acc = m.b1[j];
                for (std::size_t f = 0; f < kFeatureCount; ++f) acc += m.w1[j * kFeatureCount + f] * x[f];
                h[j] = std::max(acc, 0.0);
            }
            for (std::size_t c = 0; c < classes; ++c) {
                double acc = m.b2[c];
                for (std::size_t j = 0; j < hidden; ++j) acc += m.w2[c * hidden + j] * h[j];
                z[c] = acc;
            }
            auto const p = softmax(z);
            auto const y = data.targets[i];
            loss -= std::log(std::max(p[y], 1e-300));
            std::fill(dh.begin(), dh.end(), 0.0);
            for (std::size_t c = 0; c < classes; ++c) {
                double const r = p[c] - (y == c ? 1.0 : 0.0);
                gb2[c] += r;
                for (std::size_t j = 0; j < hidden; ++j) {
                    gw2[c * hidden + j] += r * h[j];
                    dh[j] += r * m.w2[c * hidden + j];
                }
            }
            for (std::size_t j = 0; j < hidden; ++j) {
                if (h[j] <= 0.0) continue;
                gb1[j] += dh[j];
                for (std::size_t f = 0; f < kFeatureCount; ++f) gw1[j * kFeatureCount + f] += dh[j] * x[f];
            }
        }
        return loss;
    };

    auto apply = [&](std::size_t rows) {
        double const inv = 1.0 / static_cast<double>(rows);
        for (auto* g : {&gw1, &gb1, &gw2, &gb2}) {
            for (double& v : *g) v *= inv;
        }
        if (training.adam) {
            ++t;
            aw1.step(m.w1, gw1, training.learning_rate, t);
            ab1.step(m.b1, gb1, training.learning_rate, t);
            aw2.step(m.w2, gw2, training.learning_rate, t);
            ab2.step(m.b2, gb2, training.learning_rate, t);
        } else {
            auto sgd = [&](std::vector<double>& p, std::vector<double> const& g) {
                for (std::size_t i = 0; i < p.size(); ++i) p[i] -= training.learning_rate * g[i];
            };
            sgd(m.w1, gw1);
            sgd(m.b1, gb1);
            sgd(m.w2, gw2);
            sgd(m.b2, gb2);
        }
    };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < training.epochs; ++epoch) {
        if (batch < n) shuffle(std::span<std::size_t>(order), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            std::size_t const end = std::min(n, start + batch);
            epoch_loss += accumulate(std::span<std::size_t const>(order).subspan(start, end - start));
            apply(end - start);
        }
        if (loss_history != nullptr) loss_history->push_back(epoch_loss / static_cast<double>(n));
    }
    if (loss_history != nullptr) loss_history->push_back(accumulate(order) / static_cast<double>(n));
    return m;
}

} // namespace cropcast
