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

// Fitted parameter blocks and the learners that produce them. Everything
// here works on dense feature rows and class indices; label strings and
// scaling live one level up in models.hpp.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cropcast/dataset.hpp"
#include "cropcast/rng.hpp"

namespace cropcast {

struct TrainingMatrix {
    // Features as the learner sees them (min-max scaled unless the spec
    // disables normalization).
    std::span<FeatureVector const> features;
    // Unscaled features, row-aligned with `features`. Trees take their split
    // thresholds from these.
    std::span<FeatureVector const> raw;
    std::span<std::uint32_t const> targets;
    std::size_t n_classes{0};

    std::size_t rows() const noexcept { return targets.size(); }
};

// ---------------------------------------------------------------------------
// CART

struct TreeNode {
    std::int32_t feature{-1};  // -1 marks a leaf
    double threshold{0.0};     // raw units; x <= threshold goes left
    std::int32_t left{-1};
    std::int32_t right{-1};
    std::int32_t leaf{-1};     // row into leaf_counts when feature == -1

    friend bool operator==(TreeNode const&, TreeNode const&) = default;
};

struct DecisionTreeModel {
    std::size_t n_classes{0};
    std::vector<TreeNode> nodes;               // nodes[0] is the root
    std::vector<std::uint32_t> leaf_counts;    // n_leaves x n_classes

    std::size_t leaf_of(FeatureVector const& raw) const noexcept;
    std::span<std::uint32_t const> counts_at_leaf(std::size_t leaf) const noexcept
    {
        return {leaf_counts.data() + leaf * n_classes, n_classes};
    }
    // Majority class at the leaf reached by `raw`; ties go to the lower index.
    std::uint32_t vote(FeatureVector const& raw) const noexcept;
    std::size_t depth() const noexcept;
};

struct TreeGrowth {
    std::size_t min_samples_split{2};
    std::size_t max_depth{0};     // 0 = unlimited
    std::size_t max_features{0};  // 0 = every feature, in index order
};

// Gini CART over midpoints of consecutive distinct values. When
// max_features > 0 the candidate features of each node are a random
// permutation drawn from `rng`; the search continues past max_features
// only if none of the first max_features admits a split.
DecisionTreeModel grow_tree(TrainingMatrix const& data, std::span<std::size_t const> rows, TreeGrowth const& growth,
                            SplitMix64* rng = nullptr);

struct RandomForestModel {
    std::vector<DecisionTreeModel> trees;

    std::vector<std::uint32_t> votes(FeatureVector const& raw) const;
};

// Tree t uses a SplitMix64 seeded with seed + t for both its bootstrap and
// its feature draws, so the forest does not depend on build order.
RandomForestModel grow_forest(TrainingMatrix const& data, std::size_t n_trees, TreeGrowth const& growth,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

struct NaiveBayesModel {
    std::vector<double> log_prior;
    std::vector<FeatureVector> mean;
    std::vector<FeatureVector> variance; // already smoothed

    std::vector<double> log_joint(FeatureVector const& x) const;
};

NaiveBayesModel fit_naive_bayes(TrainingMatrix const& data, double var_smoothing);

// ---------------------------------------------------------------------------
// Linear models: one weight row per class, bias in the last slot.

using WeightRow = std::array<double, kFeatureCount + 1>;

struct LinearModel {
    std::vector<WeightRow> weights;

    std::vector<double> margins(FeatureVector const& x) const;
};

struct SvmModel : LinearModel {};
struct LogisticModel : LinearModel {};

// One-vs-rest hinge loss, Pegasos step size 1/(lambda * t), samples visited
// in a fresh seeded permutation each epoch.
SvmModel fit_linear_svm(TrainingMatrix const& data, double lambda, std::size_t epochs, std::uint64_t seed);

// Multinomial softmax regression, full-batch gradient descent from zero
// weights. Appends the regularized mean cross-entropy at each epoch start
// plus the final value to `loss_history` when given.
LogisticModel fit_logistic(TrainingMatrix const& data, double learning_rate, std::size_t epochs, double l2,
                           std::vector<double>* loss_history = nullptr);

// ---------------------------------------------------------------------------
// k nearest neighbors

struct Neighbor {
    double distance;
    std::uint32_t index;
};

struct KnnModel {
    std::size_t k{5};
    std::vector<FeatureVector> points;
    std::vector<std::uint32_t> targets;
    std::size_t n_classes{0};

    // The k nearest stored points, by (distance, index).
    std::vector<Neighbor> nearest(FeatureVector const& x) const;
};

KnnModel fit_knn(TrainingMatrix const& data, std::size_t k);

// ---------------------------------------------------------------------------
// One-hidden-layer perceptron

struct MlpModel {
    std::size_t hidden{0};
    std::size_t n_classes{0};
    std::vector<double> w1; // hidden x features, row-major
    std::vector<double> b1;
    std::vector<double> w2; // classes x hidden, row-major
    std::vector<double> b2;

    std::vector<double> logits(FeatureVector const& x) const;
};

struct MlpTraining {
    std::size_t hidden{64};
    double learning_rate{0.001};
    std::size_t epochs{300};
    std::size_t batch_size{200}; // 0 = full batch
    bool adam{true};             // otherwise plain gradient descent
};

// ReLU hidden layer, softmax output, mean cross-entropy. Weights start
// uniform in +-sqrt(6 / (fan_in + fan_out)), biases at zero. Mini-batches
// follow a seeded permutation per epoch. `loss_history` receives the mean
// loss seen during each epoch plus the final full-data loss.
MlpModel fit_mlp(TrainingMatrix const& data, MlpTraining const& training, std::uint64_t seed,
                 std::vector<double>* loss_history = nullptr);

// Numerically stable softmax.
std::vector<double> softmax(std::span<double const> logits);

} // namespace cropcast
