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
#include <numeric>

#include "cropcast/classifiers.hpp"
#include "parallel.hpp"

namespace cropcast {

std::size_t DecisionTreeModel::leaf_of(FeatureVector const& raw) const noexcept
{
    std::size_t at = 0;
    while (nodes[at].feature >= 0) {
        auto const& n = nodes[at];
        at = static_cast<std::size_t>(raw[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return static_cast<std::size_t>(nodes[at].leaf);
}

std::uint32_t DecisionTreeModel::vote(FeatureVector const& raw) const noexcept
{
    auto const counts = counts_at_leaf(leaf_of(raw));
    return static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::size_t DecisionTreeModel::depth() const noexcept
{
    std::vector<std::size_t> level(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (nodes[i].feature >= 0) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

namespace {

struct SplitCandidate {
    bool valid{false};
    double impurity{0.0};      // n_left * gini_left + n_right * gini_right
    std::size_t feature{0};
    double position{0.0};      // midpoint in learner units, for tie-breaking
    std::size_t lo_row{0};     // rows bounding the gap
    std::size_t hi_row{0};
    std::size_t n_left{0};
};

// Lower impurity wins; ties go to the lower feature, then the lower threshold.
bool better(SplitCandidate const& a, SplitCandidate const& b) noexcept
{
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.impurity != b.impurity) return a.impurity < b.impurity;
    if (a.feature != b.feature) return a.feature < b.feature;
    return a.position < b.position;
}

class TreeBuilder {
public:
    TreeBuilder(TrainingMatrix const& data, TreeGrowth const& growth, SplitMix64* rng)
        : data_(data), growth_(growth), rng_(rng)
    {
        model_.n_classes = data.n_classes;
    }

    DecisionTreeModel build(std::vector<std::size_t> rows)
    {
        model_.nodes.emplace_back();
        struct Pending {
            std::size_t node;
            std::size_t depth;
            std::vector<std::size_t> rows;
        };
        // Depth-first with an explicit stack; left child is expanded first so
        // node numbering is stable.
        std::vector<Pending> stack;
        stack.push_back({0, 0, std::move(rows)});
        while (!stack.empty()) {
            Pending job = std::move(stack.back());
            stack.pop_back();
            auto split = find_split(job.rows, job.depth);
            if (!split.valid) {
                make_leaf(job.node, job.rows);
                continue;
            }
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            double const threshold = 0.5 * (data_.raw[split.lo_row][split.feature] + data_.raw[split.hi_row][split.feature]);
            double const cut = data_.features[split.lo_row][split.feature];
            for (std::size_t r : job.rows) {
                (data_.features[r][split.feature] <= cut ? left : right).push_back(r);
            }
            auto const left_id = model_.nodes.size();
            model_.nodes.emplace_back();
            model_.nodes.emplace_back();
            auto& node = model_.nodes[job.node];
            node.feature = static_cast<std::int32_t>(split.feature);
            node.threshold = threshold;
            node.left = static_cast<std::int32_t>(left_id);
            node.right = static_cast<std::int32_t>(left_id + 1);
            stack.push_back({left_id + 1, job.depth + 1, std::move(right)});
            stack.push_back({left_id, job.depth + 1, std::move(left)});
        }
        return std::move(model_);
    }

private:
    std::vector<std::uint32_t> class_counts(std::vector<std::size_t> const& rows) const
    {
        std::vector<std::uint32_t> counts(data_.n_classes, 0);
        for (std::size_t r : rows) ++counts[data_.targets[r]];
        return counts;
    }

    void make_leaf(std::size_t node, std::vector<std::size_t> const& rows)
    {
        auto const counts = class_counts(rows);
        model_.nodes[node].leaf = static_cast<std::int32_t>(model_.leaf_counts.size() / data_.n_classes);
        model_.leaf_counts.insert(model_.leaf_counts.end(), counts.begin(), counts.end());
    }

    SplitCandidate find_split(std::vector<std::size_t> const& rows, std::size_t depth)
    {
        SplitCandidate best;
        if (rows.size() < std::max<std::size_t>(growth_.min_samples_split, 2)) return best;
        if (growth_.max_depth > 0 && depth >= growth_.max_depth) return best;
        auto const counts = class_counts(rows);
        if (std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; }) <= 1) return best;

        std::array<std::size_t, kFeatureCount> order{};
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t quota = kFeatureCount;
        if (growth_.max_features > 0 && growth_.max_features < kFeatureCount && rng_ != nullptr) {
            shuffle(std::span<std::size_t>(order), *rng_);
            quota = growth_.max_features;
        }

        // Features that are constant inside the node do not use up the quota.
        std::size_t examined = 0;
        for (std::size_t f : order) {
            if (examined >= quota && best.valid) break;
            auto candidate = best_split_on(rows, counts, f);
            if (!candidate.valid) continue;
            if (better(candidate, best)) best = candidate;
            ++examined;
        }
        return best;
    }

    SplitCandidate best_split_on(std::vector<std::size_t> const& rows, std::vector<std::uint32_t> const& total,
                                 std::size_t feature)
    {
        sorted_.assign(rows.begin(), rows.end());
        std::sort(sorted_.begin(), sorted_.end(), [&](std::size_t a, std::size_t b) {
            double const va = data_.features[a][feature];
            double const vb = data_.features[b][feature];
            return va != vb ? va < vb : a < b;
        });

        left_.assign(data_.n_classes, 0);
        double left_sq = 0.0;
        double right_sq = 0.0;
        for (std::uint32_t c : total) right_sq += static_cast<double>(c) * c;
        auto right = total;

        SplitCandidate best;
        std::size_t const n = sorted_.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            std::uint32_t const cls = data_.targets[sorted_[i]];
            left_sq += 2.0 * left_[cls] + 1.0;
            right_sq -= 2.0 * right[cls] - 1.0;
            ++left_[cls];
            --right[cls];

            double const here = data_.features[sorted_[i]][feature];
            double const next = data_.features[sorted_[i + 1]][feature];
            if (!(here < next)) continue;

            auto const nl = static_cast<double>(i + 1);
            auto const nr = static_cast<double>(n - i - 1);
            double const impurity = (nl - left_sq / nl) + (nr - right_sq / nr);
            SplitCandidate c{true, impurity, feature, 0.5 * (here + next), sorted_[i], sorted_[i + 1], i + 1};
            if (better(c, best)) best = c;
        }
        return best;
    }

    TrainingMatrix const& data_;
    TreeGrowth growth_;
    SplitMix64* rng_;
    DecisionTreeModel model_;
    std::vector<std::size_t> sorted_;
    std::vector<std::uint32_t> left_;
};

} // namespace

DecisionTreeModel grow_tree(TrainingMatrix const& data, std::span<std::size_t const> rows, TreeGrowth const& growth,
                            SplitMix64* rng)
{
    return TreeBuilder(data, growth, rng).build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

std::vector<std::uint32_t> RandomForestModel::votes(FeatureVector const& raw) const
{
    std::vector<std::uint32_t> out(trees.empty() ? 0 : trees.front().n_classes, 0);
    for (auto const& t : trees) ++out[t.vote(raw)];
    return out;
}

RandomForestModel grow_forest(TrainingMatrix const& data, std::size_t n_trees, TreeGrowth const& growth,
                              std::uint64_t seed)
{
    RandomForestModel forest;
    forest.trees.resize(n_trees);
    std::size_t const n = data.rows();
    detail::parallel_for(n_trees, [&](std::size_t t) {
        SplitMix64 rng(seed + t);
        std::vector<std::size_t> bootstrap(n);
        for (auto& r : bootstrap) r = rng.below(n);
        forest.trees[t] = grow_tree(data, bootstrap, growth, &rng);
    });
    return forest;
}

} // namespace cropcast
