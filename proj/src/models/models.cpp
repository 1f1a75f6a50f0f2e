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

#include "cropcast/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "parallel.hpp"

namespace cropcast {

namespace {

struct KindInfo {
    ModelKind kind;
    std::string_view code;
    std::string_view name;
};

constexpr std::array<KindInfo, 7> kKinds{{
    {ModelKind::DecisionTree, "dt", "Decision Tree"},
    {ModelKind::NaiveBayes, "nb", "Gaussian Naive Bayes"},
    {ModelKind::Svm, "svm", "Support Vector Machine"},
    {ModelKind::LogisticRegression, "lr", "Logistic Regression"},
    {ModelKind::RandomForest, "rf", "Random Forest"},
    {ModelKind::Knn, "knn", "K-Nearest Neighbors"},
    {ModelKind::NeuralNetwork, "nn", "Neural Network"},
}};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_finite(SensorReading const& r)
{
    if (!r.all_finite()) {
        throw ModelError(ModelError::Code::Input, "reading contains a non-finite feature value");
    }
}

// score descending, then secondary ascending, then label index ascending.
struct ClassRank {
    std::vector<double> score;
    std::vector<double> secondary;
};

template <typename Counts>
std::vector<double> normalized(Counts const& counts)
{
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    std::vector<double> out(counts.size(), 0.0);
    if (total <= 0.0) return out;
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / total;
    return out;
}

ClassRank rank_classes(TrainedModel const& m, SensorReading const& r)
{
    check_finite(r);
    FeatureVector const raw = r.to_array();
    FeatureVector const x = m.scaler.apply(raw);
    std::size_t const classes = m.labels.size();

    ClassRank out;
    out.secondary.assign(classes, 0.0);
    std::visit(
        [&](auto const& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DecisionTreeModel>) {
                out.score = normalized(p.counts_at_leaf(p.leaf_of(raw)));
            } else if constexpr (std::is_same_v<T, RandomForestModel>) {
                out.score = normalized(p.votes(raw));
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                out.score = softmax(p.log_joint(x));
            } else if constexpr (std::is_same_v<T, SvmModel> || std::is_same_v<T, LogisticModel>) {
                out.score = softmax(p.margins(x));
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                auto const neighbors = p.nearest(x);
                out.score.assign(classes, 0.0);
                for (auto const& nb : neighbors) {
                    auto const c = p.targets[nb.index];
                    out.score[c] += 1.0;
                    out.secondary[c] += nb.distance;
                }
                for (double& s : out.score) s /= static_cast<double>(neighbors.size());
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                out.score = softmax(p.logits(x));
            }
        },
        m.params);
    return out;
}

std::vector<std::size_t> ranked_order(ClassRank const& rank)
{
    std::vector<std::size_t> order(rank.score.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rank.score[a] != rank.score[b]) return rank.score[a] > rank.score[b];
        if (rank.secondary[a] != rank.secondary[b]) return rank.secondary[a] < rank.secondary[b];
        return a < b;
    });
    return order;
}

std::size_t top_class(TrainedModel const& m, SensorReading const& r)
{
    return ranked_order(rank_classes(m, r)).front();
}

} // namespace

std::string_view model_code(ModelKind kind) noexcept
{
    return kKinds[static_cast<std::size_t>(kind)].code;
}

std::string_view model_name(ModelKind kind) noexcept
{
    return kKinds[static_cast<std::size_t>(kind)].name;
}

std::optional<ModelKind> parse_model_kind(std::string_view s)
{
    std::string lowered(s);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto const& k : kKinds) {
        std::string name(k.name);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lowered == k.code || lowered == name) return k.kind;
    }
    if (lowered == "gnb") return ModelKind::NaiveBayes;
    return std::nullopt;
}

ClassifierSpec ClassifierSpec::defaults(ModelKind kind, std::uint64_t seed)
{
    ClassifierSpec spec;
    spec.seed = seed;
    switch (kind) {
    case ModelKind::DecisionTree: spec.params = TreeParams{}; break;
    case ModelKind::NaiveBayes: spec.params = NaiveBayesParams{}; break;
    case ModelKind::Svm: spec.params = SvmParams{}; break;
    case ModelKind::LogisticRegression: spec.params = LogisticParams{}; break;
    case ModelKind::RandomForest: spec.params = ForestParams{}; break;
    case ModelKind::Knn: spec.params = KnnParams{}; break;
    case ModelKind::NeuralNetwork: spec.params = MlpParams{}; break;
    }
    return spec;
}

void ClassifierSpec::validate() const
{
    auto fail = [&](std::string const& why) {
        throw ModelError(ModelError::Code::Spec, std::string(model_name(kind())) + ": " + why);
    };
    std::visit(
        [&](auto const& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TreeParams>) {
                if (p.min_samples_split < 2) fail("min_samples_split must be >= 2");
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                if (p.n_trees < 1) fail("tree count must be >= 1");
                if (p.max_features < 1 || p.max_features > kFeatureCount) fail("max_features must lie in [1, 7]");
                if (p.min_samples_split < 2) fail("min_samples_split must be >= 2");
            } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                if (!(p.var_smoothing > 0.0) || !std::isfinite(p.var_smoothing)) fail("var_smoothing must be > 0");
            } else if constexpr (std::is_same_v<T, SvmParams>) {
                if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) fail("lambda must be > 0");
                if (p.epochs < 1) fail("epochs must be >= 1");
            } else if constexpr (std::is_same_v<T, LogisticParams>) {
                if (!(p.learning_rate > 0.0) || !std::isfinite(p.learning_rate)) fail("learning rate must be > 0");
                if (p.epochs < 1) fail("epochs must be >= 1");
                if (!(p.l2 >= 0.0) || !std::isfinite(p.l2)) fail("l2 must be >= 0");
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                if (p.k < 1) fail("k must be >= 1");
            } else if constexpr (std::is_same_v<T, MlpParams>) {
                if (p.hidden < 1) fail("hidden width must be >= 1");
                if (!(p.learning_rate > 0.0) || !std::isfinite(p.learning_rate)) fail("learning rate must be > 0");
                if (p.epochs < 1) fail("epochs must be >= 1");
            }
        },
        params);
}

TrainedModel fit(ClassifierSpec const& spec, Dataset const& train)
{
    spec.validate();
    if (train.empty()) {
        throw ModelError(ModelError::Code::DegenerateData, "training set is empty");
    }

    auto const start = Clock::now();

    TrainedModel m;
    m.spec = spec;
    m.labels = train.labels();
    m.scaler = spec.normalize ? fit_scaler(train) : MinMaxScaler::identity();

    std::vector<FeatureVector> raw = train.feature_rows();
    std::vector<FeatureVector> scaled(raw.size());
    std::vector<std::uint32_t> targets(raw.size());
    std::vector<bool> present(m.labels.size(), false);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        scaled[i] = m.scaler.apply(raw[i]);
        targets[i] = static_cast<std::uint32_t>(*train.label_index(train[i].label));
        present[targets[i]] = true;
    }
    if (std::count(present.begin(), present.end(), true) < 2) {
        throw ModelError(ModelError::Code::DegenerateData, "training set must contain at least 2 classes");
    }

    TrainingMatrix const data{scaled, raw, targets, m.labels.size()};
    std::vector<std::size_t> all_rows(raw.size());
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

    std::visit(
        [&](auto const& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TreeParams>) {
                m.params = grow_tree(data, all_rows, TreeGrowth{p.min_samples_split, p.max_depth, 0});
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                m.params = grow_forest(data, p.n_trees, TreeGrowth{p.min_samples_split, 0, p.max_features}, spec.seed);
            } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                m.params = fit_naive_bayes(data, p.var_smoothing);
            } else if constexpr (std::is_same_v<T, SvmParams>) {
                m.params = fit_linear_svm(data, p.lambda, p.epochs, spec.seed);
            } else if constexpr (std::is_same_v<T, LogisticParams>) {
                m.params = fit_logistic(data, p.learning_rate, p.epochs, p.l2, &m.loss_history);
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                m.params = fit_knn(data, p.k);
            } else if constexpr (std::is_same_v<T, MlpParams>) {
                m.params = fit_mlp(data, MlpTraining{p.hidden, p.learning_rate, p.epochs, p.batch_size, p.adam}, spec.seed,
                                   &m.loss_history);
            }
        },
        spec.params);

    m.fit_seconds = seconds_since(start);
    return m;
}

std::vector<double> class_scores(TrainedModel const& m, SensorReading const& r)
{
    return rank_classes(m, r).score;
}

std::string predict(TrainedModel const& m, SensorReading const& r)
{
    return m.labels[top_class(m, r)];
}

RankedPredictions predict_topk(TrainedModel const& m, SensorReading const& r, std::size_t k)
{
    if (k < 1 || k > m.labels.size()) {
        throw ModelError(ModelError::Code::Range, "k must lie in [1, " + std::to_string(m.labels.size()) + "], got " +
                                                      std::to_string(k));
    }
    auto const rank = rank_classes(m, r);
    auto const order = ranked_order(rank);
    RankedPredictions out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back({m.labels[order[i]], rank.score[order[i]]});
    }
    return out;
}

EvalReport metrics_from_confusion(std::vector<std::vector<std::size_t>> const& confusion)
{
    EvalReport report;
    report.confusion = confusion;
    std::size_t const classes = confusion.size();
    std::size_t correct = 0;
    std::size_t total = 0;
    std::vector<std::size_t> predicted(classes, 0);
    for (std::size_t t = 0; t < classes; ++t) {
        for (std::size_t p = 0; p < classes; ++p) {
            total += confusion[t][p];
            predicted[p] += confusion[t][p];
        }
        correct += confusion[t][t];
    }
    if (total == 0) return report;

    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::size_t const support = std::accumulate(confusion[c].begin(), confusion[c].end(), std::size_t{0});
        if (support == 0) continue;
        ++counted;
        double const tp = static_cast<double>(confusion[c][c]);
        double const p = predicted[c] > 0 ? tp / static_cast<double>(predicted[c]) : 0.0;
        double const r = tp / static_cast<double>(support);
        precision += p;
        recall += r;
        f1 += (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    report.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    report.precision = 100.0 * precision / static_cast<double>(counted);
    report.recall = 100.0 * recall / static_cast<double>(counted);
    report.f1 = 100.0 * f1 / static_cast<double>(counted);
    return report;
}

EvalReport evaluate(TrainedModel const& m, Dataset const& test)
{
    if (test.empty()) {
        throw ModelError(ModelError::Code::DegenerateData, "test set is empty");
    }
    std::vector<std::size_t> truth(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        auto it = std::lower_bound(m.labels.begin(), m.labels.end(), test[i].label);
        if (it == m.labels.end() || *it != test[i].label) {
            throw ModelError(ModelError::Code::Label, "test label '" + test[i].label + "' is unknown to the model");
        }
        truth[i] = static_cast<std::size_t>(it - m.labels.begin());
    }

    auto const start = Clock::now();
    std::vector<std::size_t> predicted(test.size());
    constexpr std::size_t kChunk = 64;
    std::size_t const chunks = (test.size() + kChunk - 1) / kChunk;
    detail::parallel_for(chunks, [&](std::size_t chunk) {
        std::size_t const end = std::min(test.size(), (chunk + 1) * kChunk);
        for (std::size_t i = chunk * kChunk; i < end; ++i) predicted[i] = top_class(m, test[i].reading);
    });
    double const testing_time = seconds_since(start);

    std::vector<std::vector<std::size_t>> confusion(m.labels.size(), std::vector<std::size_t>(m.labels.size(), 0));
    for (std::size_t i = 0; i < test.size(); ++i) ++confusion[truth[i]][predicted[i]];

    auto report = metrics_from_confusion(confusion);
    report.algorithm = std::string(model_name(m.kind()));
    report.training_time = m.fit_seconds;
    report.testing_time = testing_time;
    return report;
}

BenchmarkReport benchmark_suite(Dataset const& data, SplitSpec const& split, std::vector<ClassifierSpec> const& specs)
{
    if (specs.empty()) {
        throw ModelError(ModelError::Code::Spec, "benchmark needs at least one classifier spec");
    }
    auto const parts = stratified_split(data, split);

    BenchmarkReport report;
    report.split = split;
    report.dataset_fingerprint = data.fingerprint();
    report.train_size = parts.train.size();
    report.test_size = parts.test.size();
    report.labels = data.labels();
    for (auto const& spec : specs) {
        std::string const name(model_name(spec.kind()));
        try {
            auto const model = fit(spec, parts.train);
            report.rows.push_back(evaluate(model, parts.test));
        } catch (ModelError const& e) {
            throw ModelError(e.code(), name + ": " + e.what());
        } catch (std::exception const& e) {
            throw std::runtime_error(name + ": " + e.what());
        }
    }
    return report;
}

} // namespace cropcast
