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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cropcast/classifiers.hpp"
#include "cropcast/dataset.hpp"

namespace cropcast {

enum class ModelKind { DecisionTree, NaiveBayes, Svm, LogisticRegression, RandomForest, Knn, NeuralNetwork };

// Table order used by the benchmark: DT, NB, SVM, LR, RF, KNN, NN.
inline constexpr std::array<ModelKind, 7> kAllModelKinds{
    ModelKind::DecisionTree, ModelKind::NaiveBayes, ModelKind::Svm,          ModelKind::LogisticRegression,
    ModelKind::RandomForest, ModelKind::Knn,        ModelKind::NeuralNetwork};

std::string_view model_code(ModelKind kind) noexcept;   // "dt", "nb", ...
std::string_view model_name(ModelKind kind) noexcept;   // "Decision Tree", ...
std::optional<ModelKind> parse_model_kind(std::string_view code_or_name);

struct TreeParams {
    std::size_t min_samples_split{2};
    std::size_t max_depth{0}; // 0 = unlimited
};

struct ForestParams {
    std::size_t n_trees{100};
    std::size_t max_features{2}; // floor(sqrt(7))
    std::size_t min_samples_split{2};
};

struct NaiveBayesParams {
    double var_smoothing{1e-9};
};

struct SvmParams {
    double lambda{1e-4};
    std::size_t epochs{200};
};

struct LogisticParams {
    double learning_rate{1.0};
    std::size_t epochs{3000};
    double l2{1e-4};
};

struct KnnParams {
    std::size_t k{5};
};

struct MlpParams {
    std::size_t hidden{64};
    double learning_rate{0.001};
    std::size_t epochs{300};
    std::size_t batch_size{200}; // 0 = full batch
    bool adam{true};
};

// Alternative order matches ModelKind.
using Hyperparameters =
    std::variant<TreeParams, NaiveBayesParams, SvmParams, LogisticParams, ForestParams, KnnParams, MlpParams>;

struct ClassifierSpec {
    Hyperparameters params{ForestParams{}};
    std::uint64_t seed{42};
    // When false the model is fitted on raw features (identity scaler).
    bool normalize{true};

    ModelKind kind() const noexcept { return static_cast<ModelKind>(params.index()); }

    static ClassifierSpec defaults(ModelKind kind, std::uint64_t seed = 42);

    // Throws ModelError{Spec} on out-of-bounds hyperparameters.
    void validate() const;
};

class ModelError : public std::runtime_error {
public:
    enum class Code { Spec, DegenerateData, Input, Range, Label, Format, Version };

    ModelError(Code code, std::string const& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

// Alternative order matches ModelKind.
using FittedParams = std::variant<DecisionTreeModel, NaiveBayesModel, SvmModel, LogisticModel, RandomForestModel,
                                  KnnModel, MlpModel>;

struct TrainedModel {
    ClassifierSpec spec;
    std::vector<std::string> labels; // sorted
    MinMaxScaler scaler;
    FittedParams params;
    // Training loss per epoch for gradient-trained kinds; empty otherwise.
    std::vector<double> loss_history;
    // Wall-clock fit time; not persisted.
    double fit_seconds{0.0};

    ModelKind kind() const noexcept { return spec.kind(); }
};

struct RankedPrediction {
    std::string label;
    double score{};

    friend bool operator==(RankedPrediction const&, RankedPrediction const&) = default;
};

using RankedPredictions = std::vector<RankedPrediction>;

TrainedModel fit(ClassifierSpec const& spec, Dataset const& train);

std::string predict(TrainedModel const& m, SensorReading const& r);
RankedPredictions predict_topk(TrainedModel const& m, SensorReading const& r, std::size_t k);

// Per-class scores in label order, before ranking.
std::vector<double> class_scores(TrainedModel const& m, SensorReading const& r);

struct EvalReport {
    std::string algorithm;
    double training_time{0.0}; // seconds
    double testing_time{0.0};  // seconds
    double accuracy{0.0};      // percent
    double precision{0.0};     // macro, percent
    double recall{0.0};        // macro, percent
    double f1{0.0};            // macro, percent
    // confusion[true][predicted], indices into the model's label set.
    std::vector<std::vector<std::size_t>> confusion;
};

// Metrics from a confusion matrix; classes with zero support are left out of
// the macro means.
EvalReport metrics_from_confusion(std::vector<std::vector<std::size_t>> const& confusion);

EvalReport evaluate(TrainedModel const& m, Dataset const& test);

struct BenchmarkReport {
    std::vector<EvalReport> rows;
    SplitSpec split;
    std::string dataset_fingerprint;
    std::size_t train_size{0};
    std::size_t test_size{0};
    std::vector<std::string> labels; // row/column order of every confusion matrix
};

BenchmarkReport benchmark_suite(Dataset const& data, SplitSpec const& split, std::vector<ClassifierSpec> const& specs);

void save_model(TrainedModel const& m, std::ostream& out);
void save_model(TrainedModel const& m, std::filesystem::path const& path);
TrainedModel load_model(std::istream& in);
TrainedModel load_model(std::filesystem::path const& path);

inline constexpr int kModelFormatVersion = 1;

} // namespace cropcast
