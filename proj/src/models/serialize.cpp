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

// Model files are JSON documents:
//
//   {"format": "cropcast-model", "version": 1,
//    "checksum": "0x<keccak-256 of payload.dump()>",
//    "payload": {...}}
//
// Numeric arrays inside the payload are tagged with their element type
// ({"dtype": "f64" | "u32" | "i32", "data": [...]}) and doubles are written
// in shortest round-trip form, so a load reproduces every bit.

#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cropcast/keccak.hpp"
#include "cropcast/models.hpp"

namespace cropcast {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "cropcast-model";

[[noreturn]] void format_error(std::string const& why)
{
    throw ModelError(ModelError::Code::Format, "model file: " + why);
}

template <typename Range>
json typed(std::string_view dtype, Range const& values)
{
    json data = json::array();
    for (auto const& v : values) data.push_back(v);
    return {{"dtype", dtype}, {"data", std::move(data)}};
}

template <typename T>
std::vector<T> untyped(json const& j, std::string_view dtype)
{
    if (j.at("dtype").get<std::string>() != dtype) {
        format_error("expected dtype " + std::string(dtype) + ", found " + j.at("dtype").get<std::string>());
    }
    std::vector<T> out;
    for (auto const& v : j.at("data")) {
        if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) format_error("non-numeric f64 element");
        } else {
            if (!v.is_number_integer()) format_error("non-integer element");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned()) format_error("negative unsigned element");
                if (v.get<std::uint64_t>() > std::numeric_limits<T>::max()) format_error("element out of range");
            } else {
                auto const x = v.get<std::int64_t>();
                if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
                    format_error("element out of range");
                }
            }
        }
        out.push_back(v.get<T>());
    }
    return out;
}

json feature_vector(FeatureVector const& v)
{
    return typed("f64", v);
}

FeatureVector read_feature_vector(json const& j)
{
    auto const v = untyped<double>(j, "f64");
    if (v.size() != kFeatureCount) format_error("feature vector must hold 7 values");
    FeatureVector out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

json vectors(std::vector<FeatureVector> const& rows)
{
    std::vector<double> flat;
    flat.reserve(rows.size() * kFeatureCount);
    for (auto const& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    json j = typed("f64", flat);
    j["shape"] = {rows.size(), kFeatureCount};
    return j;
}

std::vector<FeatureVector> read_vectors(json const& j, std::size_t expected_rows)
{
    auto const flat = untyped<double>(j, "f64");
    if (flat.size() != expected_rows * kFeatureCount) format_error("matrix has the wrong number of elements");
    std::vector<FeatureVector> out(expected_rows);
    for (std::size_t i = 0; i < expected_rows; ++i) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(i * kFeatureCount), kFeatureCount, out[i].begin());
    }
    return out;
}

json hyperparameters(Hyperparameters const& params)
{
    return std::visit(
        [](auto const& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TreeParams>) {
                return {{"min_samples_split", p.min_samples_split}, {"max_depth", p.max_depth}};
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                return {{"n_trees", p.n_trees}, {"max_features", p.max_features},
                        {"min_samples_split", p.min_samples_split}};
            } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                return {{"var_smoothing", p.var_smoothing}};
            } else if constexpr (std::is_same_v<T, SvmParams>) {
                return {{"lambda", p.lambda}, {"epochs", p.epochs}};
            } else if constexpr (std::is_same_v<T, LogisticParams>) {
                return {{"learning_rate", p.learning_rate}, {"epochs", p.epochs}, {"l2", p.l2}};
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                return {{"k", p.k}};
            } else {
                return {{"hidden", p.hidden},
                        {"learning_rate", p.learning_rate},
                        {"epochs", p.epochs},
                        {"batch_size", p.batch_size},
                        {"optimizer", p.adam ? "adam" : "gd"}};
            }
        },
        params);
}

Hyperparameters read_hyperparameters(ModelKind kind, json const& j)
{
    switch (kind) {
    case ModelKind::DecisionTree:
        return TreeParams{j.at("min_samples_split").get<std::size_t>(), j.at("max_depth").get<std::size_t>()};
    case ModelKind::RandomForest:
        return ForestParams{j.at("n_trees").get<std::size_t>(), j.at("max_features").get<std::size_t>(),
                            j.at("min_samples_split").get<std::size_t>()};
    case ModelKind::NaiveBayes: return NaiveBayesParams{j.at("var_smoothing").get<double>()};
    case ModelKind::Svm: return SvmParams{j.at("lambda").get<double>(), j.at("epochs").get<std::size_t>()};
    case ModelKind::LogisticRegression:
        return LogisticParams{j.at("learning_rate").get<double>(), j.at("epochs").get<std::size_t>(),
                              j.at("l2").get<double>()};
    case ModelKind::Knn: return KnnParams{j.at("k").get<std::size_t>()};
    case ModelKind::NeuralNetwork:
        return MlpParams{j.at("hidden").get<std::size_t>(), j.at("learning_rate").get<double>(),
                         j.at("epochs").get<std::size_t>(), j.at("batch_size").get<std::size_t>(),
                         j.at("optimizer").get<std::string>() == "adam"};
    }
    format_error("unknown model kind");
}

json tree_json(DecisionTreeModel const& t)
{
    std::vector<std::int32_t> feature;
    std::vector<double> threshold;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> right;
    std::vector<std::int32_t> leaf;
    for (auto const& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        leaf.push_back(n.leaf);
    }
    return {{"feature", typed("i32", feature)}, {"threshold", typed("f64", threshold)},
            {"left", typed("i32", left)},       {"right", typed("i32", right)},
            {"leaf", typed("i32", leaf)},       {"leaf_counts", typed("u32", t.leaf_counts)}};
}

DecisionTreeModel read_tree(json const& j, std::size_t classes)
{
    DecisionTreeModel t;
    t.n_classes = classes;
    auto const feature = untyped<std::int32_t>(j.at("feature"), "i32");
    auto const threshold = untyped<double>(j.at("threshold"), "f64");
    auto const left = untyped<std::int32_t>(j.at("left"), "i32");
    auto const right = untyped<std::int32_t>(j.at("right"), "i32");
    auto const leaf = untyped<std::int32_t>(j.at("leaf"), "i32");
    t.leaf_counts = untyped<std::uint32_t>(j.at("leaf_counts"), "u32");
    std::size_t const n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || leaf.size() != n) {
        format_error("tree node arrays disagree in length");
    }
    if (t.leaf_counts.size() % classes != 0) format_error("leaf count table is ragged");
    auto const leaves = static_cast<std::int64_t>(t.leaf_counts.size() / classes);
    for (std::size_t i = 0; i < n; ++i) {
        TreeNode node{feature[i], threshold[i], left[i], right[i], leaf[i]};
        if (node.feature >= 0) {
            // Children always follow their parent, which rules out cycles.
            if (node.feature >= static_cast<std::int32_t>(kFeatureCount) || node.left <= static_cast<std::int32_t>(i) ||
                node.right <= static_cast<std::int32_t>(i) || node.left >= static_cast<std::int32_t>(n) ||
                node.right >= static_cast<std::int32_t>(n)) {
                format_error("tree node " + std::to_string(i) + " is malformed");
            }
        } else if (node.leaf < 0 || node.leaf >= leaves) {
            format_error("tree leaf " + std::to_string(i) + " is out of range");
        }
        t.nodes.push_back(node);
    }
    return t;
}

json linear_json(LinearModel const& m)
{
    std::vector<double> flat;
    for (auto const& row : m.weights) flat.insert(flat.end(), row.begin(), row.end());
    json j = typed("f64", flat);
    j["shape"] = {m.weights.size(), kFeatureCount + 1};
    return {{"weights", std::move(j)}};
}

void read_linear(json const& j, std::size_t classes, LinearModel& m)
{
    auto const flat = untyped<double>(j.at("weights"), "f64");
    constexpr std::size_t width = kFeatureCount + 1;
    if (flat.size() != classes * width) format_error("weight matrix has the wrong number of elements");
    m.weights.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(c * width), width, m.weights[c].begin());
    }
}

json params_json(FittedParams const& params)
{
    return std::visit(
        [](auto const& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DecisionTreeModel>) {
                return tree_json(p);
            } else if constexpr (std::is_same_v<T, RandomForestModel>) {
                json trees = json::array();
                for (auto const& t : p.trees) trees.push_back(tree_json(t));
                return {{"trees", std::move(trees)}};
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                return {{"log_prior", typed("f64", p.log_prior)},
                        {"mean", vectors(p.mean)},
                        {"variance", vectors(p.variance)}};
            } else if constexpr (std::is_same_v<T, SvmModel> || std::is_same_v<T, LogisticModel>) {
                return linear_json(p);
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                return {{"k", p.k}, {"points", vectors(p.points)}, {"targets", typed("u32", p.targets)}};
            } else {
                return {{"hidden", p.hidden}, {"w1", typed("f64", p.w1)}, {"b1", typed("f64", p.b1)},
                        {"w2", typed("f64", p.w2)}, {"b2", typed("f64", p.b2)}};
            }
        },
        params);
}

FittedParams read_params(ModelKind kind, json const& j, std::size_t classes)
{
    switch (kind) {
    case ModelKind::DecisionTree: return read_tree(j, classes);
    case ModelKind::RandomForest: {
        RandomForestModel f;
        for (auto const& t : j.at("trees")) f.trees.push_back(read_tree(t, classes));
        if (f.trees.empty()) format_error("forest has no trees");
        return f;
    }
    case ModelKind::NaiveBayes: {
        NaiveBayesModel nb;
        nb.log_prior = untyped<double>(j.at("log_prior"), "f64");
        if (nb.log_prior.size() != classes) format_error("prior count does not match labels");
        nb.mean = read_vectors(j.at("mean"), classes);
        nb.variance = read_vectors(j.at("variance"), classes);
        return nb;
    }
    case ModelKind::Svm: {
        SvmModel m;
        read_linear(j, classes, m);
        return m;
    }
    case ModelKind::LogisticRegression: {
        LogisticModel m;
        read_linear(j, classes, m);
        return m;
    }
    case ModelKind::Knn: {
        KnnModel m;
        m.k = j.at("k").get<std::size_t>();
        m.n_classes = classes;
        m.targets = untyped<std::uint32_t>(j.at("targets"), "u32");
        m.points = read_vectors(j.at("points"), m.targets.size());
        for (auto t : m.targets) {
            if (t >= classes) format_error("neighbor target out of range");
        }
        if (m.k < 1 || m.points.empty()) format_error("neighbor model is empty");
        return m;
    }
    case ModelKind::NeuralNetwork: {
        MlpModel m;
        m.hidden = j.at("hidden").get<std::size_t>();
        m.n_classes = classes;
        m.w1 = untyped<double>(j.at("w1"), "f64");
        m.b1 = untyped<double>(j.at("b1"), "f64");
        m.w2 = untyped<double>(j.at("w2"), "f64");
        m.b2 = untyped<double>(j.at("b2"), "f64");
        if (m.w1.size() != m.hidden * kFeatureCount || m.b1.size() != m.hidden || m.w2.size() != classes * m.hidden ||
            m.b2.size() != classes) {
            format_error("network weight shapes are inconsistent");
        }
        return m;
    }
    }
    format_error("unknown model kind");
}

} // namespace

void save_model(TrainedModel const& m, std::ostream& out)
{
    json payload{
        {"kind", model_code(m.kind())},
        {"seed", m.spec.seed},
        {"normalize", m.spec.normalize},
        {"hyperparameters", hyperparameters(m.spec.params)},
        {"labels", m.labels},
        {"scaler", {{"min", feature_vector(m.scaler.min())}, {"max", feature_vector(m.scaler.max())}}},
        {"params", params_json(m.params)},
    };
    std::string const body = payload.dump();
    json doc{
        {"format", kFormatName},
        {"version", kModelFormatVersion},
        {"checksum", to_hex(keccak256(body))},
        {"payload", std::move(payload)},
    };
    out << doc.dump() << '\n';
    if (!out) {
        throw ModelError(ModelError::Code::Format, "failed writing model");
    }
}

void save_model(TrainedModel const& m, std::filesystem::path const& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ModelError(ModelError::Code::Format, "cannot open '" + path.string() + "' for writing");
    }
    save_model(m, out);
}

TrainedModel load_model(std::istream& in)
{
    json doc;
    try {
        doc = json::parse(in);
    } catch (json::exception const& e) {
        format_error(std::string("not a valid model document (") + e.what() + ")");
    }

    try {
        if (!doc.is_object() || doc.value("format", std::string{}) != kFormatName) {
            format_error("missing or wrong format tag");
        }
        auto const version = doc.at("version").get<std::int64_t>();
        if (version != kModelFormatVersion) {
            throw ModelError(ModelError::Code::Version, "model format version " + std::to_string(version) +
                                                            " is not supported (this build reads version " +
                                                            std::to_string(kModelFormatVersion) + ")");
        }
        auto const& payload = doc.at("payload");
        if (to_hex(keccak256(payload.dump())) != doc.at("checksum").get<std::string>()) {
            format_error("checksum mismatch; payload is corrupted");
        }

        auto const kind = parse_model_kind(payload.at("kind").get<std::string>());
        if (!kind) format_error("unknown model kind '" + payload.at("kind").get<std::string>() + "'");

        TrainedModel m;
        m.spec.params = read_hyperparameters(*kind, payload.at("hyperparameters"));
        m.spec.seed = payload.at("seed").get<std::uint64_t>();
        m.spec.normalize = payload.at("normalize").get<bool>();
        m.spec.validate();
        m.labels = payload.at("labels").get<std::vector<std::string>>();
        if (m.labels.size() < 2 || !std::is_sorted(m.labels.begin(), m.labels.end()) ||
            std::adjacent_find(m.labels.begin(), m.labels.end()) != m.labels.end()) {
            format_error("label set must be sorted, distinct and hold at least 2 labels");
        }
        m.scaler = MinMaxScaler(read_feature_vector(payload.at("scaler").at("min")),
                                read_feature_vector(payload.at("scaler").at("max")));
        m.params = read_params(*kind, payload.at("params"), m.labels.size());
        return m;
    } catch (json::exception const& e) {
        format_error(std::string("malformed payload (") + e.what() + ")");
    }
}

TrainedModel load_model(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ModelError(ModelError::Code::Format, "cannot open model '" + path.string() + "'");
    }
    return load_model(in);
}

} // namespace cropcast
