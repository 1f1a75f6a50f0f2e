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

#include "cropcast/service.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>

namespace cropcast {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Reports

json report_to_json(BenchmarkReport const& report)
{
    json models = json::array();
    json timings = json::array();
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        auto const& row = report.rows[i];
        auto const kind = parse_model_kind(row.algorithm);
        std::string const code = kind ? std::string(model_code(*kind)) : std::string();
        models.push_back({{"algorithm", row.algorithm},
                          {"code", code},
                          {"accuracy", row.accuracy},
                          {"precision", row.precision},
                          {"recall", row.recall},
                          {"f1", row.f1},
                          {"confusion", row.confusion}});
        timings.push_back({{"algorithm", row.algorithm},
                           {"training_time", row.training_time},
                           {"testing_time", row.testing_time}});
    }
    json metrics{{"dataset_fingerprint", report.dataset_fingerprint},
                 {"split",
                  {{"test_fraction", report.split.test_fraction},
                   {"seed", report.split.seed},
                   {"stratified", report.split.stratified}}},
                 {"train_size", report.train_size},
                 {"test_size", report.test_size},
                 {"labels", report.labels},
                 {"models", std::move(models)}};
    return json{{"format", "cropcast-report"},
                {"version", kReportFormatVersion},
                {"metrics", std::move(metrics)},
                {"timings", {{"unit", "seconds"}, {"models", std::move(timings)}}}};
}

namespace {

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

} // namespace

std::string report_to_text(BenchmarkReport const& report)
{
    std::ostringstream out;
    out << "dataset " << report.dataset_fingerprint << "\n";
    out << "split   test_fraction=" << report.split.test_fraction << " seed=" << report.split.seed
        << " stratified=" << (report.split.stratified ? "true" : "false") << " train=" << report.train_size
        << " test=" << report.test_size << "\n\n";
    out << pad("Algorithm", 26) << pad("Training (s)", 14) << pad("Testing (s)", 14) << pad("Accuracy", 10)
        << pad("Precision", 11) << "Recall\n";
    for (auto const& row : report.rows) {
        out << pad(row.algorithm, 26) << pad(fixed(row.training_time, 4), 14) << pad(fixed(row.testing_time, 4), 14)
            << pad(fixed(row.accuracy, 2), 10) << pad(fixed(row.precision, 2), 11) << fixed(row.recall, 2) << "\n";
    }
    return out.str();
}

std::string report_to_csv(BenchmarkReport const& report)
{
    std::ostringstream out;
    out << "algorithm,code,accuracy,precision,recall,f1\n";
    for (auto const& row : report.rows) {
        auto const kind = parse_model_kind(row.algorithm);
        out << row.algorithm << ',' << (kind ? model_code(*kind) : std::string_view{}) << ','
            << fixed(row.accuracy, 4) << ',' << fixed(row.precision, 4) << ',' << fixed(row.recall, 4) << ','
            << fixed(row.f1, 4) << "\n";
    }
    return out.str();
}

void write_report_files(BenchmarkReport const& report, std::filesystem::path const& dir)
{
    std::filesystem::create_directories(dir);
    auto write = [&](char const* name, std::string const& text) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    };
    write("report.json", report_to_json(report).dump(2) + "\n");
    write("report.txt", report_to_text(report));
    write("accuracy.csv", report_to_csv(report));
}

// ---------------------------------------------------------------------------
// Handlers

namespace {

constexpr std::array<char const*, kFeatureCount> kFieldNames{"n",        "p",  "k",       "temperature",
                                                             "humidity", "ph", "rainfall"};

HandlerResult respond(int status, json const& body) { return {status, body.dump(), "application/json"}; }

HandlerResult error(int status, std::string const& message) { return respond(status, json{{"error", message}}); }

HandlerResult rejected(ValidationOutcome const& v)
{
    json list = json::array();
    for (auto const& r : v.rejections) list.push_back({{"field", r.field}, {"code", r.code}});
    return respond(422, json{{"error", "validation failed"}, {"rejections", std::move(list)}});
}

std::optional<std::uint64_t> parse_uint(std::string_view s)
{
    std::uint64_t v = 0;
    auto const [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string two_decimals(std::uint64_t fixed_point)
{
    return std::to_string(fixed_point / kFixedPointScale) + "." + (fixed_point % kFixedPointScale < 10 ? "0" : "") +
           std::to_string(fixed_point % kFixedPointScale);
}

json record_json(PredictionRecord const& rec)
{
    auto const values = {rec.n, rec.p, rec.k, rec.temp, rec.hum, rec.ph, rec.rain};
    json out{{"crop_name", rec.crop_name}};
    json raw = json::object();
    std::size_t f = 0;
    for (auto v : values) {
        out[kFieldNames[f]] = two_decimals(v);
        raw[kFieldNames[f]] = v;
        ++f;
    }
    out["fixed_point"] = std::move(raw);
    return out;
}

json block_json(Block const& b)
{
    json txs = json::array();
    for (auto const& tx : b.transactions) {
        json t{{"hash", to_hex(tx.hash)},     {"nonce", tx.nonce},       {"sender", to_hex(tx.sender)},
               {"to", to_hex(tx.to)},         {"value", tx.value},       {"gas_price", tx.gas_price},
               {"gas_limit", tx.gas_limit},   {"data", to_hex(tx.data)}};
        try {
            t["decoded"] = record_json(decode_add_prediction(tx.data));
        } catch (LedgerError const&) {
            t["decoded"] = nullptr;
        }
        txs.push_back(std::move(t));
    }
    return json{{"number", b.number},
                {"timestamp", b.timestamp},
                {"hash", to_hex(b.hash)},
                {"parent_hash", to_hex(b.parent_hash)},
                {"tx_root", to_hex(b.tx_root)},
                {"gas_used", b.gas_used},
                {"gas_limit", b.gas_limit},
                {"transaction_count", b.transactions.size()},
                {"transactions", std::move(txs)}};
}

std::uint64_t wall_clock()
{
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

} // namespace

Chain open_or_create_chain(std::optional<std::filesystem::path> const& path, ChainConfig const& config)
{
    if (path && std::filesystem::exists(*path)) return open_chain(*path, config);
    auto chain = genesis(config);
    if (path) persist_chain(chain, *path);
    return chain;
}

Service::Service(TrainedModel model, Chain chain, ServiceConfig config, Clock clock)
    : model_(std::move(model)),
      config_(std::move(config)),
      clock_(clock ? std::move(clock) : Clock(wall_clock)),
      ledger_(std::move(chain), config_.chain_path)
{
    if (config_.default_k == 0) throw std::invalid_argument("default k must be at least 1");
    if (config_.window == 0) throw std::invalid_argument("window must be at least 1");
}

json Service::run_prediction(SensorReading const& reading, std::size_t k, bool record, std::uint64_t timestamp)
{
    auto const ranked = predict_topk(model_, reading, k);
    json predictions = json::array();
    for (auto const& p : ranked) predictions.push_back({{"crop", p.label}, {"score", p.score}});
    json out{{"predictions", std::move(predictions)}};
    if (record) {
        try {
            auto const receipt = ledger_.submit(config_.sender, make_record(ranked.front().label, reading), timestamp);
            out["transaction"] = {{"tx_hash", to_hex(receipt.tx_hash)},
                                  {"block_number", receipt.block_number},
                                  {"prediction_index", receipt.prediction_index},
                                  {"gas_used", receipt.gas_used}};
        } catch (std::exception const& e) {
            out["transaction"] = {{"error", e.what()}};
        }
    }
    return out;
}

HandlerResult Service::predict(std::string_view body)
{
    json req = json::parse(body.begin(), body.end(), nullptr, false);
    if (req.is_discarded() || !req.is_object()) return error(400, "request body is not a JSON object");
    auto const feats = req.find("features");
    if (feats == req.end() || !feats->is_object()) return error(400, "features must be an object");

    FeatureVector values{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        auto const it = feats->find(kFieldNames[f]);
        if (it == feats->end()) return error(400, std::string("missing feature ") + kFieldNames[f]);
        if (it->is_null()) {
            values[f] = std::nan("");
        } else if (it->is_number()) {
            values[f] = it->get<double>();
        } else {
            return error(400, std::string("feature ") + kFieldNames[f] + " is not a number");
        }
    }

    std::size_t k = config_.default_k;
    if (auto const it = req.find("k"); it != req.end()) {
        if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0) return error(400, "k must be an integer >= 1");
        k = it->get<std::size_t>();
    }
    if (k > model_.labels.size()) {
        return error(400, "k exceeds the " + std::to_string(model_.labels.size()) + " known crops");
    }
    bool record = false;
    if (auto const it = req.find("record"); it != req.end()) {
        if (!it->is_boolean()) return error(400, "record must be a boolean");
        record = it->get<bool>();
    }

    auto const checked = validate_reading(SensorReading::from_array(values), config_.rules);
    if (!checked.accepted()) return rejected(checked);
    return respond(200, run_prediction(*checked.reading, k, record, clock_()));
}

HandlerResult Service::ingest(std::string_view body, std::optional<bool> record, std::optional<std::size_t> k)
{
    SensorMessage msg;
    try {
        msg = parse_sensor_message(body);
    } catch (TelemetryError const& e) {
        ++rejected_;
        return error(400, e.what());
    }
    auto const checked = validate_message(msg, config_.rules);
    if (!checked.accepted()) {
        ++rejected_;
        std::fprintf(stderr, "ingest: rejected message from %s\n", msg.device_id.c_str());
        return rejected(checked);
    }
    std::size_t const depth = k.value_or(config_.default_k);
    if (depth == 0 || depth > model_.labels.size()) return error(400, "k out of range");
    ++accepted_;

    FeatureVector averaged{};
    std::size_t used = 0;
    {
        std::lock_guard lock(windows_mutex_);
        auto& window = windows_[msg.device_id];
        window.push_back(*checked.reading);
        if (window.size() > config_.window) window.erase(window.begin());
        used = window.size();
        averaged = aggregate_window(window, used);
    }
    auto out = run_prediction(SensorReading::from_array(averaged), depth, record.value_or(config_.ingest_records),
                              std::max(msg.timestamp, clock_()));
    out["device_id"] = msg.device_id;
    out["window"] = used;
    return respond(200, out);
}

HandlerResult Service::get_prediction(std::string_view index) const
{
    auto const i = parse_uint(index);
    if (!i) return error(400, "index must be a non-negative integer");
    auto const rec = ledger_.prediction(*i);
    if (!rec) return error(404, "no prediction at index " + std::string(index));
    auto out = record_json(*rec);
    out["index"] = *i;
    return respond(200, out);
}

HandlerResult Service::chain_blocks(std::optional<std::string_view> from, std::optional<std::string_view> limit) const
{
    constexpr std::size_t kMaxPage = 1000;
    auto const snapshot_height = ledger_.height();
    std::uint64_t start = snapshot_height;
    if (from) {
        auto const v = parse_uint(*from);
        if (!v) return error(400, "from must be a non-negative integer");
        start = *v;
    }
    std::size_t page = 20;
    if (limit) {
        auto const v = parse_uint(*limit);
        if (!v) return error(400, "limit must be a non-negative integer");
        page = static_cast<std::size_t>(std::min<std::uint64_t>(*v, kMaxPage));
    }
    json blocks = json::array();
    for (auto const& b : ledger_.blocks_newest_first(start, page)) blocks.push_back(block_json(b));
    return respond(200, json{{"height", snapshot_height}, {"blocks", std::move(blocks)}});
}

HandlerResult Service::verify() const
{
    auto const result = verify_chain(ledger_.snapshot());
    json out{{"ok", result.ok()}, {"blocks_checked", result.blocks_checked}};
    if (!result.ok()) {
        auto const& v = *result.violation;
        out["violation"] = {
            {"block_number", v.block_number}, {"reason", violation_name(v.kind)}, {"detail", v.detail}};
    }
    return respond(200, out);
}

HandlerResult Service::report() const
{
    if (!config_.report_path) return error(404, "no benchmark report configured; run bench first");
    std::ifstream in(*config_.report_path, std::ios::binary);
    if (!in) return error(404, "benchmark report not found; run bench first");
    std::ostringstream buf;
    buf << in.rdbuf();
    return {200, buf.str(), "application/json"};
}

HandlerResult Service::health() const
{
    return respond(200, json{{"status", "ok"},
                             {"model", model_code(model_.kind())},
                             {"crops", model_.labels.size()},
                             {"height", ledger_.height()},
                             {"predictions", ledger_.prediction_count()},
                             {"contract", to_hex(contract_address())},
                             {"ingest", {{"accepted", accepted_.load()}, {"rejected", rejected_.load()}}}});
}

// ---------------------------------------------------------------------------
// HTTP

struct HttpServer::Impl {
    httplib::Server server;
};

namespace {

void send(httplib::Response& res, HandlerResult const& r)
{
    res.status = r.status;
    res.set_content(r.body, r.content_type);
}

std::optional<std::string_view> param(httplib::Request const& req, char const* name)
{
    auto const it = req.params.find(name);
    if (it == req.params.end()) return std::nullopt;
    return std::string_view(it->second);
}

} // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>())
{
    auto& s = impl_->server;
    s.Post("/api/v1/predict",
           [&service](httplib::Request const& req, httplib::Response& res) { send(res, service.predict(req.body)); });
    s.Post("/api/v1/ingest", [&service](httplib::Request const& req, httplib::Response& res) {
        std::optional<bool> record;
        if (auto const r = param(req, "record")) {
            if (*r != "true" && *r != "false") return send(res, error(400, "record must be true or false"));
            record = *r == "true";
        }
        std::optional<std::size_t> k;
        if (auto const kp = param(req, "k")) {
            auto const v = parse_uint(*kp);
            if (!v) return send(res, error(400, "k must be a positive integer"));
            k = static_cast<std::size_t>(*v);
        }
        send(res, service.ingest(req.body, record, k));
    });
    s.Get(R"(/api/v1/predictions/([^/]+))", [&service](httplib::Request const& req, httplib::Response& res) {
        send(res, service.get_prediction(req.matches[1].str()));
    });
    s.Get("/api/v1/chain/blocks", [&service](httplib::Request const& req, httplib::Response& res) {
        send(res, service.chain_blocks(param(req, "from"), param(req, "limit")));
    });
    s.Get("/api/v1/chain/verify",
          [&service](httplib::Request const&, httplib::Response& res) { send(res, service.verify()); });
    s.Get("/api/v1/report",
          [&service](httplib::Request const&, httplib::Response& res) { send(res, service.report()); });
    s.Get("/api/v1/health",
          [&service](httplib::Request const&, httplib::Response& res) { send(res, service.health()); });
    if (auto const& dir = service.config().static_dir) {
        if (!s.set_mount_point("/", dir->string())) {
            throw std::runtime_error("static directory " + dir->string() + " does not exist");
        }
    }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(std::string const& host, int port)
{
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
    } else if (impl_->server.bind_to_port(host, port)) {
        port_ = port;
    } else {
        port_ = -1;
    }
    if (port_ < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return port_;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start()
{
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop()
{
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace cropcast
