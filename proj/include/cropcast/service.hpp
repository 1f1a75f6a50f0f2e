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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cropcast/ledger.hpp"
#include "cropcast/models.hpp"
#include "cropcast/telemetry.hpp"

namespace cropcast {

// ---------------------------------------------------------------------------
// Benchmark report files

inline constexpr int kReportFormatVersion = 1;

// {"format","version","metrics":{...},"timings":{...}}. The metrics section
// holds only values that are a pure function of data, split and specs, so
// two runs with the same flags agree on it byte for byte.
nlohmann::json report_to_json(BenchmarkReport const& report);

// Fixed-width text table, one row per algorithm.
std::string report_to_text(BenchmarkReport const& report);

// algorithm,code,accuracy,precision,recall,f1
std::string report_to_csv(BenchmarkReport const& report);

// Writes report.json, report.txt and accuracy.csv into `dir`.
void write_report_files(BenchmarkReport const& report, std::filesystem::path const& dir);

// ---------------------------------------------------------------------------
// Request handling

struct HandlerResult {
    int status{200};
    std::string body;
    std::string content_type{"application/json"};
};

struct ServiceConfig {
    std::string host{"127.0.0.1"};
    int port{8080};
    std::optional<std::filesystem::path> chain_path;
    std::optional<std::filesystem::path> report_path;
    std::optional<std::filesystem::path> static_dir;
    std::size_t default_k{3};
    std::size_t window{1};         // readings averaged per device on ingest
    bool ingest_records{true};     // ingest stores its top-1 on chain unless ?record=false
    Address sender{default_sender()};
    ValidationRule rules{};
};

// Opens the chain file when it exists, otherwise starts a fresh chain and
// persists its genesis block there.
Chain open_or_create_chain(std::optional<std::filesystem::path> const& path, ChainConfig const& config = {});

class Service {
public:
    using Clock = std::function<std::uint64_t()>;

    Service(TrainedModel model, Chain chain, ServiceConfig config, Clock clock = {});

    HandlerResult predict(std::string_view body);
    HandlerResult ingest(std::string_view body, std::optional<bool> record = std::nullopt,
                         std::optional<std::size_t> k = std::nullopt);
    HandlerResult get_prediction(std::string_view index) const;
    HandlerResult chain_blocks(std::optional<std::string_view> from, std::optional<std::string_view> limit) const;
    HandlerResult verify() const;
    HandlerResult report() const;
    HandlerResult health() const;

    ServiceConfig const& config() const noexcept { return config_; }
    TrainedModel const& model() const noexcept { return model_; }
    SharedLedger& ledger() noexcept { return ledger_; }

private:
    nlohmann::json run_prediction(SensorReading const& reading, std::size_t k, bool record, std::uint64_t timestamp);

    TrainedModel const model_;
    ServiceConfig const config_;
    Clock clock_;
    SharedLedger ledger_;

    std::mutex windows_mutex_;
    std::map<std::string, std::vector<SensorReading>> windows_;
    std::atomic<std::uint64_t> accepted_{0};
    std::atomic<std::uint64_t> rejected_{0};
};

// Binds the handlers under /api/v1 and optionally mounts static assets.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(HttpServer const&) = delete;
    HttpServer& operator=(HttpServer const&) = delete;

    // Port 0 picks a free port. Returns the bound port.
    int bind(std::string const& host, int port);
    // Blocks until stop().
    void listen();
    // Serves on a background thread.
    void start();
    void stop();
    int port() const noexcept { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_{0};
};

} // namespace cropcast
