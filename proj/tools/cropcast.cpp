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

// cropcast: benchmark, train, serve, simulate and inspect the chain.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "cropcast/dataset.hpp"
#include "cropcast/ledger.hpp"
#include "cropcast/models.hpp"
#include "cropcast/service.hpp"
#include "cropcast/telemetry.hpp"

namespace {

using namespace cropcast;

constexpr int kUsageExit = 2;

struct BenchOptions {
    std::string data;
    std::uint64_t seed{42};
    double test_fraction{0.25};
    bool no_stratify{false};
    std::string out{"reports"};
    std::vector<std::string> models;
};

struct TrainOptions {
    std::string data;
    std::string model{"rf"};
    std::uint64_t seed{42};
    double test_fraction{0.25};
    bool all_rows{false};
    std::string out{"model.json"};
};

struct ServeOptions {
    std::string model;
    std::string chain{"chain.jsonl"};
    std::string report{"reports/report.json"};
    std::string static_dir;
    std::string host{"127.0.0.1"};
    int port{8080};
    std::size_t k{3};
    std::size_t window{1};
    std::uint64_t genesis_timestamp{kDefaultGenesisTimestamp};
};

struct SimulateOptions {
    std::string data;
    std::string url{"http://127.0.0.1:8080"};
    std::string mode{"replay"};
    double rate{1.0};
    std::uint64_t count{10};
    std::uint64_t start{0};
    std::uint64_t seed{42};
    std::size_t devices{1};
    bool no_record{false};
    bool no_wait{false};
    bool dry_run{false};
};

struct ChainOptions {
    std::string file;
    std::uint64_t from{0};
    bool from_set{false};
    std::size_t limit{10};
};

std::vector<ClassifierSpec> bench_specs(std::vector<std::string> const& names, std::uint64_t seed)
{
    std::vector<ClassifierSpec> specs;
    if (names.empty()) {
        for (auto kind : kAllModelKinds) specs.push_back(ClassifierSpec::defaults(kind, seed));
        return specs;
    }
    for (auto const& n : names) {
        auto const kind = parse_model_kind(n);
        if (!kind) throw CLI::ValidationError("--models", "unknown model " + n);
        specs.push_back(ClassifierSpec::defaults(*kind, seed));
    }
    return specs;
}

int run_bench(BenchOptions const& o)
{
    auto const data = load_dataset(std::filesystem::path(o.data));
    SplitSpec const split{o.test_fraction, o.seed, !o.no_stratify};
    auto const report = benchmark_suite(data, split, bench_specs(o.models, o.seed));
    write_report_files(report, o.out);
    std::cout << report_to_text(report);
    return 0;
}

int run_train(TrainOptions const& o)
{
    auto const kind = parse_model_kind(o.model);
    if (!kind) {
        std::cerr << "error: unknown model " << o.model << "\n";
        return kUsageExit;
    }
    auto const data = load_dataset(std::filesystem::path(o.data));
    auto const spec = ClassifierSpec::defaults(*kind, o.seed);
    if (o.all_rows) {
        auto const model = fit(spec, data);
        save_model(model, std::filesystem::path(o.out));
        std::cout << model_name(*kind) << " fitted on " << data.size() << " rows -> " << o.out << "\n";
        return 0;
    }
    auto const parts = stratified_split(data, SplitSpec{o.test_fraction, o.seed, true});
    auto const model = fit(spec, parts.train);
    auto const eval = evaluate(model, parts.test);
    save_model(model, std::filesystem::path(o.out));
    std::printf("%s fitted on %zu rows, test accuracy %.2f%% -> %s\n", std::string(model_name(*kind)).c_str(),
                parts.train.size(), eval.accuracy, o.out.c_str());
    return 0;
}

HttpServer* g_server = nullptr;

int run_serve(ServeOptions const& o)
{
    auto model = load_model(std::filesystem::path(o.model));
    ChainConfig chain_config;
    chain_config.genesis_timestamp = o.genesis_timestamp;
    ServiceConfig config;
    config.host = o.host;
    config.port = o.port;
    config.chain_path = o.chain;
    config.report_path = o.report;
    if (!o.static_dir.empty()) config.static_dir = o.static_dir;
    config.default_k = o.k;
    config.window = o.window;

    auto chain = open_or_create_chain(config.chain_path, chain_config);
    Service service(std::move(model), std::move(chain), config);
    HttpServer server(service);
    int const port = server.bind(o.host, o.port);
    std::cout << "listening on http://" << o.host << ":" << port << " (chain " << o.chain << ", height "
              << service.ledger().height() << ")" << std::endl;
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    server.listen();
    g_server = nullptr;
    return 0;
}

int run_simulate(SimulateOptions const& o)
{
    auto const data = load_dataset(std::filesystem::path(o.data));
    SimConfig cfg;
    if (o.mode == "replay") {
        cfg.mode = SimMode::Replay;
    } else if (o.mode == "synthetic") {
        cfg.mode = SimMode::Synthetic;
    } else {
        std::cerr << "error: --mode must be replay or synthetic\n";
        return kUsageExit;
    }
    cfg.rate = o.rate;
    cfg.seed = o.seed;
    cfg.devices = o.devices;
    cfg.source = &data;
    auto const wall = std::chrono::system_clock::now().time_since_epoch();
    cfg.start_timestamp = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(wall).count());
    Simulator const sim(cfg);

    std::optional<httplib::Client> client;
    if (!o.dry_run) client.emplace(o.url);
    std::string const path = std::string("/api/v1/ingest?record=") + (o.no_record ? "false" : "true");
    auto const interval = std::chrono::duration<double>(1.0 / o.rate);
    std::uint64_t failures = 0;
    for (std::uint64_t i = 0; i < o.count; ++i) {
        auto const msg = sim.generate(o.start + i);
        auto const body = to_json_text(msg);
        if (o.dry_run) {
            std::cout << body << "\n";
        } else {
            auto const res = client->Post(path, body, "application/json");
            if (!res) {
                std::cerr << "error: cannot reach " << o.url << ": " << httplib::to_string(res.error()) << "\n";
                return 1;
            }
            if (res->status != 200) ++failures;
            std::cout << res->status << " " << res->body << "\n";
        }
        if (!o.no_wait && i + 1 < o.count) std::this_thread::sleep_for(interval);
    }
    return failures == 0 ? 0 : 1;
}

int run_chain_verify(ChainOptions const& o)
{
    try {
        auto const chain = open_chain(std::filesystem::path(o.file));
        std::cout << "ok: " << chain.blocks.size() << " blocks, " << chain.contract_state.size() << " predictions\n";
        return 0;
    } catch (LedgerError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_chain_show(ChainOptions const& o)
{
    auto const chain = open_chain(std::filesystem::path(o.file));
    std::uint64_t const from = o.from_set ? std::min(o.from, chain.height()) : chain.height();
    std::size_t shown = 0;
    for (std::uint64_t n = from + 1; n-- > 0 && shown < o.limit; ++shown) {
        auto const& b = chain.blocks[n];
        std::cout << "block " << b.number << "  ts " << b.timestamp << "  gas " << b.gas_used << "/" << b.gas_limit
                  << "  " << b.transactions.size() << " tx  " << to_hex(b.hash) << "\n";
        for (auto const& tx : b.transactions) {
            auto const rec = decode_add_prediction(tx.data);
            std::cout << "  tx " << to_hex(tx.hash) << " nonce " << tx.nonce << "  addPrediction(" << rec.crop_name
                      << ")\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Crop forecasting with a tamper-evident prediction ledger"};
    app.require_subcommand(1);

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Train and evaluate every classifier, write report files");
    bench_cmd->add_option("--data", bench.data, "Crop recommendation CSV")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--seed", bench.seed, "Split and model seed");
    bench_cmd->add_option("--test-fraction", bench.test_fraction, "Held-out share")->check(CLI::Range(0.0, 1.0));
    bench_cmd->add_flag("--no-stratify", bench.no_stratify, "Plain random split");
    bench_cmd->add_option("--out", bench.out, "Report directory");
    bench_cmd->add_option("--models", bench.models, "Subset of dt,nb,svm,lr,rf,knn,nn");

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Fit one classifier and save it");
    train_cmd->add_option("--data", train.data, "Crop recommendation CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--model", train.model, "dt, nb, svm, lr, rf, knn or nn");
    train_cmd->add_option("--seed", train.seed, "Split and model seed");
    train_cmd->add_option("--test-fraction", train.test_fraction, "Held-out share")->check(CLI::Range(0.0, 1.0));
    train_cmd->add_flag("--all-rows", train.all_rows, "Fit on every row instead of the training split");
    train_cmd->add_option("--out", train.out, "Model file");

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--model", serve.model, "Model file from train")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--chain", serve.chain, "Chain file, created when missing");
    serve_cmd->add_option("--report", serve.report, "Benchmark report served at /api/v1/report");
    serve_cmd->add_option("--static", serve.static_dir, "Directory of console assets")->check(CLI::ExistingDirectory);
    serve_cmd->add_option("--host", serve.host, "Listen address");
    serve_cmd->add_option("--port", serve.port, "Listen port, 0 for any")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--k", serve.k, "Default ranking depth")->check(CLI::PositiveNumber);
    serve_cmd->add_option("--window", serve.window, "Readings averaged per device")->check(CLI::PositiveNumber);
    serve_cmd->add_option("--genesis-timestamp", serve.genesis_timestamp, "Unix time of block 0 for new chains");

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Send simulated sensor messages to a running service");
    sim_cmd->add_option("--data", sim.data, "Source dataset")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--url", sim.url, "Service base URL");
    sim_cmd->add_option("--mode", sim.mode, "replay or synthetic")->check(CLI::IsMember({"replay", "synthetic"}));
    sim_cmd->add_option("--rate", sim.rate, "Messages per second")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--count", sim.count, "Messages to send");
    sim_cmd->add_option("--start", sim.start, "First step");
    sim_cmd->add_option("--seed", sim.seed, "Synthetic seed");
    sim_cmd->add_option("--devices", sim.devices, "Simulated devices")->check(CLI::PositiveNumber);
    sim_cmd->add_flag("--no-record", sim.no_record, "Do not store predictions on chain");
    sim_cmd->add_flag("--no-wait", sim.no_wait, "Send without pacing");
    sim_cmd->add_flag("--dry-run", sim.dry_run, "Print messages instead of sending");

    ChainOptions chain;
    auto* chain_cmd = app.add_subcommand("chain", "Offline chain inspection");
    chain_cmd->require_subcommand(1);
    auto* verify_cmd = chain_cmd->add_subcommand("verify", "Load, replay and verify a chain file");
    verify_cmd->add_option("file", chain.file, "Chain file")->required()->check(CLI::ExistingFile);
    auto* show_cmd = chain_cmd->add_subcommand("show", "Print blocks newest first");
    show_cmd->add_option("file", chain.file, "Chain file")->required()->check(CLI::ExistingFile);
    show_cmd->add_option("--from", chain.from, "Newest block to show")->each([&](std::string const&) {
        chain.from_set = true;
    });
    show_cmd->add_option("--limit", chain.limit, "Blocks to show");

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForAllHelp const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        return kUsageExit;
    }

    try {
        if (*bench_cmd) return run_bench(bench);
        if (*train_cmd) return run_train(train);
        if (*serve_cmd) return run_serve(serve);
        if (*sim_cmd) return run_simulate(sim);
        if (*verify_cmd) return run_chain_verify(chain);
        if (*show_cmd) return run_chain_show(chain);
    } catch (CLI::ValidationError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageExit;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kUsageExit;
}
