#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

#include "CLI11.hpp"
#include "feeder/gateway/server.hpp"
#include "feeder/harness/config_file.hpp"
#include "feeder/harness/replicates.hpp"
#include "feeder/harness/trials.hpp"

namespace fs = std::filesystem;
using namespace feeder;
using namespace feeder::harness;

namespace {

gateway::GatewayServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

SimConfig load(const std::string& path) { return path.empty() ? default_sim_config() : load_config(path); }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct RunArgs {
    std::string trial;
    std::uint64_t n = 100;
    std::uint64_t days = 30;
    std::uint64_t seed = 1;
    double duration_s = 600.0;
    std::string workload = "idle";
    std::string config;
    std::string out = "feedsim-out";
};

int cmd_run(const RunArgs& a) {
    const SimConfig config = load(a.config);
    TrialRequest req{parse_trial_kind(a.trial), a.n, a.days, a.duration_s, a.workload};
    const TrialOutput result = run_trial(config, req, a.seed);

    fs::create_directories(a.out);
    write_file(fs::path(a.out) / "report.json", report_json(result.report));
    std::ofstream trace(fs::path(a.out) / "trace.ndjson", std::ios::binary);
    for (const auto& r : result.trace) trace << sim::to_ndjson(r) << '\n';
    const std::string summary = summary_text(result.report);
    write_file(fs::path(a.out) / "summary.txt", summary);
    std::cout << summary << "wrote " << a.out << "/{report.json,trace.ndjson,summary.txt}\n";
    return 0;
}

struct SweepArgs {
    RunArgs run;
    std::uint64_t replicates = 8;
    bool serial = false;
};

int cmd_sweep(const SweepArgs& a) {
    const SimConfig config = load(a.run.config);
    TrialRequest req{parse_trial_kind(a.run.trial), a.run.n, a.run.days, a.run.duration_s, a.run.workload};
    std::vector<std::uint64_t> seeds(a.replicates);
    std::iota(seeds.begin(), seeds.end(), a.run.seed);
    const auto reports = a.serial ? run_replicates_serial(config, req, seeds) : run_replicates(config, req, seeds);

    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    std::printf("%-8s %10s %10s %10s %10s %8s\n", "seed", "success", "lat_max", "mean_g", "energy", "missed");
    for (const auto& r : reports) {
        std::printf("%-8llu %4llu/%-5llu %10.0f %10.2f %10.2f %8llu\n", static_cast<unsigned long long>(r.seed),
                    static_cast<unsigned long long>(r.success_count), static_cast<unsigned long long>(r.n),
                    r.latency_ms.max, r.dispense.mean_g, r.energy_mah,
                    static_cast<unsigned long long>(r.missed_feeds));
        all.push_back(to_json(r));
    }
    const auto s = summarize(reports);
    std::printf("success rate mean %.4f [%.4f, %.4f] over %zu replicates\n", s.success_rate_mean, s.success_rate_min,
                s.success_rate_max, s.replicates);
    fs::create_directories(a.run.out);
    write_file(fs::path(a.run.out) / "sweep.json", all.dump(2) + "\n");
    return 0;
}

struct ServeArgs {
    int port = 8080;
    std::string host = "127.0.0.1";
    std::uint64_t seed = 1;
    std::string config;
};

int cmd_serve(const ServeArgs& a) {
    SimConfig config = load(a.config);
    config.world.seed = a.seed;
    gateway::SimSession session(config.world);
    gateway::GatewayServer server(session);
    if (!server.bind(a.host, a.port)) {
        std::cerr << "feedsim: cannot bind " << a.host << ":" << a.port << "\n";
        return 1;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "gateway listening on http://" << a.host << ":" << a.port << " (seed " << a.seed << ")\n"
              << std::flush;
    server.listen_after_bind();
    g_server = nullptr;
    session.shutdown();
    return 0;
}

void add_trial_options(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("trial", a.trial, "sms | dispense | endurance | power")->required();
    cmd->add_option("--n", a.n, "commands or cycles (sms, dispense)")->check(CLI::PositiveNumber);
    cmd->add_option("--days", a.days, "simulated days (endurance)")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "master seed");
    cmd->add_option("--duration", a.duration_s, "seconds (power)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--workload", a.workload, "power workload, e.g. feed@60,status@300");
    cmd->add_option("--config", a.config, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", a.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pet feeder digital twin: trials, sweeps and a live gateway"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run one trial and write report.json, trace.ndjson, summary.txt");
    add_trial_options(run_cmd, run);

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a trial over consecutive seeds in parallel");
    add_trial_options(sweep_cmd, sweep.run);
    sweep_cmd->add_option("--replicates", sweep.replicates, "number of seeds")->check(CLI::PositiveNumber);
    sweep_cmd->add_flag("--serial", sweep.serial, "use the single-threaded reference path");

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "start the HTTP gateway on one live simulation");
    serve_cmd->add_option("--port", serve.port, "TCP port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", serve.host, "bind address");
    serve_cmd->add_option("--seed", serve.seed, "master seed");
    serve_cmd->add_option("--config", serve.config, "key=value config file")->check(CLI::ExistingFile);

    std::string config_path;
    auto* config_cmd = app.add_subcommand("config", "print the effective config and its digest");
    config_cmd->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run);
        if (*sweep_cmd) return cmd_sweep(sweep);
        if (*serve_cmd) return cmd_serve(serve);
        if (*config_cmd) {
            const auto c = load(config_path);
            std::cout << serialize_config(c) << "# digest " << config_digest(c) << "\n";
            return 0;
        }
    } catch (const InvalidConfig& e) {
        std::cerr << "feedsim: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "feedsim: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
