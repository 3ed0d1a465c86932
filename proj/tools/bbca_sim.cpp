// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

// bbca_sim: run, campaign and explore BBCA-Chain scenarios.
// Exit codes: 0 all invariants pass, 1 violation, 2 usage or config error.

#include "bbca/campaign.hpp"
#include "bbca/config.hpp"
#include "bbca/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw bbca::ConfigError("--out", "cannot write " + path);
    }
    out << text << "\n";
}

int cmd_run(const std::string& config_path, const std::string& out, const std::string& trace_path,
            const std::string& logs_path) {
    auto config = bbca::load_config(config_path);
    if (!trace_path.empty()) {
        config.scenario.record_lines = true;
    }
    const auto report = bbca::run_scenario(config);
    write_out(out, bbca::to_json(report, config).dump(2));
    if (!trace_path.empty()) {
        std::ofstream t(trace_path);
        t << bbca::trace_export(report.trace);
    }
    if (!logs_path.empty()) {
        std::ofstream l(logs_path);
        for (const auto& node : report.trace.nodes) {
            l << "# node " << node.id.index << " " << bbca::to_string(node.strategy) << "\n" << bbca::log_export(node);
        }
    }
    std::cerr << (report.passed() ? "PASS" : "FAIL") << " seed=" << report.trace.seed
              << " digest=" << report.trace.digest.hex() << "\n";
    for (const auto& v : report.verdicts) {
        std::cerr << "  " << (v.pass ? "PASS " : "FAIL ") << v.name;
        if (!v.pass) {
            std::cerr << ": " << v.detail << " (event prefix " << v.event_prefix.value_or(0) << ")";
        }
        std::cerr << "\n";
    }
    return report.passed() ? kPass : kViolation;
}

int cmd_campaign(const std::string& config_path, std::size_t count, int jobs, const std::string& out) {
    const auto config = bbca::load_config(config_path);
    const auto result = bbca::run_campaign(config, count, jobs);
    write_out(out, bbca::to_json(result, config).dump(2));
    std::cerr << (result.passed() ? "PASS" : "FAIL") << " " << result.count - result.failures << "/" << result.count
              << " seeds passed, combined digest " << result.combined.hex() << "\n";
    if (const auto* f = result.first_failure()) {
        std::cerr << "  witness seed=" << f->seed << " event_prefix=" << f->event_prefix.value_or(f->events) << ": "
                  << f->first_detail << "\n";
    }
    return result.passed() ? kPass : kViolation;
}

int cmd_explore(const std::string& config_path, std::size_t depth, std::optional<std::size_t> max_leaves,
                const std::string& out) {
    const auto config = bbca::load_config(config_path);
    const auto result = bbca::run_explore(config, depth, max_leaves);
    write_out(out, bbca::to_json(result, config, depth).dump(2));
    std::cerr << (result.passed() ? "PASS" : "FAIL") << " " << result.leaves << " leaves"
              << (result.partial ? " (partial: leaf cap reached)" : "") << "\n";
    return result.passed() ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BBCA-Chain simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::string trace_path;
    std::string logs_path;
    std::size_t count = 1;
    int jobs = 0;
    std::size_t depth = 0;
    std::optional<std::size_t> max_leaves;

    auto* run = app.add_subcommand("run", "Run one scenario and write a report");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required();
    run->add_option("--out", out, "Report path (default stdout)");
    run->add_option("--trace", trace_path, "Write the line-delimited trace here");
    run->add_option("--logs", logs_path, "Write committed logs of all nodes here");

    auto* campaign = app.add_subcommand("campaign", "Run seeds seed..seed+count-1");
    campaign->add_option("--config", config_path, "Scenario config (JSON)")->required();
    campaign->add_option("--count", count, "Number of seeds")->required()->check(CLI::PositiveNumber);
    campaign->add_option("--jobs", jobs, "Parallel runs (default: all cores)")->check(CLI::NonNegativeNumber);
    campaign->add_option("--out", out, "Report path (default stdout)");

    auto* explore = app.add_subcommand("explore", "Enumerate delivery orders up to a depth");
    explore->add_option("--config", config_path, "Scenario config (JSON)")->required();
    explore->add_option("--depth", depth, "Branching steps")->required();
    explore->add_option("--max-leaves", max_leaves, "Leaf cap");
    explore->add_option("--out", out, "Report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config_path, out, trace_path, logs_path);
        }
        if (campaign->parsed()) {
            return cmd_campaign(config_path, count, jobs, out);
        }
        return cmd_explore(config_path, depth, max_leaves, out);
    } catch (const bbca::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    }
}
