// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/campaign.hpp"

#include <omp.h>

#include <chrono>
#include <exception>

namespace bbca {

const SeedOutcome* CampaignResult::first_failure() const {
    for (const auto& o : outcomes) {
        if (!o.passed) {
            return &o;
        }
    }
    return nullptr;
}

SeedOutcome summarize(const RunReport& report) {
    SeedOutcome o;
    o.seed = report.trace.seed;
    o.trace_digest = report.trace.digest;
    o.sync = report.sync;
    o.events = report.trace.events;
    o.passed = report.passed();
    o.event_prefix = report.witness_prefix();
    for (const auto& v : report.verdicts) {
        if (!v.pass) {
            o.failed.push_back(v.name);
            if (o.first_detail.empty()) {
                o.first_detail = v.detail;
            }
        }
    }
    bool first = true;
    for (const auto* n : report.trace.correct_nodes()) {
        o.min_committed = first ? n->last_committed : std::min(o.min_committed, n->last_committed);
        first = false;
    }
    return o;
}

namespace {

CampaignResult aggregate(std::vector<SeedOutcome> outcomes) {
    CampaignResult r;
    r.count = outcomes.size();
    Sha256Stream combined;
    for (const auto& o : outcomes) {
        combined.update(std::span<const std::uint8_t>(o.trace_digest.bytes));
        r.sync.views += o.sync.views;
        r.sync.max_certified_spread = std::max(r.sync.max_certified_spread, o.sync.max_certified_spread);
        r.sync.max_noadopt_spread = std::max(r.sync.max_noadopt_spread, o.sync.max_noadopt_spread);
        if (!o.passed) {
            ++r.failures;
            for (const auto& name : o.failed) {
                ++r.invariant_failures[name];
            }
        }
    }
    r.combined = combined.finish();
    r.outcomes = std::move(outcomes);
    return r;
}

SeedOutcome run_one(const RunConfig& config, std::uint64_t seed) {
    return summarize(run_scenario(config, seed));
}

}  // namespace

CampaignResult run_campaign_serial(const RunConfig& config, std::size_t count) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SeedOutcome> outcomes;
    outcomes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        outcomes.push_back(run_one(config, config.scenario.seed + i));
    }
    CampaignResult r = aggregate(std::move(outcomes));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

CampaignResult run_campaign(const RunConfig& config, std::size_t count, int jobs) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SeedOutcome> outcomes(count);
    std::exception_ptr error;
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            outcomes[static_cast<std::size_t>(i)] = run_one(config, config.scenario.seed + static_cast<std::uint64_t>(i));
        } catch (...) {
#pragma omp critical
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    CampaignResult r = aggregate(std::move(outcomes));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

nlohmann::json to_json(const CampaignResult& result, const RunConfig& config) {
    using nlohmann::json;
    json j;
    j["verdict"] = result.passed() ? "PASS" : "FAIL";
    j["count"] = result.count;
    j["first_seed"] = config.scenario.seed;
    j["failures"] = result.failures;
    j["invariant_failures"] = result.invariant_failures;
    j["combined_digest"] = result.combined.hex();
    j["runtime_seconds"] = result.seconds;
    if (config.wants("view_sync")) {
        j["view_sync"] = {{"views", result.sync.views},
                          {"max_certified_spread", result.sync.max_certified_spread},
                          {"max_noadopt_spread", result.sync.max_noadopt_spread}};
    }
    if (const auto* f = result.first_failure()) {
        j["witness"] = {{"seed", f->seed},
                        {"event_prefix", f->event_prefix.value_or(f->events)},
                        {"failed", f->failed},
                        {"detail", f->first_detail},
                        {"trace_digest", f->trace_digest.hex()}};
    }
    json seeds = json::array();
    for (const auto& o : result.outcomes) {
        seeds.push_back({{"seed", o.seed},
                         {"verdict", o.passed ? "PASS" : "FAIL"},
                         {"trace_digest", o.trace_digest.hex()},
                         {"min_committed", o.min_committed}});
    }
    j["seeds"] = seeds;
    j["config"] = config.source;
    return j;
}

}  // namespace bbca
