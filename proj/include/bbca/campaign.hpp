// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/harness.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bbca {

/// Compact per-seed result kept by campaigns.
struct SeedOutcome {
    std::uint64_t seed = 0;
    Digest trace_digest;
    bool passed = true;
    std::vector<std::string> failed;
    std::optional<std::uint64_t> event_prefix;
    std::string first_detail;
    ViewSyncStats sync;
    std::uint64_t events = 0;
    View min_committed = 0;

    bool operator==(const SeedOutcome& o) const {
        return seed == o.seed && trace_digest == o.trace_digest && passed == o.passed && failed == o.failed &&
               event_prefix == o.event_prefix;
    }
};

struct CampaignResult {
    std::size_t count = 0;
    std::size_t failures = 0;
    std::vector<SeedOutcome> outcomes;  // in seed order
    std::map<std::string, std::size_t> invariant_failures;
    ViewSyncStats sync;
    Digest combined;  // SHA-256 over the trace digests in seed order
    double seconds = 0;

    bool passed() const { return failures == 0; }
    const SeedOutcome* first_failure() const;
};

SeedOutcome summarize(const RunReport& report);

/// Runs seeds config.seed + i for i in [0, count), `jobs` at a time.
/// jobs <= 0 uses the OpenMP default.
CampaignResult run_campaign(const RunConfig& config, std::size_t count, int jobs);

/// Single-threaded reference with the same output.
CampaignResult run_campaign_serial(const RunConfig& config, std::size_t count);

nlohmann::json to_json(const CampaignResult& result, const RunConfig& config);

}  // namespace bbca
