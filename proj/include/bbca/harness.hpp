// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/config.hpp"
#include "bbca/explore.hpp"
#include "bbca/simnet.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bbca {

struct Verdict {
    std::string name;
    bool pass = true;
    std::string detail;
    std::size_t checked = 0;
    std::optional<std::uint64_t> event_prefix;  // set on failure
};

/// One committed block in a uniform-delay run, measured in network trips.
struct LatencyRow {
    Digest block;
    BlockKind kind = BlockKind::Data;
    View view = 0;
    NodeId author;
    Rational measured;
    Rational lead;      // hops between the block's send and the proposal it is committed under
    Rational expected;  // 3 + lead
    int reference = 0;      // nominal trips: 3 leader / 4 non-leader
    int certified_dag = 0;  // same block on a round-certified DAG: 6 leader / 12 non-leader
};

struct ViewSyncStats {
    std::size_t views = 0;
    Tick max_certified_spread = 0;  // first entrant driven by a certificate
    Tick max_noadopt_spread = 0;    // first entrant driven by 2f+1 new-view blocks
};

struct RunReport {
    Trace trace;
    std::vector<Verdict> verdicts;
    std::optional<Tick> hop;  // set for uniform-delay runs
    std::vector<LatencyRow> latency;
    ViewSyncStats sync;
    double seconds = 0;

    bool passed() const;
    const Verdict* verdict(const std::string& name) const;
    /// (seed, event prefix) of the earliest failure.
    std::optional<std::uint64_t> witness_prefix() const;
};

/// Checks the selected invariants against a finished trace.
RunReport evaluate(const RunConfig& config, Trace trace);

/// Runs the scenario with the given seed (defaults to the config seed).
RunReport run_scenario(const RunConfig& config, std::optional<std::uint64_t> seed = std::nullopt);

/// Same run, cut after `event_prefix` events. Used to replay witnesses.
Trace replay_prefix(const RunConfig& config, std::uint64_t seed, std::uint64_t event_prefix);

/// Depth-bounded exploration of the configured scenario.
ExploreResult run_explore(const RunConfig& config, std::size_t depth, std::optional<std::size_t> max_leaves);

/// Line-delimited trace export followed by per-node summary records.
std::string trace_export(const Trace& trace);
/// Committed-log export: "position view digest kind author" per line.
std::string log_export(const NodeSummary& node);

nlohmann::json to_json(const RunReport& report, const RunConfig& config);
nlohmann::json to_json(const ExploreResult& result, const RunConfig& config, std::size_t depth);

}  // namespace bbca
