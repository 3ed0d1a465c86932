// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/bbca.hpp"
#include "bbca/simnet.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace bbca {

/// Opaque payload for stand-alone BBCA instances.
struct OpaquePayload {
    Bytes data;
    Digest digest;

    static OpaquePayload of(std::string_view text);
    bool operator==(const OpaquePayload& o) const { return digest == o.digest; }
};

inline Digest message_digest(const OpaquePayload& p) { return p.digest; }

enum class BbcaCase : std::uint8_t {
    CorrectSender,       // node 0 broadcasts one message, everyone correct
    EquivocatingSender,  // node 0 sends INIT for two messages to everyone, echoes and readies both
    Crashed,             // node 0 correct, the last node never acts
    NoAdoptReplay,       // f+1 correct nodes probe first; the last node replays every READY
};

const char* to_string(BbcaCase c);
std::optional<BbcaCase> parse_bbca_case(std::string_view name);

struct ExploreLimits {
    std::size_t depth = 0;
    std::size_t max_leaves = 100'000;
    /// Skip a choice that delivers a message identical to one already tried
    /// at the same choice point.
    bool dedupe = false;
};

struct ExploreViolation {
    std::string property;
    std::string detail;
    std::vector<std::size_t> choices;  // branch indices leading to the leaf
};

struct ExploreResult {
    std::size_t leaves = 0;
    bool partial = false;
    std::size_t max_depth_reached = 0;
    std::map<std::string, std::size_t> checked;  // property -> leaves checked
    std::vector<ExploreViolation> violations;    // first few only
    std::size_t violation_count = 0;
    std::size_t leaves_with_completion = 0;

    bool passed() const { return violation_count == 0; }
};

struct BbcaExploreConfig {
    BbcaCase kind = BbcaCase::CorrectSender;
    std::uint32_t n = 4;
    ExploreLimits limits;
    /// Adds a probe action for every unprobed correct node at each choice point.
    bool probe_choices = false;
};

/// Exhaustive enumeration of delivery orders of one BBCA instance for the
/// first `depth` steps, each leaf finished in FIFO order and audited by
/// probing every correct node.
ExploreResult explore_bbca(const BbcaExploreConfig& config);

/// Same enumeration over a full chain scenario. Any pending event, timers
/// included, may be chosen at each branching step. Leaves are checked for
/// agreement, prefix consistency and per-view completion consistency.
ExploreResult explore_chain(const Scenario& scenario, const ExploreLimits& limits);

}  // namespace bbca
