// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/explore.hpp"
#include "bbca/simnet.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <stdexcept>
#include <string>

namespace bbca {

/// Invariant suites, each individually selectable.
inline const std::vector<std::string>& all_invariants() {
    static const std::vector<std::string> names{
        "validity", "consistency", "integrity",   "complete_adopt",    "agreement",   "prefix",
        "growth",   "censorship",  "view_sync",   "liveness_deadline", "delay_model",
    };
    return names;
}

/// Selected when a config has no "invariants" list.
inline const std::vector<std::string>& default_invariants() {
    static const std::vector<std::string> names{
        "validity", "consistency", "integrity", "complete_adopt", "agreement", "prefix", "view_sync", "delay_model",
    };
    return names;
}

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what) : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct ExploreSettings {
    std::string mode = "chain";  // "chain" or "bbca"
    BbcaCase bbca_case = BbcaCase::CorrectSender;
    bool probe_choices = false;
    bool dedupe = false;
    std::size_t max_leaves = 100'000;
};

struct RunConfig {
    Scenario scenario;
    std::set<std::string> invariants;
    std::optional<Tick> censorship_cutoff;
    ExploreSettings explore;
    nlohmann::json source;  // the parsed document, echoed into reports

    bool wants(const std::string& name) const { return invariants.contains(name); }
};

/// Validates and converts a config document. Throws ConfigError with a
/// JSON-path style field location.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace bbca
