// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace bbca;
using nlohmann::json;

namespace {

std::string error_path(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
    const auto cfg = parse_config(json{{"n", 4}});
    CHECK(cfg.scenario.n == 4);
    CHECK(cfg.scenario.seed == 1);
    CHECK(cfg.scenario.params().f == 1);
    CHECK(cfg.scenario.chain.t_max == 100);
    CHECK(cfg.scenario.delay.delta_post == 10);
    CHECK(cfg.scenario.delay.min_delay == 10);
    CHECK(cfg.invariants.size() == default_invariants().size());
    CHECK(cfg.wants("agreement"));
    CHECK_FALSE(cfg.wants("censorship"));
    CHECK(cfg.scenario.probe_audit);
    const auto slow = parse_config(json{{"n", 4}, {"network", {{"delta_post", 25}}}});
    CHECK(slow.scenario.chain.t_max == 250);
}

TEST_CASE("errors name the offending field") {
    CHECK(error_path(json::array()) == "$");
    CHECK(error_path(json::object()) == "$.n");
    CHECK(error_path(json{{"n", 0}}) == "$.n");
    CHECK(error_path(json{{"n", -3}}) == "$.n");
    CHECK(error_path(json{{"n", 4}, {"bogus", 1}}) == "$.bogus");
    CHECK(error_path(json{{"n", 4}, {"f", 1}}) == "$.f");
    CHECK(error_path(json{{"n", 4}, {"network", {{"pre_gst", {{"policy", "chaos"}}}}}}) == "$.network.pre_gst.policy");
    CHECK(error_path(json{{"n", 4}, {"adversary", {{{"node", 4}, {"strategy", "silent"}}}}}) == "$.adversary[0].node");
    CHECK(error_path(json{{"n", 4}, {"adversary", {{{"node", 1}, {"strategy", "evil"}}}}}) ==
          "$.adversary[0].strategy");
    CHECK(error_path(json{{"n", 7},
                          {"adversary", {{{"node", 1}, {"strategy", "silent"}}, {{"node", 1}, {"strategy", "replay"}}}}}) ==
          "$.adversary[1].node");
    CHECK(error_path(json{{"n", 4}, {"invariants", {"agreement", "liveliness"}}}) == "$.invariants[1]");
    CHECK(error_path(json{{"n", 4}, {"invariants", {"censorship"}}}) == "$.censorship_cutoff");
    CHECK(error_path(json{{"n", 4}, {"explore", {{"mode", "bbca"}, {"case", "weird"}}}}) == "$.explore.case");
    CHECK(error_path(json{{"n", 4}, {"stop", {{"max_ticks", 0}}}}) == "$.stop.max_ticks");
    CHECK(error_path(json{{"n", 4}, {"trace", {{"record_lines", "yes"}}}}) == "$.trace.record_lines");
}

TEST_CASE("more than f byzantine nodes is rejected") {
    const json two{{"n", 4},
                   {"adversary", {{{"node", 1}, {"strategy", "silent"}}, {{"node", 2}, {"strategy", "replay"}}}}};
    try {
        parse_config(two);
        FAIL("accepted f + 1 byzantine nodes");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "$.adversary");
        CHECK(std::string(e.what()) == "$.adversary: 2 byzantine nodes exceed f = 1 for n = 4");
    }
    json seven = two;
    seven["n"] = 7;
    CHECK_NOTHROW(parse_config(seven));
    CHECK_THROWS_AS(load_config(std::string(BBCA_CONFIG_DIR) + "/invalid_too_many_byzantine.json"), ConfigError);
}

TEST_CASE("payload stream rotates authors") {
    const auto cfg = parse_config(json{{"n", 4}, {"payload_stream", {{"every", 10}, {"until", 50}}}});
    const auto& p = cfg.scenario.payloads;
    REQUIRE(p.size() == 5);
    for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(p[k].tick == 10 * (k + 1));
        CHECK(p[k].node.index == k % 4);
    }
}

TEST_CASE("shipped configs parse") {
    std::size_t parsed = 0;
    for (const auto& entry : std::filesystem::directory_iterator(BBCA_CONFIG_DIR)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("invalid_", 0) == 0) {
            continue;
        }
        CHECK_NOTHROW(load_config(entry.path().string()));
        ++parsed;
    }
    CHECK(parsed >= 10);
}

TEST_CASE("unreadable and malformed files are config errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
    const auto tmp = std::filesystem::temp_directory_path() / "bbca_bad_config.json";
    {
        std::ofstream out(tmp);
        out << "{ \"n\": ";
    }
    CHECK_THROWS_AS(load_config(tmp.string()), ConfigError);
    std::filesystem::remove(tmp);
}
