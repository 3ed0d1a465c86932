// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/harness.hpp"

#include <doctest.h>

#include <sstream>

using namespace bbca;
using nlohmann::json;

namespace {

RunConfig load(const std::string& name) { return load_config(std::string(BBCA_CONFIG_DIR) + "/" + name); }

RunConfig all_checks(RunConfig cfg) {
    cfg.invariants = {all_invariants().begin(), all_invariants().end()};
    if (!cfg.censorship_cutoff) {
        cfg.censorship_cutoff = 0;
    }
    return cfg;
}

const Verdict& verdict(const RunReport& r, const std::string& name) {
    const auto* v = r.verdict(name);
    REQUIRE(v != nullptr);
    return *v;
}

}  // namespace

TEST_CASE("failure-free config passes every selected check") {
    const auto cfg = load("failure_free.json");
    const auto r = run_scenario(cfg);
    CHECK(r.passed());
    CHECK(r.verdicts.size() == cfg.invariants.size());
    for (const auto& v : r.verdicts) {
        CHECK_MESSAGE(v.pass, v.name, ": ", v.detail);
    }
    CHECK(r.hop == Tick{10});
}

TEST_CASE("latency table reports three and four trips") {
    const auto r = run_scenario(load("failure_free.json"));
    REQUIRE_FALSE(r.latency.empty());
    bool saw_data = false;
    for (const auto& row : r.latency) {
        CHECK(row.measured == row.expected);
        if (row.kind == BlockKind::Backbone) {
            CHECK(row.measured == Rational{3, 1});
            CHECK(row.reference == 3);
            CHECK(row.certified_dag == 6);
        } else if (row.lead == Rational{1, 1}) {
            saw_data = true;
            CHECK(row.measured == Rational{4, 1});
            CHECK(row.reference == 4);
            CHECK(row.certified_dag == 12);
        }
    }
    CHECK(saw_data);
}

TEST_CASE("checkers catch hand-corrupted traces") {
    const auto cfg = all_checks(load("failure_free.json"));
    const auto clean = run_scenario(cfg);
    REQUIRE(clean.passed());
    const Trace& base = clean.trace;

    SUBCASE("prefix and agreement") {
        Trace t = base;
        auto& log = t.nodes[2].log;
        auto it = std::find_if(log.begin(), log.end(),
                               [](const CommittedEntry& e) { return e.kind == BlockKind::Backbone && e.view == 2; });
        REQUIRE(it != log.end());
        it->digest.bytes[0] ^= 1;
        const auto r = evaluate(cfg, t);
        CHECK_FALSE(verdict(r, "prefix").pass);
        CHECK(verdict(r, "agreement").pass);
        CHECK(verdict(r, "consistency").pass);
        t.nodes[2].finalized.at(2) = it->digest;
        CHECK_FALSE(verdict(evaluate(cfg, t), "agreement").pass);
        t.nodes[2].finalized.at(2) = std::nullopt;
        CHECK_FALSE(verdict(evaluate(cfg, t), "agreement").pass);
    }
    SUBCASE("consistency") {
        Trace t = base;
        REQUIRE(t.nodes[3].completions.contains(1));
        t.nodes[3].completions[1].bytes[5] ^= 1;
        CHECK_FALSE(verdict(evaluate(cfg, t), "consistency").pass);
    }
    SUBCASE("complete_adopt") {
        Trace t = base;
        std::erase_if(t.probes, [](const ProbeRecord& p) { return p.view == 2; });
        CHECK_FALSE(verdict(evaluate(cfg, t), "complete_adopt").pass);
    }
    SUBCASE("validity") {
        Trace t = base;
        for (auto& n : t.nodes) {
            n.completions.erase(2);
        }
        CHECK_FALSE(verdict(evaluate(cfg, t), "validity").pass);
    }
    SUBCASE("censorship") {
        Trace t = base;
        RunConfig strict = cfg;
        strict.censorship_cutoff = 1000;
        t.injected.push_back(InjectedPayload{NodeId{0}, 30, sha256(Bytes{1})});
        CHECK_FALSE(verdict(evaluate(strict, t), "censorship").pass);
    }
    SUBCASE("view_sync") {
        Trace t = base;
        t.nodes[1].entries[3].tick += 500;
        CHECK_FALSE(verdict(evaluate(cfg, t), "view_sync").pass);
    }
    SUBCASE("growth") {
        Trace t = base;
        t.nodes[0].log.resize(1);
        t.nodes[0].log[0].tick = 0;
        t.delay.gst = 1;
        CHECK_FALSE(verdict(evaluate(cfg, t), "growth").pass);
    }
    SUBCASE("online violations carry the event prefix") {
        Trace t = base;
        t.violations.push_back(Violation{"delay_model", "late", 17, 3});
        const auto r = evaluate(cfg, t);
        CHECK_FALSE(verdict(r, "delay_model").pass);
        CHECK(verdict(r, "delay_model").event_prefix == 17u);
        CHECK(r.witness_prefix() == 17u);
    }
}

TEST_CASE("liveness after GST with held messages") {
    const auto r = run_scenario(load("liveness_after_gst.json"));
    for (const auto& v : r.verdicts) {
        CHECK_MESSAGE(v.pass, v.name, ": ", v.detail);
    }
    CHECK(verdict(r, "liveness_deadline").checked > 0);
}

TEST_CASE("replay_prefix reproduces the run up to the cut") {
    auto cfg = load("equivocating_leader.json");
    cfg.scenario.record_lines = true;
    const auto full = run_scenario(cfg);
    const auto cut = replay_prefix(cfg, cfg.scenario.seed, 200);
    CHECK(cut.events == 200);
    REQUIRE(cut.lines.size() >= 200);
    for (std::size_t i = 0; i < 150; ++i) {
        CHECK(cut.lines[i] == full.trace.lines[i]);
    }
}

TEST_CASE("exports and reports") {
    auto cfg = load("silent_leader.json");
    cfg.scenario.record_lines = true;
    const auto r = run_scenario(cfg);
    const auto text = trace_export(r.trace);
    CHECK(text.find("summary 0 correct") != std::string::npos);
    CHECK(text.find("summary 1 silent") != std::string::npos);

    const auto& node = r.trace.nodes[0];
    std::istringstream lines(log_export(node));
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::uint64_t pos = 0;
        View view = 0;
        std::string digest;
        std::string kind;
        std::uint32_t author = 0;
        fields >> pos >> view >> digest >> kind >> author;
        CHECK(pos == node.log[count].position);
        CHECK(digest == node.log[count].digest.hex());
        CHECK(kind == to_string(node.log[count].kind));
        ++count;
    }
    CHECK(count == node.log.size());

    const json j = to_json(r, cfg);
    CHECK(j.at("verdict") == "PASS");
    CHECK(j.at("trace_digest") == r.trace.digest.hex());
    CHECK(j.contains("invariants"));
}

// An equivocating leader keeps building on its own losing proposal, so that
// block can enter every log as a plain ancestor after its view was
// finalized with the twin. Agreement must follow the finalized view, not
// whichever backbone block of that view appears in the log.
TEST_CASE("losing equivocation twin in the log is not a disagreement") {
    const json doc{{"n", 4},
                   {"seed", 28},
                   {"network",
                    {{"gst", 200}, {"delta_post", 10}, {"min_delay", 1}, {"pre_gst", {{"policy", "adversarial"}, {"bound", 90}}}}},
                   {"t_max", 40},
                   {"stop", {{"max_ticks", 1000}}},
                   {"adversary", {{{"node", 1}, {"strategy", "equivocate_init"}}}},
                   {"payload_stream", {{"every", 30}, {"until", 600}}}};
    const auto r = run_scenario(parse_config(doc));
    for (const auto& v : r.verdicts) {
        CHECK_MESSAGE(v.pass, v.name, ": ", v.detail);
    }
    std::size_t stray = 0;
    for (const auto* node : r.trace.correct_nodes()) {
        for (const auto& e : node->log) {
            if (e.kind == BlockKind::Backbone && e.view > 0 && node->finalized.contains(e.view) &&
                node->finalized.at(e.view) != e.digest) {
                ++stray;
            }
        }
    }
    CHECK(stray > 0);
}
