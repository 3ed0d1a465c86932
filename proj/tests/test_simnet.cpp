// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/simnet.hpp"

#include <doctest.h>

#include <algorithm>

using namespace bbca;

namespace {

Scenario uniform(std::uint32_t n, Tick d, View target) {
    Scenario s;
    s.n = n;
    s.delay = DelayModel::uniform(d);
    s.chain.t_max = 10 * d;
    s.target_view = target;
    s.max_ticks = 5000;
    return s;
}

Scenario adversarial(std::uint32_t n, std::uint64_t seed, std::vector<AdversarySpec> adv) {
    Scenario s;
    s.n = n;
    s.seed = seed;
    s.delay = DelayModel{200, 10, 1, PreGstPolicy::Adversarial, 90};
    s.chain.t_max = 40;
    s.adversary = std::move(adv);
    s.max_ticks = 1200;
    for (Tick t = 0; t <= 600; t += 30) {
        s.payloads.push_back(PayloadInjection{NodeId{static_cast<std::uint32_t>(t / 30 % n)}, t});
    }
    return s;
}

}  // namespace

TEST_CASE("rational arithmetic") {
    CHECK(Rational::make(6, 4) == Rational{3, 2});
    CHECK(Rational::make(3, -6) == Rational{-1, 2});
    CHECK(Rational::make(0, 5) == Rational{0, 1});
    CHECK(Rational::make(40, 10).str() == "4");
    CHECK(Rational::make(7, 2).str() == "7/2");
    CHECK_THROWS_AS(Rational::make(1, 0), std::invalid_argument);
}

TEST_CASE("strategy names round-trip") {
    for (auto s : {Strategy::Silent, Strategy::EquivocateInit, Strategy::EquivocateData, Strategy::WithholdReady,
                   Strategy::Replay, Strategy::DelayOwn}) {
        CHECK(parse_strategy(to_string(s)) == s);
    }
    CHECK_FALSE(parse_strategy("byzantine").has_value());
}

TEST_CASE("same seed gives the same trace digest") {
    const auto s = adversarial(4, 99, {AdversarySpec{NodeId{1}, Strategy::EquivocateInit, 0}});
    const auto a = run(s);
    const auto b = run(s);
    CHECK(a.digest == b.digest);
    CHECK(a.events == b.events);
    auto other = s;
    other.seed = 100;
    CHECK(run(other).digest != a.digest);
}

TEST_CASE("trace digest is SHA-256 over the recorded lines") {
    auto s = uniform(4, 10, 3);
    s.record_lines = true;
    const auto t = run(s);
    std::string all;
    for (const auto& line : t.lines) {
        all += line + "\n";
    }
    CHECK(sha256(Bytes(all.begin(), all.end())) == t.digest);
    CHECK(std::count_if(t.lines.begin(), t.lines.end(), [](const std::string& l) { return l.rfind("summary ", 0) == 0; }) == 4);
    s.record_lines = false;
    CHECK(run(s).digest == t.digest);
}

TEST_CASE("uniform delay commits leader blocks in three trips") {
    for (std::uint32_t n : {4u, 7u}) {
        auto s = uniform(n, 10, 5);
        const auto t = run(s);
        REQUIRE_FALSE(t.failed());
        REQUIRE(t.proposals.size() >= 4);
        for (const auto& [view, block] : t.proposals) {
            if (view > 4) {
                continue;
            }
            CHECK(trips_to_commit(t, block, 10) == Rational{3, 1});
        }
    }
}

TEST_CASE("uniform delay commits a data block in four trips when sent ahead of the proposal") {
    auto s = uniform(4, 10, 6);
    // A payload created one hop before the next leader builds its proposal.
    s.payloads.push_back(PayloadInjection{NodeId{0}, 20});
    const auto t = run(s);
    REQUIRE(t.injected.size() == 1);
    CHECK(trips_to_commit(t, t.injected[0].block, 10) == Rational{4, 1});
}

TEST_CASE("silent leader leads to a NO-OP view and byte-identical logs") {
    auto s = uniform(4, 10, 5);
    s.chain.t_max = 50;
    s.adversary.push_back(AdversarySpec{NodeId{1}, Strategy::Silent, 0});
    const auto t = run(s);
    CHECK_FALSE(t.failed());
    const auto correct = t.correct_nodes();
    REQUIRE(correct.size() == 3);
    for (const auto* node : correct) {
        CHECK(std::find(node->noop_views.begin(), node->noop_views.end(), View{1}) != node->noop_views.end());
    }
    const std::size_t k = std::min({correct[0]->log.size(), correct[1]->log.size(), correct[2]->log.size()});
    REQUIRE(k > 1);
    std::vector<Bytes> logs;
    for (const auto* node : correct) {
        logs.push_back(encode_log({node->log.begin(), node->log.begin() + static_cast<std::ptrdiff_t>(k)}));
    }
    CHECK(logs[0] == logs[1]);
    CHECK(logs[1] == logs[2]);
}

TEST_CASE("deliveries respect the delay model") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto s = adversarial(4, seed, {AdversarySpec{NodeId{2}, Strategy::Replay, 0}});
        s.record_lines = true;
        const auto t = run(s);
        for (const auto& v : t.violations) {
            CHECK_MESSAGE(v.invariant != "delay_model", v.detail);
        }
    }
}

TEST_CASE("drop-until-GST holds everything until GST") {
    Scenario s;
    s.n = 4;
    s.delay = DelayModel{300, 10, 1, PreGstPolicy::DropUntilGst, 0};
    s.chain.t_max = 40;
    s.max_ticks = 900;
    const auto t = run(s);
    CHECK_FALSE(t.failed());
    for (const auto* node : t.correct_nodes()) {
        for (const auto& e : node->log) {
            if (e.view > 0) {
                CHECK(e.tick >= 300);
            }
        }
        CHECK(node->last_committed > 0);
    }
}

TEST_CASE("adversaries within f keep safety across seeds") {
    const std::vector<Strategy> strategies{Strategy::Silent, Strategy::EquivocateInit, Strategy::EquivocateData,
                                           Strategy::WithholdReady, Strategy::Replay, Strategy::DelayOwn};
    for (auto strategy : strategies) {
        for (std::uint64_t seed = 1; seed <= 15; ++seed) {
            const auto t = run(adversarial(4, seed, {AdversarySpec{NodeId{1}, strategy, 60}}));
            CHECK_MESSAGE(!t.failed(), to_string(strategy), " seed ", seed, ": ",
                          t.failed() ? t.violations.front().detail : "");
            for (const auto* node : t.correct_nodes()) {
                CHECK(node->last_committed > 2);
            }
        }
    }
}

TEST_CASE("max_events stops the run") {
    auto s = uniform(4, 10, 0);
    s.max_events = 50;
    const auto t = run(s);
    CHECK(t.events == 50);
    CHECK(t.stop_reason == "max_events");
}

TEST_CASE("node counts between 3f+1 steps stay safe") {
    for (std::uint32_t n : {5u, 6u}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto t = run(adversarial(n, seed, {AdversarySpec{NodeId{1}, Strategy::EquivocateInit, 0}}));
            CHECK_MESSAGE(!t.failed(), "n=", n, " seed ", seed);
            for (const auto* node : t.correct_nodes()) {
                CHECK(node->last_committed > 2);
            }
        }
    }
}
