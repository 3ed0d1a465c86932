// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/harness.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace bbca {

bool RunReport::passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Verdict* RunReport::verdict(const std::string& name) const {
    for (const auto& v : verdicts) {
        if (v.name == name) {
            return &v;
        }
    }
    return nullptr;
}

std::optional<std::uint64_t> RunReport::witness_prefix() const {
    std::optional<std::uint64_t> out;
    for (const auto& v : verdicts) {
        if (!v.pass && v.event_prefix) {
            out = out ? std::min(*out, *v.event_prefix) : *v.event_prefix;
        }
    }
    return out;
}

namespace {

bool certificate_driven(EntryCause c) {
    return c == EntryCause::Completion || c == EntryCause::CompleteCert || c == EntryCause::AdoptCert ||
           c == EntryCause::ProbeAdopt;
}

class Checker {
public:
    Checker(const RunConfig& config, const Trace& trace)
        : config_(config), trace_(trace), correct_(trace.correct_nodes()) {}

    Verdict start(const std::string& name) {
        Verdict v;
        v.name = name;
        for (const auto& viol : trace_.violations) {
            if (viol.invariant == name) {
                fail(v, viol.detail, viol.event_index);
            }
        }
        return v;
    }

    void fail(Verdict& v, const std::string& detail, std::optional<std::uint64_t> at = std::nullopt) {
        const std::uint64_t prefix = at.value_or(trace_.events);
        if (v.pass || (v.event_prefix && prefix < *v.event_prefix)) {
            v.detail = detail;
            v.event_prefix = prefix;
        }
        v.pass = false;
    }

    Verdict agreement() {
        Verdict v = start("agreement");
        for (std::size_t a = 0; a < correct_.size(); ++a) {
            for (std::size_t b = a + 1; b < correct_.size(); ++b) {
                const auto& fa = correct_[a]->finalized;
                const auto& fb = correct_[b]->finalized;
                const View upto = std::min(correct_[a]->last_committed, correct_[b]->last_committed);
                for (View w = 1; w <= upto; ++w) {
                    ++v.checked;
                    const auto ia = fa.find(w);
                    const auto ib = fb.find(w);
                    if (ia == fa.end() || ib == fb.end()) {
                        fail(v, "view " + std::to_string(w) + " is committed but has no finalized entry");
                    } else if (ia->second != ib->second) {
                        fail(v, "nodes " + std::to_string(correct_[a]->id.index) + " and " +
                                    std::to_string(correct_[b]->id.index) + " disagree on view " + std::to_string(w));
                    }
                }
            }
        }
        return v;
    }

    Verdict prefix() {
        Verdict v = start("prefix");
        for (std::size_t a = 0; a < correct_.size(); ++a) {
            for (std::size_t b = a + 1; b < correct_.size(); ++b) {
                const auto& la = correct_[a]->log;
                const auto& lb = correct_[b]->log;
                const std::size_t k = std::min(la.size(), lb.size());
                for (std::size_t i = 0; i < k; ++i) {
                    ++v.checked;
                    if (la[i].digest != lb[i].digest) {
                        fail(v, "logs of nodes " + std::to_string(correct_[a]->id.index) + " and " +
                                    std::to_string(correct_[b]->id.index) + " diverge at position " +
                                    std::to_string(i));
                        break;
                    }
                }
            }
        }
        return v;
    }

    Verdict consistency() {
        Verdict v = start("consistency");
        std::map<View, Digest> decided;
        for (const auto* node : correct_) {
            for (const auto& [w, d] : node->completions) {
                ++v.checked;
                auto [it, inserted] = decided.emplace(w, d);
                if (!inserted && it->second != d) {
                    fail(v, "view " + std::to_string(w) + " completed with different blocks");
                }
            }
        }
        for (const auto& p : trace_.probes) {
            if (!p.adopt) {
                continue;
            }
            ++v.checked;
            auto it = decided.find(p.view);
            if (it != decided.end() && it->second != p.message) {
                fail(v, "node " + std::to_string(p.node.index) + " adopted a block other than the completed one in view " +
                            std::to_string(p.view));
            }
        }
        return v;
    }

    Verdict integrity() {
        Verdict v = start("integrity");
        for (const auto* node : correct_) {
            v.checked += node->completions.size();
        }
        return v;
    }

    Verdict validity() {
        Verdict v = start("validity");
        const Tick gst = trace_.delay.gst;
        const Tick d = trace_.delay.delta_post;
        for (const auto& [w, block] : trace_.proposals) {
            const Tick sent = trace_.send_time.at(block);
            // Events at end_tick may be only partly processed.
            if (sent < gst || sent + 3 * d >= trace_.end_tick) {
                continue;
            }
            const bool probed = std::any_of(correct_.begin(), correct_.end(),
                                            [&, w = w](const NodeSummary* n) { return n->aborted.contains(w); });
            if (probed) {
                continue;
            }
            for (const auto* node : correct_) {
                ++v.checked;
                auto it = node->completions.find(w);
                if (it == node->completions.end() || it->second != block) {
                    fail(v, "node " + std::to_string(node->id.index) + " did not complete the proposal of view " +
                                std::to_string(w));
                }
            }
        }
        return v;
    }

    Verdict complete_adopt() {
        Verdict v = start("complete_adopt");
        std::map<View, Digest> completed;
        for (const auto* node : correct_) {
            for (const auto& [w, d] : node->completions) {
                completed.emplace(w, d);
            }
        }
        for (const auto& [w, d] : completed) {
            ++v.checked;
            std::set<std::uint32_t> adopters;
            for (const auto& p : trace_.probes) {
                if (p.view == w && p.adopt && p.message == d) {
                    adopters.insert(p.node.index);
                }
            }
            if (adopters.size() < trace_.f + 1) {
                fail(v, "view " + std::to_string(w) + " completed but only " + std::to_string(adopters.size()) +
                            " correct probes adopted it");
            }
        }
        return v;
    }

    Verdict growth() {
        Verdict v = start("growth");
        for (const auto* node : correct_) {
            ++v.checked;
            const bool grew = std::any_of(node->log.begin(), node->log.end(),
                                          [&](const CommittedEntry& e) { return e.tick >= trace_.delay.gst; });
            if (!grew) {
                fail(v, "node " + std::to_string(node->id.index) + " committed nothing after GST");
            } else if (config_.scenario.target_view > 0 && node->last_committed < config_.scenario.target_view) {
                fail(v, "node " + std::to_string(node->id.index) + " stopped at view " +
                            std::to_string(node->last_committed));
            }
        }
        return v;
    }

    Verdict censorship() {
        Verdict v = start("censorship");
        const Tick cutoff = config_.censorship_cutoff.value_or(0);
        for (const auto& inj : trace_.injected) {
            if (inj.tick > cutoff) {
                continue;
            }
            for (const auto* node : correct_) {
                ++v.checked;
                const bool found = std::any_of(node->log.begin(), node->log.end(),
                                               [&](const CommittedEntry& e) { return e.digest == inj.block; });
                if (!found) {
                    fail(v, "payload injected by node " + std::to_string(inj.node.index) + " at tick " +
                                std::to_string(inj.tick) + " not committed by node " +
                                std::to_string(node->id.index));
                }
            }
        }
        return v;
    }

    Verdict view_sync(ViewSyncStats& stats) {
        Verdict v = start("view_sync");
        const Tick gst = trace_.delay.gst;
        const Tick d = trace_.delay.delta_post;
        View top = 0;
        for (const auto* node : correct_) {
            if (!node->entries.empty()) {
                top = std::max(top, node->entries.rbegin()->first);
            }
        }
        for (View w = 1; w <= top; ++w) {
            // First time each correct node reached a view >= w.
            std::optional<Tick> first;
            bool certified = false;
            std::vector<std::optional<Tick>> reach;
            for (const auto* node : correct_) {
                auto it = node->entries.lower_bound(w);
                if (it == node->entries.end()) {
                    reach.push_back(std::nullopt);
                    continue;
                }
                Tick t = it->second.tick;
                EntryCause cause = it->second.cause;
                for (auto j = it; j != node->entries.end(); ++j) {
                    if (j->second.tick < t) {
                        t = j->second.tick;
                        cause = j->second.cause;
                    }
                }
                reach.push_back(t);
                if (!first || t < *first) {
                    first = t;
                    certified = certificate_driven(cause);
                } else if (t == *first) {
                    certified = certified || certificate_driven(cause);
                }
            }
            if (!first || *first < gst) {
                continue;
            }
            ++stats.views;
            const Tick bound = certified ? d : 2 * d;
            for (std::size_t i = 0; i < correct_.size(); ++i) {
                ++v.checked;
                if (!reach[i]) {
                    if (trace_.end_tick > *first + bound) {
                        fail(v, "node " + std::to_string(correct_[i]->id.index) + " never reached view " +
                                    std::to_string(w));
                    }
                    continue;
                }
                const Tick spread = *reach[i] - *first;
                Tick& slot = certified ? stats.max_certified_spread : stats.max_noadopt_spread;
                slot = std::max(slot, spread);
                if (spread > bound) {
                    fail(v, "node " + std::to_string(correct_[i]->id.index) + " entered view " + std::to_string(w) +
                                " " + std::to_string(spread) + " ticks after the first entrant (bound " +
                                std::to_string(bound) + ")");
                }
            }
        }
        return v;
    }

    Verdict liveness_deadline() {
        Verdict v = start("liveness_deadline");
        const Tick gst = trace_.delay.gst;
        const Tick deadline = gst + trace_.t_max + 4 * trace_.delay.delta_post;
        const SystemParams params = SystemParams::for_nodes(trace_.n);
        std::optional<View> target;
        for (const auto* node : correct_) {
            for (const auto& [w, e] : node->entries) {
                if (e.tick >= gst && get_proposer(w, params) == node->id && (!target || w < *target)) {
                    target = w;
                }
            }
        }
        if (!target) {
            fail(v, "no correct leader entered a view after GST");
            return v;
        }
        const NodeId leader = get_proposer(*target, params);
        for (const auto* node : correct_) {
            ++v.checked;
            auto it = std::find_if(node->log.begin(), node->log.end(), [&](const CommittedEntry& e) {
                return e.kind == BlockKind::Backbone && e.view == *target && e.author == leader;
            });
            if (it == node->log.end()) {
                fail(v, "node " + std::to_string(node->id.index) + " never committed the view " +
                            std::to_string(*target) + " proposal");
            } else if (it->tick > deadline) {
                fail(v, "node " + std::to_string(node->id.index) + " committed view " + std::to_string(*target) +
                            " at tick " + std::to_string(it->tick) + ", deadline " + std::to_string(deadline));
            }
        }
        if (v.pass) {
            v.detail = "view " + std::to_string(*target) + " committed by tick " + std::to_string(deadline);
        }
        return v;
    }

    Verdict delay_model() {
        Verdict v = start("delay_model");
        v.checked = trace_.events;
        return v;
    }

private:
    const RunConfig& config_;
    const Trace& trace_;
    std::vector<const NodeSummary*> correct_;
};

std::vector<LatencyRow> latency_table(const Trace& trace, Tick hop) {
    std::vector<LatencyRow> rows;
    const auto correct = trace.correct_nodes();
    if (correct.empty()) {
        return rows;
    }
    const auto& log = correct.front()->log;
    std::set<Digest> proposals;
    for (const auto& [w, d] : trace.proposals) {
        proposals.insert(d);
    }
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& e = log[i];
        const bool leader = e.kind == BlockKind::Backbone && proposals.contains(e.digest);
        const bool data = e.kind == BlockKind::Data && trace.send_time.contains(e.digest);
        if (!leader && !data) {
            continue;
        }
        auto under = std::find_if(log.begin() + static_cast<std::ptrdiff_t>(i), log.end(),
                                  [](const CommittedEntry& x) { return x.kind == BlockKind::Backbone; });
        if (under == log.end() || !trace.send_time.contains(under->digest)) {
            continue;
        }
        LatencyRow row;
        row.block = e.digest;
        row.kind = e.kind;
        row.view = e.view;
        row.author = e.author;
        try {
            row.measured = trips_to_commit(trace, e.digest, hop);
        } catch (const std::invalid_argument&) {
            continue;
        }
        const auto sent = static_cast<std::int64_t>(trace.send_time.at(e.digest));
        const auto proposal = static_cast<std::int64_t>(trace.send_time.at(under->digest));
        row.lead = Rational::make(proposal - sent, static_cast<std::int64_t>(hop));
        row.expected = Rational::make(3 * row.lead.den + row.lead.num, row.lead.den);
        row.reference = leader ? 3 : 4;
        row.certified_dag = leader ? 6 : 12;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

RunReport evaluate(const RunConfig& config, Trace trace) {
    RunReport report;
    report.trace = std::move(trace);
    Checker c(config, report.trace);
    for (const auto& name : all_invariants()) {
        if (!config.wants(name)) {
            continue;
        }
        if (name == "validity") {
            report.verdicts.push_back(c.validity());
        } else if (name == "consistency") {
            report.verdicts.push_back(c.consistency());
        } else if (name == "integrity") {
            report.verdicts.push_back(c.integrity());
        } else if (name == "complete_adopt") {
            report.verdicts.push_back(c.complete_adopt());
        } else if (name == "agreement") {
            report.verdicts.push_back(c.agreement());
        } else if (name == "prefix") {
            report.verdicts.push_back(c.prefix());
        } else if (name == "growth") {
            report.verdicts.push_back(c.growth());
        } else if (name == "censorship") {
            report.verdicts.push_back(c.censorship());
        } else if (name == "view_sync") {
            report.verdicts.push_back(c.view_sync(report.sync));
        } else if (name == "liveness_deadline") {
            report.verdicts.push_back(c.liveness_deadline());
        } else if (name == "delay_model") {
            report.verdicts.push_back(c.delay_model());
        }
    }
    const auto& d = report.trace.delay;
    if (d.gst == 0 && d.min_delay == d.delta_post) {
        report.hop = d.delta_post;
        report.latency = latency_table(report.trace, d.delta_post);
    }
    return report;
}

RunReport run_scenario(const RunConfig& config, std::optional<std::uint64_t> seed) {
    const auto t0 = std::chrono::steady_clock::now();
    Scenario s = config.scenario;
    if (seed) {
        s.seed = *seed;
    }
    RunReport report = evaluate(config, run(s));
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

Trace replay_prefix(const RunConfig& config, std::uint64_t seed, std::uint64_t event_prefix) {
    Scenario s = config.scenario;
    s.seed = seed;
    s.max_events = event_prefix;
    s.probe_audit = false;
    return run(s);
}

ExploreResult run_explore(const RunConfig& config, std::size_t depth, std::optional<std::size_t> max_leaves) {
    ExploreLimits limits{depth, max_leaves.value_or(config.explore.max_leaves), config.explore.dedupe};
    if (config.explore.mode == "bbca") {
        BbcaExploreConfig b;
        b.kind = config.explore.bbca_case;
        b.n = config.scenario.n;
        b.limits = limits;
        b.probe_choices = config.explore.probe_choices;
        return explore_bbca(b);
    }
    return explore_chain(config.scenario, limits);
}

std::string trace_export(const Trace& trace) {
    std::ostringstream out;
    for (const auto& line : trace.lines) {
        out << line << "\n";
    }
    return out.str();
}

std::string log_export(const NodeSummary& node) {
    std::ostringstream out;
    for (const auto& e : node.log) {
        out << e.position << " " << e.view << " " << e.digest.hex() << " " << to_string(e.kind) << " "
            << e.author.index << "\n";
    }
    return out.str();
}

nlohmann::json to_json(const RunReport& report, const RunConfig& config) {
    using nlohmann::json;
    const Trace& t = report.trace;
    json j;
    j["seed"] = t.seed;
    j["n"] = t.n;
    j["f"] = t.f;
    j["verdict"] = report.passed() ? "PASS" : "FAIL";
    j["trace_digest"] = t.digest.hex();
    j["events"] = t.events;
    j["messages"] = t.messages;
    j["end_tick"] = t.end_tick;
    j["stop_reason"] = t.stop_reason;
    j["runtime_seconds"] = report.seconds;

    json inv = json::object();
    for (const auto& v : report.verdicts) {
        json e;
        e["status"] = v.pass ? "PASS" : "FAIL";
        e["checked"] = v.checked;
        if (!v.detail.empty()) {
            e["detail"] = v.detail;
        }
        if (!v.pass) {
            e["witness"] = {{"seed", t.seed}, {"event_prefix", v.event_prefix.value_or(t.events)}};
        }
        inv[v.name] = e;
    }
    j["invariants"] = inv;
    if (config.wants("view_sync")) {
        j["view_sync"] = {{"views", report.sync.views},
                          {"max_certified_spread", report.sync.max_certified_spread},
                          {"max_noadopt_spread", report.sync.max_noadopt_spread}};
    }

    json nodes = json::array();
    for (const auto& s : t.nodes) {
        json n;
        n["id"] = s.id.index;
        n["strategy"] = to_string(s.strategy);
        n["view"] = s.view;
        n["last_committed"] = s.last_committed;
        n["log_digest"] = s.log_digest.hex();
        n["noop_views"] = s.noop_views;
        json entries = json::array();
        for (const auto& [w, e] : s.entries) {
            entries.push_back({{"view", w}, {"tick", e.tick}, {"cause", to_string(e.cause)}});
        }
        n["view_entries"] = entries;
        json log = json::array();
        for (const auto& e : s.log) {
            log.push_back({{"position", e.position},
                           {"view", e.view},
                           {"digest", e.digest.hex()},
                           {"kind", to_string(e.kind)},
                           {"author", e.author.index},
                           {"tick", e.tick}});
        }
        n["committed_log"] = log;
        nodes.push_back(n);
    }
    j["nodes"] = nodes;

    if (report.hop) {
        json rows = json::array();
        for (const auto& r : report.latency) {
            rows.push_back({{"block", r.block.hex()},
                            {"kind", to_string(r.kind)},
                            {"view", r.view},
                            {"author", r.author.index},
                            {"measured_trips", r.measured.str()},
                            {"lead_hops", r.lead.str()},
                            {"expected_trips", r.expected.str()},
                            {"reference_trips", r.reference},
                            {"certified_dag_trips", r.certified_dag}});
        }
        j["latency"] = {{"hop_ticks", *report.hop}, {"rows", rows}};
    }
    j["config"] = config.source;
    return j;
}

nlohmann::json to_json(const ExploreResult& result, const RunConfig& config, std::size_t depth) {
    using nlohmann::json;
    json j;
    j["mode"] = config.explore.mode;
    if (config.explore.mode == "bbca") {
        j["case"] = to_string(config.explore.bbca_case);
        j["probe_choices"] = config.explore.probe_choices;
    }
    j["depth"] = depth;
    j["dedupe"] = config.explore.dedupe;
    j["leaves"] = result.leaves;
    j["partial"] = result.partial;
    j["leaves_with_completion"] = result.leaves_with_completion;
    j["verdict"] = result.passed() ? "PASS" : "FAIL";
    json checked = json::object();
    for (const auto& [name, count] : result.checked) {
        bool ok = std::none_of(result.violations.begin(), result.violations.end(),
                               [&, n = name](const ExploreViolation& v) { return v.property == n; });
        checked[name] = {{"status", ok ? "PASS" : "FAIL"}, {"leaves_checked", count}};
    }
    j["properties"] = checked;
    j["violation_count"] = result.violation_count;
    json viols = json::array();
    for (const auto& v : result.violations) {
        viols.push_back({{"property", v.property}, {"detail", v.detail}, {"choices", v.choices}});
    }
    j["violations"] = viols;
    j["config"] = config.source;
    return j;
}

}  // namespace bbca
