// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/explore.hpp"

#include <deque>
#include <functional>
#include <set>
#include <stdexcept>

namespace bbca {

OpaquePayload OpaquePayload::of(std::string_view text) {
    OpaquePayload p;
    p.data.assign(text.begin(), text.end());
    p.digest = sha256(p.data);
    return p;
}

const char* to_string(BbcaCase c) {
    switch (c) {
        case BbcaCase::CorrectSender:
            return "correct";
        case BbcaCase::EquivocatingSender:
            return "equivocating";
        case BbcaCase::Crashed:
            return "crashed";
        case BbcaCase::NoAdoptReplay:
            return "noadopt_replay";
    }
    return "?";
}

std::optional<BbcaCase> parse_bbca_case(std::string_view name) {
    for (auto c : {BbcaCase::CorrectSender, BbcaCase::EquivocatingSender, BbcaCase::Crashed, BbcaCase::NoAdoptReplay}) {
        if (name == to_string(c)) {
            return c;
        }
    }
    return std::nullopt;
}

namespace {

constexpr std::size_t kKeptViolations = 8;

void note(ExploreResult& r, std::string property, std::string detail, const std::vector<std::size_t>& path) {
    ++r.violation_count;
    if (r.violations.size() < kKeptViolations) {
        r.violations.push_back(ExploreViolation{std::move(property), std::move(detail), path});
    }
}

// ---------------------------------------------------------------------------
// Stand-alone BBCA

using Msg = BbcaMessage<OpaquePayload>;

enum class Role : std::uint8_t { Correct, Equivocator, Crashed, Replayer };

struct InFlight {
    NodeId to;
    NodeId from;
    Msg msg;
};

struct ProbeOutcome {
    NodeId node;
    bool adopt = false;
    Digest message;
};

struct BbcaWorld {
    SystemParams params;
    InstanceId id;
    std::vector<Role> roles;
    std::vector<BbcaInstance<OpaquePayload>> nodes;
    std::vector<InFlight> pending;
    std::vector<std::size_t> completions;
    std::vector<std::optional<CompleteEvent<OpaquePayload>>> completed;
    std::vector<bool> probed;
    std::vector<ProbeOutcome> probes;
    std::set<std::pair<std::uint32_t, Digest>> replayed;
    std::set<Digest> sent_messages;

    bool correct(std::uint32_t i) const { return roles[i] == Role::Correct; }

    void send_to_all_but(NodeId from, const Msg& m) {
        for (std::uint32_t i = 0; i < params.n; ++i) {
            if (i != from.index && roles[i] != Role::Crashed && roles[i] != Role::Equivocator) {
                pending.push_back(InFlight{NodeId{i}, from, m});
            }
        }
    }

    void broadcast_from(NodeId node, std::vector<Msg> outs) {
        std::deque<Msg> local(outs.begin(), outs.end());
        while (!local.empty()) {
            Msg m = std::move(local.front());
            local.pop_front();
            send_to_all_but(node, m);
            if (m.kind != BbcaKind::Init) {
                for (auto& o : receive_local(node, node, m)) {
                    local.push_back(std::move(o));
                }
            }
        }
    }

    std::vector<Msg> receive_local(NodeId to, NodeId from, const Msg& m) {
        auto& inst = nodes[to.index];
        switch (m.kind) {
            case BbcaKind::Init:
                return inst.on_init(m.message, from);
            case BbcaKind::Echo:
                return inst.on_echo(m.message, *m.sig, from);
            case BbcaKind::Ready:
                if (auto ev = inst.on_ready(m.message, *m.sig, from)) {
                    ++completions[to.index];
                    completed[to.index] = *ev;
                }
                return {};
        }
        return {};
    }

    void deliver(const InFlight& f) {
        const std::uint32_t to = f.to.index;
        if (roles[to] == Role::Replayer) {
            if (f.msg.kind == BbcaKind::Ready && replayed.emplace(f.msg.sig->signer.index, f.msg.message.digest).second) {
                send_to_all_but(f.to, f.msg);
            }
            return;
        }
        if (!correct(to)) {
            return;
        }
        broadcast_from(f.to, receive_local(f.to, f.from, f.msg));
    }

    void probe(std::uint32_t node) {
        probed[node] = true;
        auto r = nodes[node].probe();
        ProbeOutcome out{NodeId{node}, false, Digest{}};
        if (const auto* a = std::get_if<Adopt<OpaquePayload>>(&r)) {
            out.adopt = true;
            out.message = a->message.digest;
        }
        probes.push_back(out);
    }

    std::string describe(const InFlight& f) const {
        return std::to_string(f.to.index) + ">" + std::to_string(f.from.index) + ":" + to_string(f.msg.kind) + ":" +
               f.msg.message.digest.hex() + ":" + (f.msg.sig ? std::to_string(f.msg.sig->signer.index) : "-");
    }
};

BbcaWorld make_world(const BbcaExploreConfig& config) {
    BbcaWorld w;
    w.params = SystemParams::for_nodes(config.n);
    if (w.params.f == 0) {
        throw std::invalid_argument("BBCA exploration needs n >= 4");
    }
    const std::uint32_t n = w.params.n;
    w.id = InstanceId{NodeId{0}, 1};
    w.roles.assign(n, Role::Correct);
    for (std::uint32_t i = 0; i < n; ++i) {
        w.nodes.emplace_back(w.id, w.params, NodeId{i});
    }
    w.completions.assign(n, 0);
    w.completed.resize(n);
    w.probed.assign(n, false);

    const NodeId sender{0};
    const NodeId last{n - 1};
    switch (config.kind) {
        case BbcaCase::CorrectSender:
        case BbcaCase::Crashed: {
            if (config.kind == BbcaCase::Crashed) {
                for (std::uint32_t k = 0; k < w.params.f; ++k) {
                    w.roles[n - 1 - k] = Role::Crashed;
                }
            }
            const auto m = OpaquePayload::of("m");
            w.sent_messages.insert(m.digest);
            w.broadcast_from(sender, w.nodes[0].broadcast(m));
            break;
        }
        case BbcaCase::EquivocatingSender: {
            w.roles[0] = Role::Equivocator;
            for (const auto* text : {"m1", "m2"}) {
                const auto m = OpaquePayload::of(text);
                w.sent_messages.insert(m.digest);
                w.send_to_all_but(sender, Msg{BbcaKind::Init, w.id, m, std::nullopt});
                w.send_to_all_but(sender, Msg{BbcaKind::Echo, w.id, m, sign(sender, echo_statement(w.id, m.digest))});
                w.send_to_all_but(sender,
                                  Msg{BbcaKind::Ready, w.id, m, sign(sender, ready_statement(w.id, m.digest))});
            }
            break;
        }
        case BbcaCase::NoAdoptReplay: {
            w.roles[n - 1] = Role::Replayer;
            for (std::uint32_t k = 1; k <= w.params.f + 1; ++k) {
                w.probe(k);
            }
            const auto m = OpaquePayload::of("m");
            w.sent_messages.insert(m.digest);
            w.broadcast_from(sender, w.nodes[0].broadcast(m));
            w.send_to_all_but(last, Msg{BbcaKind::Echo, w.id, m, sign(last, echo_statement(w.id, m.digest))});
            const Msg ready{BbcaKind::Ready, w.id, m, sign(last, ready_statement(w.id, m.digest))};
            w.replayed.emplace(last.index, m.digest);
            w.send_to_all_but(last, ready);
            break;
        }
    }
    return w;
}

class BbcaExplorer {
public:
    explicit BbcaExplorer(const BbcaExploreConfig& config) : config_(config) {}

    ExploreResult run() {
        std::vector<std::size_t> path;
        dfs(make_world(config_), path);
        return std::move(result_);
    }

private:
    // Choices: pending deliveries first, then probes of unprobed correct nodes.
    std::vector<std::size_t> choices(const BbcaWorld& w) const {
        std::vector<std::size_t> out;
        std::set<std::string> seen;
        for (std::size_t i = 0; i < w.pending.size(); ++i) {
            if (config_.limits.dedupe && !seen.insert(w.describe(w.pending[i])).second) {
                continue;
            }
            out.push_back(i);
        }
        if (config_.probe_choices) {
            for (std::uint32_t k = 0; k < w.params.n; ++k) {
                if (w.correct(k) && !w.probed[k]) {
                    out.push_back(w.pending.size() + k);
                }
            }
        }
        return out;
    }

    static void apply(BbcaWorld& w, std::size_t choice) {
        if (choice >= w.pending.size()) {
            w.probe(static_cast<std::uint32_t>(choice - w.pending.size()));
            return;
        }
        InFlight f = std::move(w.pending[choice]);
        w.pending.erase(w.pending.begin() + static_cast<std::ptrdiff_t>(choice));
        w.deliver(f);
    }

    void dfs(const BbcaWorld& w, std::vector<std::size_t>& path) {
        if (result_.leaves >= config_.limits.max_leaves) {
            result_.partial = true;
            return;
        }
        auto options = path.size() < config_.limits.depth ? choices(w) : std::vector<std::size_t>{};
        if (options.empty()) {
            BbcaWorld leaf = w;
            finish_leaf(leaf, path);
            return;
        }
        for (std::size_t c : options) {
            BbcaWorld next = w;
            apply(next, c);
            path.push_back(c);
            dfs(next, path);
            path.pop_back();
            if (result_.partial) {
                return;
            }
        }
    }

    void finish_leaf(BbcaWorld& w, const std::vector<std::size_t>& path) {
        ++result_.leaves;
        result_.max_depth_reached = std::max(result_.max_depth_reached, path.size());
        while (!w.pending.empty()) {
            InFlight f = std::move(w.pending.front());
            w.pending.erase(w.pending.begin());
            w.deliver(f);
        }
        const std::vector<ProbeOutcome> before_audit = w.probes;
        for (std::uint32_t k = 0; k < w.params.n; ++k) {
            if (w.correct(k)) {
                w.probe(k);
            }
        }
        check(w, before_audit, path);
    }

    void check(const BbcaWorld& w, const std::vector<ProbeOutcome>& mid_probes, const std::vector<std::size_t>& path) {
        const auto& p = w.params;
        std::set<Digest> completed;
        bool any = false;
        for (std::uint32_t k = 0; k < p.n; ++k) {
            if (!w.correct(k)) {
                continue;
            }
            ++result_.checked["integrity"];
            if (w.completions[k] > 1) {
                note(result_, "integrity", "node " + std::to_string(k) + " completed twice", path);
            }
            if (const auto& ev = w.completed[k]) {
                any = true;
                completed.insert(ev->message.digest);
                if (!verify_complete_cert(ev->cert, p) || ev->cert.message != ev->message.digest) {
                    note(result_, "integrity", "invalid completion certificate at node " + std::to_string(k), path);
                }
                if (!w.sent_messages.contains(ev->message.digest)) {
                    note(result_, "integrity", "completed a message the sender never sent", path);
                }
            }
        }
        if (any) {
            ++result_.leaves_with_completion;
        }

        ++result_.checked["consistency"];
        std::set<Digest> decided = completed;
        for (const auto& pr : w.probes) {
            if (pr.adopt) {
                decided.insert(pr.message);
            }
        }
        if (decided.size() > 1) {
            note(result_, "consistency", "correct nodes completed or adopted different messages", path);
        }

        const bool validity_applies =
            (config_.kind == BbcaCase::CorrectSender || config_.kind == BbcaCase::Crashed) && !config_.probe_choices;
        if (validity_applies) {
            ++result_.checked["validity"];
            for (std::uint32_t k = 0; k < p.n; ++k) {
                if (w.correct(k) && !w.completed[k]) {
                    note(result_, "validity", "node " + std::to_string(k) + " did not complete", path);
                }
            }
        }

        ++result_.checked["complete_adopt"];
        std::set<std::uint32_t> noadopt;
        for (const auto& pr : w.probes) {
            if (!pr.adopt) {
                noadopt.insert(pr.node.index);
            }
        }
        for (const auto& d : completed) {
            std::set<std::uint32_t> adopters;
            for (std::size_t i = mid_probes.size(); i < w.probes.size(); ++i) {
                if (w.probes[i].adopt && w.probes[i].message == d) {
                    adopters.insert(w.probes[i].node.index);
                }
            }
            if (adopters.size() < p.f + 1) {
                note(result_, "complete_adopt",
                     "completion with only " + std::to_string(adopters.size()) + " adopting probes", path);
            }
        }
        if (noadopt.size() >= p.f + 1 && any) {
            note(result_, "complete_adopt", "completion despite f+1 NoAdopt probes", path);
        }
    }

    BbcaExploreConfig config_;
    ExploreResult result_;
};

// ---------------------------------------------------------------------------
// Chain

class ChainExplorer {
public:
    ChainExplorer(const Scenario& scenario, const ExploreLimits& limits) : scenario_(scenario), limits_(limits) {
        scenario_.check_delays = false;
    }

    ExploreResult run() {
        std::vector<std::size_t> path;
        dfs(Simulator(scenario_), path);
        return std::move(result_);
    }

private:
    void dfs(const Simulator& sim, std::vector<std::size_t>& path) {
        if (result_.leaves >= limits_.max_leaves) {
            result_.partial = true;
            return;
        }
        std::vector<Simulator::EventKey> options;
        if (path.size() < limits_.depth && !sim.stopped()) {
            std::set<std::string> seen;
            for (const auto& k : sim.pending()) {
                if (!limits_.dedupe || seen.insert(sim.describe(k)).second) {
                    options.push_back(k);
                }
            }
        }
        if (options.empty()) {
            Simulator leaf = sim;
            leaf.run();
            finish_leaf(leaf.finish(), path);
            return;
        }
        for (std::size_t i = 0; i < options.size(); ++i) {
            Simulator next = sim;
            next.step_event(options[i]);
            path.push_back(i);
            dfs(next, path);
            path.pop_back();
            if (result_.partial) {
                return;
            }
        }
    }

    void finish_leaf(const Trace& trace, const std::vector<std::size_t>& path) {
        ++result_.leaves;
        result_.max_depth_reached = std::max(result_.max_depth_reached, path.size());
        for (const auto* p : {"agreement", "prefix", "consistency"}) {
            ++result_.checked[p];
        }
        bool completion = false;
        for (const auto* node : trace.correct_nodes()) {
            completion = completion || !node->completions.empty();
        }
        if (completion) {
            ++result_.leaves_with_completion;
        }
        for (const auto& v : trace.violations) {
            note(result_, v.invariant, v.detail, path);
        }
    }

    Scenario scenario_;
    ExploreLimits limits_;
    ExploreResult result_;
};

}  // namespace

ExploreResult explore_bbca(const BbcaExploreConfig& config) { return BbcaExplorer(config).run(); }

ExploreResult explore_chain(const Scenario& scenario, const ExploreLimits& limits) {
    return ChainExplorer(scenario, limits).run();
}

}  // namespace bbca
