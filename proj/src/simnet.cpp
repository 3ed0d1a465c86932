// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/simnet.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bbca {

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::Correct:
            return "correct";
        case Strategy::Silent:
            return "silent";
        case Strategy::EquivocateInit:
            return "equivocate_init";
        case Strategy::EquivocateData:
            return "equivocate_data";
        case Strategy::WithholdReady:
            return "withhold_ready";
        case Strategy::Replay:
            return "replay";
        case Strategy::DelayOwn:
            return "delay_own";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    for (auto s : {Strategy::Silent, Strategy::EquivocateInit, Strategy::EquivocateData, Strategy::WithholdReady,
                   Strategy::Replay, Strategy::DelayOwn}) {
        if (name == to_string(s)) {
            return s;
        }
    }
    return std::nullopt;
}

const char* to_string(PreGstPolicy p) {
    return p == PreGstPolicy::Adversarial ? "adversarial" : "drop_until_gst";
}

std::vector<const NodeSummary*> Trace::correct_nodes() const {
    std::vector<const NodeSummary*> out;
    for (const auto& s : nodes) {
        if (s.correct()) {
            out.push_back(&s);
        }
    }
    return out;
}

Bytes encode_log(const std::vector<CommittedEntry>& log) {
    ByteWriter w;
    for (const auto& e : log) {
        w.u64(e.position).u64(e.view).digest(e.digest).u8(static_cast<std::uint8_t>(e.kind)).u32(e.author.index);
    }
    return w.take();
}

Rational Rational::make(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw std::invalid_argument("zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    return Rational{num / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
}

std::string Rational::str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational trips_to_commit(const Trace& trace, const Digest& block, Tick hop) {
    auto sent = trace.send_time.find(block);
    if (sent == trace.send_time.end()) {
        throw std::invalid_argument("no send time for block " + block.short_hex());
    }
    std::optional<Tick> first;
    for (const auto* node : trace.correct_nodes()) {
        auto it = std::find_if(node->log.begin(), node->log.end(), [&](const auto& e) { return e.digest == block; });
        if (it == node->log.end()) {
            throw std::invalid_argument("block " + block.short_hex() + " not committed by node " +
                                        std::to_string(node->id.index));
        }
        first = first ? std::min(*first, it->tick) : it->tick;
    }
    if (!first) {
        throw std::invalid_argument("no correct nodes");
    }
    return Rational::make(static_cast<std::int64_t>(*first) - static_cast<std::int64_t>(sent->second),
                          static_cast<std::int64_t>(hop));
}

// ---------------------------------------------------------------------------

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)), params_(scenario_.params()), rng_(scenario_.seed) {
    const std::uint32_t n = params_.n;
    strategy_.assign(n, Strategy::Correct);
    max_delay_.assign(n, 0);
    for (const auto& a : scenario_.adversary) {
        if (a.node.index >= n) {
            throw std::invalid_argument("adversary node out of range");
        }
        strategy_[a.node.index] = a.strategy;
        max_delay_[a.node.index] = a.max_delay;
    }
    if (scenario_.adversary.size() > params_.f) {
        throw std::invalid_argument("more byzantine nodes than f");
    }
    nodes_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        nodes_.emplace_back(NodeId{i}, params_, scenario_.chain);
    }
    replay_seen_.resize(n);
    log_seen_.assign(n, 0);
    finalize_seen_.assign(n, 0);
    violation_seen_.assign(n, 0);
    completion_seen_.assign(n, 0);

    trace_.n = n;
    trace_.f = params_.f;
    trace_.seed = scenario_.seed;
    trace_.delay = scenario_.delay;
    trace_.t_max = scenario_.chain.t_max;

    for (std::uint64_t i = 0; i < scenario_.payloads.size(); ++i) {
        const auto& p = scenario_.payloads[i];
        if (p.node.index >= n) {
            throw std::invalid_argument("payload node out of range");
        }
        schedule(p.tick, Inject{p.node, i});
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        if (strategy_[i] != Strategy::Silent) {
            emit(nodes_[i].start(0), NodeId{i});
        }
    }
}

void Simulator::schedule(Tick time, Event ev) { queue_.emplace(EventKey{time, seq_++}, std::move(ev)); }

std::vector<NodeId> Simulator::others(NodeId self) const {
    std::vector<NodeId> out;
    for (std::uint32_t i = 0; i < params_.n; ++i) {
        if (i != self.index && strategy_[i] != Strategy::Silent) {
            out.push_back(NodeId{i});
        }
    }
    return out;
}

Tick Simulator::link_delay(Tick send_time) {
    const auto& d = scenario_.delay;
    auto uniform = [&](Tick lo, Tick hi) { return std::uniform_int_distribution<Tick>(lo, std::max(lo, hi))(rng_); };
    if (send_time >= d.gst) {
        return uniform(d.min_delay, d.delta_post);
    }
    if (d.pre_gst == PreGstPolicy::DropUntilGst) {
        return d.gst - send_time + uniform(d.min_delay, d.delta_post);
    }
    const Tick latest = d.gst + d.delta_post - send_time;
    return std::min(uniform(d.min_delay, d.pre_gst_bound), latest);
}

BlockPtr Simulator::twin(const BlockPtr& block) {
    auto it = twins_.find(block->digest);
    if (it != twins_.end()) {
        return it->second;
    }
    Block copy = *block;
    const std::string tag = "#twin";
    copy.payload.insert(copy.payload.end(), tag.begin(), tag.end());
    auto sealed = seal(std::move(copy));
    twins_.emplace(block->digest, sealed);
    return sealed;
}

void Simulator::send(NodeId from, const WireMessage& msg, const std::vector<NodeId>& to, Tick extra) {
    const Tick sent = now_ + extra;
    for (const auto& r : to) {
        schedule(sent + link_delay(sent), Deliver{r, from, msg, sent});
        ++trace_.messages;
    }
}

void Simulator::emit(const NodeOutput& out, NodeId node) {
    const Strategy s = strategy_[node.index];
    if (s == Strategy::Silent) {
        return;
    }
    for (const auto& t : out.timers) {
        schedule(std::max(t.deadline, now_), TimerFire{node, t.view});
    }
    for (const auto& o : out.sends) {
        const std::vector<NodeId> recipients = o.to ? std::vector<NodeId>{*o.to} : others(node);
        const auto* bbca = std::get_if<ChainBbcaMessage>(&o.message);
        const auto* beb = std::get_if<BlockMessage>(&o.message);

        if (s == Strategy::Correct) {
            if (bbca && bbca->kind == BbcaKind::Init) {
                trace_.send_time.try_emplace(bbca->message->digest, now_);
                trace_.proposals.try_emplace(bbca->instance.view, bbca->message->digest);
            } else if (beb) {
                trace_.send_time.try_emplace(beb->block->digest, now_);
            }
        }

        switch (s) {
            case Strategy::WithholdReady:
                if (bbca && bbca->kind == BbcaKind::Ready) {
                    continue;
                }
                break;
            case Strategy::EquivocateInit:
                if (bbca && bbca->kind != BbcaKind::Ready && bbca->instance.sender == node &&
                    bbca->message->author == node) {
                    // First half of the other nodes sees the real proposal,
                    // the rest a twin with the same justification.
                    const std::size_t half = recipients.size() / 2;
                    std::vector<NodeId> first(recipients.begin(), recipients.begin() + half);
                    std::vector<NodeId> second(recipients.begin() + half, recipients.end());
                    ChainBbcaMessage alt = *bbca;
                    alt.message = twin(bbca->message);
                    if (alt.sig) {
                        alt.sig = sign(node, echo_statement(alt.instance, alt.message->digest));
                    }
                    send(node, o.message, first, 0);
                    send(node, WireMessage{alt}, second, 0);
                    continue;
                }
                break;
            case Strategy::EquivocateData:
                if (beb && beb->block->kind == BlockKind::Data) {
                    send(node, o.message, recipients, 0);
                    send(node, WireMessage{BlockMessage{twin(beb->block)}}, recipients, 0);
                    continue;
                }
                break;
            case Strategy::DelayOwn: {
                const Tick extra = std::uniform_int_distribution<Tick>(0, max_delay_[node.index])(rng_);
                send(node, o.message, recipients, extra);
                continue;
            }
            default:
                break;
        }
        send(node, o.message, recipients, 0);
    }
}

void Simulator::record(NodeId node, std::string_view kind, const Digest& d) {
    std::string line = std::to_string(now_) + " " + std::to_string(node.index) + " ";
    line += kind;
    line += " ";
    line += d.hex();
    line += "\n";
    digest_.update(line);
    if (scenario_.record_lines) {
        line.pop_back();
        trace_.lines.push_back(std::move(line));
    }
}

void Simulator::process(Tick time, const Event& ev) {
    now_ = std::max(now_, time);
    ++trace_.events;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Deliver>) {
                record(e.to, wire_kind(e.msg), wire_digest(e.msg));
                if (scenario_.check_delays && correct(e.to)) {
                    const auto& d = scenario_.delay;
                    const Tick bound = e.sent >= d.gst ? e.sent + d.delta_post : d.gst + d.delta_post;
                    if (now_ > bound) {
                        flag("delay_model", "message sent at " + std::to_string(e.sent) + " delivered at " +
                                                std::to_string(now_));
                    }
                }
                auto out = nodes_[e.to.index].on_message(now_, e.from, e.msg);
                emit(out, e.to);
                if (strategy_[e.to.index] == Strategy::Replay &&
                    replay_seen_[e.to.index].insert(wire_digest(e.msg)).second) {
                    const Tick extra = std::uniform_int_distribution<Tick>(1, scenario_.delay.delta_post)(rng_);
                    send(e.to, e.msg, others(e.to), extra);
                }
            } else if constexpr (std::is_same_v<T, TimerFire>) {
                ByteWriter w;
                w.u64(e.view);
                record(e.node, "TIMER", sha256(w.data()));
                emit(nodes_[e.node.index].on_timer(now_, e.view), e.node);
            } else if constexpr (std::is_same_v<T, Inject>) {
                if (strategy_[e.node.index] == Strategy::Silent) {
                    return;
                }
                const std::string text = "payload:" + std::to_string(e.node.index) + ":" + std::to_string(time) +
                                         ":" + std::to_string(e.index);
                Bytes payload(text.begin(), text.end());
                record(e.node, "INJECT", sha256(payload));
                auto out = nodes_[e.node.index].submit_payload(now_, std::move(payload));
                if (correct(e.node)) {
                    for (const auto& o : out.sends) {
                        if (const auto* b = std::get_if<BlockMessage>(&o.message);
                            b && b->block->kind == BlockKind::Data) {
                            trace_.injected.push_back(InjectedPayload{e.node, now_, b->block->digest});
                        }
                    }
                }
                emit(out, e.node);
            } else {
                ByteWriter w;
                w.u64(e.view);
                record(e.node, "PROBE", sha256(w.data()));
                auto r = nodes_[e.node.index].force_probe(e.view);
                ProbeRecord rec{e.node, e.view, false, Digest{}};
                if (const auto* a = std::get_if<Adopt<BlockPtr>>(&r)) {
                    rec.adopt = true;
                    rec.message = a->message->digest;
                }
                trace_.probes.push_back(rec);
            }
        },
        ev);
    monitor();
}

void Simulator::flag(std::string invariant, std::string detail) {
    trace_.violations.push_back(Violation{std::move(invariant), std::move(detail), trace_.events, now_});
}

void Simulator::monitor() {
    for (std::uint32_t i = 0; i < params_.n; ++i) {
        if (strategy_[i] != Strategy::Correct) {
            continue;
        }
        const auto& node = nodes_[i];
        const auto& log = node.committed_log();
        for (; log_seen_[i] < log.size(); ++log_seen_[i]) {
            const auto& e = log[log_seen_[i]];
            if (e.position < reference_log_.size()) {
                if (reference_log_[e.position] != e.digest) {
                    flag("prefix", "node " + std::to_string(i) + " committed " + e.digest.short_hex() +
                                       " at position " + std::to_string(e.position) + ", another node committed " +
                                       reference_log_[e.position].short_hex());
                }
            } else {
                reference_log_.push_back(e.digest);
            }
        }
        const auto& fin = node.finalize_events();
        for (; finalize_seen_[i] < fin.size(); ++finalize_seen_[i]) {
            const auto& e = fin[finalize_seen_[i]];
            std::optional<Digest> d;
            if (e.entry) {
                d = e.entry->digest;
            }
            auto [it, inserted] = reference_final_.try_emplace(e.view, d);
            if (!inserted && it->second != d) {
                flag("agreement", "view " + std::to_string(e.view) + " finalized differently at node " +
                                      std::to_string(i));
            }
        }
        const auto& own = node.violations();
        for (; violation_seen_[i] < own.size(); ++violation_seen_[i]) {
            flag("agreement", "node " + std::to_string(i) + ": " + own[violation_seen_[i]]);
        }
        const auto& done = node.completions();
        if (completion_seen_[i] != done.size()) {
            completion_seen_[i] = done.size();
            for (const auto& [view, ev] : done) {
                auto [it, inserted] = reference_complete_.try_emplace(view, ev.message->digest);
                if (!inserted && it->second != ev.message->digest) {
                    flag("consistency", "view " + std::to_string(view) + " completed with different blocks");
                }
            }
        }
    }

    if (scenario_.target_view > 0 && stop_reason_.empty()) {
        bool all = true;
        for (std::uint32_t i = 0; i < params_.n && all; ++i) {
            all = strategy_[i] != Strategy::Correct || nodes_[i].last_committed() >= scenario_.target_view;
        }
        if (all) {
            stop_reason_ = "target_view";
        }
    }
    if (stop_reason_.empty() && trace_.events >= scenario_.max_events) {
        stop_reason_ = "max_events";
    }
}

bool Simulator::step() {
    if (!stop_reason_.empty()) {
        return false;
    }
    if (queue_.empty()) {
        stop_reason_ = "quiescent";
        return false;
    }
    auto it = queue_.begin();
    if (it->first.first > scenario_.max_ticks) {
        stop_reason_ = "max_ticks";
        return false;
    }
    auto node = queue_.extract(it);
    process(node.key().first, node.mapped());
    return true;
}

void Simulator::step_event(const EventKey& key) {
    auto node = queue_.extract(key);
    if (node.empty()) {
        throw std::invalid_argument("no such pending event");
    }
    process(node.key().first, node.mapped());
}

void Simulator::run() {
    while (step()) {
    }
}

std::vector<Simulator::EventKey> Simulator::pending() const {
    std::vector<EventKey> out;
    out.reserve(queue_.size());
    for (const auto& [k, ev] : queue_) {
        if (k.first <= scenario_.max_ticks) {
            out.push_back(k);
        }
    }
    return out;
}

std::string Simulator::describe(const EventKey& key) const {
    const auto& ev = queue_.at(key);
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Deliver>) {
                return std::to_string(e.to.index) + " " + std::to_string(e.from.index) + " " + wire_kind(e.msg) +
                       " " + wire_digest(e.msg).hex();
            } else if constexpr (std::is_same_v<T, TimerFire>) {
                return std::to_string(e.node.index) + " TIMER " + std::to_string(e.view);
            } else if constexpr (std::is_same_v<T, Inject>) {
                return std::to_string(e.node.index) + " INJECT " + std::to_string(e.index);
            } else {
                return std::to_string(e.node.index) + " PROBE " + std::to_string(e.view);
            }
        },
        ev);
}

Trace Simulator::finish() {
    if (stop_reason_.empty()) {
        stop_reason_ = queue_.empty() ? "quiescent" : "max_ticks";
    }
    std::vector<std::set<View>> aborted(params_.n);
    for (std::uint32_t i = 0; i < params_.n; ++i) {
        for (View v = 1; v <= nodes_[i].view() + 1; ++v) {
            if (const auto* inst = nodes_[i].instance(v); inst && inst->aborted()) {
                aborted[i].insert(v);
            }
        }
        if (strategy_[i] != Strategy::Correct) {
            continue;
        }
        for (const auto& [v, ev] : nodes_[i].completions()) {
            const Block& b = *ev.message;
            if (ev.cert.instance.view != v || b.view != v || b.author != get_proposer(v, params_) ||
                ev.cert.message != b.digest || !verify_complete_cert(ev.cert, params_)) {
                flag("integrity", "node " + std::to_string(i) + " completed an invalid instance for view " +
                                      std::to_string(v));
            }
        }
    }
    if (scenario_.probe_audit) {
        for (const auto& [view, digest] : reference_complete_) {
            for (std::uint32_t i = 0; i < params_.n; ++i) {
                if (strategy_[i] == Strategy::Correct) {
                    process(now_, ForceProbe{NodeId{i}, view});
                }
            }
        }
    }
    trace_.end_tick = now_;
    trace_.stop_reason = stop_reason_;
    trace_.nodes.clear();
    for (std::uint32_t i = 0; i < params_.n; ++i) {
        const auto& node = nodes_[i];
        NodeSummary s;
        s.id = NodeId{i};
        s.strategy = strategy_[i];
        s.view = node.view();
        s.last_committed = node.last_committed();
        s.log = node.committed_log();
        s.entries = node.view_entries();
        for (const auto& [v, e] : node.finalized()) {
            if (v > s.last_committed) {
                break;
            }
            if (!e) {
                s.noop_views.push_back(v);
            }
            s.finalized.emplace(v, e ? std::optional<Digest>(e->digest) : std::nullopt);
        }
        for (const auto& [v, ev] : node.completions()) {
            s.completions.emplace(v, ev.message->digest);
        }
        s.aborted = std::move(aborted[i]);
        s.violations = node.violations();
        s.log_digest = sha256(encode_log(s.log));

        std::ostringstream line;
        line << "summary " << i << " " << to_string(s.strategy) << " committed=" << s.last_committed
             << " log=" << s.log_digest.hex() << " views=";
        bool first = true;
        for (const auto& [v, e] : s.entries) {
            line << (first ? "" : ",") << v << "@" << e.tick;
            first = false;
        }
        std::string text = line.str();
        digest_.update(text + "\n");
        if (scenario_.record_lines) {
            trace_.lines.push_back(text);
        }
        trace_.nodes.push_back(std::move(s));
    }
    trace_.digest = digest_.finish();
    return trace_;
}

Trace run(const Scenario& scenario) {
    Simulator sim(scenario);
    sim.run();
    return sim.finish();
}

}  // namespace bbca
