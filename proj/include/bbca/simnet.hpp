// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/chain.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace bbca {

enum class Strategy : std::uint8_t {
    Correct,
    Silent,
    EquivocateInit,
    EquivocateData,
    WithholdReady,
    Replay,
    DelayOwn,
};

const char* to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

struct AdversarySpec {
    NodeId node;
    Strategy strategy = Strategy::Silent;
    Tick max_delay = 0;  // DelayOwn only
};

enum class PreGstPolicy : std::uint8_t { Adversarial, DropUntilGst };

const char* to_string(PreGstPolicy p);

/// Partial synchrony. Messages sent at or after `gst` take between
/// `min_delay` and `delta_post` ticks. Earlier messages follow the pre-GST
/// policy and always arrive by gst + delta_post.
struct DelayModel {
    Tick gst = 0;
    Tick delta_post = 10;
    Tick min_delay = 1;
    PreGstPolicy pre_gst = PreGstPolicy::Adversarial;
    Tick pre_gst_bound = 0;  // adversarial: max delay before GST (capped as above)

    static DelayModel uniform(Tick d) { return DelayModel{0, d, d, PreGstPolicy::Adversarial, d}; }
};

struct PayloadInjection {
    NodeId node;
    Tick tick = 0;
};

struct Scenario {
    std::uint32_t n = 4;
    std::uint64_t seed = 1;
    DelayModel delay;
    ChainConfig chain;
    std::vector<AdversarySpec> adversary;
    std::vector<PayloadInjection> payloads;
    Tick max_ticks = 10'000;
    View target_view = 0;  // 0: run to max_ticks
    std::uint64_t max_events = 5'000'000;
    bool record_lines = false;
    bool probe_audit = false;  // end-of-run ForceProbe of every completed view
    bool check_delays = true;

    SystemParams params() const { return SystemParams::for_nodes(n); }
};

struct Violation {
    std::string invariant;
    std::string detail;
    std::uint64_t event_index = 0;  // events processed when detected
    Tick tick = 0;
};

struct NodeSummary {
    NodeId id;
    Strategy strategy = Strategy::Correct;
    View view = 0;
    View last_committed = 0;
    std::vector<CommittedEntry> log;
    std::map<View, ViewEntry> entries;
    std::vector<View> noop_views;
    // Backbone block (or NO-OP) finalized per view up to last_committed. A
    // Byzantine leader's unfinalized proposal can still sit in the log as an
    // ordinary ancestor, so this is not derivable from the log alone.
    std::map<View, std::optional<Digest>> finalized;
    std::map<View, Digest> completions;
    std::set<View> aborted;  // instances probed before the end-of-run audit
    std::vector<std::string> violations;
    Digest log_digest;

    bool correct() const { return strategy == Strategy::Correct; }
};

struct InjectedPayload {
    NodeId node;
    Tick tick = 0;
    Digest block;
};

struct ProbeRecord {
    NodeId node;
    View view = 0;
    bool adopt = false;
    Digest message;
};

struct Trace {
    std::uint32_t n = 0;
    std::uint32_t f = 0;
    std::uint64_t seed = 0;
    DelayModel delay;
    Tick t_max = 0;

    Digest digest;
    std::vector<std::string> lines;
    std::uint64_t events = 0;
    std::uint64_t messages = 0;
    Tick end_tick = 0;
    std::string stop_reason;

    std::vector<NodeSummary> nodes;
    std::unordered_map<Digest, Tick> send_time;
    std::map<View, Digest> proposals;  // backbone blocks proposed by correct leaders
    std::vector<InjectedPayload> injected;
    std::vector<ProbeRecord> probes;
    std::vector<Violation> violations;

    bool failed() const { return !violations.empty(); }
    std::vector<const NodeSummary*> correct_nodes() const;
};

/// Committed-log export: one canonical record per entry
/// (u64 position | u64 view | digest | u8 kind | u32 author).
Bytes encode_log(const std::vector<CommittedEntry>& log);

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t num, std::int64_t den);
    bool operator==(const Rational&) const = default;
    std::string str() const;
};

/// (earliest commit by a correct node - first send) / hop, in network trips.
/// Throws std::invalid_argument if some correct node never committed the
/// block or its send time is unknown.
Rational trips_to_commit(const Trace& trace, const Digest& block, Tick hop);

/// Deterministic discrete-event network of ChainNodes. Copyable, so the
/// explorer can branch on a snapshot.
class Simulator {
public:
    using EventKey = std::pair<Tick, std::uint64_t>;

    explicit Simulator(Scenario scenario);

    /// Processes the earliest pending event. Returns false once stopped.
    bool step();
    /// Processes a specific pending event regardless of its time.
    void step_event(const EventKey& key);
    void run();

    bool stopped() const { return !stop_reason_.empty() || queue_.empty(); }
    std::vector<EventKey> pending() const;
    /// Describes a pending event as "node KIND digest" for deduplication.
    std::string describe(const EventKey& key) const;

    /// Runs the optional probe audit and assembles the trace.
    Trace finish();

    const ChainNode& node(std::uint32_t i) const { return nodes_[i]; }
    Tick now() const { return now_; }
    std::uint64_t events() const { return trace_.events; }

private:
    struct Deliver {
        NodeId to;
        NodeId from;
        WireMessage msg;
        Tick sent = 0;
    };
    struct TimerFire {
        NodeId node;
        View view = 0;
    };
    struct Inject {
        NodeId node;
        std::uint64_t index = 0;
    };
    struct ForceProbe {
        NodeId node;
        View view = 0;
    };
    using Event = std::variant<Deliver, TimerFire, Inject, ForceProbe>;

    void schedule(Tick time, Event ev);
    void process(Tick time, const Event& ev);
    void emit(const NodeOutput& out, NodeId node);
    void send(NodeId from, const WireMessage& msg, const std::vector<NodeId>& to, Tick extra);
    Tick link_delay(Tick send_time);
    std::vector<NodeId> others(NodeId self) const;
    void record(NodeId node, std::string_view kind, const Digest& d);
    void monitor();
    void flag(std::string invariant, std::string detail);
    bool correct(NodeId id) const { return strategy_[id.index] == Strategy::Correct; }
    BlockPtr twin(const BlockPtr& block);

    Scenario scenario_;
    SystemParams params_;
    std::vector<ChainNode> nodes_;
    std::vector<Strategy> strategy_;
    std::vector<Tick> max_delay_;
    std::mt19937_64 rng_;

    std::map<EventKey, Event> queue_;
    std::uint64_t seq_ = 0;
    Tick now_ = 0;
    std::string stop_reason_;

    Sha256Stream digest_;
    Trace trace_;

    std::unordered_map<Digest, BlockPtr> twins_;
    std::vector<std::unordered_set<Digest>> replay_seen_;

    // Online safety monitor over correct nodes.
    std::vector<std::size_t> log_seen_;
    std::vector<std::size_t> finalize_seen_;
    std::vector<std::size_t> violation_seen_;
    std::vector<std::size_t> completion_seen_;
    std::vector<Digest> reference_log_;
    std::map<View, std::optional<Digest>> reference_final_;
    std::map<View, Digest> reference_complete_;
};

Trace run(const Scenario& scenario);

}  // namespace bbca
