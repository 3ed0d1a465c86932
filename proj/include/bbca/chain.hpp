// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/bbca.hpp"
#include "bbca/block.hpp"
#include "bbca/dag.hpp"

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace bbca {

using ChainBbcaMessage = BbcaMessage<BlockPtr>;

/// Best-effort broadcast of a data or new-view block.
struct BlockMessage {
    BlockPtr block;
};

using WireMessage = std::variant<ChainBbcaMessage, BlockMessage>;

/// Digest identifying a wire message in traces.
Digest wire_digest(const WireMessage& msg);
std::string wire_kind(const WireMessage& msg);

/// An outbound message. `to == nullopt` means every other node; the sender
/// has already handled its own copy.
struct Outbound {
    WireMessage message;
    std::optional<NodeId> to;
};

struct TimerRequest {
    View view = 0;
    Tick deadline = 0;
};

struct NodeOutput {
    std::vector<Outbound> sends;
    std::vector<TimerRequest> timers;
};

/// Why a node entered a view. The first four values are the
/// certificate-driven entries; NoAdoptQuorum is the 2f+1 new-view path.
enum class EntryCause : std::uint8_t {
    Start,
    Completion,
    CompleteCert,
    AdoptCert,
    ProbeAdopt,
    NoAdoptQuorum,
};

const char* to_string(EntryCause cause);

struct ViewEntry {
    Tick tick = 0;
    EntryCause cause = EntryCause::Start;
};

struct CommittedEntry {
    std::uint64_t position = 0;
    View view = 0;
    Digest digest;
    BlockKind kind = BlockKind::Data;
    NodeId author;
    Tick tick = 0;
};

/// Finalized slot: a backbone block, or nullptr for NO-OP.
using FinalizedEntry = BlockPtr;

struct FinalizeEvent {
    View view = 0;
    FinalizedEntry entry;
};

struct ChainConfig {
    Tick t_max = 100;
};

/// One BBCA-Chain node. Pure event-driven state machine: every entry point
/// consumes one event at logical time `now` and returns the messages and
/// timers it produced. Messages the node sends to all are also handled
/// locally, in FIFO order, before the entry point returns.
class ChainNode {
public:
    ChainNode(NodeId self, SystemParams params, ChainConfig config);

    NodeOutput start(Tick now);
    NodeOutput on_message(Tick now, NodeId from, const WireMessage& msg);
    NodeOutput on_timer(Tick now, View view);
    NodeOutput submit_payload(Tick now, Bytes payload);

    /// End-of-run audit hook; aborts the instance like any probe.
    ProbeResult<BlockPtr> force_probe(View view);

    /// The validity predicate handed to the BBCA instances. Requires the
    /// block's ancestry to be delivered.
    bool predicate(const BlockPtr& block) const;

    /// Finalizes `block` and commits every contiguous finalized view.
    /// Returns the views newly committed (NO-OP views included).
    std::vector<View> try_commit(const BlockPtr& block);

    NodeId id() const { return self_; }
    const SystemParams& params() const { return params_; }
    View view() const { return view_; }
    View last_committed() const { return last_committed_; }
    const std::vector<CommittedEntry>& committed_log() const { return log_; }
    const std::map<View, FinalizedEntry>& finalized() const { return finalized_; }
    const std::vector<FinalizeEvent>& finalize_events() const { return finalize_events_; }
    const std::map<View, ViewEntry>& view_entries() const { return entries_; }
    const std::map<View, CompleteEvent<BlockPtr>>& completions() const { return completions_; }
    const std::vector<std::string>& violations() const { return violations_; }
    const DagStore& dag() const { return dag_; }
    const std::map<NodeId, BlockPtr>& new_view_blocks(View view) const;
    const BbcaInstance<BlockPtr>* instance(View view) const;
    /// Highest view for which this node holds a complete or adopt certificate.
    View highest_certified_view() const;

private:
    struct Deferred {
        NodeId from;
        ChainBbcaMessage msg;
    };

    template <class F>
    NodeOutput run(Tick now, F&& body);
    void drain_local();

    // Inbound paths.
    void handle(NodeId from, const WireMessage& msg);
    void handle_bbca(NodeId from, const ChainBbcaMessage& msg);
    void dispatch_bbca(NodeId from, const ChainBbcaMessage& msg);
    bool ingest(const BlockPtr& block);
    void on_delivered(const BlockPtr& block);
    void on_new_view_block(const BlockPtr& nv);
    void on_bbca_complete(const CompleteEvent<BlockPtr>& ev);

    // View logic.
    void advance_to(View view, EntryCause cause);
    void conclude_by_probe(View view);
    void maybe_propose();
    void check_noadopt_quorum(View view);
    std::size_t noadopt_count(View view) const;

    // Own block construction.
    BlockPtr make_new_view(View view, NewViewEvidence evidence, const Digest& certified);
    void publish(const BlockPtr& block, bool send);
    std::vector<Digest> frontier_refs(std::vector<Digest> explicit_refs);
    void cover(const BlockPtr& own);
    bool referencable(const Block& block) const;

    // Certificates and commit.
    void learn_cert(View view, const Digest& block, const BlockCert& cert);
    void learn_adoptable(View view);
    CertifiedRef highest_cert_below(View view) const;
    BlockPtr predecessor(const Block& block) const;
    void finalize(const BlockPtr& block);
    void set_finalized(View view, const FinalizedEntry& entry);
    const BlockPtr& lookup(const Digest& d, const Block& container) const;

    BbcaInstance<BlockPtr>& instance_for(View view);
    void violation(std::string what);

    NodeId self_;
    SystemParams params_;
    ChainConfig config_;

    Tick now_ = 0;
    NodeOutput* out_ = nullptr;
    std::deque<Deferred> local_;

    View view_ = 0;
    std::map<View, ViewEntry> entries_;
    std::map<View, BbcaInstance<BlockPtr>> instances_;
    std::map<View, std::map<NodeId, BlockPtr>> nv_blocks_;
    std::set<View> sent_nv_;
    std::map<View, BlockPtr> stashed_nv_;
    std::set<View> proposed_;
    std::map<View, CertifiedRef> certs_;
    std::map<View, CompleteEvent<BlockPtr>> completions_;

    DagStore dag_;
    std::unordered_map<Digest, std::vector<Deferred>> deferred_;
    DigestSet covered_;
    std::set<Digest> uncovered_;

    std::map<View, FinalizedEntry> finalized_;
    std::vector<FinalizeEvent> finalize_events_;
    View last_committed_ = 0;
    DigestSet committed_;
    std::vector<CommittedEntry> log_;
    std::vector<std::string> violations_;

    mutable std::unordered_map<Digest, bool> predicate_cache_;
};

}  // namespace bbca
