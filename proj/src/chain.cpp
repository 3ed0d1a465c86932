// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/chain.hpp"

#include <algorithm>

namespace bbca {

Digest wire_digest(const WireMessage& msg) {
    if (const auto* b = std::get_if<BlockMessage>(&msg)) {
        return b->block->digest;
    }
    const auto& m = std::get<ChainBbcaMessage>(msg);
    ByteWriter w;
    w.text(to_string(m.kind)).u32(m.instance.sender.index).u64(m.instance.view).digest(m.message->digest);
    if (m.sig) {
        w.u32(m.sig->signer.index).u64(m.sig->tag);
    }
    return sha256(w.data());
}

std::string wire_kind(const WireMessage& msg) {
    if (const auto* b = std::get_if<BlockMessage>(&msg)) {
        return b->block->kind == BlockKind::NewView ? "NEWVIEW" : "DATA";
    }
    return to_string(std::get<ChainBbcaMessage>(msg).kind);
}

const char* to_string(EntryCause cause) {
    switch (cause) {
        case EntryCause::Start:
            return "start";
        case EntryCause::Completion:
            return "completion";
        case EntryCause::CompleteCert:
            return "complete-cert";
        case EntryCause::AdoptCert:
            return "adopt-cert";
        case EntryCause::ProbeAdopt:
            return "probe-adopt";
        case EntryCause::NoAdoptQuorum:
            return "noadopt-quorum";
    }
    return "?";
}

namespace {

bool same_entry(const FinalizedEntry& a, const FinalizedEntry& b) {
    if (!a || !b) {
        return !a && !b;
    }
    return a->digest == b->digest;
}

std::string describe(const FinalizedEntry& e) { return e ? e->digest.short_hex() : std::string("NO-OP"); }

}  // namespace

ChainNode::ChainNode(NodeId self, SystemParams params, ChainConfig config)
    : self_(self), params_(params), config_(config) {
    const auto& genesis = genesis_block();
    const auto& genesis_nv = genesis_new_view_block();
    dag_.insert(genesis);
    dag_.insert(genesis_nv);
    covered_.insert(genesis->digest);
    covered_.insert(genesis_nv->digest);
    committed_.insert(genesis->digest);
    finalized_.emplace(0, genesis);
    nv_blocks_[0].emplace(genesis_nv->author, genesis_nv);
    certs_.emplace(0, CertifiedRef{0, genesis->digest, genesis_cert()});
}

template <class F>
NodeOutput ChainNode::run(Tick now, F&& body) {
    NodeOutput out;
    out_ = &out;
    now_ = std::max(now_, now);
    body();
    drain_local();
    out_ = nullptr;
    return out;
}

void ChainNode::drain_local() {
    while (!local_.empty()) {
        Deferred d = std::move(local_.front());
        local_.pop_front();
        handle_bbca(d.from, d.msg);
    }
}

NodeOutput ChainNode::start(Tick now) {
    return run(now, [&] { advance_to(1, EntryCause::Start); });
}

NodeOutput ChainNode::on_message(Tick now, NodeId from, const WireMessage& msg) {
    return run(now, [&] { handle(from, msg); });
}

NodeOutput ChainNode::on_timer(Tick now, View view) {
    return run(now, [&] {
        if (view == view_ && !sent_nv_.contains(view)) {
            conclude_by_probe(view);
        }
    });
}

NodeOutput ChainNode::submit_payload(Tick now, Bytes payload) {
    return run(now, [&] {
        Block b;
        b.kind = BlockKind::Data;
        b.author = self_;
        b.view = view_;
        b.refs = frontier_refs({});
        b.payload = std::move(payload);
        publish(seal(std::move(b)), true);
    });
}

ProbeResult<BlockPtr> ChainNode::force_probe(View view) { return instance_for(view).probe(); }

// ---------------------------------------------------------------------------
// Inbound

void ChainNode::handle(NodeId from, const WireMessage& msg) {
    if (const auto* bbca = std::get_if<ChainBbcaMessage>(&msg)) {
        handle_bbca(from, *bbca);
        return;
    }
    const BlockPtr& block = std::get<BlockMessage>(msg).block;
    if (!block || block->author != from) {
        return;
    }
    const bool ok = block->kind == BlockKind::NewView ? new_view_well_formed(*block, params_)
                                                      : data_well_formed(*block);
    if (ok) {
        ingest(block);
    }
}

void ChainNode::handle_bbca(NodeId from, const ChainBbcaMessage& msg) {
    const BlockPtr& block = msg.message;
    if (!block || msg.instance.view == 0 || msg.instance.sender != get_proposer(msg.instance.view, params_)) {
        return;
    }
    if (msg.kind != BbcaKind::Init && !msg.sig) {
        return;
    }
    if (!backbone_well_formed(*block, params_)) {
        return;
    }
    if (ingest(block)) {
        dispatch_bbca(from, msg);
    } else {
        deferred_[block->digest].push_back(Deferred{from, msg});
    }
}

void ChainNode::dispatch_bbca(NodeId from, const ChainBbcaMessage& msg) {
    const View v = msg.instance.view;
    auto& inst = instance_for(v);
    auto valid = [this](const BlockPtr& m) { return predicate(m); };
    std::vector<ChainBbcaMessage> outs;
    std::optional<CompleteEvent<BlockPtr>> done;
    switch (msg.kind) {
        case BbcaKind::Init:
            outs = inst.on_init(msg.message, from, valid);
            break;
        case BbcaKind::Echo:
            outs = inst.on_echo(msg.message, *msg.sig, from, valid);
            learn_adoptable(v);
            break;
        case BbcaKind::Ready:
            done = inst.on_ready(msg.message, *msg.sig, from, valid);
            break;
    }
    for (auto& o : outs) {
        out_->sends.push_back(Outbound{WireMessage{o}, std::nullopt});
        local_.push_back(Deferred{self_, std::move(o)});
    }
    if (done) {
        on_bbca_complete(*done);
    }
}

bool ChainNode::ingest(const BlockPtr& block) {
    if (dag_.known(block->digest)) {
        return dag_.delivered(block->digest);
    }
    if (block->embedded) {
        ingest(block->embedded);
    }
    for (const auto& b : dag_.insert(block)) {
        on_delivered(b);
    }
    return dag_.delivered(block->digest);
}

void ChainNode::on_delivered(const BlockPtr& block) {
    if (referencable(*block) && !covered_.contains(block->digest)) {
        uncovered_.insert(block->digest);
    }
    if (block->kind == BlockKind::NewView) {
        on_new_view_block(block);
    }
    auto it = deferred_.find(block->digest);
    if (it != deferred_.end()) {
        std::vector<Deferred> waiting = std::move(it->second);
        deferred_.erase(it);
        for (const auto& d : waiting) {
            dispatch_bbca(d.from, d.msg);
        }
    }
}

void ChainNode::on_new_view_block(const BlockPtr& nv) {
    const View w = nv->view;
    const NodeId author = nv->author;
    if (author == self_) {
        nv_blocks_[w][author] = nv;
        maybe_propose();
        return;
    }
    nv_blocks_[w].emplace(author, nv);

    const auto& evidence = *nv->evidence;
    const auto* complete = std::get_if<CompleteCert>(&evidence);
    const auto* adopt = std::get_if<AdoptCert>(&evidence);
    if (complete) {
        learn_cert(w, complete->message, *complete);
        try_commit(dag_.get(complete->message));
    } else if (adopt) {
        learn_cert(w, adopt->message, *adopt);
    } else {
        const auto& vote = std::get<NoAdoptVote>(evidence);
        learn_cert(vote.highest.view, vote.highest.block, vote.highest.cert);
    }

    if (w >= view_) {
        if (complete || adopt) {
            const Digest& certified = complete ? complete->message : adopt->message;
            if (complete && get_proposer(w + 1, params_) == self_) {
                if (!stashed_nv_.contains(w)) {
                    auto own = make_new_view(w, *complete, certified);
                    stashed_nv_.emplace(w, own);
                    publish(own, false);
                }
            } else if (!sent_nv_.contains(w)) {
                NewViewEvidence copy = complete ? NewViewEvidence{*complete} : NewViewEvidence{*adopt};
                auto own = make_new_view(w, std::move(copy), certified);
                sent_nv_.insert(w);
                publish(own, true);
            }
            advance_to(w + 1, complete ? EntryCause::CompleteCert : EntryCause::AdoptCert);
        } else {
            if (!sent_nv_.contains(w) && noadopt_count(w) >= params_.f + 1) {
                conclude_by_probe(w);
            }
            check_noadopt_quorum(w);
        }
    }
    maybe_propose();
}

void ChainNode::on_bbca_complete(const CompleteEvent<BlockPtr>& ev) {
    const BlockPtr& block = ev.message;
    const View w = block->view;
    completions_.emplace(w, ev);
    learn_cert(w, block->digest, ev.cert);
    try_commit(block);
    if (w < view_) {
        return;
    }
    if (get_proposer(w + 1, params_) == self_) {
        // Embedded in the next proposal instead of broadcast.
        if (!stashed_nv_.contains(w)) {
            auto nv = make_new_view(w, ev.cert, block->digest);
            stashed_nv_.emplace(w, nv);
            publish(nv, false);
        }
    } else if (!sent_nv_.contains(w)) {
        auto nv = make_new_view(w, ev.cert, block->digest);
        sent_nv_.insert(w);
        publish(nv, true);
    }
    advance_to(w + 1, EntryCause::Completion);
}

// ---------------------------------------------------------------------------
// Views

void ChainNode::advance_to(View view, EntryCause cause) {
    if (view <= view_) {
        return;
    }
    view_ = view;
    entries_[view] = ViewEntry{now_, cause};
    out_->timers.push_back(TimerRequest{view, now_ + config_.t_max});
    maybe_propose();
}

void ChainNode::conclude_by_probe(View view) {
    auto result = instance_for(view).probe();
    if (auto* adopt = std::get_if<Adopt<BlockPtr>>(&result)) {
        const Digest certified = adopt->message->digest;
        learn_cert(view, certified, adopt->cert);
        auto nv = make_new_view(view, adopt->cert, certified);
        sent_nv_.insert(view);
        publish(nv, true);
        advance_to(view + 1, EntryCause::ProbeAdopt);
        return;
    }

    // Before promising NOADOPT for `view`, make sure no skipped instance above
    // the highest certificate can still send READY.
    const View highest = highest_cert_below(view).view;
    for (View u = view - 1; u > highest; --u) {
        auto r = instance_for(u).probe();
        if (auto* a = std::get_if<Adopt<BlockPtr>>(&r)) {
            learn_cert(u, a->message->digest, a->cert);
            break;
        }
    }

    CertifiedRef best = highest_cert_below(view);
    const Digest certified = best.block;
    NoAdoptVote vote{sign(self_, noadopt_statement(view)), std::move(best)};
    auto nv = make_new_view(view, std::move(vote), certified);
    sent_nv_.insert(view);
    publish(nv, true);
    check_noadopt_quorum(view);
}

void ChainNode::check_noadopt_quorum(View view) {
    if (view_ > view || !sent_nv_.contains(view)) {
        return;
    }
    auto it = nv_blocks_.find(view);
    if (it != nv_blocks_.end() && it->second.size() >= quorum_size(params_)) {
        advance_to(view + 1, EntryCause::NoAdoptQuorum);
    }
}

std::size_t ChainNode::noadopt_count(View view) const {
    auto it = nv_blocks_.find(view);
    if (it == nv_blocks_.end()) {
        return 0;
    }
    return static_cast<std::size_t>(std::count_if(it->second.begin(), it->second.end(), [](const auto& kv) {
        return std::holds_alternative<NoAdoptVote>(*kv.second->evidence);
    }));
}

void ChainNode::maybe_propose() {
    const View v = view_;
    if (v == 0 || get_proposer(v, params_) != self_ || proposed_.contains(v)) {
        return;
    }
    Justification just;
    BlockPtr embedded;
    if (auto s = stashed_nv_.find(v - 1); s != stashed_nv_.end()) {
        just = Justification{JustificationKind::Completed, {s->second->digest}};
        embedded = s->second;
    } else {
        const auto& candidates = new_view_blocks(v - 1);
        auto find = [&](auto pred) -> BlockPtr {
            for (const auto& [author, b] : candidates) {
                if (pred(*b->evidence)) {
                    return b;
                }
            }
            return nullptr;
        };
        if (auto c = find([](const auto& e) { return std::holds_alternative<CompleteCert>(e); })) {
            just = Justification{JustificationKind::Completed, {c->digest}};
        } else if (auto a = find([](const auto& e) { return std::holds_alternative<AdoptCert>(e); })) {
            just = Justification{JustificationKind::Adopted, {a->digest}};
        } else {
            std::vector<Digest> votes;
            for (const auto& [author, b] : candidates) {
                if (std::holds_alternative<NoAdoptVote>(*b->evidence) && votes.size() < quorum_size(params_)) {
                    votes.push_back(b->digest);
                }
            }
            if (votes.size() < quorum_size(params_)) {
                return;
            }
            just = Justification{JustificationKind::NoAdopted, std::move(votes)};
        }
    }

    Block b;
    b.kind = BlockKind::Backbone;
    b.author = self_;
    b.view = v;
    b.refs = frontier_refs(just.new_view_blocks);
    b.justification = std::move(just);
    b.embedded = std::move(embedded);
    BlockPtr proposal = seal(std::move(b));
    proposed_.insert(v);
    publish(proposal, false);
    for (auto& o : instance_for(v).broadcast(proposal)) {
        out_->sends.push_back(Outbound{WireMessage{o}, std::nullopt});
        local_.push_back(Deferred{self_, std::move(o)});
    }
}

// ---------------------------------------------------------------------------
// Own blocks

BlockPtr ChainNode::make_new_view(View view, NewViewEvidence evidence, const Digest& certified) {
    Block b;
    b.kind = BlockKind::NewView;
    b.author = self_;
    b.view = view;
    b.refs = frontier_refs({certified});
    b.evidence = std::move(evidence);
    return seal(std::move(b));
}

void ChainNode::publish(const BlockPtr& block, bool send) {
    cover(block);
    if (send) {
        out_->sends.push_back(Outbound{BlockMessage{block}, std::nullopt});
    }
    ingest(block);
}

std::vector<Digest> ChainNode::frontier_refs(std::vector<Digest> explicit_refs) {
    std::set<Digest> dominated;
    for (const auto& d : uncovered_) {
        for (const auto& r : dag_.get(d)->refs) {
            dominated.insert(r);
        }
    }
    std::set<Digest> refs(explicit_refs.begin(), explicit_refs.end());
    for (const auto& d : uncovered_) {
        if (!dominated.contains(d)) {
            refs.insert(d);
        }
    }
    return {refs.begin(), refs.end()};
}

void ChainNode::cover(const BlockPtr& own) {
    std::vector<Digest> stack;
    for (const auto& r : own->refs) {
        if (covered_.insert(r).second) {
            stack.push_back(r);
        }
    }
    while (!stack.empty()) {
        const Digest d = stack.back();
        stack.pop_back();
        uncovered_.erase(d);
        for (const auto& r : dag_.get(d)->refs) {
            if (covered_.insert(r).second) {
                stack.push_back(r);
            }
        }
    }
}

bool ChainNode::referencable(const Block& block) const {
    // Foreign backbone blocks are referenced only through certificates.
    return block.kind != BlockKind::Backbone || block.author == self_;
}

// ---------------------------------------------------------------------------
// Certificates, finalization and commit

void ChainNode::learn_cert(View view, const Digest& block, const BlockCert& cert) {
    auto it = certs_.find(view);
    if (it == certs_.end()) {
        certs_.emplace(view, CertifiedRef{view, block, cert});
        return;
    }
    if (it->second.block != block) {
        violation("conflicting certificates for view " + std::to_string(view));
        return;
    }
    if (std::holds_alternative<AdoptCert>(it->second.cert) && std::holds_alternative<CompleteCert>(cert)) {
        it->second.cert = cert;
    }
}

void ChainNode::learn_adoptable(View view) {
    auto it = certs_.find(view);
    if (it != certs_.end()) {
        return;
    }
    if (auto a = instance_for(view).adoptable()) {
        learn_cert(view, a->message->digest, a->cert);
    }
}

CertifiedRef ChainNode::highest_cert_below(View view) const {
    auto it = certs_.lower_bound(view);
    // certs_ always holds view 0.
    return std::prev(it)->second;
}

View ChainNode::highest_certified_view() const { return certs_.rbegin()->first; }

const BlockPtr& ChainNode::lookup(const Digest& d, const Block& container) const {
    if (container.embedded && container.embedded->digest == d) {
        return container.embedded;
    }
    return dag_.get(d);
}

bool ChainNode::predicate(const BlockPtr& block) const {
    if (auto it = predicate_cache_.find(block->digest); it != predicate_cache_.end()) {
        return it->second;
    }
    auto evaluate = [&]() -> bool {
        if (!backbone_well_formed(*block, params_)) {
            return false;
        }
        const auto& just = *block->justification;
        const View prev = block->view - 1;
        for (const auto& d : just.new_view_blocks) {
            if (!dag_.delivered(d) && !(block->embedded && block->embedded->digest == d)) {
                return false;
            }
        }
        switch (just.kind) {
            case JustificationKind::Completed:
            case JustificationKind::Adopted: {
                const auto& nv = lookup(just.new_view_blocks.front(), *block);
                if (nv->kind != BlockKind::NewView || nv->view != prev) {
                    return false;
                }
                return just.kind == JustificationKind::Completed ? std::holds_alternative<CompleteCert>(*nv->evidence)
                                                                 : std::holds_alternative<AdoptCert>(*nv->evidence);
            }
            case JustificationKind::NoAdopted: {
                std::set<NodeId> authors;
                for (const auto& d : just.new_view_blocks) {
                    const auto& nv = lookup(d, *block);
                    if (nv->kind == BlockKind::NewView && nv->view == prev &&
                        std::holds_alternative<NoAdoptVote>(*nv->evidence)) {
                        authors.insert(nv->author);
                    }
                }
                return authors.size() >= quorum_size(params_);
            }
        }
        return false;
    };
    const bool ok = evaluate();
    predicate_cache_.emplace(block->digest, ok);
    return ok;
}

BlockPtr ChainNode::predecessor(const Block& block) const {
    if (block.view == 0 || !block.justification) {
        return nullptr;
    }
    const auto& just = *block.justification;
    if (just.kind != JustificationKind::NoAdopted) {
        const auto& nv = lookup(just.new_view_blocks.front(), block);
        const auto& evidence = *nv->evidence;
        const Digest& certified = std::holds_alternative<CompleteCert>(evidence)
                                      ? std::get<CompleteCert>(evidence).message
                                      : std::get<AdoptCert>(evidence).message;
        return dag_.get(certified);
    }
    const CertifiedRef* best = nullptr;
    for (const auto& d : just.new_view_blocks) {
        const auto& vote = std::get<NoAdoptVote>(*lookup(d, block)->evidence);
        if (best == nullptr || vote.highest.view > best->view) {
            best = &vote.highest;
        }
    }
    return dag_.get(best->block);
}

void ChainNode::set_finalized(View view, const FinalizedEntry& entry) {
    auto [it, inserted] = finalized_.try_emplace(view, entry);
    if (!inserted) {
        if (!same_entry(it->second, entry)) {
            violation("view " + std::to_string(view) + " finalized as " + describe(it->second) + " and " +
                      describe(entry));
        }
        return;
    }
    finalize_events_.push_back(FinalizeEvent{view, entry});
}

void ChainNode::finalize(const BlockPtr& block) {
    BlockPtr cur = block;
    while (cur) {
        auto it = finalized_.find(cur->view);
        if (it != finalized_.end()) {
            set_finalized(cur->view, cur);  // reports a conflict if any
            return;
        }
        set_finalized(cur->view, cur);
        BlockPtr prev = predecessor(*cur);
        if (!prev) {
            return;
        }
        for (View i = prev->view + 1; i < cur->view; ++i) {
            set_finalized(i, nullptr);
        }
        cur = std::move(prev);
    }
}

std::vector<View> ChainNode::try_commit(const BlockPtr& block) {
    finalize(block);
    std::vector<View> committed;
    while (true) {
        auto it = finalized_.find(last_committed_ + 1);
        if (it == finalized_.end()) {
            break;
        }
        ++last_committed_;
        committed.push_back(last_committed_);
        if (!it->second) {
            continue;
        }
        for (const auto& d : dag_.order_under(it->second->digest, committed_)) {
            const auto& b = dag_.get(d);
            committed_.insert(d);
            log_.push_back(CommittedEntry{log_.size(), b->view, d, b->kind, b->author, now_});
        }
    }
    return committed;
}

// ---------------------------------------------------------------------------

const std::map<NodeId, BlockPtr>& ChainNode::new_view_blocks(View view) const {
    static const std::map<NodeId, BlockPtr> empty;
    auto it = nv_blocks_.find(view);
    return it == nv_blocks_.end() ? empty : it->second;
}

const BbcaInstance<BlockPtr>* ChainNode::instance(View view) const {
    auto it = instances_.find(view);
    return it == instances_.end() ? nullptr : &it->second;
}

BbcaInstance<BlockPtr>& ChainNode::instance_for(View view) {
    auto it = instances_.find(view);
    if (it == instances_.end()) {
        it = instances_.emplace(view, BbcaInstance<BlockPtr>(InstanceId{get_proposer(view, params_), view}, params_, self_))
                 .first;
    }
    return it->second;
}

void ChainNode::violation(std::string what) { violations_.push_back(std::move(what)); }

}  // namespace bbca
