// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/crypto.hpp"

#include <concepts>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace bbca {

/// Identifies one broadcast instance: the designated sender and the view.
struct InstanceId {
    NodeId sender;
    View view = 0;

    auto operator<=>(const InstanceId&) const = default;
};

enum class StatementKind : std::uint8_t { Echo, Ready };

/// ("ECHO" | "READY", sender u32, view u64, digest[32]).
Bytes instance_statement(StatementKind kind, const InstanceId& instance, const Digest& message);
inline Bytes echo_statement(const InstanceId& i, const Digest& m) { return instance_statement(StatementKind::Echo, i, m); }
inline Bytes ready_statement(const InstanceId& i, const Digest& m) { return instance_statement(StatementKind::Ready, i, m); }

/// 2f+1 echo signatures: proof that no other message can complete in the instance.
struct AdoptCert {
    InstanceId instance;
    Digest message;
    std::vector<Signature> sigs;

    bool operator==(const AdoptCert&) const = default;
};

/// 2f+1 ready signatures: proof that some correct node completed the message.
struct CompleteCert {
    InstanceId instance;
    Digest message;
    std::vector<Signature> sigs;

    bool operator==(const CompleteCert&) const = default;
};

bool verify_adopt_cert(const AdoptCert& cert, const SystemParams& params);
bool verify_complete_cert(const CompleteCert& cert, const SystemParams& params);

class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class BbcaKind : std::uint8_t { Init, Echo, Ready };

const char* to_string(BbcaKind kind);

template <class M>
struct BbcaMessage {
    BbcaKind kind = BbcaKind::Init;
    InstanceId instance;
    M message;
    std::optional<Signature> sig;
};

template <class M>
struct Adopt {
    M message;
    AdoptCert cert;
};

struct NoAdopt {};

template <class M>
using ProbeResult = std::variant<NoAdopt, Adopt<M>>;

template <class M>
struct CompleteEvent {
    InstanceId instance;
    M message;
    CompleteCert cert;
};

/// A broadcast payload is anything with a canonical digest found by ADL.
template <class M>
concept BroadcastPayload = std::copyable<M> && requires(const M& m) {
    { message_digest(m) } -> std::same_as<Digest>;
};

struct AcceptAll {
    template <class M>
    bool operator()(const M&) const {
        return true;
    }
};

/// One node's view of one BBCA instance: Bracha echo/ready with an abort
/// flag set by probing, and no ready amplification. Every handler consumes
/// one input and returns the messages to broadcast to all nodes (the caller
/// also delivers them to the local node).
///
/// The validity predicate is passed per call so the instance stays a plain
/// value type.
template <BroadcastPayload M>
class BbcaInstance {
public:
    BbcaInstance(InstanceId instance, SystemParams params, NodeId self)
        : instance_(instance), params_(params), self_(self) {}

    const InstanceId& id() const { return instance_; }

    /// Sender-side start. Throws ProtocolError when this node already echoed.
    std::vector<BbcaMessage<M>> broadcast(const M& m) {
        if (self_ != instance_.sender) {
            throw ProtocolError("only the designated sender may broadcast");
        }
        if (echo_) {
            throw ProtocolError("instance already initialized");
        }
        std::vector<BbcaMessage<M>> out;
        out.push_back(BbcaMessage<M>{BbcaKind::Init, instance_, m, std::nullopt});
        out.push_back(become_initialized(m));
        return out;
    }

    /// Adopt if any message holds an echo quorum, otherwise abort.
    ProbeResult<M> probe() {
        if (auto adopt = adoptable()) {
            return *std::move(adopt);
        }
        abort_ = true;
        return NoAdopt{};
    }

    /// Adopt value without side effects, if an echo quorum exists.
    std::optional<Adopt<M>> adoptable() const {
        // A node that sent READY returns the message it readied.
        if (ready_for_) {
            const auto& ms = pending_.at(*ready_for_);
            return Adopt<M>{ms.message, AdoptCert{instance_, *ready_for_, ms.echo_sigs}};
        }
        for (const auto& [digest, ms] : pending_) {
            if (ms.echo_sigs.size() >= quorum_size(params_)) {
                return Adopt<M>{ms.message, AdoptCert{instance_, digest, ms.echo_sigs}};
            }
        }
        return std::nullopt;
    }

    template <class Pred = AcceptAll>
    std::vector<BbcaMessage<M>> on_init(const M& m, NodeId from, Pred&& valid = {}) {
        if (from != instance_.sender || echo_ || !valid(m)) {
            return {};
        }
        return {become_initialized(m)};
    }

    /// Echoes are keyed by signer, so relayed copies count once.
    template <class Pred = AcceptAll>
    std::vector<BbcaMessage<M>> on_echo(const M& m, const Signature& sig, NodeId from, Pred&& valid = {}) {
        (void)from;
        const Digest d = message_digest(m);
        if (sig.signer.index >= params_.n || received_echo_.contains(sig.signer.index)) {
            return {};
        }
        if (!verify(sig, echo_statement(instance_, d), sig.signer) || !valid(m)) {
            return {};
        }
        received_echo_.emplace(sig.signer.index, true);
        auto& ms = slot(d, m);
        ms.echo_sigs.push_back(sig);
        if (!ready_ && ms.echo_sigs.size() == quorum_size(params_)) {
            if (auto r = become_ready(d, m)) {
                return {*std::move(r)};
            }
        }
        return {};
    }

    /// Completion fires once, when the first message reaches 2f+1 readies.
    template <class Pred = AcceptAll>
    std::optional<CompleteEvent<M>> on_ready(const M& m, const Signature& sig, NodeId from, Pred&& valid = {}) {
        (void)from;
        const Digest d = message_digest(m);
        if (sig.signer.index >= params_.n || received_ready_.contains(sig.signer.index)) {
            return std::nullopt;
        }
        if (!verify(sig, ready_statement(instance_, d), sig.signer) || !valid(m)) {
            return std::nullopt;
        }
        received_ready_.emplace(sig.signer.index, true);
        auto& ms = slot(d, m);
        ms.ready_sigs.push_back(sig);
        if (ms.ready_sigs.size() == quorum_size(params_) && !completed_) {
            completed_ = CompleteEvent<M>{instance_, m, CompleteCert{instance_, d, ms.ready_sigs}};
            return completed_;
        }
        return std::nullopt;
    }

    bool echoed() const { return echo_; }
    bool ready() const { return ready_; }
    bool aborted() const { return abort_; }
    const std::optional<CompleteEvent<M>>& completed() const { return completed_; }

    std::size_t echo_count(const Digest& d) const {
        auto it = pending_.find(d);
        return it == pending_.end() ? 0 : it->second.echo_sigs.size();
    }
    std::size_t ready_count(const Digest& d) const {
        auto it = pending_.find(d);
        return it == pending_.end() ? 0 : it->second.ready_sigs.size();
    }

private:
    struct MessageState {
        M message;
        std::vector<Signature> echo_sigs;
        std::vector<Signature> ready_sigs;
    };

    MessageState& slot(const Digest& d, const M& m) {
        auto it = pending_.find(d);
        if (it == pending_.end()) {
            it = pending_.emplace(d, MessageState{m, {}, {}}).first;
        }
        return it->second;
    }

    BbcaMessage<M> become_initialized(const M& m) {
        echo_ = true;
        const Digest d = message_digest(m);
        return BbcaMessage<M>{BbcaKind::Echo, instance_, m, sign(self_, echo_statement(instance_, d))};
    }

    std::optional<BbcaMessage<M>> become_ready(const Digest& d, const M& m) {
        if (abort_) {
            return std::nullopt;
        }
        ready_ = true;
        ready_for_ = d;
        return BbcaMessage<M>{BbcaKind::Ready, instance_, m, sign(self_, ready_statement(instance_, d))};
    }

    InstanceId instance_;
    SystemParams params_;
    NodeId self_;
    std::map<Digest, MessageState> pending_;
    std::map<std::uint32_t, bool> received_echo_;
    std::map<std::uint32_t, bool> received_ready_;
    bool echo_ = false;
    bool ready_ = false;
    bool abort_ = false;
    std::optional<Digest> ready_for_;
    std::optional<CompleteEvent<M>> completed_;
};

}  // namespace bbca
