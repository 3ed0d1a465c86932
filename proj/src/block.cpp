// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/block.hpp"

#include <algorithm>
#include <set>

namespace bbca {

const char* to_string(BlockKind kind) {
    switch (kind) {
        case BlockKind::Backbone:
            return "backbone";
        case BlockKind::NewView:
            return "new-view";
        case BlockKind::Data:
            return "data";
    }
    return "?";
}

const char* to_string(JustificationKind kind) {
    switch (kind) {
        case JustificationKind::Completed:
            return "completed";
        case JustificationKind::Adopted:
            return "adopted";
        case JustificationKind::NoAdopted:
            return "noadopted";
    }
    return "?";
}

namespace {

void write_sigs(ByteWriter& w, const std::vector<Signature>& sigs) {
    w.u32(static_cast<std::uint32_t>(sigs.size()));
    for (const auto& s : sigs) {
        w.u32(s.signer.index).u64(s.tag);
    }
}

void write_cert(ByteWriter& w, const BlockCert& cert) {
    std::visit(
        [&](const auto& c) {
            w.u8(std::is_same_v<std::decay_t<decltype(c)>, CompleteCert> ? 1 : 2);
            w.u32(c.instance.sender.index).u64(c.instance.view).digest(c.message);
            write_sigs(w, c.sigs);
        },
        cert);
}

void write_block(ByteWriter& w, const Block& b) {
    w.u8(static_cast<std::uint8_t>(b.kind)).u32(b.author.index).u64(b.view);
    w.u32(static_cast<std::uint32_t>(b.refs.size()));
    for (const auto& r : b.refs) {
        w.digest(r);
    }
    switch (b.kind) {
        case BlockKind::NewView:
            if (!b.evidence) {
                w.u8(0);
                break;
            }
            if (const auto* c = std::get_if<CompleteCert>(&*b.evidence)) {
                write_cert(w, BlockCert{*c});
            } else if (const auto* a = std::get_if<AdoptCert>(&*b.evidence)) {
                write_cert(w, BlockCert{*a});
            } else {
                const auto& vote = std::get<NoAdoptVote>(*b.evidence);
                w.u8(3).u32(vote.sig.signer.index).u64(vote.sig.tag);
                w.u64(vote.highest.view).digest(vote.highest.block);
                write_cert(w, vote.highest.cert);
            }
            break;
        case BlockKind::Backbone:
            if (!b.justification) {
                w.u8(0);
            } else {
                w.u8(static_cast<std::uint8_t>(b.justification->kind));
                w.u32(static_cast<std::uint32_t>(b.justification->new_view_blocks.size()));
                for (const auto& d : b.justification->new_view_blocks) {
                    w.digest(d);
                }
            }
            if (b.embedded) {
                w.u8(1).bytes(encode(*b.embedded));
            } else {
                w.u8(0);
            }
            break;
        case BlockKind::Data:
            break;
    }
    w.bytes(b.payload);
}

bool contains(const std::vector<Digest>& refs, const Digest& d) {
    return std::find(refs.begin(), refs.end(), d) != refs.end();
}

BlockPtr make_genesis() {
    Block g;
    g.kind = BlockKind::Backbone;
    g.author = NodeId{0};
    g.view = 0;
    const std::string tag = "genesis";
    g.payload.assign(tag.begin(), tag.end());
    return seal(std::move(g));
}

}  // namespace

Bytes encode(const Block& block) {
    ByteWriter w;
    write_block(w, block);
    return w.take();
}

BlockPtr seal(Block block) {
    block.digest = sha256(encode(block));
    return std::make_shared<const Block>(std::move(block));
}

Bytes noadopt_statement(View view) {
    ByteWriter w;
    w.text("NOADOPT").u64(view);
    return w.take();
}

NodeId get_proposer(View view, const SystemParams& params) {
    return NodeId{static_cast<std::uint32_t>(view % params.n)};
}

const BlockPtr& genesis_block() {
    static const BlockPtr g = make_genesis();
    return g;
}

const CompleteCert& genesis_cert() {
    static const CompleteCert c{InstanceId{NodeId{0}, 0}, genesis_block()->digest, {}};
    return c;
}

const BlockPtr& genesis_new_view_block() {
    static const BlockPtr nv = [] {
        Block b;
        b.kind = BlockKind::NewView;
        b.author = NodeId{0};
        b.view = 0;
        b.refs = {genesis_block()->digest};
        b.evidence = NewViewEvidence{genesis_cert()};
        return seal(std::move(b));
    }();
    return nv;
}

bool is_genesis_cert(const BlockCert& cert) {
    const auto* c = std::get_if<CompleteCert>(&cert);
    return c != nullptr && *c == genesis_cert();
}

View cert_view(const BlockCert& cert) {
    return std::visit([](const auto& c) { return c.instance.view; }, cert);
}

const Digest& cert_message(const BlockCert& cert) {
    return std::visit([](const auto& c) -> const Digest& { return c.message; }, cert);
}

bool cert_valid(const BlockCert& cert, const SystemParams& params) {
    if (is_genesis_cert(cert)) {
        return true;
    }
    if (cert_view(cert) == 0) {
        return false;
    }
    const InstanceId& id = std::visit([](const auto& c) -> const InstanceId& { return c.instance; }, cert);
    if (id.sender != get_proposer(id.view, params)) {
        return false;
    }
    if (const auto* c = std::get_if<CompleteCert>(&cert)) {
        return verify_complete_cert(*c, params);
    }
    return verify_adopt_cert(std::get<AdoptCert>(cert), params);
}

bool new_view_well_formed(const Block& b, const SystemParams& params) {
    if (b.kind != BlockKind::NewView || !b.evidence || b.justification || b.embedded || b.view == 0 ||
        b.author.index >= params.n) {
        return false;
    }
    if (const auto* vote = std::get_if<NoAdoptVote>(&*b.evidence)) {
        return vote->sig.signer == b.author && verify(vote->sig, noadopt_statement(b.view), b.author) &&
               vote->highest.view < b.view && cert_view(vote->highest.cert) == vote->highest.view &&
               cert_message(vote->highest.cert) == vote->highest.block && cert_valid(vote->highest.cert, params) &&
               contains(b.refs, vote->highest.block);
    }
    const BlockCert cert = std::holds_alternative<CompleteCert>(*b.evidence)
                               ? BlockCert{std::get<CompleteCert>(*b.evidence)}
                               : BlockCert{std::get<AdoptCert>(*b.evidence)};
    return cert_view(cert) == b.view && cert_valid(cert, params) && contains(b.refs, cert_message(cert));
}

bool backbone_well_formed(const Block& b, const SystemParams& params) {
    if (b.kind != BlockKind::Backbone || !b.justification || b.evidence || b.view == 0 ||
        b.author != get_proposer(b.view, params)) {
        return false;
    }
    const auto& just = *b.justification;
    const auto& nvs = just.new_view_blocks;
    if (just.kind == JustificationKind::NoAdopted) {
        if (nvs.size() < quorum_size(params) || std::set<Digest>(nvs.begin(), nvs.end()).size() != nvs.size()) {
            return false;
        }
    } else if (nvs.size() != 1) {
        return false;
    }
    for (const auto& d : nvs) {
        if (!contains(b.refs, d)) {
            return false;
        }
    }
    if (b.embedded) {
        if (b.embedded->author != b.author || !contains(nvs, b.embedded->digest) ||
            !new_view_well_formed(*b.embedded, params)) {
            return false;
        }
    }
    return true;
}

bool data_well_formed(const Block& b) {
    return b.kind == BlockKind::Data && !b.evidence && !b.justification && !b.embedded;
}

}  // namespace bbca
