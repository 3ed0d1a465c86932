// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/block.hpp"

#include <doctest.h>

#include <string>

using namespace bbca;

namespace {

const SystemParams kParams = SystemParams::for_nodes(4);

Bytes text_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

BlockPtr data_block(std::uint32_t author, View view, std::vector<Digest> refs, std::string_view payload) {
    Block b;
    b.kind = BlockKind::Data;
    b.author = NodeId{author};
    b.view = view;
    b.refs = std::move(refs);
    b.payload = text_bytes(payload);
    return seal(std::move(b));
}

CompleteCert complete_for(View view, const Digest& message) {
    const InstanceId id{get_proposer(view, kParams), view};
    CompleteCert c{id, message, {}};
    for (std::uint32_t k = 0; k < 3; ++k) {
        c.sigs.push_back(sign(NodeId{k}, ready_statement(id, message)));
    }
    return c;
}

AdoptCert adopt_for(View view, const Digest& message) {
    const InstanceId id{get_proposer(view, kParams), view};
    AdoptCert c{id, message, {}};
    for (std::uint32_t k = 1; k < 4; ++k) {
        c.sigs.push_back(sign(NodeId{k}, echo_statement(id, message)));
    }
    return c;
}

Block new_view(std::uint32_t author, View view, const Digest& certified, NewViewEvidence ev) {
    Block b;
    b.kind = BlockKind::NewView;
    b.author = NodeId{author};
    b.view = view;
    b.refs = {certified};
    b.evidence = std::move(ev);
    return b;
}

}  // namespace

TEST_CASE("digest covers every field") {
    const auto g = genesis_block()->digest;
    const auto base = data_block(1, 2, {g}, "x");
    CHECK(base->digest == sha256(encode(*base)));
    CHECK(data_block(1, 2, {g}, "x")->digest == base->digest);
    CHECK(data_block(2, 2, {g}, "x")->digest != base->digest);
    CHECK(data_block(1, 3, {g}, "x")->digest != base->digest);
    CHECK(data_block(1, 2, {}, "x")->digest != base->digest);
    CHECK(data_block(1, 2, {g}, "y")->digest != base->digest);
}

TEST_CASE("data block encoding layout") {
    const auto g = genesis_block()->digest;
    const auto b = data_block(3, 5, {g}, "ab");
    ByteWriter w;
    w.u8(3).u32(3).u64(5).u32(1).digest(g).text("ab");
    CHECK(encode(*b) == w.data());
}

TEST_CASE("proposer rotates round robin") {
    for (View v = 0; v < 12; ++v) {
        CHECK(get_proposer(v, kParams).index == v % 4);
    }
}

TEST_CASE("genesis anchors") {
    CHECK(genesis_block()->kind == BlockKind::Backbone);
    CHECK(genesis_block()->view == 0);
    CHECK(is_genesis_cert(BlockCert{genesis_cert()}));
    CHECK(cert_valid(BlockCert{genesis_cert()}, kParams));
    CHECK(genesis_new_view_block()->refs == std::vector<Digest>{genesis_block()->digest});
    // An empty certificate outside genesis is not valid.
    CHECK_FALSE(cert_valid(BlockCert{CompleteCert{InstanceId{NodeId{1}, 1}, genesis_block()->digest, {}}}, kParams));
}

TEST_CASE("certificate validity checks proposer and signatures") {
    const auto m = sha256(text_bytes("m"));
    CHECK(cert_valid(BlockCert{complete_for(1, m)}, kParams));
    CHECK(cert_valid(BlockCert{adopt_for(2, m)}, kParams));
    auto wrong_sender = complete_for(1, m);
    wrong_sender.instance.sender = NodeId{2};
    CHECK_FALSE(cert_valid(BlockCert{wrong_sender}, kParams));
    auto short_cert = adopt_for(2, m);
    short_cert.sigs.pop_back();
    CHECK_FALSE(cert_valid(BlockCert{short_cert}, kParams));
}

TEST_CASE("new-view well-formedness") {
    const auto m = data_block(1, 1, {genesis_block()->digest}, "backbone stand-in")->digest;
    CHECK(new_view_well_formed(new_view(2, 1, m, complete_for(1, m)), kParams));
    CHECK(new_view_well_formed(new_view(2, 1, m, adopt_for(1, m)), kParams));
    // Certificate for another view.
    CHECK_FALSE(new_view_well_formed(new_view(2, 2, m, complete_for(1, m)), kParams));
    // Certified block not referenced.
    auto unref = new_view(2, 1, m, complete_for(1, m));
    unref.refs = {genesis_block()->digest};
    CHECK_FALSE(new_view_well_formed(unref, kParams));

    NoAdoptVote vote{sign(NodeId{3}, noadopt_statement(4)), CertifiedRef{1, m, complete_for(1, m)}};
    CHECK(new_view_well_formed(new_view(3, 4, m, vote), kParams));
    // Vote signed by someone else, or for another view.
    NoAdoptVote forged = vote;
    forged.sig = sign(NodeId{2}, noadopt_statement(4));
    CHECK_FALSE(new_view_well_formed(new_view(3, 4, m, forged), kParams));
    NoAdoptVote stale = vote;
    stale.sig = sign(NodeId{3}, noadopt_statement(5));
    CHECK_FALSE(new_view_well_formed(new_view(3, 4, m, stale), kParams));
    // The highest certificate must come from an earlier view.
    CHECK_FALSE(new_view_well_formed(new_view(3, 1, m, NoAdoptVote{sign(NodeId{3}, noadopt_statement(1)),
                                                                  CertifiedRef{1, m, complete_for(1, m)}}),
                                     kParams));
    // Genesis certificate is a valid highest reference.
    NoAdoptVote from_genesis{sign(NodeId{1}, noadopt_statement(1)),
                             CertifiedRef{0, genesis_block()->digest, genesis_cert()}};
    CHECK(new_view_well_formed(new_view(1, 1, genesis_block()->digest, from_genesis), kParams));
}

TEST_CASE("backbone well-formedness") {
    const auto m = genesis_block()->digest;
    const auto nv = seal(new_view(2, 1, m, complete_for(1, m)));
    Block b;
    b.kind = BlockKind::Backbone;
    b.author = NodeId{2};
    b.view = 2;
    b.refs = {nv->digest};
    b.justification = Justification{JustificationKind::Completed, {nv->digest}};
    b.embedded = nv;
    CHECK(backbone_well_formed(b, kParams));

    Block wrong_leader = b;
    wrong_leader.author = NodeId{1};
    CHECK_FALSE(backbone_well_formed(wrong_leader, kParams));

    Block missing_ref = b;
    missing_ref.refs = {m};
    CHECK_FALSE(backbone_well_formed(missing_ref, kParams));

    Block noadopt = b;
    noadopt.embedded = nullptr;
    noadopt.justification = Justification{JustificationKind::NoAdopted, {nv->digest}};
    CHECK_FALSE(backbone_well_formed(noadopt, kParams));  // needs 2f+1 new-view blocks

    std::vector<Digest> three;
    for (std::uint32_t a = 0; a < 3; ++a) {
        three.push_back(seal(new_view(a, 1, m, complete_for(1, m)))->digest);
    }
    noadopt.refs = three;
    noadopt.justification = Justification{JustificationKind::NoAdopted, three};
    CHECK(backbone_well_formed(noadopt, kParams));
    noadopt.justification->new_view_blocks[2] = three[0];
    CHECK_FALSE(backbone_well_formed(noadopt, kParams));

    CHECK(data_well_formed(*data_block(0, 1, {m}, "")));
    CHECK_FALSE(data_well_formed(b));
}
