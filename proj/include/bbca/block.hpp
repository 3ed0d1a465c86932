// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/bbca.hpp"
#include "bbca/crypto.hpp"

#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace bbca {

enum class BlockKind : std::uint8_t { Backbone = 1, NewView = 2, Data = 3 };

const char* to_string(BlockKind kind);

using BlockCert = std::variant<CompleteCert, AdoptCert>;

/// A certificate together with the backbone block it certifies.
struct CertifiedRef {
    View view = 0;
    Digest block;
    BlockCert cert;
};

struct NoAdoptVote {
    Signature sig;          // over ("NOADOPT", view)
    CertifiedRef highest;   // highest completed or adopted backbone block known locally
};

/// What a new-view block reports about the view it concludes.
using NewViewEvidence = std::variant<CompleteCert, AdoptCert, NoAdoptVote>;

enum class JustificationKind : std::uint8_t { Completed = 1, Adopted = 2, NoAdopted = 3 };

const char* to_string(JustificationKind kind);

/// How a backbone block of view v accounts for view v-1: one new-view block
/// with a complete or adopt certificate, or 2f+1 signed noadopt new-view blocks.
struct Justification {
    JustificationKind kind = JustificationKind::Completed;
    std::vector<Digest> new_view_blocks;
};

struct Block;
using BlockPtr = std::shared_ptr<const Block>;

struct Block {
    BlockKind kind = BlockKind::Data;
    NodeId author;
    View view = 0;
    std::vector<Digest> refs;
    Bytes payload;
    std::optional<NewViewEvidence> evidence;      // NewView only
    std::optional<Justification> justification;  // Backbone only
    BlockPtr embedded;                            // Backbone only: the leader's own new-view block
    Digest digest;                                // set by seal()
};

/// Canonical encoding:
///   u8 kind | u32 author | u64 view | u32 ref_count | ref digests (32 bytes each)
///   | kind-specific bytes | u32 payload_len | payload
/// The digest of a block is SHA-256 over this encoding.
Bytes encode(const Block& block);

/// Computes the digest and freezes the block.
BlockPtr seal(Block block);

inline Digest message_digest(const BlockPtr& block) { return block->digest; }

/// ("NOADOPT", view u64).
Bytes noadopt_statement(View view);

/// Round-robin leader rotation: view mod n.
NodeId get_proposer(View view, const SystemParams& params);

/// Well-known view-0 constants shared by every node.
const BlockPtr& genesis_block();
const BlockPtr& genesis_new_view_block();
const CompleteCert& genesis_cert();

bool is_genesis_cert(const BlockCert& cert);

View cert_view(const BlockCert& cert);
const Digest& cert_message(const BlockCert& cert);

/// Verifies a certificate; the synthetic genesis certificate is accepted as is.
bool cert_valid(const BlockCert& cert, const SystemParams& params);

/// Signature, certificate and shape checks that need no ancestry.
bool new_view_well_formed(const Block& block, const SystemParams& params);
bool backbone_well_formed(const Block& block, const SystemParams& params);
bool data_well_formed(const Block& block);

}  // namespace bbca
