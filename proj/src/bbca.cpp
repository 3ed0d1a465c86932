// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/bbca.hpp"

#include <set>

namespace bbca {

Bytes instance_statement(StatementKind kind, const InstanceId& instance, const Digest& message) {
    ByteWriter w;
    w.text(kind == StatementKind::Echo ? "ECHO" : "READY")
        .u32(instance.sender.index)
        .u64(instance.view)
        .digest(message);
    return w.take();
}

namespace {

bool verify_quorum(StatementKind kind, const InstanceId& instance, const Digest& message,
                   const std::vector<Signature>& sigs, const SystemParams& params) {
    if (sigs.size() < quorum_size(params)) {
        return false;
    }
    const Bytes statement = instance_statement(kind, instance, message);
    std::set<std::uint32_t> signers;
    for (const auto& sig : sigs) {
        if (sig.signer.index >= params.n || !signers.insert(sig.signer.index).second) {
            return false;
        }
        if (!verify(sig, statement, sig.signer)) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool verify_adopt_cert(const AdoptCert& cert, const SystemParams& params) {
    return verify_quorum(StatementKind::Echo, cert.instance, cert.message, cert.sigs, params);
}

bool verify_complete_cert(const CompleteCert& cert, const SystemParams& params) {
    return verify_quorum(StatementKind::Ready, cert.instance, cert.message, cert.sigs, params);
}

const char* to_string(BbcaKind kind) {
    switch (kind) {
        case BbcaKind::Init:
            return "INIT";
        case BbcaKind::Echo:
            return "ECHO";
        case BbcaKind::Ready:
            return "READY";
    }
    return "?";
}

}  // namespace bbca
