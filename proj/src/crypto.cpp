// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/crypto.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace bbca {

SystemParams SystemParams::for_nodes(std::uint32_t n) {
    if (n == 0) {
        throw std::invalid_argument("node count must be positive");
    }
    return SystemParams{n, (n - 1) / 3};
}

// Smallest size whose pairwise intersections hold f + 1 nodes. Equals 2f + 1
// when n = 3f + 1; larger n needs more than 2f + 1 for quorums to overlap.
std::uint32_t quorum_size(const SystemParams& params) { return (params.n + params.f + 2) / 2; }

std::string Digest::hex() const {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : bytes) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xf]);
    }
    return out;
}

std::size_t DigestHash::operator()(const Digest& d) const noexcept {
    std::size_t h;
    std::memcpy(&h, d.bytes.data(), sizeof(h));
    return h;
}

Digest sha256(std::span<const std::uint8_t> data) {
    Digest d;
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr);
    return d;
}

Sha256Stream::Sha256Stream() : ctx_(EVP_MD_CTX_new()) {
    EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr);
}

Sha256Stream::~Sha256Stream() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256Stream::Sha256Stream(const Sha256Stream& other) : ctx_(EVP_MD_CTX_new()) {
    EVP_MD_CTX_copy_ex(static_cast<EVP_MD_CTX*>(ctx_), static_cast<EVP_MD_CTX*>(other.ctx_));
}

Sha256Stream& Sha256Stream::operator=(const Sha256Stream& other) {
    if (this != &other) {
        EVP_MD_CTX_copy_ex(static_cast<EVP_MD_CTX*>(ctx_), static_cast<EVP_MD_CTX*>(other.ctx_));
    }
    return *this;
}

void Sha256Stream::update(std::span<const std::uint8_t> data) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

void Sha256Stream::update(std::string_view text) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), text.data(), text.size());
}

Digest Sha256Stream::finish() const {
    Digest d;
    unsigned int len = 0;
    EVP_MD_CTX* copy = EVP_MD_CTX_new();
    EVP_MD_CTX_copy_ex(copy, static_cast<EVP_MD_CTX*>(ctx_));
    EVP_DigestFinal_ex(copy, d.bytes.data(), &len);
    EVP_MD_CTX_free(copy);
    return d;
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
    out_.push_back(v);
    return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

ByteWriter& ByteWriter::bytes(std::span<const std::uint8_t> v) {
    u32(static_cast<std::uint32_t>(v.size()));
    out_.insert(out_.end(), v.begin(), v.end());
    return *this;
}

ByteWriter& ByteWriter::text(std::string_view v) {
    return bytes({reinterpret_cast<const std::uint8_t*>(v.data()), v.size()});
}

ByteWriter& ByteWriter::digest(const Digest& d) {
    out_.insert(out_.end(), d.bytes.begin(), d.bytes.end());
    return *this;
}

namespace {

std::uint64_t signature_tag(NodeId node, std::span<const std::uint8_t> statement) {
    ByteWriter w;
    w.text("SIG").u32(node.index).digest(sha256(statement));
    const Digest d = sha256(w.data());
    std::uint64_t tag = 0;
    for (int i = 0; i < 8; ++i) {
        tag = (tag << 8) | d.bytes[i];
    }
    return tag;
}

}  // namespace

Signature sign(NodeId node, std::span<const std::uint8_t> statement) {
    return Signature{node, signature_tag(node, statement)};
}

bool verify(const Signature& sig, std::span<const std::uint8_t> statement, NodeId signer) {
    return sig.signer == signer && sig.tag == signature_tag(signer, statement);
}

}  // namespace bbca
