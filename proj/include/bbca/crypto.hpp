// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bbca {

using Bytes = std::vector<std::uint8_t>;
using View = std::uint64_t;
using Tick = std::uint64_t;

struct NodeId {
    std::uint32_t index = 0;

    auto operator<=>(const NodeId&) const = default;
};

/// Node count and the Byzantine budget derived from it. `f` is never
/// configured directly; it is always floor((n - 1) / 3).
struct SystemParams {
    std::uint32_t n = 4;
    std::uint32_t f = 1;

    static SystemParams for_nodes(std::uint32_t n);

    bool operator==(const SystemParams&) const = default;
};

/// ceil((n + f + 1) / 2); 2f + 1 when n = 3f + 1.
std::uint32_t quorum_size(const SystemParams& params);

struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Digest&) const = default;

    std::string hex() const;
    std::string short_hex() const { return hex().substr(0, 12); }
};

struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept;
};

Digest sha256(std::span<const std::uint8_t> data);

/// Incremental SHA-256, used for trace digests.
class Sha256Stream {
public:
    Sha256Stream();
    ~Sha256Stream();
    Sha256Stream(const Sha256Stream& other);
    Sha256Stream& operator=(const Sha256Stream& other);

    void update(std::span<const std::uint8_t> data);
    void update(std::string_view text);
    Digest finish() const;

private:
    void* ctx_;
};

/// Canonical big-endian serializer. Integers are fixed width, variable
/// byte strings carry a u32 length prefix, digests are written raw.
class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v);
    ByteWriter& u32(std::uint32_t v);
    ByteWriter& u64(std::uint64_t v);
    ByteWriter& bytes(std::span<const std::uint8_t> v);
    ByteWriter& text(std::string_view v);
    ByteWriter& digest(const Digest& d);

    const Bytes& data() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

/// Mock signature: the signer plus a 64-bit tag bound to (signer, statement).
/// Simulated adversaries are schedule-level only and never call `sign` on
/// behalf of a correct node.
struct Signature {
    NodeId signer;
    std::uint64_t tag = 0;

    bool operator==(const Signature&) const = default;
};

Signature sign(NodeId node, std::span<const std::uint8_t> statement);
bool verify(const Signature& sig, std::span<const std::uint8_t> statement, NodeId signer);

}  // namespace bbca

template <>
struct std::hash<bbca::Digest> {
    std::size_t operator()(const bbca::Digest& d) const noexcept { return bbca::DigestHash{}(d); }
};
