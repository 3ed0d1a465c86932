// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "bbca/block.hpp"

#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bbca {

using DigestSet = std::unordered_set<Digest>;

class DagError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Causal block store. A block is delivered only once every block it
/// references is delivered; until then it waits in a pending buffer.
class DagStore {
public:
    DagStore() = default;

    /// Returns the blocks delivered by this insertion (the block itself and
    /// any buffered descendants it unblocked), in topological order.
    /// Duplicates return an empty list. Throws DagError on a self reference.
    std::vector<BlockPtr> insert(BlockPtr block);

    bool delivered(const Digest& d) const { return delivered_.contains(d); }
    bool known(const Digest& d) const { return delivered_.contains(d) || pending_.contains(d); }

    /// Throws DagError when `d` is not delivered.
    const BlockPtr& get(const Digest& d) const;

    /// Transitive closure of refs from `root`, including `root`.
    DigestSet ancestry(const Digest& root) const;

    /// Deterministic linear extension of ancestry(backbone) minus
    /// `already_committed`, ending with `backbone`. Ready blocks are emitted
    /// smallest (view, author, digest) first. `already_committed` must be
    /// closed under ancestry, which holds when it is a union of ancestries.
    std::vector<Digest> order_under(const Digest& backbone, const DigestSet& already_committed) const;

    std::size_t delivered_count() const { return delivered_.size(); }
    std::size_t pending_count() const { return pending_.size(); }
    const std::unordered_map<Digest, BlockPtr>& delivered_blocks() const { return delivered_; }

private:
    struct Pending {
        BlockPtr block;
        std::size_t missing = 0;
    };

    std::unordered_map<Digest, BlockPtr> delivered_;
    std::unordered_map<Digest, Pending> pending_;
    std::unordered_map<Digest, std::vector<Digest>> waiters_;
};

}  // namespace bbca
