// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/dag.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <tuple>

namespace bbca {

std::vector<BlockPtr> DagStore::insert(BlockPtr block) {
    const Digest d = block->digest;
    if (known(d)) {
        return {};
    }
    if (std::find(block->refs.begin(), block->refs.end(), d) != block->refs.end()) {
        throw DagError("block references itself: " + d.short_hex());
    }

    std::size_t missing = 0;
    for (const auto& r : std::set<Digest>(block->refs.begin(), block->refs.end())) {
        if (!delivered_.contains(r)) {
            ++missing;
            waiters_[r].push_back(d);
        }
    }
    if (missing > 0) {
        pending_.emplace(d, Pending{std::move(block), missing});
        return {};
    }

    std::vector<BlockPtr> out;
    std::vector<BlockPtr> ready{std::move(block)};
    while (!ready.empty()) {
        BlockPtr b = std::move(ready.back());
        ready.pop_back();
        const Digest bd = b->digest;
        delivered_.emplace(bd, b);
        out.push_back(b);
        auto w = waiters_.find(bd);
        if (w == waiters_.end()) {
            continue;
        }
        std::vector<Digest> children = std::move(w->second);
        waiters_.erase(w);
        // Reverse so the earliest-waiting child is delivered first.
        for (auto it = children.rbegin(); it != children.rend(); ++it) {
            auto p = pending_.find(*it);
            if (p == pending_.end()) {
                continue;
            }
            if (--p->second.missing == 0) {
                ready.push_back(std::move(p->second.block));
                pending_.erase(p);
            }
        }
    }
    return out;
}

const BlockPtr& DagStore::get(const Digest& d) const {
    auto it = delivered_.find(d);
    if (it == delivered_.end()) {
        throw DagError("unknown block " + d.short_hex());
    }
    return it->second;
}

DigestSet DagStore::ancestry(const Digest& root) const {
    DigestSet seen;
    std::vector<Digest> stack{get(root)->digest};
    seen.insert(root);
    while (!stack.empty()) {
        const Digest d = stack.back();
        stack.pop_back();
        for (const auto& r : get(d)->refs) {
            if (seen.insert(r).second) {
                stack.push_back(r);
            }
        }
    }
    return seen;
}

std::vector<Digest> DagStore::order_under(const Digest& backbone, const DigestSet& already_committed) const {
    (void)get(backbone);
    if (already_committed.contains(backbone)) {
        return {};
    }

    // Collect the uncommitted part of the ancestry.
    DigestSet region{backbone};
    std::vector<Digest> stack{backbone};
    while (!stack.empty()) {
        const Digest d = stack.back();
        stack.pop_back();
        for (const auto& r : get(d)->refs) {
            if (!already_committed.contains(r) && region.insert(r).second) {
                stack.push_back(r);
            }
        }
    }

    // Kahn's algorithm, parents before children.
    std::unordered_map<Digest, std::size_t> indegree;
    std::unordered_map<Digest, std::vector<Digest>> children;
    for (const auto& d : region) {
        std::size_t deg = 0;
        for (const auto& r : std::set<Digest>(get(d)->refs.begin(), get(d)->refs.end())) {
            if (region.contains(r)) {
                ++deg;
                children[r].push_back(d);
            }
        }
        indegree[d] = deg;
    }

    using Key = std::tuple<View, std::uint32_t, Digest>;
    auto key = [&](const Digest& d) {
        const auto& b = get(d);
        return Key{b->view, b->author.index, d};
    };
    std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
    for (const auto& [d, deg] : indegree) {
        if (deg == 0) {
            ready.push(key(d));
        }
    }

    std::vector<Digest> out;
    out.reserve(region.size());
    while (!ready.empty()) {
        const Digest d = std::get<2>(ready.top());
        ready.pop();
        out.push_back(d);
        for (const auto& c : children[d]) {
            if (--indegree[c] == 0) {
                ready.push(key(c));
            }
        }
    }
    return out;
}

}  // namespace bbca
