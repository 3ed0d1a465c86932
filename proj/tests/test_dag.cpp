// Copyright 2026 The bbca-chain Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "bbca/dag.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>
#include <random>
#include <set>

using namespace bbca;

namespace {

BlockPtr make(std::uint32_t author, View view, std::vector<Digest> refs, std::uint64_t salt) {
    Block b;
    b.kind = BlockKind::Data;
    b.author = NodeId{author};
    b.view = view;
    b.refs = std::move(refs);
    ByteWriter w;
    w.u64(salt);
    b.payload = w.take();
    return seal(std::move(b));
}

// Random DAG rooted at genesis; each block refs 1-3 earlier blocks.
std::vector<BlockPtr> random_dag(std::mt19937_64& rng, std::size_t size) {
    std::vector<BlockPtr> blocks{genesis_block()};
    for (std::size_t i = 1; i < size; ++i) {
        std::set<Digest> refs;
        const std::size_t k = 1 + rng() % 3;
        for (std::size_t j = 0; j < k; ++j) {
            refs.insert(blocks[rng() % blocks.size()]->digest);
        }
        blocks.push_back(make(static_cast<std::uint32_t>(rng() % 4), rng() % 5, {refs.begin(), refs.end()}, i));
    }
    return blocks;
}

// Reference closure by repeated fixpoint over all edges.
std::set<Digest> closure_oracle(const std::vector<BlockPtr>& blocks, const Digest& root) {
    std::map<Digest, BlockPtr> by_digest;
    for (const auto& b : blocks) {
        by_digest[b->digest] = b;
    }
    std::set<Digest> out{root};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& d : std::vector<Digest>(out.begin(), out.end())) {
            for (const auto& r : by_digest.at(d)->refs) {
                grew |= out.insert(r).second;
            }
        }
    }
    return out;
}

bool respects_partial_order(const std::vector<Digest>& order, const DagStore& dag) {
    std::map<Digest, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) {
        pos[order[i]] = i;
    }
    for (const auto& d : order) {
        for (const auto& r : dag.get(d)->refs) {
            auto it = pos.find(r);
            if (it != pos.end() && it->second > pos[d]) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("blocks wait for missing ancestors") {
    DagStore dag;
    CHECK(dag.insert(genesis_block()).size() == 1);
    const auto a = make(0, 1, {genesis_block()->digest}, 1);
    const auto b = make(1, 1, {a->digest}, 2);
    const auto c = make(2, 1, {a->digest, b->digest}, 3);
    CHECK(dag.insert(c).empty());
    CHECK(dag.insert(b).empty());
    CHECK(dag.known(c->digest));
    CHECK_FALSE(dag.delivered(c->digest));
    CHECK(dag.pending_count() == 2);
    const auto released = dag.insert(a);
    REQUIRE(released.size() == 3);
    CHECK(released[0]->digest == a->digest);
    CHECK(released[1]->digest == b->digest);
    CHECK(released[2]->digest == c->digest);
    CHECK(dag.pending_count() == 0);
    CHECK(dag.insert(a).empty());
    CHECK_THROWS_AS(dag.get(sha256(Bytes{9})), DagError);
}

TEST_CASE("random arrival orders deliver every block after its ancestry") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 50; ++round) {
        auto blocks = random_dag(rng, 40);
        auto shuffled = blocks;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        DagStore dag;
        std::set<Digest> seen;
        for (const auto& b : shuffled) {
            for (const auto& out : dag.insert(b)) {
                for (const auto& r : out->refs) {
                    CHECK(seen.contains(r));
                }
                CHECK(seen.insert(out->digest).second);
            }
        }
        CHECK(seen.size() == blocks.size());
    }
}

TEST_CASE("ancestry matches the fixpoint closure") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 30; ++round) {
        auto blocks = random_dag(rng, 60);
        DagStore dag;
        for (const auto& b : blocks) {
            dag.insert(b);
        }
        for (int probe = 0; probe < 5; ++probe) {
            const auto& root = blocks[rng() % blocks.size()]->digest;
            const auto got = dag.ancestry(root);
            CHECK(std::set<Digest>(got.begin(), got.end()) == closure_oracle(blocks, root));
        }
    }
}

TEST_CASE("order_under is a deterministic linear extension") {
    std::mt19937_64 rng(13);
    for (int round = 0; round < 30; ++round) {
        auto blocks = random_dag(rng, 50);
        DagStore dag;
        DagStore other;
        for (const auto& b : blocks) {
            dag.insert(b);
        }
        auto shuffled = blocks;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (const auto& b : shuffled) {
            other.insert(b);
        }
        // Commit two roots in sequence, the second under the first's ancestry.
        const auto& first = blocks[blocks.size() / 2]->digest;
        const auto& second = blocks.back()->digest;
        const auto first_order = dag.order_under(first, {});
        CHECK(first_order.back() == first);
        CHECK(std::set<Digest>(first_order.begin(), first_order.end()) == closure_oracle(blocks, first));
        CHECK(respects_partial_order(first_order, dag));
        CHECK(first_order == other.order_under(first, {}));

        DigestSet committed(first_order.begin(), first_order.end());
        const auto second_order = dag.order_under(second, committed);
        std::set<Digest> expect = closure_oracle(blocks, second);
        for (const auto& d : first_order) {
            expect.erase(d);
        }
        CHECK(std::set<Digest>(second_order.begin(), second_order.end()) == expect);
        CHECK(respects_partial_order(second_order, dag));
        CHECK(second_order == other.order_under(second, committed));
    }
}

TEST_CASE("order_under ties break by view, author, digest") {
    DagStore dag;
    dag.insert(genesis_block());
    const auto g = genesis_block()->digest;
    const auto late = make(0, 3, {g}, 1);
    const auto high_author = make(3, 1, {g}, 2);
    const auto low_author = make(1, 1, {g}, 3);
    const auto root = make(2, 4, {late->digest, high_author->digest, low_author->digest}, 4);
    for (const auto& b : {late, high_author, low_author, root}) {
        dag.insert(b);
    }
    const auto order = dag.order_under(root->digest, {g});
    const std::vector<Digest> expect{low_author->digest, high_author->digest, late->digest, root->digest};
    CHECK(order == expect);
}

TEST_CASE("self reference is rejected") {
    DagStore dag;
    Block b;
    b.kind = BlockKind::Data;
    b.refs = {};
    auto sealed = seal(b);
    Block self = *sealed;
    self.refs = {sealed->digest};
    // The digest changes when refs change, so a self reference must be built by hand.
    self.digest = sealed->digest;
    CHECK_THROWS_AS(dag.insert(std::make_shared<const Block>(self)), DagError);
}

// On small DAGs, every permutation is enumerated; the order must be the
// lexicographically smallest valid one under the (view, author, digest) key.
TEST_CASE("order_under equals the brute-force minimal linear extension") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 40; ++round) {
        auto blocks = random_dag(rng, 7);
        DagStore dag;
        for (const auto& b : blocks) {
            dag.insert(b);
        }
        const auto& root = blocks.back()->digest;
        auto region = closure_oracle(blocks, root);
        region.erase(genesis_block()->digest);
        const DigestSet committed{genesis_block()->digest};
        if (!region.contains(root)) {
            continue;
        }
        auto key = [&](const Digest& d) {
            const auto& b = dag.get(d);
            return std::tuple{b->view, b->author.index, d};
        };
        std::vector<Digest> perm(region.begin(), region.end());
        std::sort(perm.begin(), perm.end());
        std::optional<std::vector<Digest>> best;
        do {
            if (!respects_partial_order(perm, dag)) {
                continue;
            }
            auto less = [&](const std::vector<Digest>& a, const std::vector<Digest>& b) {
                for (std::size_t i = 0; i < a.size(); ++i) {
                    if (key(a[i]) != key(b[i])) {
                        return key(a[i]) < key(b[i]);
                    }
                }
                return false;
            };
            if (!best || less(perm, *best)) {
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        REQUIRE(best);
        CHECK(dag.order_under(root, committed) == *best);
    }
}
