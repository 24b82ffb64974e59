// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "storage_proof.hpp"

using namespace tdsim;

namespace {

struct Fixture {
    SchemePtr scheme = std::make_shared<KeyedDigestScheme>();
    KeyPair owner, seeder;
    Payload payload;
    std::vector<std::vector<std::uint8_t>> leaves;
    ChunkCommitment commitment;
    std::vector<std::vector<std::uint8_t>> prefixes;
    ChallengeParams params; // k=2, W=10, mean 50, liveness 32

    explicit Fixture(std::size_t chunk_bytes = 1024, std::uint32_t leaf_size = 64)
        : owner(scheme->generate("owner")), seeder(scheme->generate("seeder")) {
        std::vector<std::uint8_t> chunk(chunk_bytes);
        for (std::size_t i = 0; i < chunk.size(); ++i)
            chunk[i] = static_cast<std::uint8_t>(i * 31 + 7);
        payload = build_payload(owner, as_bytes(chunk), seeder.public_key, sha256("n"));
        leaves = split_leaves(as_bytes(payload.ciphertext), leaf_size);
        commitment = commit_chunk(1, seeder.public_key, payload, leaf_size);
        prefixes = retain_leaf_prefixes(payload, leaf_size, params.liveness_len);
    }

    Challenge challenge_at(Tick issued, std::vector<std::uint32_t> idx) {
        Challenge c;
        c.challenge_id = 1;
        c.chunk_id = 1;
        c.seeder = seeder.public_key;
        c.leaf_indices = std::move(idx);
        c.issued_at = issued;
        c.deadline = issued + params.response_window;
        return c;
    }
};

// Second, independent merkle implementation: hash adjacent pairs level by
// level with no shared code path.
Digest oracle_root(const std::vector<std::vector<std::uint8_t>>& leaves) {
    std::vector<Digest> level;
    for (const auto& leaf : leaves) {
        Hasher h;
        std::uint8_t tag = 0;
        h.update(std::span<const std::uint8_t>(&tag, 1)).update(as_bytes(leaf));
        level.push_back(h.finalize());
    }
    while (level.size() > 1) {
        std::vector<Digest> up;
        for (std::size_t i = 0; i < level.size(); i += 2) {
            Hasher h;
            std::uint8_t tag = 1;
            h.update(std::span<const std::uint8_t>(&tag, 1))
                .update(level[i])
                .update(level[i + 1]);
            up.push_back(h.finalize());
        }
        level = std::move(up);
    }
    return level[0];
}

} // namespace

TEST_CASE("commitment root matches an independent merkle oracle") {
    Fixture f;
    CHECK(f.commitment.merkle_root == oracle_root(f.leaves));
    CHECK(f.commitment.leaf_count == f.leaves.size());
    CHECK((f.commitment.leaf_count & (f.commitment.leaf_count - 1)) == 0); // power of two
}

TEST_CASE("flipping one payload byte changes the root") {
    Fixture f;
    Payload mutated = f.payload;
    mutated.ciphertext[100] ^= 0x01;
    auto c2 = commit_chunk(1, f.seeder.public_key, mutated, 64);
    CHECK(c2.merkle_root != f.commitment.merkle_root);
}

TEST_CASE("tiny payload pads to two leaves") {
    SchemePtr scheme = std::make_shared<KeyedDigestScheme>();
    auto owner = scheme->generate("o");
    auto seeder = scheme->generate("s");
    std::vector<std::uint8_t> one_byte{0x42};
    auto p = build_payload(owner, as_bytes(one_byte), seeder.public_key, sha256("n"));
    // ciphertext is 65 bytes; with big leaves it still pads to >= 2 leaves
    auto c = commit_chunk(1, seeder.public_key, p, 256);
    CHECK(c.leaf_count == 2);
    CHECK_THROWS_AS(split_leaves({}, 64), TdError);
}

TEST_CASE("challenge schedule: empty horizon, bounds, distinct indices") {
    Fixture f;
    DetRng rng(3);
    std::uint64_t next_id = 0;
    CHECK(schedule_challenges(rng, f.commitment, f.params, 0, 0, next_id).empty());

    auto cs = schedule_challenges(rng, f.commitment, f.params, 0, 5000, next_id);
    CHECK(!cs.empty());
    for (const auto& c : cs) {
        CHECK(c.deadline == c.issued_at + f.params.response_window);
        CHECK(c.leaf_indices.size() == f.params.k);
        std::set<std::uint32_t> distinct(c.leaf_indices.begin(), c.leaf_indices.end());
        CHECK(distinct.size() == c.leaf_indices.size());
        for (auto i : c.leaf_indices) CHECK(i < f.commitment.leaf_count);
    }
    // ids keep counting up
    CHECK(cs.back().challenge_id == cs.size() - 1);
}

TEST_CASE("challenge count tracks the analytic mean over 50 seeds") {
    Fixture f;
    ChallengeParams p = f.params;
    p.mean_interval = 100.0;
    double total = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        DetRng rng(1000 + s);
        std::uint64_t id = 0;
        total += static_cast<double>(
            schedule_challenges(rng, f.commitment, p, 0, 10000, id).size());
    }
    double mean = total / seeds;
    CHECK(mean > 97.0);  // expected 100, sd of the mean ~1.4
    CHECK(mean < 103.0);
}

TEST_CASE("honest seeder passes; response is deterministic and timely") {
    Fixture f;
    auto c = f.challenge_at(100, {1, 5});
    auto r = respond(c, f.leaves, nullptr, f.params.liveness_len, 101);
    REQUIRE(r.has_value());
    CHECK(verify_response(c, *r, f.commitment, f.prefixes, 101) == ProofFail::None);
}

TEST_CASE("a seeder that deleted the payload cannot respond") {
    Fixture f;
    auto c = f.challenge_at(100, {1, 5});
    auto r = respond(c, f.leaves, [](std::uint32_t) { return false; },
                     f.params.liveness_len, 101);
    CHECK_FALSE(r.has_value());
}

TEST_CASE("response after the deadline fails Late") {
    Fixture f;
    auto c = f.challenge_at(100, {1, 5});
    auto ok = respond(c, f.leaves, nullptr, f.params.liveness_len, c.deadline);
    REQUIRE(ok.has_value());
    CHECK(verify_response(c, *ok, f.commitment, f.prefixes, c.deadline) == ProofFail::None);
    auto late = respond(c, f.leaves, nullptr, f.params.liveness_len, c.deadline + 1);
    REQUIRE(late.has_value());
    CHECK(verify_response(c, *late, f.commitment, f.prefixes, c.deadline + 1) == ProofFail::Late);
}

TEST_CASE("cross-seeder payload swap fails BadPath") {
    // Two seeders of the same chunk; commitments differ, so a response built
    // from the other seeder's payload cannot authenticate.
    SchemePtr scheme = std::make_shared<KeyedDigestScheme>();
    auto owner = scheme->generate("owner");
    auto s1 = scheme->generate("s1");
    auto s2 = scheme->generate("s2");
    std::vector<std::uint8_t> chunk(512, 0x3c);
    auto p1 = build_payload(owner, as_bytes(chunk), s1.public_key, sha256("n1"));
    auto p2 = build_payload(owner, as_bytes(chunk), s2.public_key, sha256("n2"));
    auto c1 = commit_chunk(1, s1.public_key, p1, 64);
    auto leaves2 = split_leaves(as_bytes(p2.ciphertext), 64);
    auto prefixes1 = retain_leaf_prefixes(p1, 64, 32);

    Challenge ch;
    ch.chunk_id = 1;
    ch.seeder = s1.public_key;
    ch.leaf_indices = {0, 3};
    ch.issued_at = 0;
    ch.deadline = 10;
    auto r = respond(ch, leaves2, nullptr, 32, 1);
    REQUIRE(r.has_value());
    CHECK(verify_response(ch, *r, c1, prefixes1, 1) == ProofFail::BadPath);
}

TEST_CASE("mutated paths, leaves, liveness and indices all fail") {
    Fixture f;
    auto c = f.challenge_at(0, {2, 7});
    auto good = respond(c, f.leaves, nullptr, f.params.liveness_len, 1);
    REQUIRE(good.has_value());

    SUBCASE("bit-flipped path node") {
        auto r = *good;
        r.leaves[0].path[1][4] ^= 0x80;
        CHECK(verify_response(c, r, f.commitment, f.prefixes, 1) == ProofFail::BadPath);
    }
    SUBCASE("bit-flipped leaf body") {
        auto r = *good;
        r.leaves[1].leaf[0] ^= 0x01;
        CHECK(verify_response(c, r, f.commitment, f.prefixes, 1) == ProofFail::BadPath);
    }
    SUBCASE("wrong liveness sample") {
        auto r = *good;
        r.liveness_sample[3] ^= 0x01;
        CHECK(verify_response(c, r, f.commitment, f.prefixes, 1) == ProofFail::BadLiveness);
    }
    SUBCASE("answered different indices") {
        auto r = *good;
        r.leaves[0].index = 3;
        CHECK(verify_response(c, r, f.commitment, f.prefixes, 1) == ProofFail::WrongIndices);
    }
    SUBCASE("truncated response") {
        auto r = *good;
        r.leaves.pop_back();
        CHECK(verify_response(c, r, f.commitment, f.prefixes, 1) == ProofFail::WrongIndices);
    }
}

TEST_CASE("negative fuzz: random path mutations never verify") {
    Fixture f;
    DetRng rng(77);
    auto c = f.challenge_at(0, {4, 9});
    auto good = respond(c, f.leaves, nullptr, f.params.liveness_len, 1);
    REQUIRE(good.has_value());
    for (int i = 0; i < 200; ++i) {
        auto r = *good;
        auto& pl = r.leaves[rng.uniform(r.leaves.size())];
        if (rng.bernoulli(0.5)) {
            auto& node = pl.path[rng.uniform(pl.path.size())];
            node[rng.uniform(32)] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
        } else {
            pl.leaf[rng.uniform(pl.leaf.size())] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
        }
        CHECK(verify_response(c, r, f.commitment, f.prefixes, 1) == ProofFail::BadPath);
    }
}

TEST_CASE("half-retention seeder: all-pass probability follows the binomial") {
    // k = 1 leaf per challenge, retention 0.5, 20 challenges per trial:
    // P(all pass) = 0.5^20. Over 100 trials at least 99 should contain
    // a failure (P(miss) = 100 * 0.5^20 ~ 1e-4).
    Fixture f;
    ChallengeParams p = f.params;
    p.k = 1;
    int trials_with_failure = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        DetRng sched_rng(5000 + t);
        DetRng keep_rng(9000 + t);
        std::uint64_t id = 0;
        bool failed = false;
        int issued = 0;
        // Issue exactly 20 challenges regardless of spacing.
        while (issued < 20) {
            auto cs = schedule_challenges(sched_rng, f.commitment, p, 0, 100000, id);
            for (const auto& c : cs) {
                if (issued >= 20) break;
                ++issued;
                auto r = respond(c, f.leaves,
                                 [&](std::uint32_t) { return keep_rng.bernoulli(0.5); },
                                 p.liveness_len, c.issued_at + 1);
                if (!r || verify_response(c, *r, f.commitment, f.prefixes, c.issued_at + 1) !=
                              ProofFail::None)
                    failed = true;
            }
        }
        trials_with_failure += failed ? 1 : 0;
    }
    CHECK(trials_with_failure >= 99);
}

TEST_CASE("session book aggregates results into one checkpoint per window") {
    SessionBook book;
    PubKey s1 = sha256("s1"), s2 = sha256("s2");
    book.record(s1, 1, true);
    book.record(s1, 1, true);
    book.record(s1, 1, false);
    book.record(s2, 2, true);
    auto cp = book.make_checkpoint(0, 100);
    REQUIRE(cp.results.size() == 2);
    CHECK(cp.results[0].challenges_passed + cp.results[1].challenges_passed == 3);
    CHECK(cp.results[0].challenges_failed + cp.results[1].challenges_failed == 1);
    CHECK_THROWS_AS(book.make_checkpoint(0, 100), TdError); // duplicate window
    book.record(s1, 1, true);
    auto cp2 = book.make_checkpoint(100, 200);
    CHECK(cp2.results.size() == 1);
}
