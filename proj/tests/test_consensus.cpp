// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "consensus.hpp"

using namespace tdsim;

namespace {

struct Fixture {
    SchemePtr scheme = std::make_shared<KeyedDigestScheme>();
    KeyPair a, b, c, d;
    TokenLedger ledger;
    StakePool pool{DetRng(42)};
    ChainState chain;

    Fixture()
        : a(scheme->generate("a")),
          b(scheme->generate("b")),
          c(scheme->generate("c")),
          d(scheme->generate("d")),
          chain(scheme, 50, 256, {}) {}

    void give_bonus(const KeyPair& kp, std::uint64_t n) {
        ledger.award_seed_bonus(kp.public_key, n, 0, "test");
    }

    Block next_block(const PubKey& validator) {
        return chain.build_block(chain.tip(), 0, validator, {}, {}, {});
    }

    SignedHeader sign_header(const KeyPair& kp, std::uint64_t height, const BlockHash& h) {
        auto msg = SignedHeader::signing_message(height, h);
        return {height, h, kp.public_key, scheme->sign(kp.secret_key, as_bytes(msg))};
    }
};

} // namespace

TEST_CASE("register_stake locks the whole balance") {
    Fixture f;
    f.give_bonus(f.a, 7);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    CHECK(f.pool.staked(f.a.public_key) == 7);
    CHECK(f.ledger.seed_bonus_balance(f.a.public_key) == 0);
}

TEST_CASE("register_stake error paths") {
    Fixture f;
    CHECK_THROWS_AS(register_stake(f.pool, f.ledger, f.a.public_key, 0), TdError);
    f.give_bonus(f.a, 3);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    CHECK_THROWS_AS(register_stake(f.pool, f.ledger, f.a.public_key, 0), TdError);
}

TEST_CASE("tokens earned mid-round join only at the next stake") {
    Fixture f;
    f.give_bonus(f.a, 5);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    // Earn 3 more while staked: entry must not change.
    f.give_bonus(f.a, 3);
    CHECK(f.pool.staked(f.a.public_key) == 5);
    CHECK(f.ledger.seed_bonus_balance(f.a.public_key) == 3);
    // Round ends (gamma = 0 keeps the arithmetic obvious).
    auto out = finalize_round(f.pool, f.ledger, f.chain, f.a.public_key, {0, 1},
                              f.next_block(f.a.public_key), 1);
    CHECK(out.returned == 5);
    CHECK(f.ledger.seed_bonus_balance(f.a.public_key) == 8);
    register_stake(f.pool, f.ledger, f.a.public_key, 2);
    CHECK(f.pool.staked(f.a.public_key) == 8);
}

TEST_CASE("single staker is always selected; empty pool throws") {
    Fixture f;
    CHECK_THROWS_AS(select_validator(f.pool), TdError);
    f.give_bonus(f.a, 1);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    for (int i = 0; i < 20; ++i) CHECK(select_validator(f.pool) == f.a.public_key);
}

TEST_CASE("zero-stake account is never selected") {
    Fixture f;
    f.give_bonus(f.a, 1);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    f.pool.entries[f.b.public_key] = 0; // degenerate entry
    for (int i = 0; i < 1000; ++i) CHECK(select_validator(f.pool) == f.a.public_key);
}

TEST_CASE("selection frequencies are stake-proportional (chi-square)") {
    Fixture f;
    std::vector<std::pair<KeyPair*, std::uint64_t>> stakes{
        {&f.a, 1}, {&f.b, 2}, {&f.c, 3}, {&f.d, 4}};
    for (auto& [kp, n] : stakes) {
        f.give_bonus(*kp, n);
        register_stake(f.pool, f.ledger, kp->public_key, 0);
    }
    const int rounds = 10000;
    std::map<PubKey, int> counts;
    for (int i = 0; i < rounds; ++i) ++counts[select_validator(f.pool)];

    double chi2 = 0;
    for (auto& [kp, n] : stakes) {
        double expected = rounds * static_cast<double>(n) / 10.0;
        double got = counts[kp->public_key];
        chi2 += (got - expected) * (got - expected) / expected;
        CHECK(std::abs(got / rounds - n / 10.0) < 0.02); // within 2 percentage points
    }
    // df = 3, p > 0.01 -> statistic below 11.345
    CHECK(chi2 < 11.345);
}

TEST_CASE("selection is deterministic given the rng seed") {
    auto run = [] {
        Fixture f;
        f.give_bonus(f.a, 3);
        f.give_bonus(f.b, 5);
        register_stake(f.pool, f.ledger, f.a.public_key, 0);
        register_stake(f.pool, f.ledger, f.b.public_key, 0);
        std::vector<PubKey> picks;
        for (int i = 0; i < 50; ++i) picks.push_back(select_validator(f.pool));
        return picks;
    };
    CHECK(run() == run());
}

TEST_CASE("finalize_round burns ceil(gamma*stake) and returns the rest") {
    Fixture f;
    f.give_bonus(f.a, 10);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);

    SUBCASE("gamma 0.1") {
        auto out = finalize_round(f.pool, f.ledger, f.chain, f.a.public_key,
                                  BurnFraction::from_double(0.1), f.next_block(f.a.public_key), 1);
        CHECK(out.burned == 1);
        CHECK(out.returned == 9);
        CHECK(out.block_accepted);
        CHECK(f.chain.balance_of(f.a.public_key) == 50); // block reward in TD
        CHECK(f.ledger.seed_bonus_balance(f.a.public_key) == 9);
        CHECK(out.burned + out.returned == 10);
    }
    SUBCASE("gamma 0 is the identity case") {
        auto out = finalize_round(f.pool, f.ledger, f.chain, f.a.public_key, {0, 1},
                                  f.next_block(f.a.public_key), 1);
        CHECK(out.burned == 0);
        CHECK(out.returned == 10);
    }
    SUBCASE("gamma 1 burns everything") {
        auto out = finalize_round(f.pool, f.ledger, f.chain, f.a.public_key, {1, 1},
                                  f.next_block(f.a.public_key), 1);
        CHECK(out.burned == 10);
        CHECK(out.returned == 0);
    }
    SUBCASE("gamma 0.25 via double conversion") {
        auto out = finalize_round(f.pool, f.ledger, f.chain, f.a.public_key,
                                  BurnFraction::from_double(0.25), f.next_block(f.a.public_key), 1);
        CHECK(out.burned == 3); // ceil(0.25 * 10)
        CHECK(out.returned == 7);
    }
}

TEST_CASE("invalid block voids the round, stake returned intact") {
    Fixture f;
    f.give_bonus(f.a, 10);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    Block bad = f.next_block(f.a.public_key);
    bad.transactions[0].outputs[0].amount = 999;
    bad.transactions[0].id = bad.transactions[0].compute_id();
    bad.hash = bad.compute_hash();
    auto out = finalize_round(f.pool, f.ledger, f.chain, f.a.public_key,
                              BurnFraction::from_double(0.1), bad, 1);
    CHECK_FALSE(out.block_accepted);
    CHECK(out.burned == 0);
    CHECK(out.returned == 10);
    CHECK(f.ledger.seed_bonus_balance(f.a.public_key) == 10);
    CHECK(f.chain.tip_height() == 0); // nothing applied, no reward
    CHECK(f.ledger.minted("td") == 0);
}

TEST_CASE("equivocation detection") {
    Fixture f;
    BlockHash h1 = sha256("block1"), h2 = sha256("block2");

    SUBCASE("double-sign at one height is flagged") {
        auto sigs = std::vector<SignedHeader>{f.sign_header(f.a, 5, h1), f.sign_header(f.a, 5, h2)};
        auto out = detect_equivocation(sigs, *f.scheme);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == f.a.public_key);
    }
    SUBCASE("the same block signed twice is not equivocation") {
        auto sigs = std::vector<SignedHeader>{f.sign_header(f.a, 5, h1), f.sign_header(f.a, 5, h1)};
        CHECK(detect_equivocation(sigs, *f.scheme).empty());
    }
    SUBCASE("different heights are fine") {
        auto sigs = std::vector<SignedHeader>{f.sign_header(f.a, 5, h1), f.sign_header(f.a, 6, h2)};
        CHECK(detect_equivocation(sigs, *f.scheme).empty());
    }
    SUBCASE("forged signatures are ignored") {
        auto s1 = f.sign_header(f.a, 5, h1);
        auto s2 = f.sign_header(f.b, 5, h2);
        s2.validator = f.a.public_key; // mismatched signature
        CHECK(detect_equivocation({s1, s2}, *f.scheme).empty());
    }
}

TEST_CASE("one double-signer among random honest headers (brute-force oracle)") {
    Fixture f;
    DetRng rng(11);
    std::vector<KeyPair> keys{f.a, f.b, f.c};
    std::vector<SignedHeader> sigs;
    for (int i = 0; i < 20; ++i) {
        auto& kp = keys[rng.uniform(2)]; // a and b stay honest: unique heights
        sigs.push_back(f.sign_header(kp, 100 + i, sha256("h" + std::to_string(i))));
    }
    sigs.push_back(f.sign_header(f.c, 7, sha256("fork-one")));
    sigs.push_back(f.sign_header(f.c, 7, sha256("fork-two")));

    // Oracle: O(n^2) pairwise scan.
    std::set<PubKey> oracle;
    for (size_t i = 0; i < sigs.size(); ++i)
        for (size_t j = i + 1; j < sigs.size(); ++j)
            if (sigs[i].validator == sigs[j].validator && sigs[i].height == sigs[j].height &&
                sigs[i].block_hash != sigs[j].block_hash)
                oracle.insert(sigs[i].validator);

    auto got = detect_equivocation(sigs, *f.scheme);
    CHECK(std::set<PubKey>(got.begin(), got.end()) == oracle);
    REQUIRE(got.size() == 1);
    CHECK(got[0] == f.c.public_key);
}

TEST_CASE("slash burns staked and liquid seed bonus completely") {
    Fixture f;
    f.give_bonus(f.a, 8);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    f.give_bonus(f.a, 2); // liquid on top of the 8 staked

    slash(f.pool, f.ledger, f.a.public_key, 1);
    CHECK(f.pool.staked(f.a.public_key) == 0);
    CHECK(f.ledger.seed_bonus_balance(f.a.public_key) == 0);
    std::uint64_t burned = 0;
    for (const auto& e : f.ledger.burn_log())
        if (e.account == f.a.public_key && e.kind == "seed_bonus") burned += e.amount;
    CHECK(burned == 10);

    // Second slash is a no-op.
    slash(f.pool, f.ledger, f.a.public_key, 2);
    CHECK(f.ledger.burned("seed_bonus") == 10);
}

TEST_CASE("a slashed account is never selected again") {
    Fixture f;
    f.give_bonus(f.a, 5);
    f.give_bonus(f.b, 5);
    register_stake(f.pool, f.ledger, f.a.public_key, 0);
    register_stake(f.pool, f.ledger, f.b.public_key, 0);
    slash(f.pool, f.ledger, f.b.public_key, 0);
    for (int i = 0; i < 1000; ++i) CHECK(select_validator(f.pool) == f.a.public_key);
    // Even if it somehow earns more bonus, staking is barred.
    f.give_bonus(f.b, 3);
    CHECK_THROWS_AS(register_stake(f.pool, f.ledger, f.b.public_key, 1), TdError);
}

TEST_CASE("round conservation: burned + returned equals the pre-round stake") {
    DetRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Fixture f;
        std::uint64_t stake = rng.uniform(100) + 1;
        double gamma = static_cast<double>(rng.uniform(101)) / 100.0;
        f.give_bonus(f.a, stake);
        register_stake(f.pool, f.ledger, f.a.public_key, 0);
        auto out = finalize_round(f.pool, f.ledger, f.chain, f.a.public_key,
                                  BurnFraction::from_double(gamma), f.next_block(f.a.public_key), 1);
        CHECK(out.burned + out.returned == stake);
    }
}
