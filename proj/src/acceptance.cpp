// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "audit.hpp"
#include "consensus.hpp"
#include "hosting_market.hpp"
#include "ledger.hpp"
#include "simnet.hpp"
#include "storage_proof.hpp"

namespace tdsim {

using nlohmann::json;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
};

json node(const std::string& name, const std::string& role, std::uint64_t td,
          std::uint64_t burn, std::uint64_t chunks, std::uint64_t bonus,
          json policy = "honest") {
    return {{"name", name}, {"role", role},  {"td", td},
            {"burn_td", burn}, {"chunks", chunks}, {"seed_bonus", bonus},
            {"policy", policy}};
}

// -- 1: capacity arithmetic -------------------------------------------------
// One leecher token backs R = 5 hosted blocks; a 30-chunk demand is met end
// to end through the exchange at rate 2.
CriterionResult capacity_arithmetic(bool) {
    Check c;

    KeyedDigestScheme keys;
    TokenLedger ledger;
    Market market(5, 1.0);
    KeyPair seeder = keys.generate("cap-seeder");
    ledger.mint_leecher(seeder.public_key, 50, 0, "test");
    auto cap = market.register_capacity(seeder, ledger, 50, 0);
    c.expect(cap.capacity_credits == 250,
             "50 tokens -> " + std::to_string(cap.capacity_credits) + " credits, want 250");

    json cfg = {{"seed", 11}, {"horizon_ticks", 10}, {"base_rate", 2.0},
                {"nodes", json::array()}};
    cfg["nodes"].push_back(node("owner", "owner", 100, 60, 30, 0));
    for (int i = 1; i <= 5; ++i)
        cfg["nodes"].push_back(node("s" + std::to_string(i), "seeder", 1200, 1200, 0, 0));
    Simulation sim(ScenarioConfig::from_json(cfg));
    sim.run();

    std::uint64_t minted = sim.ledger().minted("leecher");
    c.expect(minted >= 30 + 5 * 60,
             "minted " + std::to_string(minted) + " leecher tokens");
    std::uint64_t owner_minted = 30; // floor(60 / 2) at the neutral opening rate
    c.expect(sim.ledger().minted("leecher") >= owner_minted, "owner mint short");
    c.expect(sim.market().pending_demand_mb() == 0, "unmatched chunks remain");
    c.expect(sim.market().assignments().size() == 30, "expected 30 assignments");
    for (const auto& [chunk, asg] : sim.market().assignments()) {
        c.expect(asg.seeders.size() == 5, "assignment not fully replicated");
        c.expect(asg.tracker_published, "tracker missing");
    }

    return {1, "capacity arithmetic", c.ok, c.detail.str()};
}

// -- 2: stake-proportional selection ----------------------------------------
CriterionResult stake_proportional(bool quick) {
    Check c;
    const std::uint64_t rounds = quick ? 2000 : 10000;

    KeyedDigestScheme keys;
    TokenLedger ledger;
    StakePool pool(DetRng::derive(404, "lottery"));
    std::vector<KeyPair> v;
    for (std::uint64_t stake = 1; stake <= 4; ++stake) {
        v.push_back(keys.generate("v" + std::to_string(stake)));
        ledger.award_seed_bonus(v.back().public_key, stake, 0, "test");
        register_stake(pool, ledger, v.back().public_key, 0);
    }
    KeyPair zero = keys.generate("zero-stake");
    bool rejected = false;
    try {
        register_stake(pool, ledger, zero.public_key, 0);
    } catch (const TdError& e) {
        rejected = e.code() == Err::NothingToStake;
    }
    c.expect(rejected, "zero-stake account entered the pool");

    std::map<PubKey, std::uint64_t> counts;
    for (std::uint64_t i = 0; i < rounds; ++i) ++counts[select_validator(pool)];
    c.expect(counts[zero.public_key] == 0, "zero-stake account selected");

    double chi2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double expected = static_cast<double>(rounds) * (i + 1) / 10.0;
        double observed = static_cast<double>(counts[v[i].public_key]);
        chi2 += (observed - expected) * (observed - expected) / expected;
        double freq = observed / static_cast<double>(rounds);
        double want = (i + 1) / 10.0;
        c.expect(std::abs(freq - want) <= 0.02,
                 "frequency " + std::to_string(freq) + " off target " + std::to_string(want));
    }
    // chi-square df=3, p = 0.01 cutoff
    c.expect(chi2 < 11.345, "chi2 = " + std::to_string(chi2));

    return {2, "stake-proportional selection", c.ok, c.detail.str()};
}

// -- 3: storage-cheat detection ---------------------------------------------
CriterionResult cheat_detection(bool quick) {
    Check c;
    const int trials = quick ? 50 : 200;
    const int per_trial = 20;
    const std::uint32_t k = 2;

    KeyedDigestScheme keys;
    KeyPair owner = keys.generate("detect-owner");
    KeyPair seeder = keys.generate("detect-seeder");
    DetRng data_rng(991);
    std::vector<std::uint8_t> data(1024);
    for (auto& b : data) b = static_cast<std::uint8_t>(data_rng.next_u64());
    Payload payload = build_payload(owner, as_bytes(data), seeder.public_key, sha256("n"));
    ChunkCommitment commitment = commit_chunk(0, seeder.public_key, payload, 64);
    auto leaves = split_leaves(as_bytes(payload.ciphertext), 64);
    auto prefixes = retain_leaf_prefixes(payload, 64, 32);

    int detected = 0;
    double sum_first = 0.0;
    for (int t = 0; t < trials; ++t) {
        DetRng rng(5000 + t);
        for (int i = 1; i <= per_trial; ++i) {
            Challenge ch;
            ch.challenge_id = static_cast<std::uint64_t>(t) * per_trial + i;
            ch.seeder = seeder.public_key;
            ch.leaf_indices.push_back(
                static_cast<std::uint32_t>(rng.uniform(commitment.leaf_count)));
            std::uint32_t second;
            do {
                second = static_cast<std::uint32_t>(rng.uniform(commitment.leaf_count));
            } while (second == ch.leaf_indices[0]);
            ch.leaf_indices.push_back(second);
            ch.issued_at = static_cast<Tick>(i);
            ch.deadline = ch.issued_at + 10;

            // Memoryless retention: each challenged leaf survives with p = 0.5.
            auto resp = respond(ch, leaves,
                                [&](std::uint32_t) { return rng.bernoulli(0.5); }, 32,
                                ch.issued_at + 1);
            bool pass = resp && verify_response(ch, *resp, commitment, prefixes,
                                                resp->responded_at) == ProofFail::None;
            if (!pass) {
                ++detected;
                sum_first += i;
                break;
            }
        }
    }
    c.expect(detected == trials,
             std::to_string(detected) + "/" + std::to_string(trials) + " detected");

    // First detection is geometric with p = 1 - 0.5^k = 0.75.
    double p = 1.0 - std::pow(0.5, k);
    double mean = sum_first / trials;
    double sigma_mean = std::sqrt(1.0 - p) / p / std::sqrt(static_cast<double>(trials));
    c.expect(std::abs(mean - 1.0 / p) <= 3.0 * sigma_mean,
             "first-detection mean " + std::to_string(mean) + " vs " +
                 std::to_string(1.0 / p));

    return {3, "storage-cheat detection", c.ok, c.detail.str()};
}

// -- 4: completeness --------------------------------------------------------
CriterionResult completeness(bool quick) {
    Check c;
    json cfg = {{"seed", 21},
                {"horizon_ticks", quick ? 200 : 400},
                {"mean_challenge_interval", quick ? 4.0 : 5.0},
                {"nodes", json::array()}};
    // Seeders register capacity first so the exchange rate stays at or
    // below par when the owners buy in.
    for (int i = 1; i <= 8; ++i)
        cfg["nodes"].push_back(node("s" + std::to_string(i), "seeder", 20, 20, 0, 0));
    cfg["nodes"].push_back(node("owner-a", "owner", 50, 12, 10, 0));
    cfg["nodes"].push_back(node("owner-b", "owner", 50, 12, 10, 0));
    cfg["nodes"].push_back(node("v1", "validator", 0, 0, 0, 100));
    cfg["nodes"].push_back(node("v2", "validator", 0, 0, 0, 100));

    Simulation sim(ScenarioConfig::from_json(cfg));
    sim.run();
    json m = sim.metrics_json();

    std::uint64_t passed = m["challenges"]["passed"].get<std::uint64_t>();
    std::uint64_t failed = m["challenges"]["failed"].get<std::uint64_t>();
    c.expect(passed >= 1000, "only " + std::to_string(passed) + " challenges passed");
    c.expect(failed == 0, std::to_string(failed) + " failures in an honest run");
    c.expect(m["slashed"].empty(), "slashes in an honest run");
    c.expect(m["degraded_assignments"].get<std::uint64_t>() == 0, "degraded assignments");

    return {4, "honest completeness", c.ok, c.detail.str()};
}

// -- 5: swap-exclusion ------------------------------------------------------
// Every cross-seeder response must fail: the payloads differ per seeder, so
// a proof built from someone else's copy never matches the commitment.
CriterionResult swap_exclusion(bool) {
    Check c;
    KeyedDigestScheme keys;
    KeyPair owner = keys.generate("swap-owner");
    std::vector<KeyPair> seeders;
    for (int i = 0; i < 5; ++i) seeders.push_back(keys.generate("swap-s" + std::to_string(i)));

    DetRng data_rng(7171);
    int false_accepts = 0;
    int pairs = 0;
    for (ChunkId chunk = 0; chunk < 10; ++chunk) {
        std::vector<std::uint8_t> data(1024);
        for (auto& b : data) b = static_cast<std::uint8_t>(data_rng.next_u64());

        std::vector<ChunkCommitment> commitments;
        std::vector<std::vector<std::vector<std::uint8_t>>> leaves;
        std::vector<std::vector<std::vector<std::uint8_t>>> prefixes;
        for (const auto& s : seeders) {
            Digest nonce = sha256("nonce/" + std::to_string(chunk));
            Payload p = build_payload(owner, as_bytes(data), s.public_key, nonce);
            commitments.push_back(commit_chunk(chunk, s.public_key, p, 64));
            leaves.push_back(split_leaves(as_bytes(p.ciphertext), 64));
            prefixes.push_back(retain_leaf_prefixes(p, 64, 32));
        }

        DetRng rng(chunk + 1);
        for (std::size_t a = 0; a < seeders.size(); ++a) {
            for (std::size_t b = 0; b < seeders.size(); ++b) {
                if (a == b) continue;
                Challenge ch;
                ch.challenge_id = ++pairs;
                ch.chunk_id = chunk;
                ch.seeder = seeders[a].public_key;
                ch.leaf_indices = {
                    static_cast<std::uint32_t>(rng.uniform(commitments[a].leaf_count)),
                    static_cast<std::uint32_t>(
                        (rng.uniform(commitments[a].leaf_count - 1) + 1 + ch.leaf_indices.size()) %
                        commitments[a].leaf_count)};
                if (ch.leaf_indices[0] == ch.leaf_indices[1])
                    ch.leaf_indices[1] = (ch.leaf_indices[1] + 1) % commitments[a].leaf_count;
                ch.issued_at = 1;
                ch.deadline = 11;
                // Response assembled from seeder b's payload.
                auto resp = respond(ch, leaves[b], [](std::uint32_t) { return true; }, 32, 2);
                if (resp && verify_response(ch, *resp, commitments[a], prefixes[a], 2) ==
                                ProofFail::None)
                    ++false_accepts;
            }
        }
    }
    c.expect(false_accepts == 0, std::to_string(false_accepts) + " false accepts");
    c.expect(pairs == 10 * 5 * 4, "pair enumeration incomplete");

    return {5, "swap-exclusion", c.ok, c.detail.str()};
}

// -- 6: slashing ------------------------------------------------------------
CriterionResult slashing(bool quick) {
    Check c;
    const std::uint64_t rounds_after = quick ? 200 : 1000;
    json cfg = {{"seed", 31},
                {"horizon_ticks", rounds_after + 100},
                {"block_interval", 1},
                {"gamma", 0.0},
                {"nodes", json::array()}};
    cfg["nodes"].push_back(node("mallory", "validator", 0, 0, 0, 10, "equivocator"));
    cfg["nodes"].push_back(node("v1", "validator", 0, 0, 0, 10));
    cfg["nodes"].push_back(node("v2", "validator", 0, 0, 0, 10));

    Simulation sim(ScenarioConfig::from_json(cfg));
    sim.run();

    const PubKey& mallory = sim.node_keys("mallory").public_key;
    c.expect(sim.ledger().seed_bonus_balance(mallory) == 0, "liquid seed bonus left");
    c.expect(sim.pool().staked(mallory) == 0, "staked seed bonus left");
    c.expect(sim.pool().barred.count(mallory) == 1, "not barred");

    std::uint64_t slash_round = 0;
    bool slashed_seen = false;
    std::uint64_t last_round = 0;
    std::uint64_t selected_after = 0;
    std::istringstream in(sim.events_jsonl());
    std::string line;
    while (std::getline(in, line)) {
        json j = json::parse(line);
        if (j.value("type", "") != "round") continue;
        std::uint64_t r = j.at("round").get<std::uint64_t>();
        last_round = r;
        bool is_mallory = j.at("selected").get<std::string>() == "mallory";
        if (!slashed_seen && is_mallory) {
            slashed_seen = true;
            slash_round = r;
            c.expect(!j.at("slashed").empty(), "equivocation round recorded no slash");
        } else if (slashed_seen && is_mallory) {
            ++selected_after;
        }
    }
    c.expect(slashed_seen, "equivocator never selected");
    c.expect(selected_after == 0,
             "selected " + std::to_string(selected_after) + " times after slash");
    c.expect(last_round - slash_round >= rounds_after,
             "only " + std::to_string(last_round - slash_round) + " rounds after slash");

    // Burn log reconciliation: the slash destroyed exactly the initial grant.
    std::uint64_t slashed_total = 0;
    for (const auto& e : sim.ledger().burn_log())
        if (e.kind == "seed_bonus" && (e.reason == "slash" || e.reason == "slash_staked"))
            slashed_total += e.amount;
    c.expect(slashed_total == 10, "slashed " + std::to_string(slashed_total) + ", want 10");
    c.expect(audit_events(sim.events_jsonl()).ok, "audit failed");

    return {6, "equivocation slashing", c.ok, c.detail.str()};
}

// -- 7: conservation audits -------------------------------------------------
json mixed_scenario(std::uint64_t seed) {
    json cfg = {{"seed", seed},
                {"horizon_ticks", 200},
                {"mean_challenge_interval", 10.0},
                {"nodes", json::array()}};
    for (int i = 1; i <= 4; ++i)
        cfg["nodes"].push_back(node("s" + std::to_string(i), "seeder", 10, 8, 0, 0));
    cfg["nodes"].push_back(node("owner", "owner", 20, 10, 8, 0));
    cfg["nodes"].push_back(node("cheat", "seeder", 10, 8, 0, 0,
                                {{"type", "discard_fraction"}, {"fraction", 0.3}}));
    cfg["nodes"].push_back(node("sleepy", "seeder", 10, 8, 0, 0,
                                {{"type", "offline_after"}, {"after", 50}}));
    cfg["nodes"].push_back(node("h1", "hybrid", 10, 8, 0, 5));
    cfg["nodes"].push_back(node("h2", "hybrid", 10, 8, 0, 5));
    return cfg;
}

CriterionResult conservation(bool quick) {
    Check c;
    const int seeds = quick ? 5 : 20;
    for (int i = 0; i < seeds; ++i) {
        auto outputs = run_scenario(ScenarioConfig::from_json(mixed_scenario(9000 + i)));
        const json& cons = outputs.metrics["conservation"];
        c.expect(cons["td"].get<bool>(), "td conservation, seed " + std::to_string(i));
        c.expect(cons["leecher"].get<bool>(), "leecher conservation, seed " + std::to_string(i));
        c.expect(cons["seed_bonus"].get<bool>(),
                 "seed_bonus conservation, seed " + std::to_string(i));
        AuditResult audit = audit_events(outputs.events_jsonl);
        c.expect(audit.ok, "audit: " + audit.violation + ", seed " + std::to_string(i));
    }
    return {7, "conservation audits", c.ok, c.detail.str()};
}

// -- 8: double-spend rejection ----------------------------------------------
CriterionResult double_spend(bool quick) {
    Check c;
    const int cases = quick ? 200 : 1000;

    auto scheme = std::make_shared<KeyedDigestScheme>();
    std::vector<KeyPair> holders;
    std::vector<std::pair<PubKey, std::uint64_t>> allocations;
    DetRng rng(606);
    for (int i = 0; i < cases; ++i) {
        holders.push_back(scheme->generate("ds" + std::to_string(i)));
        allocations.emplace_back(holders.back().public_key, 10 + rng.uniform(90));
    }
    ChainState chain(scheme, 50, 1024, allocations);
    KeyPair validator = scheme->generate("ds-validator");

    int rejected = 0;
    for (int i = 0; i < cases; ++i) {
        const KeyPair& holder = holders[i];
        auto coins = chain.coins_of(holder.public_key);
        std::uint64_t amount = chain.balance_of(holder.public_key);
        const KeyPair& r1 = holders[rng.uniform(cases)];
        const KeyPair& r2 = holders[rng.uniform(cases)];
        std::uint64_t cut = 1 + rng.uniform(amount);
        Transaction a = chain.create_transaction(
            coins, {{cut, r1.public_key}, {amount - cut, holder.public_key}}, holder);
        Transaction b = chain.create_transaction(coins, {{amount, r2.public_key}}, holder);
        if (rng.bernoulli(0.5)) std::swap(a, b);

        Block block = chain.build_block(chain.tip(), i + 1, validator.public_key,
                                        {a, b}, {}, {});
        auto violation = chain.apply_block(block);
        if (violation && violation->tx_violation == Violation::DoubleSpend) ++rejected;
    }
    c.expect(rejected == cases,
             std::to_string(rejected) + "/" + std::to_string(cases) + " rejected");
    c.expect(chain.tip_height() == 0, "a conflicting block was accepted");

    return {8, "double-spend rejection", c.ok, c.detail.str()};
}

// -- 9: main-chain isolation ------------------------------------------------
CriterionResult chain_isolation(bool) {
    Check c;

    auto measure = [](double mean_interval, Simulation& sim, std::uint64_t& bytes,
                      std::uint64_t& entries, std::uint64_t& challenges) {
        sim.run();
        bytes = 0;
        entries = 0;
        for (const BlockHash& h : sim.chain().tip_branch()) {
            const Block& b = sim.chain().block_at(h);
            bytes += b.canonical_bytes().size();
            for (const auto& cp : b.checkpoints) entries += cp.results.size();
        }
        challenges = sim.metrics_json()["challenges"]["issued"].get<std::uint64_t>();
        (void)mean_interval;
    };

    auto cfg_for = [](double mean_interval) {
        json cfg = {{"seed", 77},
                    {"horizon_ticks", 300},
                    {"mean_challenge_interval", mean_interval},
                    {"nodes", json::array()}};
        for (int i = 1; i <= 6; ++i)
            cfg["nodes"].push_back(node("s" + std::to_string(i), "seeder", 10, 8, 0, 0));
        cfg["nodes"].push_back(node("owner", "owner", 20, 10, 8, 0));
        cfg["nodes"].push_back(node("v1", "validator", 0, 0, 0, 50));
        return ScenarioConfig::from_json(cfg);
    };

    Simulation lo(cfg_for(40.0));
    Simulation hi(cfg_for(4.0));
    std::uint64_t bytes_lo, entries_lo, chal_lo, bytes_hi, entries_hi, chal_hi;
    measure(40.0, lo, bytes_lo, entries_lo, chal_lo);
    measure(4.0, hi, bytes_hi, entries_hi, chal_hi);

    c.expect(chal_hi >= 9 * chal_lo, "challenge volume did not scale (" +
                                         std::to_string(chal_lo) + " -> " +
                                         std::to_string(chal_hi) + ")");
    // Each checkpoint entry encodes to exactly 48 bytes; nothing else on the
    // chain may change with challenge volume.
    constexpr std::uint64_t kEntryBytes = 48;
    c.expect(bytes_hi - bytes_lo == kEntryBytes * (entries_hi - entries_lo),
             "on-chain bytes moved by " + std::to_string(bytes_hi - bytes_lo) +
                 " for " + std::to_string(entries_hi - entries_lo) + " extra entries");

    // No stored payload leaf may appear anywhere in a serialized block.
    std::vector<std::vector<std::uint8_t>> leaves;
    for (int i = 1; i <= 6 && leaves.empty(); ++i)
        for (ChunkId chunk = 0; chunk < 8 && leaves.empty(); ++chunk)
            leaves = hi.hosted_leaves("s" + std::to_string(i), chunk);
    c.expect(!leaves.empty(), "no leaves to probe");
    std::string blob;
    for (const BlockHash& h : hi.chain().tip_branch()) {
        auto bytes = hi.chain().block_at(h).canonical_bytes();
        blob.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }
    for (std::size_t i = 0; i < leaves.size() && i < 4; ++i) {
        std::string needle(reinterpret_cast<const char*>(leaves[i].data()),
                           leaves[i].size());
        c.expect(blob.find(needle) == std::string::npos,
                 "payload leaf bytes found in a block");
    }

    return {9, "main-chain isolation", c.ok, c.detail.str()};
}

// -- 10: determinism --------------------------------------------------------
CriterionResult determinism(bool) {
    Check c;
    ScenarioConfig cfg = ScenarioConfig::from_json(mixed_scenario(4242));

    auto run1 = run_scenario(cfg);
    auto run2 = run_scenario(cfg);
    c.expect(run1.metrics.dump(2) == run2.metrics.dump(2), "metrics.json differs");
    c.expect(run1.events_jsonl == run2.events_jsonl, "events.jsonl differs");
    c.expect(run1.burn_log_csv == run2.burn_log_csv, "burn_log.csv differs");

    Tick h = cfg.horizon_ticks;
    Simulation whole(cfg);
    whole.advance(h);
    Simulation halves(cfg);
    halves.advance(h / 2);
    halves.advance(h);
    c.expect(whole.state_digest() == halves.state_digest(), "split-run digest differs");

    Simulation steps(cfg);
    for (Tick t = 13; t < h; t += 13) steps.advance(t);
    steps.advance(h);
    c.expect(whole.state_digest() == steps.state_digest(), "stepped-run digest differs");

    return {10, "determinism", c.ok, c.detail.str()};
}

} // namespace

CriterionResult run_criterion(int id, bool quick) {
    switch (id) {
        case 1: return capacity_arithmetic(quick);
        case 2: return stake_proportional(quick);
        case 3: return cheat_detection(quick);
        case 4: return completeness(quick);
        case 5: return swap_exclusion(quick);
        case 6: return slashing(quick);
        case 7: return conservation(quick);
        case 8: return double_spend(quick);
        case 9: return chain_isolation(quick);
        case 10: return determinism(quick);
        default: fail(Err::ConfigInvalid, "criterion must be 1..10");
    }
}

std::vector<CriterionResult> run_acceptance(bool quick) {
    std::vector<CriterionResult> results;
    for (int id = 1; id <= kCriterionCount; ++id) results.push_back(run_criterion(id, quick));
    return results;
}

} // namespace tdsim
