// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "audit.hpp"
#include "simnet.hpp"

using namespace tdsim;
using nlohmann::json;

namespace {

json node(const std::string& name, const std::string& role, std::uint64_t td,
          std::uint64_t burn, std::uint64_t chunks, std::uint64_t bonus,
          json policy = "honest") {
    return {{"name", name}, {"role", role},  {"td", td},
            {"burn_td", burn}, {"chunks", chunks}, {"seed_bonus", bonus},
            {"policy", policy}};
}

// Small mixed scenario: one owner, six seeders (one adversarial slot kept
// free), two hybrid validators.
json base_config(std::uint64_t seed, Tick horizon) {
    json cfg = {{"seed", seed},
                {"horizon_ticks", horizon},
                {"mean_challenge_interval", 10.0},
                {"nodes", json::array()}};
    for (int i = 1; i <= 6; ++i)
        cfg["nodes"].push_back(node("s" + std::to_string(i), "seeder", 10, 8, 0, 0));
    cfg["nodes"].push_back(node("owner", "owner", 20, 10, 6, 0));
    cfg["nodes"].push_back(node("h1", "hybrid", 10, 8, 0, 5));
    cfg["nodes"].push_back(node("h2", "hybrid", 10, 8, 0, 5));
    return cfg;
}

std::string fail_message(const json& cfg) {
    try {
        ScenarioConfig::from_json(cfg);
        return "";
    } catch (const TdError& e) {
        return e.what();
    }
}

} // namespace

TEST_CASE("config validation names the offending field") {
    json cfg = base_config(1, 100);
    cfg["replication"] = 0;
    CHECK(fail_message(cfg) == "R must be >= 1 (replication)");

    cfg = base_config(1, 100);
    cfg["gamma"] = 1.5;
    CHECK(fail_message(cfg) == "gamma must be in [0, 1]");

    cfg = base_config(1, 100);
    cfg["no_such_knob"] = 3;
    CHECK(fail_message(cfg) == "unknown config key \"no_such_knob\"");

    cfg = base_config(1, 100);
    cfg["nodes"].push_back(node("s1", "seeder", 0, 0, 0, 0));
    CHECK(fail_message(cfg) == "nodes[].name duplicated: \"s1\"");

    cfg = base_config(1, 100);
    cfg["nodes"][0]["burn_td"] = 99;
    CHECK(fail_message(cfg) == "nodes[].burn_td exceeds td for \"s1\"");
}

TEST_CASE("overrides apply to scalars and reject unknown keys") {
    ScenarioConfig cfg = ScenarioConfig::from_json(base_config(1, 100));
    cfg.apply_override("gamma", "0.25");
    CHECK(cfg.gamma == doctest::Approx(0.25));
    cfg.apply_override("horizon_ticks", "50");
    CHECK(cfg.horizon_ticks == 50);
    CHECK_THROWS_WITH_AS(cfg.apply_override("bogus", "1"), "unknown override key \"bogus\"",
                         TdError);
    CHECK_THROWS_AS(cfg.apply_override("replication", "0"), TdError);
}

TEST_CASE("inject_adversary replaces the policy of an existing node only") {
    ScenarioConfig cfg = ScenarioConfig::from_json(base_config(1, 100));
    inject_adversary(cfg, "s3", {PolicyKind::PayloadSwapper, 0, 0.0});
    CHECK(cfg.nodes[2].policy.kind == PolicyKind::PayloadSwapper);
    CHECK_THROWS_AS(inject_adversary(cfg, "nobody", {PolicyKind::Honest, 0, 0.0}), TdError);
}

TEST_CASE("zero horizon leaves a genesis-only chain and an empty report") {
    json cfg = {{"seed", 3}, {"horizon_ticks", 0}, {"nodes", json::array()}};
    cfg["nodes"].push_back(node("v", "validator", 0, 0, 0, 5));
    Simulation sim(ScenarioConfig::from_json(cfg));
    sim.run();
    CHECK(sim.chain().tip_height() == 0);
    json m = sim.metrics_json();
    CHECK(m["rounds"] == 0);
    CHECK(m["challenges"]["issued"] == 0);
    CHECK(audit_events(sim.events_jsonl()).ok);
}

TEST_CASE("honest scenario completes with no failures, slashes or dropouts") {
    Simulation sim(ScenarioConfig::from_json(base_config(5, 300)));
    sim.run();
    json m = sim.metrics_json();
    CHECK(m["challenges"]["issued"].get<std::uint64_t>() > 50);
    CHECK(m["challenges"]["failed"] == 0);
    CHECK(m["slashed"].empty());
    CHECK(m["dropouts"] == 0);
    CHECK(m["degraded_assignments"] == 0);
    CHECK(audit_events(sim.events_jsonl()).ok);
}

TEST_CASE("identical configs reproduce byte-identical outputs") {
    ScenarioConfig cfg = ScenarioConfig::from_json(base_config(8, 250));
    inject_adversary(cfg, "s5", {PolicyKind::DiscardFraction, 0, 0.4});
    RunOutputs a = run_scenario(cfg);
    RunOutputs b = run_scenario(cfg);
    CHECK(a.metrics.dump() == b.metrics.dump());
    CHECK(a.events_jsonl == b.events_jsonl);
    CHECK(a.burn_log_csv == b.burn_log_csv);
}

TEST_CASE("a different seed produces a different event stream") {
    RunOutputs a = run_scenario(ScenarioConfig::from_json(base_config(8, 250)));
    RunOutputs b = run_scenario(ScenarioConfig::from_json(base_config(9, 250)));
    CHECK(a.events_jsonl != b.events_jsonl);
}

TEST_CASE("split-run advancement is equivalent to one advance") {
    ScenarioConfig cfg = ScenarioConfig::from_json(base_config(11, 200));
    inject_adversary(cfg, "s4", {PolicyKind::OfflineAfter, 60, 0.0});

    Simulation whole(cfg);
    whole.advance(200);
    Simulation halves(cfg);
    halves.advance(100);
    halves.advance(200);
    CHECK(whole.state_digest() == halves.state_digest());

    Simulation steps(cfg);
    for (Tick t = 7; t <= 200; t += 7) steps.advance(t);
    steps.advance(200);
    CHECK(whole.state_digest() == steps.state_digest());
}

TEST_CASE("advance to the current tick is a no-op and backwards is rejected") {
    Simulation sim(ScenarioConfig::from_json(base_config(12, 100)));
    Digest before = sim.state_digest();
    sim.advance(0);
    CHECK(sim.state_digest() == before);
    sim.advance(50);
    CHECK_THROWS_AS(sim.advance(20), TdError);
}

TEST_CASE("offline seeder fails late, drops out and is replaced") {
    ScenarioConfig cfg = ScenarioConfig::from_json(base_config(13, 300));
    inject_adversary(cfg, "s6", {PolicyKind::OfflineAfter, 50, 0.0});
    Simulation sim(cfg);
    sim.run();
    json m = sim.metrics_json();
    CHECK(m["challenges"]["fail_reasons"].contains("Late"));
    CHECK(m["dropouts"].get<std::uint64_t>() >= 1);
    CHECK(m["first_detection"].contains("s6"));
    CHECK(m["first_detection"]["s6"].get<std::uint64_t>() > 50);
    // Enough spare capacity: every dropped slot was refilled.
    CHECK(m["degraded_assignments"] == 0);
    CHECK(audit_events(sim.events_jsonl()).ok);
}

TEST_CASE("discarding seeder is detected and its forfeits stay conserved") {
    ScenarioConfig cfg = ScenarioConfig::from_json(base_config(14, 300));
    inject_adversary(cfg, "s5", {PolicyKind::DiscardFraction, 0, 0.5});
    Simulation sim(cfg);
    sim.run();
    json m = sim.metrics_json();
    CHECK(m["first_detection"].contains("s5"));
    CHECK(m["challenges"]["failed"].get<std::uint64_t>() >= 1);
    CHECK(audit_events(sim.events_jsonl()).ok);
}

TEST_CASE("payload swapper fails with a path mismatch") {
    ScenarioConfig cfg = ScenarioConfig::from_json(base_config(15, 300));
    inject_adversary(cfg, "s3", {PolicyKind::PayloadSwapper, 0, 0.0});
    Simulation sim(cfg);
    sim.run();
    json m = sim.metrics_json();
    CHECK(m["first_detection"].contains("s3"));
    CHECK(m["challenges"]["fail_reasons"].contains("BadPath"));
    CHECK(audit_events(sim.events_jsonl()).ok);
}

TEST_CASE("equivocating validator is slashed to zero and barred") {
    json cfg = {{"seed", 16},
                {"horizon_ticks", 200},
                {"block_interval", 1},
                {"gamma", 0.0},
                {"nodes", json::array()}};
    cfg["nodes"].push_back(node("mallory", "validator", 0, 0, 0, 8, "equivocator"));
    cfg["nodes"].push_back(node("v1", "validator", 0, 0, 0, 8));
    Simulation sim(ScenarioConfig::from_json(cfg));
    sim.run();
    const PubKey& mallory = sim.node_keys("mallory").public_key;
    CHECK(sim.ledger().seed_bonus_balance(mallory) == 0);
    CHECK(sim.pool().staked(mallory) == 0);
    CHECK(sim.pool().barred.count(mallory) == 1);
    json m = sim.metrics_json();
    CHECK(m["slashed"] == json::array({"mallory"}));
    CHECK(audit_events(sim.events_jsonl()).ok);
}

TEST_CASE("audit flags a deleted seed-bonus award line") {
    Simulation sim(ScenarioConfig::from_json(base_config(17, 300)));
    sim.run();
    REQUIRE(audit_events(sim.events_jsonl()).ok);

    std::istringstream in(sim.events_jsonl());
    std::string line, tampered;
    bool removed = false;
    while (std::getline(in, line)) {
        if (!removed && line.find("\"type\":\"mint\"") != std::string::npos &&
            line.find("\"kind\":\"seed_bonus\"") != std::string::npos &&
            line.find("\"reason\":\"checkpoint\"") != std::string::npos) {
            removed = true;
            continue;
        }
        tampered += line + "\n";
    }
    REQUIRE(removed);
    AuditResult result = audit_events(tampered);
    CHECK_FALSE(result.ok);
    CHECK(result.violation == "seed_bonus conservation");
}

TEST_CASE("escrow refund policy returns the owner's tokens at term end") {
    json cfg = base_config(18, 200);
    cfg["escrow_refund"] = true;
    cfg["hosting_term_ticks"] = 150;
    Simulation sim(ScenarioConfig::from_json(cfg));
    sim.run();
    const PubKey& owner = sim.node_keys("owner").public_key;
    CHECK(sim.market().owner_escrow(owner) == 0);
    CHECK(sim.ledger().leecher_balance(owner) >= 6); // the six escrowed tokens came back
    CHECK(audit_events(sim.events_jsonl()).ok);

    json burn_cfg = base_config(18, 200);
    burn_cfg["hosting_term_ticks"] = 150;
    Simulation burned(ScenarioConfig::from_json(burn_cfg));
    burned.run();
    CHECK(burned.ledger().burned("leecher") >= 6);
    CHECK(audit_events(burned.events_jsonl()).ok);
}

TEST_CASE("burn log is a csv with the canonical header") {
    Simulation sim(ScenarioConfig::from_json(base_config(19, 100)));
    sim.run();
    std::string csv = sim.burn_log_csv();
    CHECK(csv.rfind("tick,kind,amount,reason,account\n", 0) == 0);
}
