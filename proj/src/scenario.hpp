// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_SCENARIO_HPP
#define TDSIM_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chain_records.hpp"

namespace tdsim {

enum class Role { Owner, Seeder, Validator, Hybrid };
const char* role_name(Role r);

enum class PolicyKind { Honest, OfflineAfter, DiscardFraction, PayloadSwapper, Equivocator };
const char* policy_name(PolicyKind p);

struct NodePolicy {
    PolicyKind kind = PolicyKind::Honest;
    Tick offline_after = 0;    // OfflineAfter
    double discard_fraction = 0.0; // DiscardFraction
};

struct NodeSpec {
    std::string name;
    Role role = Role::Seeder;
    std::uint64_t initial_td = 0;
    std::uint64_t burn_td = 0;      // TD converted to leecher tokens at start
    std::uint64_t chunks = 0;       // owners: chunks to host
    std::uint64_t seed_bonus = 0;   // initial grant (validator bootstrap)
    NodePolicy policy;
};

struct DelayModel {
    bool uniform = false;
    Tick fixed = 1;
    Tick min = 1;
    Tick max = 1;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    Tick horizon_ticks = 1000;
    Tick block_interval = 10;
    std::uint64_t block_reward = 50;
    std::uint32_t max_txs = 256;
    std::uint64_t replication = 5;
    double gamma = 0.1;
    std::uint32_t k_leaves = 2;
    Tick response_window = 10;
    Tick response_latency = 1;
    double mean_challenge_interval = 50.0;
    std::uint64_t bonus_per_pass = 1;
    std::uint32_t liveness_len = 32;
    std::uint32_t leaf_size = 64;
    std::uint32_t chunk_bytes = 1024;
    double base_rate = 1.0;
    DelayModel delay;
    Tick hosting_term_ticks = 0; // 0 = full horizon
    bool escrow_refund = false;
    bool delegated_verifier = false;
    std::uint32_t grace_failures = 1;
    std::vector<NodeSpec> nodes;

    // Throws ConfigInvalid naming the offending field.
    void validate() const;

    static ScenarioConfig from_json(const nlohmann::json& j);
    static ScenarioConfig from_file(const std::string& path);
    nlohmann::json to_json() const;

    // key=value override on a top-level scalar field; unknown keys rejected.
    void apply_override(const std::string& key, const std::string& value);
};

// Replaces the named node's policy. Throws UnknownNode.
void inject_adversary(ScenarioConfig& config, const std::string& node_name,
                      const NodePolicy& policy);

} // namespace tdsim

#endif
