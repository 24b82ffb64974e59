// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "scenario.hpp"

#include <fstream>
#include <set>

#include "errors.hpp"

namespace tdsim {

using nlohmann::json;

const char* role_name(Role r) {
    switch (r) {
        case Role::Owner: return "owner";
        case Role::Seeder: return "seeder";
        case Role::Validator: return "validator";
        case Role::Hybrid: return "hybrid";
    }
    return "?";
}

const char* policy_name(PolicyKind p) {
    switch (p) {
        case PolicyKind::Honest: return "honest";
        case PolicyKind::OfflineAfter: return "offline_after";
        case PolicyKind::DiscardFraction: return "discard_fraction";
        case PolicyKind::PayloadSwapper: return "payload_swapper";
        case PolicyKind::Equivocator: return "equivocator";
    }
    return "?";
}

namespace {

Role parse_role(const std::string& s) {
    if (s == "owner") return Role::Owner;
    if (s == "seeder") return Role::Seeder;
    if (s == "validator") return Role::Validator;
    if (s == "hybrid") return Role::Hybrid;
    fail(Err::ConfigInvalid, "nodes[].role must be owner|seeder|validator|hybrid, got \"" + s + "\"");
}

PolicyKind parse_policy_kind(const std::string& s) {
    if (s == "honest") return PolicyKind::Honest;
    if (s == "offline_after") return PolicyKind::OfflineAfter;
    if (s == "discard_fraction") return PolicyKind::DiscardFraction;
    if (s == "payload_swapper") return PolicyKind::PayloadSwapper;
    if (s == "equivocator") return PolicyKind::Equivocator;
    fail(Err::ConfigInvalid, "nodes[].policy.type unknown: \"" + s + "\"");
}

// Strict field readers: wrong JSON type is a config error naming the field.
std::uint64_t get_u64(const json& j, const std::string& key, std::uint64_t def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0))
        fail(Err::ConfigInvalid, key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

double get_f64(const json& j, const std::string& key, double def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number())
        fail(Err::ConfigInvalid, key + " must be a number");
    return v.get<double>();
}

bool get_bool(const json& j, const std::string& key, bool def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_boolean())
        fail(Err::ConfigInvalid, key + " must be true or false");
    return v.get<bool>();
}

NodePolicy parse_policy(const json& j) {
    NodePolicy p;
    if (j.is_string()) {
        p.kind = parse_policy_kind(j.get<std::string>());
        return p;
    }
    if (!j.is_object()) fail(Err::ConfigInvalid, "nodes[].policy must be a string or object");
    if (!j.contains("type")) fail(Err::ConfigInvalid, "nodes[].policy.type is required");
    p.kind = parse_policy_kind(j.at("type").get<std::string>());
    p.offline_after = get_u64(j, "after", 0);
    p.discard_fraction = get_f64(j, "fraction", 0.0);
    if (p.kind == PolicyKind::DiscardFraction &&
        (p.discard_fraction < 0.0 || p.discard_fraction > 1.0))
        fail(Err::ConfigInvalid, "nodes[].policy.fraction must be in [0, 1]");
    return p;
}

const std::set<std::string> kTopLevelKeys = {
    "seed", "horizon_ticks", "block_interval", "block_reward", "max_txs",
    "replication", "gamma", "k_leaves", "response_window", "response_latency",
    "mean_challenge_interval", "bonus_per_pass", "liveness_len", "leaf_size",
    "chunk_bytes", "base_rate", "delay", "hosting_term_ticks", "escrow_refund",
    "delegated_verifier", "grace_failures", "nodes",
};

const std::set<std::string> kNodeKeys = {
    "name", "role", "td", "burn_td", "chunks", "seed_bonus", "policy",
};

} // namespace

void ScenarioConfig::validate() const {
    if (replication < 1) fail(Err::ConfigInvalid, "R must be >= 1 (replication)");
    if (block_interval < 1) fail(Err::ConfigInvalid, "block_interval must be >= 1");
    if (max_txs < 2) fail(Err::ConfigInvalid, "max_txs must be >= 2");
    if (gamma < 0.0 || gamma > 1.0) fail(Err::ConfigInvalid, "gamma must be in [0, 1]");
    if (k_leaves < 1) fail(Err::ConfigInvalid, "k_leaves must be >= 1");
    if (response_window < 1) fail(Err::ConfigInvalid, "response_window must be >= 1");
    if (mean_challenge_interval <= 0.0)
        fail(Err::ConfigInvalid, "mean_challenge_interval must be > 0");
    if (liveness_len < 1) fail(Err::ConfigInvalid, "liveness_len must be >= 1");
    if (leaf_size < 1) fail(Err::ConfigInvalid, "leaf_size must be >= 1");
    if (chunk_bytes < 1) fail(Err::ConfigInvalid, "chunk_bytes must be >= 1");
    if (base_rate <= 0.0) fail(Err::ConfigInvalid, "base_rate must be > 0");
    if (delay.uniform && delay.min > delay.max)
        fail(Err::ConfigInvalid, "delay.min must be <= delay.max");
    std::set<std::string> names;
    for (const auto& n : nodes) {
        if (n.name.empty()) fail(Err::ConfigInvalid, "nodes[].name must be non-empty");
        if (!names.insert(n.name).second)
            fail(Err::ConfigInvalid, "nodes[].name duplicated: \"" + n.name + "\"");
        if (n.role == Role::Owner && n.chunks == 0)
            fail(Err::ConfigInvalid, "nodes[].chunks must be >= 1 for owner \"" + n.name + "\"");
        if (n.burn_td > n.initial_td)
            fail(Err::ConfigInvalid, "nodes[].burn_td exceeds td for \"" + n.name + "\"");
    }
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    if (!j.is_object()) fail(Err::ConfigInvalid, "config root must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kTopLevelKeys.count(it.key()))
            fail(Err::ConfigInvalid, "unknown config key \"" + it.key() + "\"");

    ScenarioConfig c;
    c.seed = get_u64(j, "seed", c.seed);
    c.horizon_ticks = get_u64(j, "horizon_ticks", c.horizon_ticks);
    c.block_interval = get_u64(j, "block_interval", c.block_interval);
    c.block_reward = get_u64(j, "block_reward", c.block_reward);
    c.max_txs = static_cast<std::uint32_t>(get_u64(j, "max_txs", c.max_txs));
    c.replication = get_u64(j, "replication", c.replication);
    c.gamma = get_f64(j, "gamma", c.gamma);
    c.k_leaves = static_cast<std::uint32_t>(get_u64(j, "k_leaves", c.k_leaves));
    c.response_window = get_u64(j, "response_window", c.response_window);
    c.response_latency = get_u64(j, "response_latency", c.response_latency);
    c.mean_challenge_interval = get_f64(j, "mean_challenge_interval", c.mean_challenge_interval);
    c.bonus_per_pass = get_u64(j, "bonus_per_pass", c.bonus_per_pass);
    c.liveness_len = static_cast<std::uint32_t>(get_u64(j, "liveness_len", c.liveness_len));
    c.leaf_size = static_cast<std::uint32_t>(get_u64(j, "leaf_size", c.leaf_size));
    c.chunk_bytes = static_cast<std::uint32_t>(get_u64(j, "chunk_bytes", c.chunk_bytes));
    c.base_rate = get_f64(j, "base_rate", c.base_rate);
    c.hosting_term_ticks = get_u64(j, "hosting_term_ticks", c.hosting_term_ticks);
    c.escrow_refund = get_bool(j, "escrow_refund", c.escrow_refund);
    c.delegated_verifier = get_bool(j, "delegated_verifier", c.delegated_verifier);
    c.grace_failures = static_cast<std::uint32_t>(get_u64(j, "grace_failures", c.grace_failures));

    if (j.contains("delay")) {
        const auto& d = j.at("delay");
        if (!d.is_object()) fail(Err::ConfigInvalid, "delay must be an object");
        std::string model = d.value("model", "fixed");
        if (model == "fixed") {
            c.delay.uniform = false;
            c.delay.fixed = get_u64(d, "ticks", 1);
        } else if (model == "uniform") {
            c.delay.uniform = true;
            c.delay.min = get_u64(d, "min", 1);
            c.delay.max = get_u64(d, "max", 1);
        } else {
            fail(Err::ConfigInvalid, "delay.model must be fixed or uniform");
        }
    }

    if (j.contains("nodes")) {
        const auto& arr = j.at("nodes");
        if (!arr.is_array()) fail(Err::ConfigInvalid, "nodes must be an array");
        for (const auto& nj : arr) {
            if (!nj.is_object()) fail(Err::ConfigInvalid, "nodes[] entries must be objects");
            for (auto it = nj.begin(); it != nj.end(); ++it)
                if (!kNodeKeys.count(it.key()))
                    fail(Err::ConfigInvalid, "unknown node key \"" + it.key() + "\"");
            NodeSpec n;
            if (!nj.contains("name")) fail(Err::ConfigInvalid, "nodes[].name is required");
            n.name = nj.at("name").get<std::string>();
            n.role = parse_role(nj.value("role", "seeder"));
            n.initial_td = get_u64(nj, "td", 0);
            n.burn_td = get_u64(nj, "burn_td", 0);
            n.chunks = get_u64(nj, "chunks", 0);
            n.seed_bonus = get_u64(nj, "seed_bonus", 0);
            if (nj.contains("policy")) n.policy = parse_policy(nj.at("policy"));
            c.nodes.push_back(std::move(n));
        }
    }

    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::Io, "cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(Err::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

json ScenarioConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["horizon_ticks"] = horizon_ticks;
    j["block_interval"] = block_interval;
    j["block_reward"] = block_reward;
    j["max_txs"] = max_txs;
    j["replication"] = replication;
    j["gamma"] = gamma;
    j["k_leaves"] = k_leaves;
    j["response_window"] = response_window;
    j["response_latency"] = response_latency;
    j["mean_challenge_interval"] = mean_challenge_interval;
    j["bonus_per_pass"] = bonus_per_pass;
    j["liveness_len"] = liveness_len;
    j["leaf_size"] = leaf_size;
    j["chunk_bytes"] = chunk_bytes;
    j["base_rate"] = base_rate;
    if (delay.uniform)
        j["delay"] = {{"model", "uniform"}, {"min", delay.min}, {"max", delay.max}};
    else
        j["delay"] = {{"model", "fixed"}, {"ticks", delay.fixed}};
    j["hosting_term_ticks"] = hosting_term_ticks;
    j["escrow_refund"] = escrow_refund;
    j["delegated_verifier"] = delegated_verifier;
    j["grace_failures"] = grace_failures;
    j["nodes"] = json::array();
    for (const auto& n : nodes) {
        json nj;
        nj["name"] = n.name;
        nj["role"] = role_name(n.role);
        nj["td"] = n.initial_td;
        nj["burn_td"] = n.burn_td;
        nj["chunks"] = n.chunks;
        nj["seed_bonus"] = n.seed_bonus;
        json pj;
        pj["type"] = policy_name(n.policy.kind);
        if (n.policy.kind == PolicyKind::OfflineAfter) pj["after"] = n.policy.offline_after;
        if (n.policy.kind == PolicyKind::DiscardFraction)
            pj["fraction"] = n.policy.discard_fraction;
        nj["policy"] = pj;
        j["nodes"].push_back(nj);
    }
    return j;
}

void ScenarioConfig::apply_override(const std::string& key, const std::string& value) {
    json j = to_json();
    if (!kTopLevelKeys.count(key) || key == "nodes" || key == "delay")
        fail(Err::ConfigInvalid, "unknown override key \"" + key + "\"");
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        fail(Err::ConfigInvalid, "override value for " + key + " is not a JSON scalar");
    }
    j[key] = parsed;
    *this = from_json(j);
}

void inject_adversary(ScenarioConfig& config, const std::string& node_name,
                      const NodePolicy& policy) {
    for (auto& n : config.nodes) {
        if (n.name == node_name) {
            n.policy = policy;
            return;
        }
    }
    fail(Err::UnknownNode, "no node named \"" + node_name + "\"");
}

} // namespace tdsim
