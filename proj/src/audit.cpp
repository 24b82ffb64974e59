// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "audit.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "errors.hpp"

namespace tdsim {

using nlohmann::json;

namespace {

struct LogTotals {
    std::map<std::string, std::uint64_t> minted;
    std::map<std::string, std::uint64_t> burned;
    std::uint64_t seed_bonus_checkpoint_mints = 0;
    std::uint64_t checkpoint_passes = 0;
    json summary;
};

LogTotals tally(const std::string& events_jsonl) {
    LogTotals t;
    std::istringstream in(events_jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            fail(Err::Io, "event log line is not valid JSON");
        }
        std::string type = j.value("type", "");
        if (type == "mint") {
            std::string kind = j.at("kind").get<std::string>();
            std::uint64_t amount = j.at("amount").get<std::uint64_t>();
            t.minted[kind] += amount;
            if (kind == "seed_bonus" && j.value("reason", "") == "checkpoint")
                t.seed_bonus_checkpoint_mints += amount;
        } else if (type == "burn") {
            t.burned[j.at("kind").get<std::string>()] +=
                j.at("amount").get<std::uint64_t>();
        } else if (type == "checkpoint") {
            for (const auto& r : j.at("results"))
                t.checkpoint_passes += r.at("passed").get<std::uint64_t>();
        } else if (type == "summary") {
            t.summary = j;
        }
    }
    if (t.summary.is_null()) fail(Err::Io, "event log has no summary record");
    return t;
}

} // namespace

AuditResult audit_events(const std::string& events_jsonl) {
    LogTotals t = tally(events_jsonl);
    const json& s = t.summary;
    auto u = [&](const char* key) { return s.at(key).get<std::uint64_t>(); };

    // TD: every coin is a genesis allocation or a coinbase, minus what was
    // sent to the burn address or destroyed as fees.
    std::uint64_t td_created = u("genesis_td") + u("blocks_accepted") * u("block_reward");
    bool td_ok = u("td_supply") ==
                 td_created - u("td_burned_onchain") - u("fees_destroyed");
    if (t.minted["td"] != td_created) td_ok = false;
    // Burn-for-mint transactions still in the mempool are logged but not yet
    // on chain; with an empty mempool the two totals must agree exactly.
    if (u("pending_txs") == 0 && t.burned["td"] != u("td_burned_onchain")) td_ok = false;
    if (!td_ok) return {false, "td conservation"};

    // Leecher: counted in capacity credits (1 token = R credits) so that
    // single-credit dropout forfeitures stay integral.
    std::uint64_t r = u("replication");
    std::uint64_t lhs = t.minted["leecher"] * r;
    std::uint64_t rhs = t.burned["leecher"] * r + t.burned["leecher_credit"] +
                        u("leecher_balances") * r + u("owner_escrow") * r +
                        u("seeder_escrow_credits");
    if (lhs != rhs) return {false, "leecher conservation"};

    // Seed bonus: checkpoint mints must equal checkpointed passes times the
    // per-pass bonus, and mint minus burn must equal wallet plus stake.
    if (t.seed_bonus_checkpoint_mints != t.checkpoint_passes * u("bonus_per_pass"))
        return {false, "seed_bonus conservation"};
    if (t.minted["seed_bonus"] - t.burned["seed_bonus"] !=
        u("seed_bonus_balances") + u("seed_bonus_staked"))
        return {false, "seed_bonus conservation"};

    return {true, ""};
}

AuditResult audit_events_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::Io, "cannot open event log: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return audit_events(buf.str());
}

} // namespace tdsim
