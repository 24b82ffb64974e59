// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "consensus.hpp"

#include <cmath>

namespace tdsim {

std::uint64_t StakePool::total_staked() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : entries) t += v;
    return t;
}

std::uint64_t StakePool::staked(const PubKey& a) const {
    auto it = entries.find(a);
    return it == entries.end() ? 0 : it->second;
}

void register_stake(StakePool& pool, TokenLedger& ledger, const PubKey& account, Tick tick) {
    if (pool.entries.count(account))
        fail(Err::AlreadyStaked, "account already staked this round");
    std::uint64_t balance = ledger.seed_bonus_balance(account);
    if (balance == 0) fail(Err::NothingToStake, "no seed bonus to stake");
    if (pool.barred.count(account)) fail(Err::NothingToStake, "account is barred");
    (void)tick;
    // Lock up the whole balance; the wallet goes to zero until the round ends.
    ledger.debit_seed_bonus_for_stake(account, balance);
    pool.entries[account] = balance;
}

PubKey select_validator(StakePool& pool) {
    std::uint64_t total = pool.total_staked();
    if (total == 0) fail(Err::EmptyPool, "no stake registered");
    std::uint64_t r = pool.rng.uniform(total);
    for (const auto& [account, stake] : pool.entries) {
        if (pool.barred.count(account)) continue; // barred entries hold no stake anyway
        if (r < stake) return account;
        r -= stake;
    }
    fail(Err::EmptyPool, "stake accounting inconsistent");
}

BurnFraction BurnFraction::from_double(double gamma) {
    constexpr std::uint64_t den = 1'000'000'000;
    double clamped = gamma < 0 ? 0 : (gamma > 1 ? 1 : gamma);
    return {static_cast<std::uint64_t>(std::llround(clamped * den)), den};
}

std::uint64_t BurnFraction::burn_amount(std::uint64_t stake) const {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(stake) * num + den - 1) / den);
}

RoundOutcome finalize_round(StakePool& pool, TokenLedger& ledger, ChainState& chain,
                            const PubKey& winner, BurnFraction gamma, const Block& block,
                            Tick tick) {
    RoundOutcome out;
    out.round = pool.round++;
    out.selected = winner;

    auto it = pool.entries.find(winner);
    std::uint64_t stake = it == pool.entries.end() ? 0 : it->second;

    auto violation = chain.apply_block(block);
    if (violation) {
        // Round voided: stake returned intact, no reward, no burn.
        if (it != pool.entries.end()) {
            ledger.credit_seed_bonus_from_stake(winner, stake);
            pool.entries.erase(it);
        }
        out.burned = 0;
        out.returned = stake;
        out.block_accepted = false;
        return out;
    }

    mint_block_reward(ledger, winner, chain.block_reward(), tick);
    std::uint64_t burn = gamma.burn_amount(stake);
    if (burn > stake) burn = stake;
    if (burn > 0) ledger.log_burn("seed_bonus", burn, winner, tick, "round_burn");
    ledger.credit_seed_bonus_from_stake(winner, stake - burn);
    if (it != pool.entries.end()) pool.entries.erase(it);

    out.block = block.hash;
    out.burned = burn;
    out.returned = stake - burn;
    out.block_accepted = true;
    return out;
}

std::vector<PubKey> detect_equivocation(const std::vector<SignedHeader>& sigs,
                                        const SignatureScheme& scheme) {
    // (validator, height) -> set of distinct validly-signed headers
    std::map<std::pair<PubKey, std::uint64_t>, std::set<BlockHash>> seen;
    for (const auto& s : sigs) {
        auto msg = SignedHeader::signing_message(s.height, s.block_hash);
        if (!scheme.verify(s.validator, as_bytes(msg), s.sig)) continue;
        seen[{s.validator, s.height}].insert(s.block_hash);
    }
    std::set<PubKey> offenders;
    for (const auto& [key, headers] : seen)
        if (headers.size() >= 2) offenders.insert(key.first);
    return {offenders.begin(), offenders.end()};
}

void slash(StakePool& pool, TokenLedger& ledger, const PubKey& offender, Tick tick) {
    auto it = pool.entries.find(offender);
    if (it != pool.entries.end()) {
        if (it->second > 0)
            ledger.log_burn("seed_bonus", it->second, offender, tick, "slash_staked");
        pool.entries.erase(it);
    }
    std::uint64_t liquid = ledger.seed_bonus_balance(offender);
    if (liquid > 0) ledger.burn_seed_bonus(offender, kBurnAll, "slash", tick);
    pool.barred.insert(offender);
}

} // namespace tdsim
