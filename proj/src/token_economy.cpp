// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "token_economy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tdsim {

namespace {
// base_rate is carried as a scaled integer so mint amounts are exact.
constexpr std::uint64_t kRateScale = 1'000'000;

std::uint64_t scaled_base(const ExchangeState& x) {
    return static_cast<std::uint64_t>(std::llround(x.base_rate * kRateScale));
}
} // namespace

double exchange_rate(const ExchangeState& x) {
    double raw = x.base_rate * (1.0 + static_cast<double>(x.pending_demand_mb)) /
                 (1.0 + static_cast<double>(x.available_capacity_mb));
    return std::clamp(raw, x.base_rate / 10.0, x.base_rate * 10.0);
}

std::uint64_t leecher_for_td(const ExchangeState& x, std::uint64_t td_amount) {
    // rate = num/den with num = base_scaled*(1+demand), den = scale*(1+capacity),
    // clamped; minted = floor(td * den / num).
    using u128 = unsigned __int128;
    u128 base = scaled_base(x);
    u128 num = base * (1 + x.pending_demand_mb);
    u128 den = static_cast<u128>(kRateScale) * (1 + x.available_capacity_mb);
    // Clamp num/den to [base/(10*scale), base*10/scale] by cross-multiplying.
    if (num * kRateScale > den * base * 10) {
        num = base * 10;
        den = kRateScale;
    } else if (num * kRateScale * 10 < den * base) {
        num = base;
        den = kRateScale * 10;
    }
    if (num == 0) return 0;
    return static_cast<std::uint64_t>(static_cast<u128>(td_amount) * den / num);
}

void TokenLedger::mint_leecher(const PubKey& account, std::uint64_t tokens, Tick tick,
                               const std::string& reason) {
    leecher_[account] += tokens;
    log_mint("leecher", tokens, account, tick, reason);
}

void TokenLedger::debit_leecher(const PubKey& account, std::uint64_t tokens) {
    auto it = leecher_.find(account);
    if (it == leecher_.end() || it->second < tokens)
        fail(Err::InsufficientLeecherTokens, "leecher balance too low");
    it->second -= tokens;
}

void TokenLedger::credit_leecher_from_escrow(const PubKey& account, std::uint64_t tokens) {
    if (tokens > 0) leecher_[account] += tokens;
}

std::uint64_t TokenLedger::leecher_balance(const PubKey& account) const {
    auto it = leecher_.find(account);
    return it == leecher_.end() ? 0 : it->second;
}

void TokenLedger::award_seed_bonus(const PubKey& host, std::uint64_t amount, Tick tick,
                                   const std::string& reason) {
    seed_bonus_[host] += amount;
    log_mint("seed_bonus", amount, host, tick, reason);
}

std::uint64_t TokenLedger::burn_seed_bonus(const PubKey& account, std::uint64_t amount,
                                           const std::string& reason, Tick tick) {
    std::uint64_t balance = seed_bonus_balance(account);
    std::uint64_t to_burn = (amount == kBurnAll) ? balance : amount;
    if (to_burn > balance) fail(Err::InsufficientTokens, "seed bonus balance too low");
    if (to_burn == 0) return 0;
    seed_bonus_[account] = balance - to_burn;
    log_burn("seed_bonus", to_burn, account, tick, reason);
    return to_burn;
}

std::uint64_t TokenLedger::seed_bonus_balance(const PubKey& account) const {
    auto it = seed_bonus_.find(account);
    return it == seed_bonus_.end() ? 0 : it->second;
}

void TokenLedger::debit_seed_bonus_for_stake(const PubKey& account, std::uint64_t amount) {
    auto it = seed_bonus_.find(account);
    if (it == seed_bonus_.end() || it->second < amount)
        fail(Err::InsufficientTokens, "seed bonus balance too low for stake");
    it->second -= amount;
}

void TokenLedger::credit_seed_bonus_from_stake(const PubKey& account, std::uint64_t amount) {
    if (amount > 0) seed_bonus_[account] += amount;
}

void TokenLedger::log_mint(const std::string& kind, std::uint64_t amount, const PubKey& account,
                           Tick tick, const std::string& reason) {
    minted_[kind] += amount;
    mint_log_.push_back({tick, kind, amount, reason, account});
}

void TokenLedger::log_burn(const std::string& kind, std::uint64_t amount, const PubKey& account,
                           Tick tick, const std::string& reason) {
    burned_[kind] += amount;
    burn_log_.push_back({tick, kind, amount, reason, account});
}

std::uint64_t TokenLedger::minted(const std::string& kind) const {
    auto it = minted_.find(kind);
    return it == minted_.end() ? 0 : it->second;
}

std::uint64_t TokenLedger::burned(const std::string& kind) const {
    auto it = burned_.find(kind);
    return it == burned_.end() ? 0 : it->second;
}

std::uint64_t TokenLedger::total_leecher_balance() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : leecher_) t += v;
    return t;
}

std::uint64_t TokenLedger::total_seed_bonus_balance() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : seed_bonus_) t += v;
    return t;
}

std::string TokenLedger::burn_log_csv() const {
    std::ostringstream os;
    os << "tick,kind,amount,reason,account\n";
    for (const auto& e : burn_log_)
        os << e.tick << ',' << e.kind << ',' << e.amount << ',' << e.reason << ','
           << to_hex(e.account) << '\n';
    return os.str();
}

BurnForLeecherResult burn_td_for_leecher(const ChainState& chain, TokenLedger& ledger,
                                         const KeyPair& buyer, std::uint64_t td_amount,
                                         const ExchangeState& x, Tick now) {
    std::uint64_t minted = leecher_for_td(x, td_amount);
    if (minted == 0)
        fail(Err::ZeroMint, "td amount below the price of one leecher token; nothing burned");

    // Pick coins until td_amount is covered; change returns to the buyer.
    std::vector<CoinLocator> picked;
    std::uint64_t covered = 0;
    for (const auto& loc : chain.coins_of(buyer.public_key)) {
        picked.push_back(loc);
        covered += chain.utxo_set().at(loc).amount;
        if (covered >= td_amount) break;
    }
    if (covered < td_amount)
        fail(Err::InsufficientFunds, "buyer holds " + std::to_string(covered) + " TD of " +
                                         std::to_string(td_amount));

    std::vector<TxOutput> outs{{td_amount, kBurnAddress}};
    if (covered > td_amount) outs.push_back({covered - td_amount, buyer.public_key});
    BurnForLeecherResult r;
    r.burn_tx = chain.create_transaction(picked, outs, buyer);
    r.td_burned = td_amount;
    r.minted = minted;
    ledger.log_burn("td", td_amount, buyer.public_key, now, "leecher_mint");
    ledger.mint_leecher(buyer.public_key, minted, now, "td_burn");
    return r;
}

void mint_block_reward(TokenLedger& ledger, const PubKey& validator, std::uint64_t reward,
                       Tick tick) {
    ledger.log_mint("td", reward, validator, tick, "block_reward");
}

} // namespace tdsim
