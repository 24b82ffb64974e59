// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_TOKEN_ECONOMY_HPP
#define TDSIM_TOKEN_ECONOMY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "keys.hpp"
#include "ledger.hpp"

namespace tdsim {

// Leecher and Seed Bonus tokens are account-bound: they can be minted to or
// burned from one account, never moved between two. No operation here takes
// two account parameters.
inline constexpr std::uint64_t kBurnAll = ~std::uint64_t(0);

struct TokenEvent {
    Tick tick = 0;
    std::string kind;   // "td", "leecher", "seed_bonus", "leecher_credit"
    std::uint64_t amount = 0;
    std::string reason;
    PubKey account{};
};

class TokenLedger {
public:
    // -- leecher ------------------------------------------------------------
    void mint_leecher(const PubKey& account, std::uint64_t tokens, Tick tick,
                      const std::string& reason);
    // Escrow move into the market contract; not a burn, not a transfer.
    void debit_leecher(const PubKey& account, std::uint64_t tokens);
    // Escrow refund back to the same account (refund policy only).
    void credit_leecher_from_escrow(const PubKey& account, std::uint64_t tokens);
    std::uint64_t leecher_balance(const PubKey& account) const;

    // -- seed bonus ---------------------------------------------------------
    void award_seed_bonus(const PubKey& host, std::uint64_t amount, Tick tick,
                          const std::string& reason);
    // amount == kBurnAll burns the whole balance. Burned tokens are gone for
    // good; there is no operation that re-credits them.
    std::uint64_t burn_seed_bonus(const PubKey& account, std::uint64_t amount,
                                  const std::string& reason, Tick tick);
    std::uint64_t seed_bonus_balance(const PubKey& account) const;
    // Stake lock moves between wallet and pool; neither is a mint or a burn.
    void debit_seed_bonus_for_stake(const PubKey& account, std::uint64_t amount);
    void credit_seed_bonus_from_stake(const PubKey& account, std::uint64_t amount);
    const std::map<PubKey, std::uint64_t>& seed_bonus_balances() const { return seed_bonus_; }
    const std::map<PubKey, std::uint64_t>& leecher_balances() const { return leecher_; }

    // -- audit trail --------------------------------------------------------
    // TD creation/destruction happens on chain; these log entries keep the
    // cross-token audit in one place.
    void log_mint(const std::string& kind, std::uint64_t amount, const PubKey& account,
                  Tick tick, const std::string& reason);
    void log_burn(const std::string& kind, std::uint64_t amount, const PubKey& account,
                  Tick tick, const std::string& reason);

    const std::vector<TokenEvent>& burn_log() const { return burn_log_; }
    const std::vector<TokenEvent>& mint_log() const { return mint_log_; }
    std::uint64_t minted(const std::string& kind) const;
    std::uint64_t burned(const std::string& kind) const;
    std::uint64_t total_leecher_balance() const;
    std::uint64_t total_seed_bonus_balance() const;

    std::string burn_log_csv() const;

private:
    std::map<PubKey, std::uint64_t> leecher_;
    std::map<PubKey, std::uint64_t> seed_bonus_;
    std::vector<TokenEvent> burn_log_;
    std::vector<TokenEvent> mint_log_;
    std::map<std::string, std::uint64_t> minted_;
    std::map<std::string, std::uint64_t> burned_;
};

// Supply/demand inputs to the algorithmic TD<->Leecher rate.
struct ExchangeState {
    std::uint64_t pending_demand_mb = 0;
    std::uint64_t available_capacity_mb = 0;
    double base_rate = 1.0; // TD per Leecher token
};

// rate = base * (1 + demand) / (1 + capacity), clamped to [base/10, base*10].
double exchange_rate(const ExchangeState& x);

// floor(td / rate) computed in exact integer arithmetic so audits reconcile.
std::uint64_t leecher_for_td(const ExchangeState& x, std::uint64_t td_amount);

struct BurnForLeecherResult {
    Transaction burn_tx;        // spends the buyer's coins into the burn address
    std::uint64_t td_burned = 0;
    std::uint64_t minted = 0;
};

// Burns td_amount of the buyer's TD (whole amount, floor mint; the remainder
// is destroyed with the rest) and credits the minted Leecher tokens. The
// returned transaction must be included in the next block to realize the
// on-chain destruction.
BurnForLeecherResult burn_td_for_leecher(const ChainState& chain, TokenLedger& ledger,
                                         const KeyPair& buyer, std::uint64_t td_amount,
                                         const ExchangeState& x, Tick now);

// Audit-trail entry for a coinbase; the coin itself is created by the block.
void mint_block_reward(TokenLedger& ledger, const PubKey& validator, std::uint64_t reward,
                       Tick tick);

} // namespace tdsim

#endif
