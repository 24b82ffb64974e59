// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_CONSENSUS_HPP
#define TDSIM_CONSENSUS_HPP

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "keys.hpp"
#include "ledger.hpp"
#include "rng.hpp"
#include "token_economy.hpp"

namespace tdsim {

// Staking moves an account's entire Seed Bonus balance into the pool; there
// is no partial stake and no mid-round top-up.
struct StakePool {
    std::map<PubKey, std::uint64_t> entries;
    std::uint64_t round = 0;
    DetRng rng;
    std::set<PubKey> barred; // slashed accounts, excluded from selection

    explicit StakePool(DetRng generator) : rng(generator) {}
    std::uint64_t total_staked() const;
    std::uint64_t staked(const PubKey& a) const;
};

struct RoundOutcome {
    std::uint64_t round = 0;
    PubKey selected{};
    BlockHash block{};
    std::uint64_t burned = 0;
    std::uint64_t returned = 0;
    bool block_accepted = false;
    std::vector<PubKey> slashed;
};

void register_stake(StakePool& pool, TokenLedger& ledger, const PubKey& account, Tick tick);

// Weighted lottery: P(a) = staked(a) / total. Deterministic given rng state.
PubKey select_validator(StakePool& pool);

// Burn fraction as an exact rational (numerator/denominator), so
// ceil(gamma * stake) never suffers float rounding.
struct BurnFraction {
    std::uint64_t num = 1;
    std::uint64_t den = 10;
    static BurnFraction from_double(double gamma);
    std::uint64_t burn_amount(std::uint64_t stake) const; // ceil(gamma * stake)
};

// Applies the winner's block; on success burns ceil(gamma*stake) of the
// stake and returns the rest to the wallet. An invalid block voids the
// round: stake back intact, no reward, no burn.
RoundOutcome finalize_round(StakePool& pool, TokenLedger& ledger, ChainState& chain,
                            const PubKey& winner, BurnFraction gamma, const Block& block,
                            Tick tick);

// Validators that signed two or more distinct headers at one height.
std::vector<PubKey> detect_equivocation(const std::vector<SignedHeader>& sigs,
                                        const SignatureScheme& scheme);

// Burns the offender's staked and liquid seed bonus to zero and bars them
// from selection. Idempotent.
void slash(StakePool& pool, TokenLedger& ledger, const PubKey& offender, Tick tick);

} // namespace tdsim

#endif
