// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#ifndef TDSIM_LEDGER_HPP
#define TDSIM_LEDGER_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "chain_records.hpp"
#include "digest.hpp"
#include "errors.hpp"
#include "keys.hpp"
#include "serial.hpp"

namespace tdsim {

using TxId = Digest;
using BlockHash = Digest;

struct CoinLocator {
    TxId tx{};
    std::uint32_t index = 0;
    auto operator<=>(const CoinLocator&) const = default;
};

struct TxInput {
    TxId prev_tx{};
    std::uint32_t output_index = 0;
    Signature sig{};
};

struct TxOutput {
    std::uint64_t amount = 0;
    PubKey recipient{};
};

struct Transaction {
    std::vector<TxInput> inputs;
    std::vector<TxOutput> outputs;
    std::uint64_t nonce = 0; // distinguishes otherwise-identical coinbases
    TxId id{};

    bool is_coinbase() const { return inputs.empty(); }
    void encode(serial::Writer& w) const;
    TxId compute_id() const;
    // The message every input signature covers: hash of the previous
    // transaction plus the new output list.
    static std::vector<std::uint8_t> signing_message(const TxId& prev_tx,
                                                     const std::vector<TxOutput>& outputs);
};

struct Block {
    std::uint64_t height = 0;
    BlockHash prev_hash{};
    Tick timestamp = 0;
    PubKey validator{};
    std::vector<Transaction> transactions;
    std::vector<TrackerRecord> trackers;
    std::vector<ProofCheckpoint> checkpoints;
    BlockHash hash{};

    void encode(serial::Writer& w) const; // everything except `hash`
    BlockHash compute_hash() const;
    std::vector<std::uint8_t> canonical_bytes() const; // encoding + hash
};

enum class Violation { Ok, DoubleSpend, BadSignature, ValueImbalance, UnknownUtxo };
const char* violation_name(Violation v);

struct BlockViolation {
    Err kind;                // InvalidTx, BadCoinbase or UnknownParent
    std::size_t tx_index = 0;
    Violation tx_violation = Violation::Ok;
    std::string message;
};

// Header-over-signature record used by equivocation detection.
struct SignedHeader {
    std::uint64_t height = 0;
    BlockHash block_hash{};
    PubKey validator{};
    Signature sig{};

    static std::vector<std::uint8_t> signing_message(std::uint64_t height, const BlockHash& h);
};

// Hash-linked chain with fork support. The UTXO view always tracks the
// tip branch; side branches are replayed from genesis on demand.
class ChainState {
public:
    ChainState(SchemePtr scheme, std::uint64_t block_reward, std::uint32_t max_txs,
               const std::vector<std::pair<PubKey, std::uint64_t>>& genesis_allocations);

    const SignatureScheme& scheme() const { return *scheme_; }
    std::uint64_t block_reward() const { return block_reward_; }
    std::uint32_t max_txs() const { return max_txs_; }

    Transaction create_transaction(const std::vector<CoinLocator>& utxos,
                                   const std::vector<TxOutput>& new_outputs,
                                   const KeyPair& signer) const;
    Violation verify_transaction(const Transaction& tx) const;

    Transaction make_coinbase(const PubKey& validator, std::uint64_t height) const;
    Block build_block(const BlockHash& parent, Tick timestamp, const PubKey& validator,
                      std::vector<Transaction> txs, std::vector<TrackerRecord> trackers,
                      std::vector<ProofCheckpoint> checkpoints) const;

    // Validates and applies atomically; on violation the state is untouched.
    std::optional<BlockViolation> apply_block(const Block& block);

    BlockHash select_tip() const;
    const BlockHash& tip() const { return tip_; }
    std::uint64_t tip_height() const { return block_at(tip_).height; }
    const Block& block_at(const BlockHash& h) const;
    bool has_block(const BlockHash& h) const { return blocks_.count(h) != 0; }
    const Block& genesis() const { return block_at(genesis_hash_); }
    std::vector<BlockHash> tip_branch() const; // genesis..tip

    const std::map<CoinLocator, TxOutput>& utxo_set() const { return view_.utxo; }
    std::uint64_t utxo_sum() const;
    std::uint64_t balance_of(const PubKey& owner) const;
    std::vector<CoinLocator> coins_of(const PubKey& owner) const;
    std::uint64_t burned_td() const { return view_.burned; }
    std::uint64_t fees_destroyed() const { return view_.fees; }
    std::uint64_t genesis_allocation() const { return genesis_alloc_; }

    const Transaction* find_transaction(const TxId& id) const;

    // Digest of tip-branch state; equal digests mean equal ledgers.
    Digest state_digest() const;

private:
    struct BranchView {
        std::map<CoinLocator, TxOutput> utxo;
        std::set<CoinLocator> spent;
        std::uint64_t burned = 0;
        std::uint64_t fees = 0;
    };

    Violation verify_against(const Transaction& tx, const BranchView& view) const;
    std::optional<BlockViolation> apply_to_view(BranchView& view, const Block& block) const;
    BranchView replay_branch(const BlockHash& head) const;

    SchemePtr scheme_;
    std::uint64_t block_reward_;
    std::uint32_t max_txs_;
    std::uint64_t genesis_alloc_ = 0;
    std::map<BlockHash, Block> blocks_;
    std::map<TxId, Transaction> tx_index_;
    BlockHash genesis_hash_{};
    BlockHash tip_{};
    BranchView view_;
};

} // namespace tdsim

#endif
