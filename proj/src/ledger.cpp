// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "ledger.hpp"

#include <algorithm>

namespace tdsim {

const char* violation_name(Violation v) {
    switch (v) {
        case Violation::Ok: return "Ok";
        case Violation::DoubleSpend: return "DoubleSpend";
        case Violation::BadSignature: return "BadSignature";
        case Violation::ValueImbalance: return "ValueImbalance";
        case Violation::UnknownUtxo: return "UnknownUtxo";
    }
    return "?";
}

const char* err_name(Err e) {
    switch (e) {
        case Err::UnknownUtxo: return "UnknownUtxo";
        case Err::InsufficientFunds: return "InsufficientFunds";
        case Err::NotOwner: return "NotOwner";
        case Err::BadCoinbase: return "BadCoinbase";
        case Err::UnknownParent: return "UnknownParent";
        case Err::InvalidTx: return "InvalidTx";
        case Err::ZeroMint: return "ZeroMint";
        case Err::InsufficientTokens: return "InsufficientTokens";
        case Err::InsufficientLeecherTokens: return "InsufficientLeecherTokens";
        case Err::NothingToStake: return "NothingToStake";
        case Err::AlreadyStaked: return "AlreadyStaked";
        case Err::EmptyPool: return "EmptyPool";
        case Err::InvalidBlock: return "InvalidBlock";
        case Err::EmptyRequest: return "EmptyRequest";
        case Err::MissingCommitments: return "MissingCommitments";
        case Err::EmptyPayload: return "EmptyPayload";
        case Err::DuplicateCheckpoint: return "DuplicateCheckpoint";
        case Err::UnknownNode: return "UnknownNode";
        case Err::ConfigInvalid: return "ConfigInvalid";
        case Err::Io: return "Io";
    }
    return "?";
}

void Transaction::encode(serial::Writer& w) const {
    w.u32(static_cast<std::uint32_t>(inputs.size()));
    for (const auto& in : inputs) {
        w.digest(in.prev_tx);
        w.u32(in.output_index);
        w.digest(in.sig);
    }
    w.u32(static_cast<std::uint32_t>(outputs.size()));
    for (const auto& out : outputs) {
        w.u64(out.amount);
        w.digest(out.recipient);
    }
    w.u64(nonce);
}

TxId Transaction::compute_id() const {
    serial::Writer w;
    encode(w);
    return sha256(as_bytes(w.data()));
}

std::vector<std::uint8_t> Transaction::signing_message(const TxId& prev_tx,
                                                       const std::vector<TxOutput>& outputs) {
    serial::Writer w;
    w.digest(prev_tx);
    w.u32(static_cast<std::uint32_t>(outputs.size()));
    for (const auto& out : outputs) {
        w.u64(out.amount);
        w.digest(out.recipient);
    }
    return w.take();
}

void Block::encode(serial::Writer& w) const {
    w.u64(height);
    w.digest(prev_hash);
    w.u64(timestamp);
    w.digest(validator);
    w.u32(static_cast<std::uint32_t>(transactions.size()));
    for (const auto& tx : transactions) tx.encode(w);
    w.u32(static_cast<std::uint32_t>(trackers.size()));
    for (const auto& t : trackers) t.encode(w);
    w.u32(static_cast<std::uint32_t>(checkpoints.size()));
    for (const auto& c : checkpoints) c.encode(w);
}

BlockHash Block::compute_hash() const {
    serial::Writer w;
    encode(w);
    return sha256(as_bytes(w.data()));
}

std::vector<std::uint8_t> Block::canonical_bytes() const {
    serial::Writer w;
    encode(w);
    w.digest(hash);
    return w.take();
}

std::vector<std::uint8_t> SignedHeader::signing_message(std::uint64_t height, const BlockHash& h) {
    serial::Writer w;
    w.u64(height);
    w.digest(h);
    return w.take();
}

ChainState::ChainState(SchemePtr scheme, std::uint64_t block_reward, std::uint32_t max_txs,
                       const std::vector<std::pair<PubKey, std::uint64_t>>& genesis_allocations)
    : scheme_(std::move(scheme)), block_reward_(block_reward), max_txs_(max_txs) {
    Transaction alloc;
    for (const auto& [pub, amount] : genesis_allocations) {
        alloc.outputs.push_back({amount, pub});
        genesis_alloc_ += amount;
    }
    alloc.id = alloc.compute_id();

    Block genesis;
    genesis.height = 0;
    genesis.prev_hash = kZeroDigest;
    genesis.validator = kZeroDigest;
    genesis.transactions.push_back(alloc);
    genesis.hash = genesis.compute_hash();

    for (std::uint32_t i = 0; i < alloc.outputs.size(); ++i)
        view_.utxo[{alloc.id, i}] = alloc.outputs[i];
    tx_index_[alloc.id] = alloc;
    blocks_[genesis.hash] = genesis;
    genesis_hash_ = tip_ = genesis.hash;
}

Transaction ChainState::create_transaction(const std::vector<CoinLocator>& utxos,
                                           const std::vector<TxOutput>& new_outputs,
                                           const KeyPair& signer) const {
    std::uint64_t in_total = 0;
    for (const auto& loc : utxos) {
        auto it = view_.utxo.find(loc);
        if (it == view_.utxo.end())
            fail(Err::UnknownUtxo, "unknown utxo " + to_hex(loc.tx));
        if (it->second.recipient != signer.public_key)
            fail(Err::NotOwner, "utxo not owned by signer");
        in_total += it->second.amount;
    }
    std::uint64_t out_total = 0;
    for (const auto& out : new_outputs) out_total += out.amount;
    if (in_total < out_total)
        fail(Err::InsufficientFunds, "inputs cover " + std::to_string(in_total) +
                                         " of " + std::to_string(out_total));

    Transaction tx;
    tx.outputs = new_outputs;
    for (const auto& loc : utxos) {
        auto msg = Transaction::signing_message(loc.tx, new_outputs);
        tx.inputs.push_back({loc.tx, loc.index, scheme_->sign(signer.secret_key, msg)});
    }
    tx.id = tx.compute_id();
    return tx;
}

Violation ChainState::verify_against(const Transaction& tx, const BranchView& view) const {
    if (tx.id != tx.compute_id()) return Violation::BadSignature;
    std::uint64_t in_total = 0;
    std::set<CoinLocator> seen;
    for (const auto& in : tx.inputs) {
        CoinLocator loc{in.prev_tx, in.output_index};
        if (!seen.insert(loc).second) return Violation::DoubleSpend;
        auto it = view.utxo.find(loc);
        if (it == view.utxo.end())
            // Only the oldest spend of a coin is valid on a branch.
            return view.spent.count(loc) ? Violation::DoubleSpend : Violation::UnknownUtxo;
        auto msg = Transaction::signing_message(in.prev_tx, tx.outputs);
        if (!scheme_->verify(it->second.recipient, as_bytes(msg), in.sig))
            return Violation::BadSignature;
        in_total += it->second.amount;
    }
    std::uint64_t out_total = 0;
    for (const auto& out : tx.outputs) out_total += out.amount;
    if (out_total > in_total) return Violation::ValueImbalance;
    return Violation::Ok;
}

Violation ChainState::verify_transaction(const Transaction& tx) const {
    if (tx.is_coinbase()) return Violation::ValueImbalance; // coinbases only valid inside blocks
    return verify_against(tx, view_);
}

Transaction ChainState::make_coinbase(const PubKey& validator, std::uint64_t height) const {
    Transaction cb;
    cb.outputs.push_back({block_reward_, validator});
    cb.nonce = height;
    cb.id = cb.compute_id();
    return cb;
}

Block ChainState::build_block(const BlockHash& parent, Tick timestamp, const PubKey& validator,
                              std::vector<Transaction> txs, std::vector<TrackerRecord> trackers,
                              std::vector<ProofCheckpoint> checkpoints) const {
    auto it = blocks_.find(parent);
    if (it == blocks_.end()) fail(Err::UnknownParent, "unknown parent block");
    Block b;
    b.height = it->second.height + 1;
    b.prev_hash = parent;
    b.timestamp = timestamp;
    b.validator = validator;
    b.transactions.push_back(make_coinbase(validator, b.height));
    for (auto& tx : txs) b.transactions.push_back(std::move(tx));
    b.trackers = std::move(trackers);
    b.checkpoints = std::move(checkpoints);
    b.hash = b.compute_hash();
    return b;
}

std::optional<BlockViolation> ChainState::apply_to_view(BranchView& view,
                                                        const Block& block) const {
    if (block.transactions.empty() || !block.transactions[0].is_coinbase())
        return BlockViolation{Err::BadCoinbase, 0, Violation::Ok, "missing coinbase"};
    if (block.transactions.size() > max_txs_)
        return BlockViolation{Err::InvalidTx, 0, Violation::Ok, "block exceeds max_txs"};
    const auto& cb = block.transactions[0];
    std::uint64_t cb_total = 0;
    for (const auto& out : cb.outputs) cb_total += out.amount;
    if (cb_total != block_reward_ || cb.outputs.empty() ||
        cb.outputs[0].recipient != block.validator)
        return BlockViolation{Err::BadCoinbase, 0, Violation::Ok,
                              "coinbase must pay exactly the block reward to the validator"};

    for (std::size_t i = 1; i < block.transactions.size(); ++i) {
        const auto& tx = block.transactions[i];
        if (tx.is_coinbase())
            return BlockViolation{Err::InvalidTx, i, Violation::Ok, "extra coinbase"};
        Violation v = verify_against(tx, view);
        if (v != Violation::Ok)
            return BlockViolation{Err::InvalidTx, i, v, violation_name(v)};
        std::uint64_t in_total = 0;
        for (const auto& in : tx.inputs) {
            CoinLocator loc{in.prev_tx, in.output_index};
            in_total += view.utxo.at(loc).amount;
            view.utxo.erase(loc);
            view.spent.insert(loc);
        }
        std::uint64_t out_total = 0;
        for (std::uint32_t j = 0; j < tx.outputs.size(); ++j) {
            const auto& out = tx.outputs[j];
            out_total += out.amount;
            if (out.recipient == kBurnAddress)
                view.burned += out.amount; // provably unspendable, never enters the set
            else
                view.utxo[{tx.id, j}] = out;
        }
        view.fees += in_total - out_total;
    }
    for (std::uint32_t j = 0; j < cb.outputs.size(); ++j)
        view.utxo[{cb.id, j}] = cb.outputs[j];
    return std::nullopt;
}

ChainState::BranchView ChainState::replay_branch(const BlockHash& head) const {
    std::vector<const Block*> path;
    BlockHash h = head;
    while (h != genesis_hash_) {
        const Block& b = block_at(h);
        path.push_back(&b);
        h = b.prev_hash;
    }
    std::reverse(path.begin(), path.end());

    BranchView view;
    const auto& alloc = genesis().transactions[0];
    for (std::uint32_t i = 0; i < alloc.outputs.size(); ++i)
        view.utxo[{alloc.id, i}] = alloc.outputs[i];
    for (const Block* b : path) {
        auto v = apply_to_view(view, *b);
        if (v) fail(Err::InvalidBlock, "stored branch fails replay: " + v->message);
    }
    return view;
}

std::optional<BlockViolation> ChainState::apply_block(const Block& block) {
    auto pit = blocks_.find(block.prev_hash);
    if (pit == blocks_.end())
        return BlockViolation{Err::UnknownParent, 0, Violation::Ok, "unknown parent"};
    if (block.height != pit->second.height + 1)
        return BlockViolation{Err::UnknownParent, 0, Violation::Ok, "height does not follow parent"};
    if (block.hash != block.compute_hash())
        return BlockViolation{Err::InvalidTx, 0, Violation::BadSignature, "block hash mismatch"};
    if (blocks_.count(block.hash))
        return BlockViolation{Err::InvalidTx, 0, Violation::Ok, "duplicate block"};

    BranchView view = (block.prev_hash == tip_) ? view_ : replay_branch(block.prev_hash);
    auto violation = apply_to_view(view, block);
    if (violation) return violation;

    blocks_[block.hash] = block;
    for (const auto& tx : block.transactions) tx_index_[tx.id] = tx;

    BlockHash best = select_tip();
    if (best == block.hash) {
        view_ = std::move(view);
        tip_ = best;
    } else if (best != tip_) {
        view_ = replay_branch(best);
        tip_ = best;
    }
    return std::nullopt;
}

BlockHash ChainState::select_tip() const {
    // Longest branch wins; equal heights break toward the smaller hash.
    const Block* best = nullptr;
    for (const auto& [h, b] : blocks_) {
        if (!best || b.height > best->height ||
            (b.height == best->height && b.hash < best->hash))
            best = &b;
    }
    return best->hash;
}

const Block& ChainState::block_at(const BlockHash& h) const {
    auto it = blocks_.find(h);
    if (it == blocks_.end()) fail(Err::UnknownParent, "no such block");
    return it->second;
}

std::vector<BlockHash> ChainState::tip_branch() const {
    std::vector<BlockHash> path;
    BlockHash h = tip_;
    while (true) {
        path.push_back(h);
        if (h == genesis_hash_) break;
        h = block_at(h).prev_hash;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::uint64_t ChainState::utxo_sum() const {
    std::uint64_t total = 0;
    for (const auto& [loc, out] : view_.utxo) total += out.amount;
    return total;
}

std::uint64_t ChainState::balance_of(const PubKey& owner) const {
    std::uint64_t total = 0;
    for (const auto& [loc, out] : view_.utxo)
        if (out.recipient == owner) total += out.amount;
    return total;
}

std::vector<CoinLocator> ChainState::coins_of(const PubKey& owner) const {
    std::vector<CoinLocator> coins;
    for (const auto& [loc, out] : view_.utxo)
        if (out.recipient == owner) coins.push_back(loc);
    return coins;
}

const Transaction* ChainState::find_transaction(const TxId& id) const {
    auto it = tx_index_.find(id);
    return it == tx_index_.end() ? nullptr : &it->second;
}

Digest ChainState::state_digest() const {
    Hasher h;
    h.update(tip_);
    for (const auto& [loc, out] : view_.utxo) {
        serial::Writer w;
        w.digest(loc.tx);
        w.u32(loc.index);
        w.u64(out.amount);
        w.digest(out.recipient);
        h.update(as_bytes(w.data()));
    }
    serial::Writer tail;
    tail.u64(view_.burned);
    tail.u64(view_.fees);
    h.update(as_bytes(tail.data()));
    return h.finalize();
}

} // namespace tdsim
