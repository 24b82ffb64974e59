// Copyright 2026 the tdsim authors
// SPDX-License-Identifier: Apache-2.0
#include "hosting_market.hpp"

#include <algorithm>

namespace tdsim {

namespace {
// Keystream block i = digest(owner_secret || seeder_pub || nonce || i).
void apply_keystream(const Digest& owner_secret, const PubKey& seeder_pub, const Digest& nonce,
                     std::vector<std::uint8_t>& data) {
    for (std::size_t off = 0; off < data.size(); off += 32) {
        serial::Writer w;
        w.digest(owner_secret);
        w.digest(seeder_pub);
        w.digest(nonce);
        w.u64(off / 32);
        Digest block = sha256(as_bytes(w.data()));
        for (std::size_t i = 0; i < 32 && off + i < data.size(); ++i)
            data[off + i] ^= block[i];
    }
}
} // namespace

Payload build_payload(const KeyPair& owner, std::span<const std::uint8_t> chunk_data,
                      const PubKey& seeder_pub, const Digest& nonce) {
    std::vector<std::uint8_t> plain(chunk_data.begin(), chunk_data.end());
    plain.insert(plain.end(), seeder_pub.begin(), seeder_pub.end());
    plain.insert(plain.end(), nonce.begin(), nonce.end());
    apply_keystream(owner.secret_key, seeder_pub, nonce, plain);
    return {std::move(plain), seeder_pub, nonce};
}

std::vector<std::uint8_t> decrypt_payload(const Digest& owner_secret, const Payload& p) {
    if (p.ciphertext.size() < 64) fail(Err::EmptyPayload, "payload too short");
    std::vector<std::uint8_t> plain = p.ciphertext;
    apply_keystream(owner_secret, p.seeder_pubkey, p.nonce, plain);
    // Trailer is seeder_pub || nonce; a wrong secret yields garbage here.
    std::size_t n = plain.size();
    if (!std::equal(p.seeder_pubkey.begin(), p.seeder_pubkey.end(), plain.begin() + n - 64) ||
        !std::equal(p.nonce.begin(), p.nonce.end(), plain.begin() + n - 32))
        fail(Err::NotOwner, "payload does not decrypt under this key");
    plain.resize(n - 64);
    return plain;
}

HostingRequest Market::submit_hosting_request(const KeyPair& owner, TokenLedger& ledger,
                                              const std::vector<ChunkId>& chunks, Tick tick) {
    (void)tick;
    if (chunks.empty()) fail(Err::EmptyRequest, "hosting request with no chunks");
    std::uint64_t tokens = chunks.size(); // one token per MB, one MB per chunk
    if (ledger.leecher_balance(owner.public_key) < tokens)
        fail(Err::InsufficientLeecherTokens,
             "request needs " + std::to_string(tokens) + " leecher tokens");
    ledger.debit_leecher(owner.public_key, tokens);
    owner_escrow_[owner.public_key] += tokens;
    consumed_tokens_ += tokens;
    for (ChunkId c : chunks) queue_.push_back({c, owner.public_key});
    return {owner.public_key, chunks, tokens, tokens};
}

SeederCapacity Market::register_capacity(const KeyPair& seeder, TokenLedger& ledger,
                                         std::uint64_t tokens, Tick tick) {
    (void)tick;
    if (tokens == 0) fail(Err::InsufficientLeecherTokens, "zero tokens committed");
    if (ledger.leecher_balance(seeder.public_key) < tokens)
        fail(Err::InsufficientLeecherTokens, "seeder balance below commitment");
    ledger.debit_leecher(seeder.public_key, tokens);
    consumed_tokens_ += tokens;
    auto& cap = seeders_[seeder.public_key];
    cap.seeder = seeder.public_key;
    cap.tokens_committed += tokens;
    cap.capacity_credits += tokens * replication_;
    return cap;
}

std::vector<ChunkId> Market::match() {
    std::vector<ChunkId> matched;
    std::deque<QueueSlot> keep;
    while (!queue_.empty()) {
        QueueSlot slot = queue_.front();
        queue_.pop_front();

        auto ait = assignments_.find(slot.chunk);
        std::vector<PubKey> current =
            ait == assignments_.end() ? std::vector<PubKey>{} : ait->second.seeders;
        std::uint64_t needed = replication_ - current.size();

        // Candidates: free capacity, not already hosting this chunk, never
        // dropped from it.
        std::vector<const SeederCapacity*> cands;
        for (const auto& [pub, cap] : seeders_) {
            if (cap.free_credits() == 0) continue;
            if (std::find(current.begin(), current.end(), pub) != current.end()) continue;
            if (ait != assignments_.end() && ait->second.dropped.count(pub)) continue;
            cands.push_back(&cap);
        }
        std::sort(cands.begin(), cands.end(), [](const SeederCapacity* a, const SeederCapacity* b) {
            if (a->free_credits() != b->free_credits()) return a->free_credits() > b->free_credits();
            return a->seeder < b->seeder;
        });
        if (cands.size() < needed) {
            keep.push_back(slot);
            continue;
        }

        auto& asg = assignments_[slot.chunk];
        asg.chunk_id = slot.chunk;
        asg.owner = slot.owner;
        for (std::uint64_t i = 0; i < needed; ++i) {
            seeders_[cands[i]->seeder].assigned_credits += 1;
            asg.seeders.push_back(cands[i]->seeder);
        }
        std::sort(asg.seeders.begin(), asg.seeders.end());
        asg.degraded = false;
        matched.push_back(slot.chunk);
    }
    queue_ = std::move(keep);
    return matched;
}

void Market::record_commitment(ChunkId chunk, const PubKey& seeder, const Digest& merkle_root) {
    auto it = assignments_.find(chunk);
    if (it == assignments_.end()) fail(Err::UnknownNode, "no assignment for chunk");
    it->second.payload_commitments[seeder] = merkle_root;
}

TrackerRecord Market::publish_tracker(ChunkId chunk) {
    auto it = assignments_.find(chunk);
    if (it == assignments_.end()) fail(Err::MissingCommitments, "no assignment for chunk");
    auto& asg = it->second;
    if (asg.seeders.size() < replication_)
        fail(Err::MissingCommitments, "assignment not fully seeded");
    TrackerRecord rec;
    rec.chunk_id = chunk;
    rec.owner = asg.owner;
    for (const auto& s : asg.seeders) {
        auto cit = asg.payload_commitments.find(s);
        if (cit == asg.payload_commitments.end())
            fail(Err::MissingCommitments, "commitment missing for a seeder");
        rec.seeder_commitments.emplace_back(s, cit->second);
    }
    asg.tracker_published = true;
    return rec;
}

void Market::handle_dropout(ChunkId chunk, const PubKey& seeder, TokenLedger& ledger, Tick now) {
    auto it = assignments_.find(chunk);
    if (it == assignments_.end()) return;
    auto& asg = it->second;
    auto sit = std::find(asg.seeders.begin(), asg.seeders.end(), seeder);
    if (sit == asg.seeders.end()) return;
    asg.seeders.erase(sit);
    asg.payload_commitments.erase(seeder);
    asg.dropped.insert(seeder);
    asg.degraded = true;

    auto& cap = seeders_.at(seeder);
    if (cap.assigned_credits > 0) cap.assigned_credits -= 1;
    cap.forfeited_credits += 1;
    ledger.log_burn("leecher_credit", 1, seeder, now, "dropout_forfeit");

    queue_.push_back({chunk, asg.owner});
}

void Market::settle_owner_escrow(const PubKey& owner, TokenLedger& ledger, bool refund,
                                 Tick now) {
    auto it = owner_escrow_.find(owner);
    if (it == owner_escrow_.end() || it->second == 0) return;
    std::uint64_t tokens = it->second;
    it->second = 0;
    if (refund)
        ledger.credit_leecher_from_escrow(owner, tokens);
    else
        ledger.log_burn("leecher", tokens, owner, now, "hosting_term");
}

ExchangeState Market::exchange_state() const {
    return {pending_demand_mb(), available_capacity_mb(), base_rate_};
}

std::uint64_t Market::pending_demand_mb() const { return queue_.size(); }

std::uint64_t Market::available_capacity_mb() const {
    std::uint64_t credits = 0;
    for (const auto& [pub, cap] : seeders_) credits += cap.free_credits();
    return credits / replication_;
}

const HostingAssignment* Market::assignment(ChunkId chunk) const {
    auto it = assignments_.find(chunk);
    return it == assignments_.end() ? nullptr : &it->second;
}

std::uint64_t Market::owner_escrow(const PubKey& owner) const {
    auto it = owner_escrow_.find(owner);
    return it == owner_escrow_.end() ? 0 : it->second;
}

std::uint64_t Market::owner_escrow_total() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : owner_escrow_) t += v;
    return t;
}

std::uint64_t Market::seeder_escrow_credits() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : seeders_) t += v.assigned_credits + v.free_credits();
    return t;
}

std::uint64_t Market::forfeited_credits_total() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : seeders_) t += v.forfeited_credits;
    return t;
}

std::uint64_t Market::degraded_count() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : assignments_) t += v.degraded ? 1 : 0;
    return t;
}

} // namespace tdsim
